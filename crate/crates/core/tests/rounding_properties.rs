//! Cross-module properties of the rounding stack on randomized inputs:
//! per-run hard guarantees of cumulative rounding, quota compliance of
//! the randomized methods, and consistency between the samplers and the
//! toxicity search.

use apportion::cumulative_rounding::{audit_outcome, cumulative_round, CumulativeRounder};
use apportion::methods::{grimmett, sample_finite_seat_sequence, HouseMonotoneMethod};
use apportion::model::{check_quota, check_sequence_quota, PopulationProfile};
use apportion::rng::{derive_rng, derive_seed, uniform_index};
use apportion::verify::instances::random_instance;
use apportion::verify::is_toxic;

#[test]
fn cumulative_rounding_audits_clean_on_random_instances() {
    let mut gen = derive_rng(1, "integration-cumulative", b"");
    for idx in 0..150u64 {
        let inst = random_instance(&mut gen, 4, 6, 12);
        let outcome = cumulative_round(&inst, idx).expect("valid instance");
        let report = audit_outcome(&inst, &outcome).expect("valid instance");
        assert!(report.pass(), "instance {idx}: {:?}", report.violations);
    }
}

#[test]
fn corrupting_any_bit_is_caught_by_the_audit() {
    let mut gen = derive_rng(2, "integration-corrupt", b"");
    for idx in 0..25u64 {
        let inst = random_instance(&mut gen, 3, 4, 8);
        let outcome = cumulative_round(&inst, idx).expect("valid instance");
        let e = uniform_index(&mut gen, inst.graph().edge_count() as u64) as usize;
        let t = 1 + uniform_index(&mut gen, inst.rounds() as u64) as usize;
        let mut corrupted = outcome.clone();
        corrupted.corrupt(e, t);
        let report = audit_outcome(&inst, &corrupted).expect("valid instance");
        assert!(
            !report.pass(),
            "instance {idx}: flipped bit ({e}, {t}) went unnoticed"
        );
    }
}

#[test]
fn early_stopped_prefix_agrees_with_full_runs_across_instances() {
    let mut gen = derive_rng(3, "integration-prefix", b"");
    for idx in 0..40u64 {
        let inst = random_instance(&mut gen, 3, 5, 10);
        if inst.rounds() < 2 {
            continue;
        }
        let prefix = 1 + uniform_index(&mut gen, inst.rounds() as u64 - 1) as usize;
        let seed = derive_seed(3, "prefix-run", &idx.to_le_bytes());
        let full = cumulative_round(&inst, seed).expect("valid instance");
        let mut rounder = CumulativeRounder::new(&inst, seed).expect("valid instance");
        rounder.run_until_prefix_integral(prefix);
        let bits = rounder.prefix_bits(prefix).expect("prefix integral");
        for e in 0..inst.graph().edge_count() {
            for t in 1..=prefix {
                assert_eq!(bits[e][t - 1], full.bit(e, t), "instance {idx} edge {e} t {t}");
            }
        }
        assert_eq!(rounder.finish().expect("resumable"), full);
    }
}

#[test]
fn grimmett_satisfies_quota_on_random_profiles() {
    let mut gen = derive_rng(4, "integration-grimmett", b"");
    for seed in 0..400u64 {
        let n = 2 + uniform_index(&mut gen, 5) as usize;
        let pops: Vec<u64> = (0..n).map(|_| 1 + uniform_index(&mut gen, 500)).collect();
        let h = 1 + uniform_index(&mut gen, 40);
        let profile = PopulationProfile::new(pops).unwrap();
        let a = grimmett(&profile, h, seed);
        assert_eq!(a.house(), h);
        assert!(check_quota(&profile, &a).unwrap(), "seed {seed}");
    }
}

#[test]
fn house_monotone_sequences_never_hit_toxic_allocations() {
    // Everything the sampler produces must stay reachable-and-extendable;
    // cross-check against the exhaustive toxicity search: 10,000 seeded
    // runs across small profiles, testing each distinct (h, allocation)
    // once.
    use apportion::dependent_rounding::PipageState;
    use apportion::methods::SeatSequenceSampler;
    use apportion::model::Apportionment;
    use std::collections::HashSet;

    let profiles = [vec![1u64, 2, 1, 2], vec![1, 3], vec![2, 2, 1], vec![4, 3]];
    for pops in profiles {
        let profile = PopulationProfile::new(pops).unwrap();
        let sampler = SeatSequenceSampler::new(&profile);
        let mut state = PipageState::new(sampler.pipage());
        let mut seen: HashSet<(u64, Vec<u32>)> = HashSet::new();
        for seed in 0..2500u64 {
            let entries = sampler.sample_with(&mut state, seed);
            let mut counts = vec![0u32; profile.len()];
            for (t0, &s) in entries.iter().enumerate() {
                counts[s as usize] += 1;
                seen.insert((t0 as u64 + 1, counts.clone()));
            }
        }
        for (h, counts) in seen {
            let a = Apportionment::new(counts);
            assert!(
                !is_toxic(&profile, h, &a).unwrap(),
                "{:?} h {h}: toxic {:?}",
                profile.populations(),
                a.seats()
            );
        }
    }
}

#[test]
fn sampled_sequences_lie_in_the_enumerated_quota_set() {
    // Brute-force oracle: DFS enumeration of all quota sequences for
    // p = (1, 3); every sampled sequence must be one of them.
    let profile = PopulationProfile::new(vec![1, 3]).unwrap();
    let all: std::collections::HashSet<Vec<u32>> =
        apportion::verify::enumerate_quota_sequences(&profile)
            .into_iter()
            .collect();
    assert!(!all.is_empty());
    for seed in 0..200u64 {
        let seq = sample_finite_seat_sequence(&profile, seed);
        assert!(
            all.contains(seq.base()),
            "seed {seed}: {:?} not a quota sequence",
            seq.base()
        );
    }
}

#[test]
fn sampled_sequences_repeat_consistently() {
    let profile = PopulationProfile::new(vec![2, 3, 1]).unwrap();
    for seed in 0..25u64 {
        let seq = sample_finite_seat_sequence(&profile, seed);
        assert_eq!(seq.base_len() as u64, profile.total());
        assert!(check_sequence_quota(&profile, &seq, 3 * profile.total()).unwrap());
    }
}
