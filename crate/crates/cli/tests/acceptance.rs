//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Statistical criteria use z = 4 bands at the stated replicate counts;
//! structural criteria are hard assertions over exhaustive or seeded
//! sweeps. Run with `cargo test -p apportion-cli --test acceptance`
//! (add `-- --nocapture` to see the per-criterion lines).

use apportion::apps::{run_sortition, SortitionConfig, WeightSchedule};
use apportion::cumulative_rounding::{audit_outcome, cumulative_round};
use apportion::dependent_rounding::{dependent_round, PipageState};
use apportion::methods::{
    divisor, hamilton, HuntingtonHill, PoissonMethod, SeatSequenceSampler,
};
use apportion::model::{
    check_house_monotone_step, check_quota, check_sequence_quota, detect_population_paradox,
    seat_sequence_prefix_allocation, Apportionment, PopulationProfile, SeatSequence,
};
use apportion::rational::rat;
use apportion::rng::{derive_rng, derive_seed, uniform_index};
use apportion::verify::stats::MethodKind;
use apportion::verify::{self, instances};
use rayon::prelude::*;
use std::process::Command;
use std::time::{Duration, Instant};

const MARGINAL_SAMPLES: u64 = 100_000;

fn pass(criterion: &str, detail: String) {
    println!("acceptance {criterion}: PASS ({detail})");
}

/// Every profile with 2..=max_states states and total population at most
/// max_total, in lexicographic order.
fn small_profiles(max_states: usize, max_total: u64) -> Vec<PopulationProfile> {
    fn rec(parts: &mut Vec<u64>, budget: u64, max_states: usize, out: &mut Vec<PopulationProfile>) {
        if parts.len() >= 2 {
            out.push(PopulationProfile::new(parts.clone()).expect("valid"));
        }
        if parts.len() == max_states || budget == 0 {
            return;
        }
        for next in 1..=budget {
            parts.push(next);
            rec(parts, budget - next, max_states, out);
            parts.pop();
        }
    }
    let mut out = Vec::new();
    let mut parts = Vec::new();
    for total in 2..=max_total {
        for first in 1..total {
            parts.push(first);
            rec(&mut parts, total - first, max_states, &mut out);
            parts.pop();
        }
    }
    out.sort_by(|a, b| a.populations().cmp(b.populations()));
    out.dedup();
    out
}

#[test]
fn c01_theorem1_machine_check_via_cli() {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_apportion"))
        .args(["verify", "--suite", "theorem1"])
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    assert!(
        output.status.success(),
        "exit: {:?}, stderr: {}",
        output.status,
        String::from_utf8_lossy(&output.stderr)
    );
    let value: serde_json::Value =
        serde_json::from_slice(&output.stdout).expect("JSON certificate");
    assert_eq!(value["pass"], serde_json::Value::Bool(true));
    let cert = &value["certificate"];
    assert_eq!(cert["quota_allocations"], 10);
    let cases = cert["cases"].as_array().expect("case table");
    assert_eq!(cases.len(), 10, "one case per quota allocation");
    for case in cases {
        assert_eq!(case["all_counter_allocations_paradox"], true);
        let branch = case["branch"].as_str().unwrap();
        assert!(branch == "grow-winner" || branch == "shrink-losers");
        assert!(!case["paradoxes"].as_array().unwrap().is_empty());
    }
    assert!(
        elapsed < Duration::from_secs(1),
        "theorem1 took {elapsed:?}, limit 1s"
    );
    pass("c01", format!("10 cases certified in {elapsed:?}"));
}

#[test]
fn c02_dependent_rounding_degree_preservation_and_marginals() {
    let start = Instant::now();

    // 1000 random single-round instances: degree preservation is a hard
    // per-run property, checked for several seeds each.
    let mut gen = derive_rng(20_202, "acceptance-c02", b"");
    let mut checked_runs = 0u64;
    for idx in 0..1000u64 {
        let inst = instances::random_instance(&mut gen, 5, 1, 12);
        for seed in 0..3u64 {
            let outcome =
                dependent_round(&inst, derive_seed(seed, "c02-run", &idx.to_le_bytes()))
                    .expect("valid instance");
            for v_idx in 0..inst.graph().node_count() {
                let v = inst.graph().node_ref(v_idx);
                let d = inst.fractional_degree(v, 1).unwrap();
                let realized = i128::from(outcome.degree(v, 1));
                let floor = apportion::rational::floor_int(&d);
                let ceil = apportion::rational::ceil_int(&d);
                assert!(
                    realized >= floor && realized <= ceil,
                    "instance {idx}: node {v_idx} degree {realized} vs {d}"
                );
            }
            checked_runs += 1;
        }
    }

    // Per-edge marginals at M = 100k on the fixed single-round instances.
    let mut marginal_edges = 0usize;
    for (name, inst) in instances::standard_instances() {
        if inst.rounds() != 1 {
            continue;
        }
        let report = verify::stats::stat_instance_marginals(&inst, MARGINAL_SAMPLES, 2)
            .expect("valid instance");
        assert!(report.pass, "{name}: {:?}", report.first_failure());
        marginal_edges += report.checks.len();
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(120),
        "criterion took {elapsed:?}, limit 2min"
    );
    pass(
        "c02",
        format!(
            "{checked_runs} rounding runs degree-preserving, {marginal_edges} marginal \
             checks at M={MARGINAL_SAMPLES} in {elapsed:?}"
        ),
    );
}

#[test]
fn c03_cumulative_rounding_prefix_preservation() {
    // 1000 random multi-round instances; the fractional-degree table is
    // verified inside every build, and the audit hard-checks per-t and
    // cumulative degree preservation (with exact equality on integral
    // prefixes) plus the auxiliary-bit interpretations.
    let mut gen = derive_rng(30_303, "acceptance-c03", b"");
    let mut integral_prefixes = 0u64;
    for idx in 0..1000u64 {
        let inst = instances::random_instance(&mut gen, 5, 8, 12);
        let seed = derive_seed(7, "c03-run", &idx.to_le_bytes());
        let outcome = cumulative_round(&inst, seed).expect("valid instance");
        let report = audit_outcome(&inst, &outcome).expect("valid instance");
        assert!(
            report.pass(),
            "instance {idx}: violations {:?}",
            report.violations
        );
        // Count and re-verify integral cumulative prefixes directly.
        for v_idx in 0..inst.graph().node_count() {
            let v = inst.graph().node_ref(v_idx);
            let mut cum = apportion::rational::from_int(0);
            for t in 1..=inst.rounds() {
                cum += inst.fractional_degree(v, t).unwrap();
                if cum.is_integer() {
                    integral_prefixes += 1;
                    assert_eq!(
                        i128::from(outcome.cumulative_degree(v, t)),
                        cum.to_integer(),
                        "instance {idx}: integral prefix must be hit exactly"
                    );
                }
            }
        }
    }
    assert!(integral_prefixes > 1000, "sweep must exercise integral prefixes");
    pass(
        "c03",
        format!("1000 audited runs, {integral_prefixes} integral prefixes exact"),
    );
}

#[test]
fn c04_house_monotone_method_exhaustive_small_profiles() {
    let start = Instant::now();
    let profiles = small_profiles(3, 8);
    assert_eq!(profiles.len(), 84);

    profiles.par_iter().for_each(|profile| {
        let total = profile.total();
        let sampler = SeatSequenceSampler::new(profile);
        let mut state = PipageState::new(sampler.pipage());

        // Hard sweep: quota up to 3P through the repetition lemma, and
        // house monotonicity between all consecutive house sizes.
        for seed in 0..200u64 {
            let entries = sampler.sample_with(&mut state, seed);
            let seq = SeatSequence::repeating(entries, profile.len()).expect("valid entries");
            assert!(
                check_sequence_quota(profile, &seq, 3 * total).expect("dims"),
                "quota to 3P failed: {:?} seed {seed}",
                profile.populations()
            );
            let mut prev: Option<Apportionment> = None;
            for h in 1..=3 * total {
                let a = seat_sequence_prefix_allocation(&seq, h).expect("repeating");
                if let Some(prev) = prev {
                    assert!(check_house_monotone_step(&prev, &a).expect("consecutive"));
                }
                prev = Some(a);
            }
        }

        // Position marginals at M = 100k against p_i / P.
        let report = verify::stats::stat_position_marginals(profile, MARGINAL_SAMPLES, 11);
        assert!(
            report.pass,
            "{:?}: {:?}",
            profile.populations(),
            report.first_failure()
        );
    });
    let elapsed = start.elapsed();
    pass(
        "c04",
        format!(
            "84 profiles, 200 hard-checked seeds each, position marginals at \
             M={MARGINAL_SAMPLES} in {elapsed:?}"
        ),
    );
}

#[test]
fn c05_poisson_method_population_monotone_and_proportional() {
    // 10,000 random coupled profile/house pairs share arrival streams
    // through a common master seed; no pair may exhibit a paradox.
    let mut gen = derive_rng(50_505, "acceptance-c05", b"");
    for pair in 0..10_000u64 {
        let n = 2 + uniform_index(&mut gen, 3) as usize;
        let mut base = Vec::with_capacity(n);
        let mut moved = Vec::with_capacity(n);
        for _ in 0..n {
            let p = 1 + uniform_index(&mut gen, 20);
            base.push(p);
            // Perturb up or down by up to 5, staying in 1..=20.
            let delta = uniform_index(&mut gen, 11) as i64 - 5;
            moved.push((p as i64 + delta).clamp(1, 20) as u64);
        }
        let h1 = 1 + uniform_index(&mut gen, 30);
        let h2 = 1 + uniform_index(&mut gen, 30);
        let before = PopulationProfile::new(base).unwrap();
        let after = PopulationProfile::new(moved).unwrap();
        let mut method = PoissonMethod::new(derive_seed(3, "c05-pair", &pair.to_le_bytes()));
        let a = method.apportion(&before, h1);
        let b = method.apportion(&after, h2);
        assert_eq!(
            detect_population_paradox((&before, &a), (&after, &b)).unwrap(),
            None,
            "pair {pair}: {:?}/{h1} vs {:?}/{h2}",
            before.populations(),
            after.populations()
        );
    }

    // Ex ante proportionality at M = 100k on three fixed profiles.
    for (pops, h) in [
        (vec![1u64, 2, 1, 2], 3u64),
        (vec![45, 25, 15, 15], 7),
        (vec![7, 3], 5),
    ] {
        let profile = PopulationProfile::new(pops).unwrap();
        let report = verify::stat_exante(MethodKind::Poisson, &profile, h, MARGINAL_SAMPLES, 13);
        assert!(
            report.pass,
            "{:?} h={h}: {:?}",
            profile.populations(),
            report.first_failure()
        );
    }
    pass(
        "c05",
        format!("10000 coupled pairs paradox-free, 3 profiles proportional at M={MARGINAL_SAMPLES}"),
    );
}

#[test]
fn c06_pitfalls_suite() {
    let ex1 = verify::verify_pitfall_example1().unwrap();
    assert!(ex1.pass, "{ex1:?}");
    assert!(ex1.toxic, "(1,0,1,0) must be toxic at h=2");

    let ex2 = verify::verify_pitfall_example2().unwrap();
    assert!(ex2.pass, "{ex2:?}");
    assert_eq!(ex2.max_expected_state1_at_4, "7/4");
    assert_eq!(ex2.quota_state1_at_4, "9/5");
    assert!(ex2.expectation_falls_short);
    assert!(ex2.forced_successor_ok);
    assert!(ex2.support.iter().all(|s| !s.toxic));
    assert!(ex2.flow.pass);
    pass(
        "c06",
        "toxic witness certified; max E = 7/4 < 9/5 exactly; flow network feasible".to_string(),
    );
}

#[test]
fn c07_bijection_counts_on_all_small_profiles() {
    let start = Instant::now();
    let profiles = small_profiles(3, 8);
    let mut sequences_total = 0u64;
    for profile in &profiles {
        let cert = verify::verify_bijection(profile).unwrap();
        assert!(
            cert.pass,
            "{:?}: sequences {} vs matchings {}",
            profile.populations(),
            cert.sequence_count,
            cert.matching_count
        );
        sequences_total += cert.sequence_count;
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(60),
        "bijection sweep took {elapsed:?}, limit 1min"
    );
    pass(
        "c07",
        format!(
            "{} profiles, {sequences_total} sequences matched in {elapsed:?}",
            profiles.len()
        ),
    );
}

#[test]
fn c08_sortition_window_bound() {
    // Uniform panel: normalized weight 15/27 = 5/9, window ceil(18/5) = 4.
    let uniform = SortitionConfig::uniform(27, 15, 30);
    (0..1000u64).into_par_iter().for_each(|seed| {
        let run = run_sortition(&uniform, derive_seed(8, "c08-uniform", &seed.to_le_bytes()))
            .expect("feasible");
        assert_eq!(run.audit.window, 4);
        assert!(run.audit.per_round_count_ok);
        assert!(
            run.audit.window_bound_holds,
            "seed {seed}: max gaps {:?}",
            run.audit.max_gap
        );
    });

    // Minimum normalized weight exactly 0.187: window ceil(2000/187) = 11.
    // One member holds weight 187 of a 15000 total; 26 others share the
    // rest evenly, giving k * w / sum = 187/1000 for the small member.
    let mut weights = vec![rat(187, 1)];
    weights.extend(std::iter::repeat_n(rat(14_813, 26), 26));
    let tight = SortitionConfig {
        member_names: (0..27).map(|i| format!("state{i}")).collect(),
        weights: WeightSchedule::Constant(weights),
        seats_per_round: 15,
        rounds: 30,
    };
    (0..1000u64).into_par_iter().for_each(|seed| {
        let run = run_sortition(&tight, derive_seed(8, "c08-tight", &seed.to_le_bytes()))
            .expect("feasible");
        assert_eq!(run.audit.min_weight, "187/1000");
        assert_eq!(run.audit.window, 11);
        assert!(
            run.audit.window_bound_holds,
            "seed {seed}: max gaps {:?}",
            run.audit.max_gap
        );
    });
    pass(
        "c08",
        "1000 uniform runs within window 4; 1000 runs at w_min=0.187 within window 11".to_string(),
    );
}

#[test]
fn c09_negative_correlation_and_exact_enumeration() {
    let mut enumerable = 0usize;
    for (name, inst) in instances::standard_instances() {
        let report = verify::stat_negcorr(&inst, MARGINAL_SAMPLES, 9).expect("valid instance");
        assert!(report.pass, "{name}: {:?}", report.first_failure());
        if let Some(cert) = verify::exact_checks(&inst).expect("valid instance") {
            assert!(cert.fractional_edges <= 12);
            assert!(cert.pass, "{name}: {cert:?}");
            enumerable += 1;
        }
    }
    assert!(
        enumerable >= 4,
        "expected several instances under the 12-fractional-edge cap"
    );
    pass(
        "c09",
        format!("one-sided 4-sigma bands held at M={MARGINAL_SAMPLES}; {enumerable} exact enumerations"),
    );
}

#[test]
fn c10_paradox_hunters() {
    let alabama = verify::find_alabama_paradox(10, 20).expect("witness in range");
    let p = PopulationProfile::new(alabama.populations.clone()).unwrap();
    let before = hamilton(&p, alabama.house);
    let after = hamilton(&p, alabama.house + 1);
    assert_eq!(before.seats(), alabama.before.as_slice());
    assert_eq!(after.seats(), alabama.after.as_slice());
    assert!(!check_house_monotone_step(&before, &after).unwrap());

    let violation = verify::find_divisor_quota_violation(10, 20).expect("witness in range");
    let p = PopulationProfile::new(violation.populations.clone()).unwrap();
    let a = divisor(&p, violation.house, &HuntingtonHill).unwrap();
    assert_eq!(a.seats(), violation.seats.as_slice());
    assert!(!check_quota(&p, &a).unwrap());

    pass(
        "c10",
        format!(
            "Alabama witness {:?} at h={}->{}; quota violation {:?} at h={}",
            alabama.populations,
            alabama.house,
            alabama.house + 1,
            violation.populations,
            violation.house
        ),
    );
}
