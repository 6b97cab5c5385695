//! The house-monotone, quota-compliant randomized method.
//!
//! For a profile with total population `P`, cumulative rounding of a
//! `P`-round star (hub on one side, one node per state on the other, edge
//! weights `p_i / P` in every round) yields exactly one rounded-up spoke
//! per round; reading off those states gives a finite seat sequence of
//! length `P` that satisfies quota at every prefix. Repeating the sequence
//! forever extends the guarantee to all house sizes, and the position-wise
//! marginals are `p_i / P`.

use super::MethodError;
use crate::bipartite::{star_instance, WeightedBipartiteInstance};
use crate::cumulative_rounding::{build_layered_graph, LayeredGraph};
use crate::dependent_rounding::{PipageGraph, PipageState};
use crate::model::{
    check_sequence_quota, seat_sequence_prefix_allocation, Apportionment, PopulationProfile,
    SeatSequence,
};
use crate::rational::rat;
use crate::rng::{derive_rng, derive_seed, profile_context};
use rand_chacha::ChaCha12Rng;
use std::collections::HashMap;

/// Seeded method object; the sampled seat sequence is cached per profile
/// so queries at different house sizes stay mutually consistent (which is
/// what makes the realized solution house monotone).
#[derive(Debug, Clone)]
pub struct HouseMonotoneMethod {
    seed: u64,
    h_max: Option<u64>,
    cache: HashMap<Vec<u64>, SeatSequence>,
}

impl HouseMonotoneMethod {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            h_max: None,
            cache: HashMap::new(),
        }
    }

    /// Cap the supported house sizes at `h_max`, rounding only that many
    /// star copies. Cheaper when `h_max < P`, but queries beyond the cap
    /// are errors because quota is then only guaranteed up to it. A cap of
    /// `P` or more changes nothing: repetition already covers every house
    /// size.
    pub fn with_h_max(seed: u64, h_max: u64) -> Self {
        Self {
            seed,
            h_max: Some(h_max),
            cache: HashMap::new(),
        }
    }

    fn rounds_for(&self, profile: &PopulationProfile) -> usize {
        let p = profile.total();
        match self.h_max {
            Some(m) if m < p => m as usize,
            _ => p as usize,
        }
    }

    /// The sampled seat sequence for this profile: finite of length `P`
    /// (repeating thereafter), or a finite prefix of length `h_max` when
    /// capped below `P`.
    pub fn seat_sequence(&mut self, profile: &PopulationProfile) -> &SeatSequence {
        let key = profile.populations().to_vec();
        if !self.cache.contains_key(&key) {
            let seq = sample_sequence(profile, self.seed, self.rounds_for(profile));
            self.cache.insert(key.clone(), seq);
        }
        &self.cache[&key]
    }

    pub fn apportion(
        &mut self,
        profile: &PopulationProfile,
        h: u64,
    ) -> Result<Apportionment, MethodError> {
        if h == 0 {
            return Err(MethodError::ZeroHouse);
        }
        if let Some(h_max) = self.h_max {
            if h > h_max && h_max < profile.total() {
                return Err(MethodError::HouseExceedsLimit { h, h_max });
            }
        }
        let seq = self.seat_sequence(profile);
        Ok(seat_sequence_prefix_allocation(seq, h)?)
    }
}

/// The star rounding graph for one profile, built once and sampled many
/// times. Sampling with a reusable [`PipageState`] avoids rebuilding the
/// layered construction per seed, which dominates one-shot runs.
pub struct SeatSequenceSampler {
    profile: PopulationProfile,
    layered: LayeredGraph,
    rounds: usize,
}

impl SeatSequenceSampler {
    pub fn new(profile: &PopulationProfile) -> Self {
        Self::with_rounds(profile, profile.total() as usize)
    }

    pub fn with_rounds(profile: &PopulationProfile, rounds: usize) -> Self {
        let instance = star_rounding_instance(profile, rounds);
        let layered = build_layered_graph(&instance).expect("star instance builds");
        Self {
            profile: profile.clone(),
            layered,
            rounds,
        }
    }

    pub fn pipage(&self) -> &PipageGraph {
        self.layered.pipage()
    }

    /// One seeded sample using the caller's reusable state (which must
    /// have been created from [`Self::pipage`]). The decoded sequence is
    /// quota-checked before being returned.
    pub fn sample_with(&self, state: &mut PipageState<'_>, master_seed: u64) -> Vec<u32> {
        let mut rng = self.rng_for(master_seed);
        state.reset();
        state.run_to_integral(&mut rng);
        let entries = self.decode(state);
        self.assert_prefix_quota(&entries);
        entries
    }

    fn assert_prefix_quota(&self, entries: &[u32]) {
        let total = i128::from(self.profile.total());
        let mut counts = vec![0i128; self.profile.len()];
        for (t0, &state) in entries.iter().enumerate() {
            counts[state as usize] += 1;
            let h = t0 as i128 + 1;
            for (i, &c) in counts.iter().enumerate() {
                let num = h * i128::from(self.profile.population(i));
                let floor = num.div_euclid(total);
                let ceil = if num % total == 0 { floor } else { floor + 1 };
                assert!(
                    c >= floor && c <= ceil,
                    "sampled seat sequence must satisfy quota at every prefix"
                );
            }
        }
    }

    fn rng_for(&self, master_seed: u64) -> ChaCha12Rng {
        let profile_seed = derive_seed(
            master_seed,
            "house-monotone",
            &profile_context(self.profile.populations()),
        );
        derive_rng(profile_seed, "cumulative-round", &[])
    }

    fn decode(&self, state: &PipageState<'_>) -> Vec<u32> {
        let den = self.layered.denominator();
        let weights = state.weights_scaled();
        let n = self.profile.len();
        let mut entries = Vec::with_capacity(self.rounds);
        for t in 1..=self.rounds {
            let mut winner = None;
            for i in 0..n {
                if weights[self.layered.copy_edge_id(i, t) as usize] == den {
                    assert!(
                        winner.is_none(),
                        "hub degree preservation guarantees one seat per round"
                    );
                    winner = Some(i as u32);
                }
            }
            entries.push(winner.expect("exactly one rounded-up spoke per round"));
        }
        entries
    }

    /// Wrap decoded entries as a checked seat sequence.
    fn to_sequence(&self, entries: Vec<u32>) -> SeatSequence {
        let full_length = self.rounds as u64 == self.profile.total();
        let seq = if full_length {
            SeatSequence::repeating(entries, self.profile.len())
        } else {
            SeatSequence::finite(entries, self.profile.len())
        }
        .expect("entries are valid state indices");
        assert!(
            check_sequence_quota(&self.profile, &seq, self.rounds as u64)
                .expect("dimensions match"),
            "sampled seat sequence must satisfy quota at every prefix"
        );
        seq
    }
}

fn star_rounding_instance(
    profile: &PopulationProfile,
    rounds: usize,
) -> WeightedBipartiteInstance {
    let n = profile.len();
    let total = i128::from(profile.total());
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let weights: Vec<Vec<crate::rational::Rational>> = (0..n)
        .map(|i| vec![rat(i128::from(profile.population(i)), total); rounds])
        .collect();
    star_instance("house", &names, &weights).expect("star instance is valid")
}

fn sample_sequence(profile: &PopulationProfile, seed: u64, rounds: usize) -> SeatSequence {
    let sampler = SeatSequenceSampler::with_rounds(profile, rounds);
    let mut state = PipageState::new(sampler.pipage());
    let entries = sampler.sample_with(&mut state, seed);
    sampler.to_sequence(entries)
}

/// One-shot apportionment at house size `h`.
pub fn house_monotone_method(profile: &PopulationProfile, h: u64, seed: u64) -> Apportionment {
    HouseMonotoneMethod::new(seed)
        .apportion(profile, h)
        .expect("uncapped method has no error paths")
}

/// The full sampled seat sequence of length `P`, quota-checked before
/// return.
pub fn sample_finite_seat_sequence(profile: &PopulationProfile, seed: u64) -> SeatSequence {
    sample_sequence(profile, seed, profile.total() as usize)
}
