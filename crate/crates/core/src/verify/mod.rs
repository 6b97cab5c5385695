//! The verification lab: exhaustive desk-scale checks of the axioms'
//! incompatibilities and characterizations, witness hunters for the
//! classical paradoxes, and the statistical test harness for the
//! randomized guarantees.

pub mod bijection;
pub mod hunters;
pub mod instances;
pub mod pitfalls;
pub mod stats;
pub mod theorem1;
pub mod toxicity;

pub use bijection::{enumerate_quota_sequences, verify_bijection, BijectionCertificate};
pub use hunters::{
    find_alabama_paradox, find_divisor_quota_violation, AlabamaWitness, QuotaViolationWitness,
};
pub use pitfalls::{
    verify_pitfall_example1, verify_pitfall_example2, Example1Certificate, Example2Certificate,
};
pub use stats::{exact_checks, stat_exante, stat_marginals, stat_negcorr, StatCheck, StatReport};
pub use theorem1::{verify_theorem1, Theorem1Certificate};
pub use toxicity::is_toxic;

use crate::model::{Apportionment, ModelError, PopulationProfile};
use crate::rational::{ceil_int, floor_int};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("too many states for exhaustive enumeration: {n} > {cap}")]
    TooManyStates { n: usize, cap: usize },
    #[error("profile too large for exhaustive search: P={total} > {cap}")]
    ProfileTooLarge { total: u64, cap: u64 },
    #[error("house size {h} out of range 1..={max}")]
    HouseOutOfRange { h: u64, max: u64 },
    #[error("allocation violates quota, so its reachability is undefined")]
    QuotaViolated,
    #[error("{0}")]
    Model(#[from] ModelError),
}

/// The complete set of apportionments satisfying quota for `(profile, h)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotaAllocationSet {
    pub populations: Vec<u64>,
    pub house: u64,
    pub allocations: Vec<Apportionment>,
}

/// Per-state floor/ceiling of the standard quota.
pub(crate) fn quota_bounds(profile: &PopulationProfile, h: u64) -> Vec<(u32, u32)> {
    crate::model::standard_quota(profile, h)
        .values()
        .iter()
        .map(|q| (floor_int(q) as u32, ceil_int(q) as u32))
        .collect()
}

/// Enumerate every apportionment satisfying quota: each state takes its
/// quota floor, and every way of distributing the leftover seats among
/// the states with fractional quotas appears exactly once. Guarded to
/// `n <= 20` states.
pub fn enumerate_quota_allocations(
    profile: &PopulationProfile,
    h: u64,
) -> Result<QuotaAllocationSet, VerifyError> {
    const CAP: usize = 20;
    let n = profile.len();
    if n > CAP {
        return Err(VerifyError::TooManyStates { n, cap: CAP });
    }
    if h == 0 {
        return Err(VerifyError::HouseOutOfRange { h, max: u64::MAX });
    }
    let bounds = quota_bounds(profile, h);
    let floors_sum: u64 = bounds.iter().map(|&(f, _)| u64::from(f)).sum();
    let leftover = (h - floors_sum) as u32;
    let loose: Vec<usize> = (0..n).filter(|&i| bounds[i].0 != bounds[i].1).collect();
    let mut allocations = Vec::new();
    for mask in 0u32..(1 << loose.len()) {
        if mask.count_ones() != leftover {
            continue;
        }
        let mut seats: Vec<u32> = bounds.iter().map(|&(f, _)| f).collect();
        for (bit, &state) in loose.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                seats[state] += 1;
            }
        }
        allocations.push(Apportionment::new(seats));
    }
    Ok(QuotaAllocationSet {
        populations: profile.populations().to_vec(),
        house: h,
        allocations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::check_quota;

    fn profile(p: &[u64]) -> PopulationProfile {
        PopulationProfile::new(p.to_vec()).unwrap()
    }

    #[test]
    fn two_equal_states_force_the_even_split() {
        let set = enumerate_quota_allocations(&profile(&[1, 1]), 2).unwrap();
        assert_eq!(set.allocations.len(), 1);
        assert_eq!(set.allocations[0].seats(), &[1, 1]);
    }

    #[test]
    fn enumeration_contains_known_members() {
        let set = enumerate_quota_allocations(&profile(&[1, 2, 1, 2]), 2).unwrap();
        assert!(set
            .allocations
            .iter()
            .any(|a| a.seats() == [1, 0, 1, 0]));
        // Quotas (1/3, 2/3, 1/3, 2/3): two of four states round up.
        assert_eq!(set.allocations.len(), 6);
    }

    #[test]
    fn large_state_is_capped_by_quota() {
        // State 1's quota on this profile is 6.99..., capping it at 7.
        let set = enumerate_quota_allocations(&profile(&[824, 44, 44, 44, 222]), 10).unwrap();
        assert!(!set.allocations.is_empty());
        for a in &set.allocations {
            assert!(a.seat(0) == 6 || a.seat(0) == 7);
        }
    }

    #[test]
    fn enumeration_matches_brute_force_over_floor_ceil_vectors() {
        for (pops, h) in [
            (vec![824u64, 44, 44, 44, 44], 10u64),
            (vec![1, 2, 1, 2], 3),
            (vec![45, 25, 15, 15], 4),
            (vec![7, 7], 3),
        ] {
            let p = PopulationProfile::new(pops).unwrap();
            let set = enumerate_quota_allocations(&p, h).unwrap();
            let bounds = quota_bounds(&p, h);
            let mut brute = Vec::new();
            let n = p.len();
            for mask in 0u32..(1 << n) {
                let seats: Vec<u32> = (0..n)
                    .map(|i| {
                        if mask & (1 << i) != 0 {
                            bounds[i].1
                        } else {
                            bounds[i].0
                        }
                    })
                    .collect();
                let total: u64 = seats.iter().map(|&s| u64::from(s)).sum();
                let a = Apportionment::new(seats);
                if total == h && check_quota(&p, &a).unwrap() && !brute.contains(&a) {
                    brute.push(a);
                }
            }
            assert_eq!(set.allocations.len(), brute.len(), "count for h={h}");
            for a in &brute {
                assert!(set.allocations.contains(a));
            }
        }
    }
}
