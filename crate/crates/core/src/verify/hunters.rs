//! Witness hunters: exhaustive small-profile searches for the classical
//! failures of the deterministic baselines. Found witnesses are
//! re-verified through the exact axiom checkers before being returned.

use crate::methods::{divisor, hamilton, HuntingtonHill};
use crate::model::{check_house_monotone_step, check_quota, standard_quota, PopulationProfile};
use crate::rational::{ceil_int, floor_int};
use serde::Serialize;

/// A profile where Hamilton's method takes a seat away from a state as
/// the house grows by one.
#[derive(Debug, Clone, Serialize)]
pub struct AlabamaWitness {
    pub populations: Vec<u64>,
    pub house: u64,
    pub losing_state: usize,
    pub before: Vec<u32>,
    pub after: Vec<u32>,
}

/// Scan three-state profiles with populations up to `max_pop` and house
/// sizes up to `max_house`; return the lexicographically first witness.
pub fn find_alabama_paradox(max_pop: u64, max_house: u64) -> Option<AlabamaWitness> {
    for p1 in 1..=max_pop {
        for p2 in 1..=max_pop {
            for p3 in 1..=max_pop {
                let profile = PopulationProfile::new(vec![p1, p2, p3]).expect("valid");
                let mut prev = hamilton(&profile, 1);
                for h in 2..=max_house {
                    let next = hamilton(&profile, h);
                    let monotone =
                        check_house_monotone_step(&prev, &next).expect("consecutive houses");
                    if !monotone {
                        let losing_state = (0..3)
                            .find(|&i| next.seat(i) < prev.seat(i))
                            .expect("some state lost");
                        return Some(AlabamaWitness {
                            populations: vec![p1, p2, p3],
                            house: h - 1,
                            losing_state,
                            before: prev.seats().to_vec(),
                            after: next.seats().to_vec(),
                        });
                    }
                    prev = next;
                }
            }
        }
    }
    None
}

/// A profile where the Huntington-Hill divisor method hands out a seat
/// count outside some state's quota floor/ceiling.
#[derive(Debug, Clone, Serialize)]
pub struct QuotaViolationWitness {
    pub populations: Vec<u64>,
    pub house: u64,
    pub seats: Vec<u32>,
    pub violating_state: usize,
    pub quota_floor: u32,
    pub quota_ceiling: u32,
}

pub fn find_divisor_quota_violation(max_pop: u64, max_house: u64) -> Option<QuotaViolationWitness> {
    for p1 in 1..=max_pop {
        for p2 in 1..=max_pop {
            for p3 in 1..=max_pop {
                let profile = PopulationProfile::new(vec![p1, p2, p3]).expect("valid");
                for h in 1..=max_house {
                    let a = divisor(&profile, h, &HuntingtonHill).expect("valid criterion");
                    if !check_quota(&profile, &a).expect("dims") {
                        let quotas = standard_quota(&profile, h);
                        let (violating_state, q) = (0..3)
                            .find_map(|i| {
                                let q = quotas.value(i).clone();
                                let s = i128::from(a.seat(i));
                                (s != floor_int(&q) && s != ceil_int(&q)).then_some((i, q))
                            })
                            .expect("quota check failed somewhere");
                        return Some(QuotaViolationWitness {
                            populations: vec![p1, p2, p3],
                            house: h,
                            seats: a.seats().to_vec(),
                            violating_state,
                            quota_floor: floor_int(&q) as u32,
                            quota_ceiling: ceil_int(&q) as u32,
                        });
                    }
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alabama_witness_exists_in_the_small_range() {
        let w = find_alabama_paradox(10, 20).expect("witness in range");
        // Re-verify through the exact checkers.
        let p = PopulationProfile::new(w.populations.clone()).unwrap();
        let before = hamilton(&p, w.house);
        let after = hamilton(&p, w.house + 1);
        assert_eq!(before.seats(), w.before.as_slice());
        assert_eq!(after.seats(), w.after.as_slice());
        assert!(!check_house_monotone_step(&before, &after).unwrap());
        assert!(after.seat(w.losing_state) < before.seat(w.losing_state));
    }

    #[test]
    fn divisor_quota_violation_exists_in_the_small_range() {
        let w = find_divisor_quota_violation(10, 20).expect("witness in range");
        let p = PopulationProfile::new(w.populations.clone()).unwrap();
        let a = divisor(&p, w.house, &HuntingtonHill).unwrap();
        assert_eq!(a.seats(), w.seats.as_slice());
        assert!(!check_quota(&p, &a).unwrap());
        let s = a.seat(w.violating_state);
        assert!(s < w.quota_floor || s > w.quota_ceiling);
    }
}
