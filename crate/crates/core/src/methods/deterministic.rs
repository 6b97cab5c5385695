//! Hamilton's largest-residue method and divisor methods.

use super::MethodError;
use crate::model::{Apportionment, PopulationProfile};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Hamilton's method: every state gets the floor of its standard quota,
/// and the leftover seats go to the largest residues. Residue ties break
/// toward the lower state index.
pub fn hamilton(profile: &PopulationProfile, h: u64) -> Apportionment {
    assert!(h >= 1, "house size must be positive");
    let total = u128::from(profile.total());
    let n = profile.len();
    let mut seats = vec![0u32; n];
    let mut assigned: u64 = 0;
    // residues[i] = (p_i * h) mod P, an integer proxy for q_i - floor(q_i).
    let mut residues: Vec<(u128, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        let num = u128::from(profile.population(i)) * u128::from(h);
        seats[i] = (num / total) as u32;
        assigned += u64::from(seats[i]);
        residues.push((num % total, i));
    }
    residues.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let leftover = (h - assigned) as usize;
    for &(_, i) in residues.iter().take(leftover) {
        seats[i] += 1;
    }
    Apportionment::new(seats)
}

/// A divisor criterion `d`, monotone increasing with `t <= d(t) <= t+1`.
/// Seats go to the `h` largest values `p_i / d(t)` over all states and
/// `t = 0, 1, ...`; `p_i / 0` counts as infinite, ordered by population
/// and then state index. Finite ties break by (state index, t).
pub trait DivisorCriterion {
    fn name(&self) -> &'static str;

    fn value(&self, t: u64) -> f64;

    /// Compare `p_lhs / d(t_lhs)` with `p_rhs / d(t_rhs)`, both finite.
    /// The default goes through f64; criteria with an exact algebraic
    /// form should override.
    fn compare_scores(&self, lhs: (u64, u64), rhs: (u64, u64)) -> Ordering {
        let l = lhs.0 as f64 / self.value(lhs.1);
        let r = rhs.0 as f64 / self.value(rhs.1);
        l.partial_cmp(&r).unwrap_or(Ordering::Equal)
    }
}

/// `d(t) = sqrt(t(t+1))`. Score comparisons are exact: `p_i/sqrt(t(t+1))
/// > p_j/sqrt(s(s+1))` iff `p_i^2 s(s+1) > p_j^2 t(t+1)` in integers.
pub struct HuntingtonHill;

impl DivisorCriterion for HuntingtonHill {
    fn name(&self) -> &'static str {
        "huntington-hill"
    }

    fn value(&self, t: u64) -> f64 {
        ((t as f64) * (t as f64 + 1.0)).sqrt()
    }

    fn compare_scores(&self, lhs: (u64, u64), rhs: (u64, u64)) -> Ordering {
        let cross = |p: u64, other_t: u64| {
            u128::from(p) * u128::from(p) * u128::from(other_t) * u128::from(other_t + 1)
        };
        cross(lhs.0, rhs.1).cmp(&cross(rhs.0, lhs.1))
    }
}

struct Candidate<'c, C: DivisorCriterion + ?Sized> {
    criterion: &'c C,
    population: u64,
    state: usize,
    t: u64,
}

impl<C: DivisorCriterion + ?Sized> Candidate<'_, C> {
    fn infinite(&self) -> bool {
        self.t == 0
    }
}

impl<C: DivisorCriterion + ?Sized> PartialEq for Candidate<'_, C> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<C: DivisorCriterion + ?Sized> Eq for Candidate<'_, C> {}

impl<C: DivisorCriterion + ?Sized> PartialOrd for Candidate<'_, C> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<C: DivisorCriterion + ?Sized> Ord for Candidate<'_, C> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Greater = gets a seat sooner.
        match (self.infinite(), other.infinite()) {
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            (true, true) => self
                .population
                .cmp(&other.population)
                .then(other.state.cmp(&self.state)),
            (false, false) => self
                .criterion
                .compare_scores((self.population, self.t), (other.population, other.t))
                .then(other.state.cmp(&self.state))
                .then(other.t.cmp(&self.t)),
        }
    }
}

/// Allocate by the `h` largest divisor scores.
pub fn divisor<C: DivisorCriterion + ?Sized>(
    profile: &PopulationProfile,
    h: u64,
    criterion: &C,
) -> Result<Apportionment, MethodError> {
    if h == 0 {
        return Err(MethodError::ZeroHouse);
    }
    let check = |t: u64| -> Result<(), MethodError> {
        let v = criterion.value(t);
        if !(t as f64 <= v && v <= t as f64 + 1.0) {
            return Err(MethodError::InvalidCriterion {
                t,
                value: format!("{v}"),
            });
        }
        Ok(())
    };
    let mut heap: BinaryHeap<Candidate<C>> = (0..profile.len())
        .map(|i| Candidate {
            criterion,
            population: profile.population(i),
            state: i,
            t: 0,
        })
        .collect();
    check(0)?;
    let mut seats = vec![0u32; profile.len()];
    for _ in 0..h {
        let top = heap.pop().expect("candidates never run out");
        seats[top.state] += 1;
        let t = top.t + 1;
        check(t)?;
        heap.push(Candidate {
            criterion,
            population: top.population,
            state: top.state,
            t,
        });
    }
    Ok(Apportionment::new(seats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::check_quota;
    use crate::rational::rat;

    fn profile(p: &[u64]) -> PopulationProfile {
        PopulationProfile::new(p.to_vec()).unwrap()
    }

    #[test]
    fn hamilton_hand_example_with_residue_tie() {
        // Quotas (.5, 1, .5, 1); one leftover seat, residue tie between
        // states 0 and 2 goes to the lower index.
        let a = hamilton(&profile(&[1, 2, 1, 2]), 3);
        assert_eq!(a.seats(), &[1, 1, 0, 1]);
    }

    #[test]
    fn hamilton_keeps_integer_quotas() {
        let a = hamilton(&profile(&[1, 2, 1, 2]), 6);
        assert_eq!(a.seats(), &[1, 2, 1, 2]);
    }

    #[test]
    fn hamilton_on_large_state_profile() {
        // Residues (.24, .44, .44, .44, .44); two leftover seats go to
        // states 1 and 2 under the index tie-break.
        let a = hamilton(&profile(&[824, 44, 44, 44, 44]), 10);
        assert_eq!(a.seats(), &[8, 1, 1, 0, 0]);
    }

    #[test]
    fn hamilton_matches_brute_force_residue_maximizer() {
        // Independent check: among all floor/ceil allocations summing to
        // h, Hamilton maximizes the total residue of the rounded-up set,
        // breaking ties by preferring lexicographically earlier sets.
        for populations in [[7u64, 5, 3], [10, 10, 1], [9, 4, 2], [6, 6, 1]] {
            let p = profile(&populations);
            for h in 1..=12u64 {
                let got = hamilton(&p, h);
                let total = u128::from(p.total());
                let floors: Vec<u32> = (0..3)
                    .map(|i| ((u128::from(p.population(i)) * u128::from(h)) / total) as u32)
                    .collect();
                let leftover = (h - floors.iter().map(|&f| u64::from(f)).sum::<u64>()) as usize;
                let mut best: Option<(u128, Vec<usize>)> = None;
                // All ways to hand out the leftover seats to distinct states.
                for mask in 0u32..8 {
                    let ups: Vec<usize> = (0..3).filter(|&i| mask & (1 << i) != 0).collect();
                    if ups.len() != leftover
                        || ups
                            .iter()
                            .any(|&i| u128::from(p.population(i)) * u128::from(h) % total == 0)
                    {
                        continue;
                    }
                    let score: u128 = ups
                        .iter()
                        .map(|&i| u128::from(p.population(i)) * u128::from(h) % total)
                        .sum();
                    if best.as_ref().is_none_or(|(s, u)| score > *s || (score == *s && ups < *u)) {
                        best = Some((score, ups));
                    }
                }
                let (_, ups) = best.expect("some assignment exists");
                let mut expect = floors;
                for i in ups {
                    expect[i] += 1;
                }
                assert_eq!(got.seats(), expect.as_slice(), "p={populations:?} h={h}");
            }
        }
    }

    #[test]
    fn huntington_hill_hand_example() {
        // Scores: state 0: inf, 6/sqrt(2)=4.24, 6/sqrt(6)=2.45;
        // state 1: inf, 1/sqrt(2)=0.71. Top three: both infinities and 4.24.
        let a = divisor(&profile(&[6, 1]), 3, &HuntingtonHill).unwrap();
        assert_eq!(a.seats(), &[2, 1]);
    }

    #[test]
    fn huntington_hill_first_round_feeds_everyone() {
        // d(0) = 0 makes the first score infinite for every state.
        for p in [[5u64, 3, 2], [90, 7, 2], [11, 10, 9]] {
            let a = divisor(&profile(&p), 3, &HuntingtonHill).unwrap();
            assert_eq!(a.seats(), &[1, 1, 1]);
        }
    }

    #[test]
    fn symmetric_tie_splits_by_index() {
        let a = divisor(&profile(&[10, 10]), 2, &HuntingtonHill).unwrap();
        assert_eq!(a.seats(), &[1, 1]);
    }

    #[test]
    fn huntington_hill_exact_comparison_matches_f64_on_safe_cases() {
        let hh = HuntingtonHill;
        for (l, r) in [((6u64, 1u64), (1u64, 1u64)), ((7, 2), (5, 1)), ((44, 1), (824, 9))] {
            let exact = hh.compare_scores(l, r);
            let float = (l.0 as f64 / hh.value(l.1))
                .partial_cmp(&(r.0 as f64 / hh.value(r.1)))
                .unwrap();
            assert_eq!(exact, float, "{l:?} vs {r:?}");
        }
    }

    #[test]
    fn invalid_criterion_is_rejected() {
        struct Bogus;
        impl DivisorCriterion for Bogus {
            fn name(&self) -> &'static str {
                "bogus"
            }
            fn value(&self, t: u64) -> f64 {
                t as f64 + 2.0
            }
        }
        assert!(matches!(
            divisor(&profile(&[3, 2]), 2, &Bogus),
            Err(MethodError::InvalidCriterion { .. })
        ));
    }

    #[test]
    fn known_quota_violation_of_huntington_hill() {
        // q = (5, 1/2, 1/2) exactly, but the two one-person states each
        // take an infinite first score, squeezing the majority state to 4.
        let p = profile(&[10, 1, 1]);
        let a = divisor(&p, 6, &HuntingtonHill).unwrap();
        assert_eq!(a.seats(), &[4, 1, 1]);
        assert!(!check_quota(&p, &a).unwrap());
        assert_eq!(
            crate::model::standard_quota(&p, 6).value(0),
            &rat(5, 1)
        );
    }
}
