//! Grimmett's randomized rounding: permute the states, draw one uniform
//! offset `U`, and give state `i` a seat for every integer in
//! `[U + Q_{i-1}, U + Q_i)` where `Q_i` is the running quota sum in
//! permuted order. The result always satisfies quota, and the expected
//! seats equal the standard quotas.

use super::MethodError;
use crate::model::{Apportionment, PopulationProfile};
use crate::rational::Rational;
use crate::rng::{derive_rng, profile_context, shuffle};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand_core::RngCore;

/// Seeded Grimmett: the permutation is a uniform shuffle and `U` is a
/// uniform 64-bit dyadic rational in `[0, 1)`.
pub fn grimmett(profile: &PopulationProfile, h: u64, seed: u64) -> Apportionment {
    let mut rng = derive_rng(seed, "grimmett", &profile_context(profile.populations()));
    let mut perm: Vec<usize> = (0..profile.len()).collect();
    shuffle(&mut rng, &mut perm);
    let u = BigRational::new(BigInt::from(rng.next_u64()), BigInt::from(1u128 << 64));
    grimmett_big(profile, h, &perm, u).expect("internally generated inputs are valid")
}

/// Grimmett with the randomness injected: an explicit permutation of the
/// states and an exact `U` in `[0, 1)`.
pub fn grimmett_with(
    profile: &PopulationProfile,
    h: u64,
    permutation: &[usize],
    u: &Rational,
) -> Result<Apportionment, MethodError> {
    let u = BigRational::new(BigInt::from(*u.numer()), BigInt::from(*u.denom()));
    grimmett_big(profile, h, permutation, u)
}

fn grimmett_big(
    profile: &PopulationProfile,
    h: u64,
    permutation: &[usize],
    u: BigRational,
) -> Result<Apportionment, MethodError> {
    if h == 0 {
        return Err(MethodError::ZeroHouse);
    }
    let n = profile.len();
    let mut seen = vec![false; n];
    if permutation.len() != n || permutation.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
        return Err(MethodError::BadPermutation { n });
    }
    if u.is_negative() || u >= BigRational::new(BigInt::from(1), BigInt::from(1)) {
        return Err(MethodError::BadUniform(u.to_string()));
    }

    // Seats of the k-th permuted state: ceil(U + S_k) - ceil(U + S_{k-1})
    // counts the integers in [U + S_{k-1}, U + S_k).
    let total = BigInt::from(profile.total());
    let mut seats = vec![0u32; n];
    let mut pop_prefix = BigInt::zero();
    let mut prev_ceil = u.ceil().to_integer();
    for &state in permutation {
        pop_prefix += BigInt::from(profile.population(state));
        let q = &u + BigRational::new(&pop_prefix * BigInt::from(h), total.clone());
        let c = q.ceil().to_integer();
        let count = &c - &prev_ceil;
        seats[state] = u32::try_from(count).expect("per-state seats fit u32");
        prev_ceil = c;
    }
    let a = Apportionment::new(seats);
    debug_assert_eq!(a.house(), h);
    Ok(a)
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
    fn identity_permutation_with_u_point_seven() {
        let p = profile(&[1, 2, 1, 2]);
        let a = grimmett_with(&p, 2, &[0, 1, 2, 3], &rat(7, 10)).unwrap();
        assert_eq!(a.seats(), &[1, 0, 1, 0]);
    }

    #[test]
    fn integer_quotas_are_forced_for_any_permutation_and_u() {
        let p = profile(&[1, 2, 1, 2]);
        for perm in [[0usize, 1, 2, 3], [3, 1, 0, 2], [2, 0, 3, 1]] {
            for u in [rat(0, 1), rat(1, 3), rat(9, 10)] {
                let a = grimmett_with(&p, 6, &perm, &u).unwrap();
                assert_eq!(a.seats(), &[1, 2, 1, 2]);
            }
        }
    }

    #[test]
    fn single_seat_between_equals_follows_the_interval() {
        // Identity order, p=(1,1), h=1: state 0 wins exactly when U > 1/2.
        let p = profile(&[1, 1]);
        let low = grimmett_with(&p, 1, &[0, 1], &rat(2, 10)).unwrap();
        assert_eq!(low.seats(), &[0, 1]);
        let high = grimmett_with(&p, 1, &[0, 1], &rat(8, 10)).unwrap();
        assert_eq!(high.seats(), &[1, 0]);
        let boundary = grimmett_with(&p, 1, &[0, 1], &rat(1, 2)).unwrap();
        assert_eq!(boundary.seats(), &[0, 1]);
    }

    #[test]
    fn outputs_always_satisfy_quota() {
        for seed in 0..300u64 {
            for (pops, h) in [(vec![1u64, 2, 1, 2], 5u64), (vec![824, 44, 44, 44, 44], 10)] {
                let p = PopulationProfile::new(pops).unwrap();
                let a = grimmett(&p, h, seed);
                assert_eq!(a.house(), h);
                assert!(check_quota(&p, &a).unwrap());
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = profile(&[1, 1]);
        assert!(matches!(
            grimmett_with(&p, 1, &[0, 0], &rat(1, 2)),
            Err(MethodError::BadPermutation { .. })
        ));
        assert!(matches!(
            grimmett_with(&p, 1, &[0, 1], &rat(3, 2)),
            Err(MethodError::BadUniform(_))
        ));
    }
}
