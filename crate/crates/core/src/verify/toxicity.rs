//! Toxicity of quota allocations: an allocation at house size `h` is
//! toxic when no house-monotone, quota-compliant solution can ever output
//! it, i.e. when no seat sequence of length `P` that satisfies quota at
//! every prefix passes through it. Because quota sequences reset at
//! multiples of `P`, searching up to horizon `P` is exhaustive.

use super::VerifyError;
use crate::model::{check_quota, Apportionment, PopulationProfile};
use std::collections::{HashMap, HashSet};

// The search space is the quota lattice: at most 2^n allocations per
// house size, P house sizes deep.
const TOTAL_CAP: u64 = 5_000;
const STATE_CAP: usize = 12;

fn quota_ok(profile: &PopulationProfile, h: u64, counts: &[u32]) -> bool {
    let total = i128::from(profile.total());
    counts.iter().enumerate().all(|(i, &c)| {
        let num = i128::from(h) * i128::from(profile.population(i));
        let floor = num.div_euclid(total);
        let ceil = if num % total == 0 { floor } else { floor + 1 };
        (floor..=ceil).contains(&i128::from(c))
    })
}

/// Allocations reachable at level `h` by quota-compliant prefixes.
fn reachable_at(profile: &PopulationProfile, h: u64) -> HashSet<Vec<u32>> {
    let mut layer: HashSet<Vec<u32>> = HashSet::new();
    layer.insert(vec![0; profile.len()]);
    for level in 1..=h {
        let mut next = HashSet::new();
        for alloc in &layer {
            for i in 0..profile.len() {
                let mut candidate = alloc.clone();
                candidate[i] += 1;
                if quota_ok(profile, level, &candidate) {
                    next.insert(candidate);
                }
            }
        }
        layer = next;
    }
    layer
}

fn extendable(
    profile: &PopulationProfile,
    level: u64,
    alloc: &[u32],
    memo: &mut HashMap<(u64, Vec<u32>), bool>,
) -> bool {
    let total = profile.total();
    if level == total {
        // Quota at h = P forces the population vector itself.
        return alloc
            .iter()
            .zip(profile.populations())
            .all(|(&a, &p)| u64::from(a) == p);
    }
    let key = (level, alloc.to_vec());
    if let Some(&hit) = memo.get(&key) {
        return hit;
    }
    let mut ok = false;
    for i in 0..profile.len() {
        let mut candidate = alloc.to_vec();
        candidate[i] += 1;
        if quota_ok(profile, level + 1, &candidate)
            && extendable(profile, level + 1, &candidate, memo)
        {
            ok = true;
            break;
        }
    }
    memo.insert(key, ok);
    ok
}

/// True iff no quota seat sequence of length `P` reaches `a` at house
/// size `h`. Errors if `a` itself violates quota (toxicity is a property
/// of quota allocations), if `h > P`, or if the profile is too large for
/// the exhaustive search.
pub fn is_toxic(
    profile: &PopulationProfile,
    h: u64,
    a: &Apportionment,
) -> Result<bool, VerifyError> {
    let total = profile.total();
    if total > TOTAL_CAP {
        return Err(VerifyError::ProfileTooLarge {
            total,
            cap: TOTAL_CAP,
        });
    }
    if profile.len() > STATE_CAP {
        return Err(VerifyError::TooManyStates {
            n: profile.len(),
            cap: STATE_CAP,
        });
    }
    if h == 0 || h > total || a.house() != h {
        return Err(VerifyError::HouseOutOfRange { h, max: total });
    }
    if !check_quota(profile, a)? {
        return Err(VerifyError::QuotaViolated);
    }
    if !reachable_at(profile, h).contains(a.seats()) {
        return Ok(true);
    }
    let mut memo = HashMap::new();
    Ok(!extendable(profile, h, a.seats(), &mut memo))
}
