//! Domain types for apportionment and exact checkers for the quota,
//! house-monotonicity, and population-monotonicity axioms.
//!
//! States are identified by 0-based index throughout the library; external
//! names are mapped at the CLI boundary. All types are immutable values and
//! all operations here are pure.

use crate::rational::{ceil_int, floor_int, rat, Rational};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("a profile needs at least two states")]
    TooFewStates,
    #[error("state populations must be positive")]
    ZeroPopulation,
    #[error("total population overflows u64")]
    PopulationOverflow,
    #[error("house size must be positive")]
    ZeroHouse,
    #[error("dimension mismatch: {left} states vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected consecutive house sizes, got {from} and {to}")]
    NotConsecutiveHouses { from: u64, to: u64 },
    #[error("sequence entry {entry} out of range for {n} states")]
    EntryOutOfRange { entry: u32, n: usize },
    #[error("finite sequence of length {len} cannot serve house size {h}")]
    SequenceTooShort { len: usize, h: u64 },
}

/// A fixed set of at least two states with positive integer populations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PopulationProfile {
    populations: Vec<u64>,
    total: u64,
}

impl PopulationProfile {
    pub fn new(populations: Vec<u64>) -> Result<Self, ModelError> {
        if populations.len() < 2 {
            return Err(ModelError::TooFewStates);
        }
        if populations.iter().any(|&p| p == 0) {
            return Err(ModelError::ZeroPopulation);
        }
        let mut total: u64 = 0;
        for &p in &populations {
            total = total.checked_add(p).ok_or(ModelError::PopulationOverflow)?;
        }
        Ok(Self { populations, total })
    }

    pub fn len(&self) -> usize {
        self.populations.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees n >= 2
    }

    pub fn population(&self, state: usize) -> u64 {
        self.populations[state]
    }

    pub fn populations(&self) -> &[u64] {
        &self.populations
    }

    /// Total population, written `P` in most of this crate's docs.
    pub fn total(&self) -> u64 {
        self.total
    }
}

/// A seat vector; the house size is the sum of its entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Apportionment {
    seats: Vec<u32>,
    house: u64,
}

impl Apportionment {
    pub fn new(seats: Vec<u32>) -> Self {
        let house = seats.iter().map(|&s| u64::from(s)).sum();
        Self { seats, house }
    }

    pub fn seats(&self) -> &[u32] {
        &self.seats
    }

    pub fn seat(&self, state: usize) -> u32 {
        self.seats[state]
    }

    pub fn house(&self) -> u64 {
        self.house
    }

    pub fn len(&self) -> usize {
        self.seats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seats.is_empty()
    }
}

/// The exact fractional seat entitlements `q_i = p_i * h / P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardQuota {
    values: Vec<Rational>,
    house: u64,
}

impl StandardQuota {
    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, state: usize) -> &Rational {
        &self.values[state]
    }

    pub fn house(&self) -> u64 {
        self.house
    }
}

/// Standard quotas for `profile` at house size `h`. The values sum to `h`
/// exactly.
pub fn standard_quota(profile: &PopulationProfile, h: u64) -> StandardQuota {
    assert!(h >= 1, "house size must be positive");
    let total = i128::from(profile.total());
    let values = profile
        .populations()
        .iter()
        .map(|&p| rat(i128::from(p) * i128::from(h), total))
        .collect();
    StandardQuota { values, house: h }
}

fn check_dims(left: usize, right: usize) -> Result<(), ModelError> {
    if left == right {
        Ok(())
    } else {
        Err(ModelError::DimensionMismatch { left, right })
    }
}

/// True iff every state holds the floor or the ceiling of its standard
/// quota. The house size is taken from the apportionment itself.
pub fn check_quota(profile: &PopulationProfile, a: &Apportionment) -> Result<bool, ModelError> {
    check_dims(profile.len(), a.len())?;
    if a.house() == 0 {
        return Err(ModelError::ZeroHouse);
    }
    let quota = standard_quota(profile, a.house());
    Ok(quota
        .values()
        .iter()
        .zip(a.seats())
        .all(|(q, &s)| {
            let s = i128::from(s);
            s == floor_int(q) || s == ceil_int(q)
        }))
}

/// Searches two labeled outcomes for a population paradox: a pair of
/// states `(i, j)` where `i`'s population weakly grew yet it lost seats
/// while `j`'s population weakly shrank yet it gained seats. Returns the
/// lexicographically first such pair, or `None`.
pub fn detect_population_paradox(
    before: (&PopulationProfile, &Apportionment),
    after: (&PopulationProfile, &Apportionment),
) -> Result<Option<(usize, usize)>, ModelError> {
    let (p, a) = before;
    let (p2, a2) = after;
    check_dims(p.len(), a.len())?;
    check_dims(p2.len(), a2.len())?;
    check_dims(p.len(), p2.len())?;
    let n = p.len();
    for i in 0..n {
        if p2.population(i) >= p.population(i) && a2.seat(i) < a.seat(i) {
            for j in 0..n {
                if j != i && p2.population(j) <= p.population(j) && a2.seat(j) > a.seat(j) {
                    return Ok(Some((i, j)));
                }
            }
        }
    }
    Ok(None)
}

/// True iff no state loses a seat when the house grows from `a_h` to
/// `a_h1`; the two houses must be consecutive.
pub fn check_house_monotone_step(
    a_h: &Apportionment,
    a_h1: &Apportionment,
) -> Result<bool, ModelError> {
    check_dims(a_h.len(), a_h1.len())?;
    if a_h1.house() != a_h.house() + 1 {
        return Err(ModelError::NotConsecutiveHouses {
            from: a_h.house(),
            to: a_h1.house(),
        });
    }
    Ok(a_h.seats().iter().zip(a_h1.seats()).all(|(&x, &y)| x <= y))
}

/// A sequence of state indices handing out one seat at a time. Finite
/// sequences have a fixed length; repeating sequences extend lazily by
/// concatenating the base block forever.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeatSequence {
    entries: Vec<u32>,
    n_states: usize,
    repeats: bool,
}

impl SeatSequence {
    pub fn finite(entries: Vec<u32>, n_states: usize) -> Result<Self, ModelError> {
        Self::build(entries, n_states, false)
    }

    pub fn repeating(entries: Vec<u32>, n_states: usize) -> Result<Self, ModelError> {
        Self::build(entries, n_states, true)
    }

    fn build(entries: Vec<u32>, n_states: usize, repeats: bool) -> Result<Self, ModelError> {
        for &e in &entries {
            if e as usize >= n_states {
                return Err(ModelError::EntryOutOfRange {
                    entry: e,
                    n: n_states,
                });
            }
        }
        Ok(Self {
            entries,
            n_states,
            repeats,
        })
    }

    pub fn base(&self) -> &[u32] {
        &self.entries
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn base_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_repeating(&self) -> bool {
        self.repeats
    }

    /// Recipient of seat `h` (1-based), or `None` past the end of a finite
    /// sequence.
    pub fn entry(&self, h: u64) -> Option<u32> {
        if h == 0 {
            return None;
        }
        let idx = (h - 1) as usize;
        if self.repeats {
            Some(self.entries[idx % self.entries.len()])
        } else {
            self.entries.get(idx).copied()
        }
    }
}

/// Counts seat recipients over the length-`h` prefix of the sequence.
pub fn seat_sequence_prefix_allocation(
    s: &SeatSequence,
    h: u64,
) -> Result<Apportionment, ModelError> {
    if h == 0 {
        return Err(ModelError::ZeroHouse);
    }
    let len = s.base_len() as u64;
    if !s.is_repeating() && h > len {
        return Err(ModelError::SequenceTooShort {
            len: s.base_len(),
            h,
        });
    }
    let mut counts = vec![0u32; s.n_states()];
    if s.is_repeating() && len > 0 {
        let cycles = (h / len) as u32;
        if cycles > 0 {
            for &e in s.base() {
                counts[e as usize] += cycles;
            }
        }
        for &e in &s.base()[..(h % len) as usize] {
            counts[e as usize] += 1;
        }
    } else {
        for &e in &s.base()[..h as usize] {
            counts[e as usize] += 1;
        }
    }
    Ok(Apportionment::new(counts))
}

/// True iff the prefix allocation satisfies quota at every house size
/// `1..=up_to`.
pub fn check_sequence_quota(
    profile: &PopulationProfile,
    s: &SeatSequence,
    up_to: u64,
) -> Result<bool, ModelError> {
    check_dims(profile.len(), s.n_states())?;
    if up_to == 0 {
        return Err(ModelError::ZeroHouse);
    }
    if !s.is_repeating() && up_to > s.base_len() as u64 {
        return Err(ModelError::SequenceTooShort {
            len: s.base_len(),
            h: up_to,
        });
    }
    let total = i128::from(profile.total());
    let mut counts = vec![0i128; profile.len()];
    for h in 1..=up_to {
        let state = s.entry(h).expect("length checked above") as usize;
        counts[state] += 1;
        for (i, &c) in counts.iter().enumerate() {
            // q_i = h * p_i / total; c must be its floor or ceiling.
            let num = i128::from(h) * i128::from(profile.population(i));
            let floor = num.div_euclid(total);
            let ceil = if num % total == 0 { floor } else { floor + 1 };
            if c < floor || c > ceil {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
