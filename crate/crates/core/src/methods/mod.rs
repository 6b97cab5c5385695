//! Apportionment methods: the deterministic baselines (Hamilton, divisor
//! methods) and the seeded randomized methods (Grimmett, the Poisson
//! population-monotone method, and the house-monotone method driven by
//! cumulative rounding).
//!
//! Every randomized method is a deterministic function of a 64-bit master
//! seed: fixing the seed fixes one concrete apportionment solution, which
//! is what the ex post axioms quantify over.

mod deterministic;
mod grimmett;
mod house_monotone;
mod poisson;

pub use deterministic::{divisor, hamilton, DivisorCriterion, HuntingtonHill};
pub use grimmett::{grimmett, grimmett_with};
pub use house_monotone::{
    house_monotone_method, sample_finite_seat_sequence, HouseMonotoneMethod, SeatSequenceSampler,
};
pub use poisson::{poisson_allocation_from_arrivals, poisson_method, ArrivalStream, PoissonMethod};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MethodError {
    #[error("divisor criterion violates t <= d(t) <= t+1 at t={t} (d={value})")]
    InvalidCriterion { t: u64, value: String },
    #[error("not a permutation of 0..{n}")]
    BadPermutation { n: usize },
    #[error("U must lie in [0, 1), got {0}")]
    BadUniform(String),
    #[error("house size {h} exceeds the configured h_max {h_max}")]
    HouseExceedsLimit { h: u64, h_max: u64 },
    #[error("house size must be positive")]
    ZeroHouse,
    #[error("injected arrival stream for state {state} is too short")]
    ArrivalsExhausted { state: usize },
    #[error("{0}")]
    Model(#[from] crate::model::ModelError),
}
