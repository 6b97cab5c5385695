//! Randomized apportionment methods built on dependent rounding in bipartite
//! graphs, plus a verification lab that mechanically checks the axioms,
//! impossibility witnesses, and statistical guarantees on desk-scale inputs.
//!
//! The crate is organized around three layers:
//!
//! * [`model`] — exact domain types (population profiles, apportionments,
//!   seat sequences) and checkers for the quota, house-monotonicity, and
//!   population-monotonicity axioms. All quota arithmetic is exact rational;
//!   floating point never touches a floor or ceiling.
//! * [`dependent_rounding`] and [`cumulative_rounding`] — randomized pipage
//!   rounding of a weighted bipartite graph, and the layered-graph
//!   construction that extends it with cumulative degree preservation
//!   across rounds.
//! * [`methods`], [`apps`], and [`verify`] — the apportionment methods
//!   (Hamilton, divisor, Grimmett, Poisson, house-monotone), the sortition
//!   and course-assignment applications, and the verification lab.

pub mod apps;
pub mod bipartite;
pub mod cumulative_rounding;
pub mod dependent_rounding;
pub mod methods;
pub mod model;
pub mod rational;
pub mod rng;
pub mod verify;

pub use model::{Apportionment, PopulationProfile, SeatSequence, StandardQuota};
pub use rational::Rational;
