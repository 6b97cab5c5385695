//! Statistical test harness for the randomized guarantees.
//!
//! All bands are z = 4 standard errors (false-alarm probability around
//! 6e-5 per check), so a full suite stays reliable under repeated runs.
//! Replicates derive their seeds from (seed, replicate index), making
//! every estimate reproducible and independent of thread scheduling.

use crate::bipartite::WeightedBipartiteInstance;
use crate::cumulative_rounding::{build_layered_graph, LayeredGraph};
use crate::dependent_rounding::{enumerate_outcomes, PipageGraph, PipageState, RoundingError};
use crate::methods::{grimmett, poisson_method, SeatSequenceSampler};
use crate::model::{standard_quota, PopulationProfile};
use crate::rational::Rational;
use crate::rng::{derive_rng, derive_seed};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

/// A rounding sampler with the (layered) graph built once; replicates
/// reuse one pipage state and differ only in their derived rng stream.
/// Bits come out edge-major, time-minor, matching the instance's edge
/// order, and are byte-identical to one-shot `dependent_round` /
/// `cumulative_round` calls with the same seed.
struct InstanceSampler {
    single: Option<PipageGraph>,
    layered: Option<LayeredGraph>,
    edge_count: usize,
    rounds: usize,
}

impl InstanceSampler {
    fn new(inst: &WeightedBipartiteInstance) -> Result<Self, RoundingError> {
        inst.validate().map_err(RoundingError::Instance)?;
        let (single, layered) = if inst.rounds() == 1 {
            (
                Some(PipageGraph::from_instance_layer(inst, 1).map_err(RoundingError::Instance)?),
                None,
            )
        } else {
            (None, Some(build_layered_graph(inst).map_err(RoundingError::Instance)?))
        };
        Ok(Self {
            single,
            layered,
            edge_count: inst.graph().edge_count(),
            rounds: inst.rounds(),
        })
    }

    fn pipage(&self) -> &PipageGraph {
        match (&self.single, &self.layered) {
            (Some(g), _) => g,
            (_, Some(lg)) => lg.pipage(),
            _ => unreachable!(),
        }
    }

    fn bit_count(&self) -> usize {
        self.edge_count * self.rounds
    }

    fn sample_into(&self, state: &mut PipageState<'_>, rep_seed: u64, bits: &mut Vec<bool>) {
        let label = if self.single.is_some() {
            "dependent-round"
        } else {
            "cumulative-round"
        };
        let mut rng = derive_rng(rep_seed, label, &[]);
        state.reset();
        state.run_to_integral(&mut rng);
        let weights = state.weights_scaled();
        let den = state.denominator();
        bits.clear();
        match &self.layered {
            None => bits.extend(weights.iter().map(|&w| w == den)),
            Some(lg) => {
                for e in 0..self.edge_count {
                    for t in 1..=self.rounds {
                        bits.push(weights[lg.copy_edge_id(e, t) as usize] == den);
                    }
                }
            }
        }
    }
}

/// Width of every statistical acceptance band, in standard errors.
pub const Z_BAND: f64 = 4.0;

/// Cap on initial fractional edges for full outcome enumeration.
pub const ENUMERATION_CAP: usize = 12;

#[derive(Debug, Clone, Serialize)]
pub struct StatCheck {
    pub label: String,
    pub estimate: f64,
    pub target: f64,
    /// z * stderr; a zero band demands exact equality.
    pub band: f64,
    pub one_sided: bool,
    pub pass: bool,
}

impl StatCheck {
    fn two_sided(label: String, estimate: f64, target: f64, band: f64) -> Self {
        let pass = (estimate - target).abs() <= band;
        Self {
            label,
            estimate,
            target,
            band,
            one_sided: false,
            pass,
        }
    }

    fn one_sided_upper(label: String, estimate: f64, target: f64, band: f64) -> Self {
        let pass = estimate <= target + band;
        Self {
            label,
            estimate,
            target,
            band,
            one_sided: true,
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StatReport {
    pub samples: u64,
    pub seed: u64,
    pub checks: Vec<StatCheck>,
    pub pass: bool,
}

impl StatReport {
    fn new(samples: u64, seed: u64, checks: Vec<StatCheck>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            samples,
            seed,
            checks,
            pass,
        }
    }

    pub fn first_failure(&self) -> Option<&StatCheck> {
        self.checks.iter().find(|c| !c.pass)
    }
}

fn bernoulli_band(p: f64, m: u64) -> f64 {
    Z_BAND * (p * (1.0 - p) / m as f64).sqrt()
}

/// Empirical means of a seeded boolean sampler against target
/// probabilities. The sampler maps a derived replicate seed to one bit
/// vector aligned with `targets`.
pub fn stat_marginals<F>(sampler: F, targets: &[(String, f64)], m: u64, seed: u64) -> StatReport
where
    F: Fn(u64) -> Vec<bool> + Sync,
{
    let counts = (0..m)
        .into_par_iter()
        .fold(
            || vec![0u64; targets.len()],
            |mut acc, rep| {
                let bits = sampler(derive_seed(seed, "marginal-replicate", &rep.to_le_bytes()));
                debug_assert_eq!(bits.len(), targets.len());
                for (slot, &b) in acc.iter_mut().zip(&bits) {
                    *slot += u64::from(b);
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; targets.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let checks = targets
        .iter()
        .zip(&counts)
        .map(|((label, target), &count)| {
            let estimate = count as f64 / m as f64;
            StatCheck::two_sided(label.clone(), estimate, *target, bernoulli_band(*target, m))
        })
        .collect();
    StatReport::new(m, seed, checks)
}

/// Marginal checks for every (edge, t) of an instance under the
/// appropriate rounding (plain dependent rounding for single-round
/// instances, cumulative rounding otherwise).
pub fn stat_instance_marginals(
    inst: &WeightedBipartiteInstance,
    m: u64,
    seed: u64,
) -> Result<StatReport, RoundingError> {
    let sampler = InstanceSampler::new(inst)?;
    let mut targets = Vec::new();
    for e in 0..inst.graph().edge_count() {
        let (a, b) = inst.graph().edge_name(e);
        for t in 1..=inst.rounds() {
            let w = inst.weight(e, t).to_f64().expect("weight fits f64");
            targets.push((format!("E[X {a}-{b} t={t}]"), w));
        }
    }
    let counts = (0..m)
        .into_par_iter()
        .fold(
            || {
                (
                    PipageState::new(sampler.pipage()),
                    Vec::new(),
                    vec![0u64; sampler.bit_count()],
                )
            },
            |(mut state, mut bits, mut acc), rep| {
                let rep_seed = derive_seed(seed, "marginal-replicate", &rep.to_le_bytes());
                sampler.sample_into(&mut state, rep_seed, &mut bits);
                for (slot, &b) in acc.iter_mut().zip(&bits) {
                    *slot += u64::from(b);
                }
                (state, bits, acc)
            },
        )
        .map(|(_, _, acc)| acc)
        .reduce(
            || vec![0u64; sampler.bit_count()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let checks = targets
        .iter()
        .zip(&counts)
        .map(|((label, target), &count)| {
            let estimate = count as f64 / m as f64;
            StatCheck::two_sided(label.clone(), estimate, *target, bernoulli_band(*target, m))
        })
        .collect();
    Ok(StatReport::new(m, seed, checks))
}

/// Mask histograms of incident-edge bits per (vertex, t); enough to read
/// off any joint all-ones / all-zeros frequency afterwards.
type MaskHistogram = HashMap<(usize, usize), Vec<u64>>;

const MAX_HISTOGRAM_DEGREE: usize = 16;

/// One-sided negative-correlation falsification tests: for every vertex,
/// every incident edge subset of size 2 or 3, and every t, the joint
/// all-ones probability must not exceed the product of the weights (and
/// symmetrically for all-zeros), up to the 4-sigma band.
pub fn stat_negcorr(
    inst: &WeightedBipartiteInstance,
    m: u64,
    seed: u64,
) -> Result<StatReport, RoundingError> {
    let sampler = InstanceSampler::new(inst)?;
    let rounds = inst.rounds();
    let incident: Vec<Vec<usize>> = (0..inst.graph().node_count())
        .map(|idx| inst.graph().incident(inst.graph().node_ref(idx)))
        .collect();

    let zero = || -> MaskHistogram {
        let mut h = HashMap::new();
        for (v, edges) in incident.iter().enumerate() {
            if edges.len() >= 2 && edges.len() <= MAX_HISTOGRAM_DEGREE {
                for t in 1..=rounds {
                    h.insert((v, t), vec![0u64; 1 << edges.len()]);
                }
            }
        }
        h
    };

    let hist = (0..m)
        .into_par_iter()
        .fold(
            || (PipageState::new(sampler.pipage()), Vec::new(), zero()),
            |(mut state, mut bits, mut acc), rep| {
                let rep_seed = derive_seed(seed, "negcorr-replicate", &rep.to_le_bytes());
                sampler.sample_into(&mut state, rep_seed, &mut bits);
                for ((v, t), slots) in acc.iter_mut() {
                    let mut mask = 0usize;
                    for (bit, &e) in incident[*v].iter().enumerate() {
                        mask |= usize::from(bits[e * rounds + (*t - 1)]) << bit;
                    }
                    slots[mask] += 1;
                }
                (state, bits, acc)
            },
        )
        .map(|(_, _, acc)| acc)
        .reduce(zero, |mut a, b| {
            for (key, slots) in b {
                let acc = a.get_mut(&key).expect("same keys");
                for (x, y) in acc.iter_mut().zip(slots) {
                    *x += y;
                }
            }
            a
        });

    let band = Z_BAND * (1.0 / (4.0 * m as f64)).sqrt();
    let mut checks = Vec::new();
    let mut keys: Vec<&(usize, usize)> = hist.keys().collect();
    keys.sort();
    for &(v, t) in keys {
        let slots = &hist[&(v, t)];
        let edges = &incident[v];
        let name = inst.graph().node_name(inst.graph().node_ref(v));
        for subset in 1u32..(1 << edges.len()) {
            let size = subset.count_ones();
            if !(2..=3).contains(&size) {
                continue;
            }
            let mut ones_target = 1.0;
            let mut zeros_target = 1.0;
            for (bit, &e) in edges.iter().enumerate() {
                if subset & (1 << bit) != 0 {
                    let w = inst.weight(e, t).to_f64().expect("weight fits f64");
                    ones_target *= w;
                    zeros_target *= 1.0 - w;
                }
            }
            let mut ones = 0u64;
            let mut zeros = 0u64;
            for (mask, &count) in slots.iter().enumerate() {
                if mask as u32 & subset == subset {
                    ones += count;
                }
                if mask as u32 & subset == 0 {
                    zeros += count;
                }
            }
            checks.push(StatCheck::one_sided_upper(
                format!("P[all up] {name} t={t} S={subset:b}"),
                ones as f64 / m as f64,
                ones_target,
                band,
            ));
            checks.push(StatCheck::one_sided_upper(
                format!("P[all down] {name} t={t} S={subset:b}"),
                zeros as f64 / m as f64,
                zeros_target,
                band,
            ));
        }
    }
    Ok(StatReport::new(m, seed, checks))
}

/// Which randomized apportionment method an ex ante check samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    Grimmett,
    Poisson,
    HouseMonotone,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Grimmett => "grimmett",
            MethodKind::Poisson => "poisson",
            MethodKind::HouseMonotone => "house-monotone",
        }
    }

    /// Methods that satisfy quota have seats pinned to floor/ceiling, so
    /// the per-state variance under the null is known exactly.
    fn quota_bound(self) -> bool {
        !matches!(self, MethodKind::Poisson)
    }
}

/// Mean seats per state over `m` seeded runs against the standard quotas.
pub fn stat_exante(
    kind: MethodKind,
    profile: &PopulationProfile,
    h: u64,
    m: u64,
    seed: u64,
) -> StatReport {
    let n = profile.len();
    let (sums, squares) = (0..m)
        .into_par_iter()
        .fold(
            || (vec![0u64; n], vec![0u128; n]),
            |(mut sums, mut squares), rep| {
                let rep_seed = derive_seed(seed, "exante-replicate", &rep.to_le_bytes());
                let a = match kind {
                    MethodKind::Grimmett => grimmett(profile, h, rep_seed),
                    MethodKind::Poisson => poisson_method(profile, h, rep_seed),
                    MethodKind::HouseMonotone => {
                        crate::methods::house_monotone_method(profile, h, rep_seed)
                    }
                };
                for (i, slot) in sums.iter_mut().enumerate() {
                    *slot += u64::from(a.seat(i));
                    squares[i] += u128::from(a.seat(i)) * u128::from(a.seat(i));
                }
                (sums, squares)
            },
        )
        .reduce(
            || (vec![0u64; n], vec![0u128; n]),
            |(mut s1, mut q1), (s2, q2)| {
                for i in 0..n {
                    s1[i] += s2[i];
                    q1[i] += q2[i];
                }
                (s1, q1)
            },
        );
    let quotas = standard_quota(profile, h);
    let checks = (0..n)
        .map(|i| {
            let target = quotas.value(i).to_f64().expect("quota fits f64");
            let estimate = sums[i] as f64 / m as f64;
            let variance = if kind.quota_bound() {
                // Seats are floor(q) + Bernoulli(frac(q)).
                let r = crate::rational::frac_part(quotas.value(i))
                    .to_f64()
                    .expect("fraction fits f64");
                r * (1.0 - r)
            } else {
                let mean = estimate;
                (squares[i] as f64 / m as f64 - mean * mean).max(0.0)
            };
            let band = Z_BAND * (variance / m as f64).sqrt();
            StatCheck::two_sided(
                format!("E[seats {i}] {} h={h}", kind.name()),
                estimate,
                target,
                band,
            )
        })
        .collect();
    StatReport::new(m, seed, checks)
}

/// Position-wise marginals of the sampled finite seat sequence: the
/// probability that seat `h` goes to state `i` must be `p_i / P`.
pub fn stat_position_marginals(profile: &PopulationProfile, m: u64, seed: u64) -> StatReport {
    let n = profile.len();
    let total = profile.total() as usize;
    let sampler = SeatSequenceSampler::new(profile);
    let counts = (0..m)
        .into_par_iter()
        .fold(
            || (PipageState::new(sampler.pipage()), vec![0u64; n * total]),
            |(mut state, mut acc), rep| {
                let rep_seed = derive_seed(seed, "position-replicate", &rep.to_le_bytes());
                let entries = sampler.sample_with(&mut state, rep_seed);
                for (pos, &state_idx) in entries.iter().enumerate() {
                    acc[pos * n + state_idx as usize] += 1;
                }
                (state, acc)
            },
        )
        .map(|(_, acc)| acc)
        .reduce(
            || vec![0u64; n * total],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let mut checks = Vec::with_capacity(n * total);
    for pos in 0..total {
        for i in 0..n {
            let target = profile.population(i) as f64 / profile.total() as f64;
            let estimate = counts[pos * n + i] as f64 / m as f64;
            checks.push(StatCheck::two_sided(
                format!("P[seat {} -> state {i}]", pos + 1),
                estimate,
                target,
                bernoulli_band(target, m),
            ));
        }
    }
    StatReport::new(m, seed, checks)
}

/// Exact-distribution certificate from full outcome enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct ExactCertificate {
    pub fractional_edges: usize,
    pub outcomes: usize,
    pub probabilities_sum_to_one: bool,
    pub marginals_exact: bool,
    pub degree_preservation_always: bool,
    pub negative_correlation_exact: bool,
    pub pass: bool,
}

/// Enumerate the full outcome distribution of rounding `inst` (the
/// layered graph's distribution when `T > 1`) and check the guarantees
/// exactly, with no sampling error. Returns `None` when the instance has
/// more than [`ENUMERATION_CAP`] fractional edges.
pub fn exact_checks(
    inst: &WeightedBipartiteInstance,
) -> Result<Option<ExactCertificate>, RoundingError> {
    inst.validate().map_err(RoundingError::Instance)?;
    let graph = if inst.rounds() == 1 {
        PipageGraph::from_instance_layer(inst, 1).map_err(RoundingError::Instance)?
    } else {
        build_layered_graph(inst)
            .map_err(RoundingError::Instance)?
            .pipage()
            .clone()
    };
    let fractional_edges = graph.initial_fractional_count();
    if fractional_edges > ENUMERATION_CAP {
        return Ok(None);
    }
    let leaves = enumerate_outcomes(&graph, ENUMERATION_CAP)?;
    let den = BigInt::from(graph.denominator());
    let weight_of =
        |e: usize| BigRational::new(BigInt::from(graph.initial_weights()[e]), den.clone());

    let total: BigRational = leaves.iter().map(|(_, p)| p.clone()).sum();
    let probabilities_sum_to_one = total.is_one();

    let mut marginals_exact = true;
    for e in 0..graph.edge_count() {
        let mean: BigRational = leaves
            .iter()
            .filter(|(bits, _)| bits[e])
            .map(|(_, p)| p.clone())
            .sum();
        marginals_exact &= mean == weight_of(e);
    }

    // Degree preservation at every leaf with positive probability.
    let mut degree_preservation_always = true;
    let mut frac_deg = vec![BigRational::zero(); graph.node_count()];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); graph.node_count()];
    for (e, &(u, v)) in graph.ends().iter().enumerate() {
        frac_deg[u as usize] += weight_of(e);
        frac_deg[v as usize] += weight_of(e);
        incident[u as usize].push(e);
        incident[v as usize].push(e);
    }
    for (bits, p) in &leaves {
        if p.is_zero() {
            continue;
        }
        for v in 0..graph.node_count() {
            let realized: i64 = incident[v].iter().map(|&e| i64::from(bits[e])).sum();
            let realized = BigRational::from(BigInt::from(realized));
            let floor = frac_deg[v].floor();
            let ceil = frac_deg[v].ceil();
            degree_preservation_always &= realized == floor || realized == ceil;
        }
    }

    // Exact negative correlation for incident subsets of size 2 and 3.
    let mut negative_correlation_exact = true;
    for v in 0..graph.node_count() {
        let edges = &incident[v];
        if edges.len() < 2 || edges.len() > MAX_HISTOGRAM_DEGREE {
            continue;
        }
        for subset in 1u32..(1 << edges.len()) {
            if !(2..=3).contains(&subset.count_ones()) {
                continue;
            }
            let members: Vec<usize> = edges
                .iter()
                .enumerate()
                .filter(|(bit, _)| subset & (1 << bit) != 0)
                .map(|(_, &e)| e)
                .collect();
            let p_ones: BigRational = leaves
                .iter()
                .filter(|(bits, _)| members.iter().all(|&e| bits[e]))
                .map(|(_, p)| p.clone())
                .sum();
            let p_zeros: BigRational = leaves
                .iter()
                .filter(|(bits, _)| members.iter().all(|&e| !bits[e]))
                .map(|(_, p)| p.clone())
                .sum();
            let ones_target: BigRational = members.iter().map(|&e| weight_of(e)).product();
            let zeros_target: BigRational = members
                .iter()
                .map(|&e| BigRational::one() - weight_of(e))
                .product();
            negative_correlation_exact &= p_ones <= ones_target && p_zeros <= zeros_target;
        }
    }

    let pass = probabilities_sum_to_one
        && marginals_exact
        && degree_preservation_always
        && negative_correlation_exact;
    Ok(Some(ExactCertificate {
        fractional_edges,
        outcomes: leaves.len(),
        probabilities_sum_to_one,
        marginals_exact,
        degree_preservation_always,
        negative_correlation_exact,
        pass,
    }))
}

/// Convenience: weight of an instance edge as f64 (for stat targets).
pub fn weight_f64(w: &Rational) -> f64 {
    w.to_f64().expect("weight fits f64")
}
