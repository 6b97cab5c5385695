//! Cumulative dependent rounding: round `T` weighted copies of a bipartite
//! graph so that, in addition to the per-copy guarantees of dependent
//! rounding, every vertex's realized degree summed over any prefix of
//! copies is the floor or ceiling of its summed fractional degree.
//!
//! The construction builds one layered graph. For each original node `v`
//! and each `t`, it creates four nodes `v@t`, `v@t:bar1`, `v@t:bar2`, and a
//! carry node `v@carry{t}` (plus `v@carry0`), wires copy edges `{a@t, b@t}`
//! with the original weights, and adds per-(v, t) auxiliary edges:
//!
//! * `v@carry{t-1} - v@t:bar1` with weight `frac(C_v^{t-1})`,
//! * `v@t:bar1 - v@carry{t}` with weight `1 - frac(C_v^t)`,
//! * `v@t - v@t:bar2` with weight `1 - frac(d_v^t)`,
//! * `v@t:bar2 - v@t:bar1` with weight `frac(d_v^t)`,
//!
//! where `d_v^t` is the fractional degree of `v` at `t` and `C_v^t` the
//! cumulative sum through `t`. Ordinary dependent rounding of the layered
//! graph then yields the cumulative guarantees; the copy-edge bits are the
//! result, and the auxiliary bits encode the rounding events (degree up or
//! down at `t`, cumulative up or down through `t`), which the audit checks
//! against the realized degrees on every run.

use crate::bipartite::{InstanceError, RoundingOutcome, WeightedBipartiteInstance};
use crate::dependent_rounding::{scale_weight, PipageGraph, PipageState, RoundingError};
use crate::rational::rat;
use crate::rng::derive_rng;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Ids of the four auxiliary edges for one `(v, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuxEdges {
    /// `v@carry{t-1} - v@t:bar1`: rounded up iff the cumulative degree
    /// through `t-1` was rounded up.
    pub carry_in: u32,
    /// `v@t:bar1 - v@carry{t}`: rounded up iff the cumulative degree
    /// through `t` is rounded down.
    pub carry_out: u32,
    /// `v@t - v@t:bar2`: rounded up iff the degree at `t` is rounded down.
    pub degree_down: u32,
    /// `v@t:bar2 - v@t:bar1`: rounded up iff the degree at `t` is rounded up.
    pub degree_up: u32,
}

/// The constructed layered graph for one instance, with back-references
/// from layered edges to the original `(edge, t)` pairs.
#[derive(Debug, Clone)]
pub struct LayeredGraph {
    pipage: PipageGraph,
    rounds: usize,
    orig_nodes: usize,
    a_count: usize,
    orig_edges: usize,
    /// d_scaled[v][t-1], over the instance's common denominator.
    d_scaled: Vec<Vec<i64>>,
    /// cum_scaled[v][t], with entry 0 equal to 0.
    cum_scaled: Vec<Vec<i128>>,
    node_names: Vec<String>,
}

impl LayeredGraph {
    fn stride(&self) -> usize {
        4 * self.rounds + 1
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn node_count(&self) -> usize {
        self.pipage.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.pipage.edge_count()
    }

    pub fn pipage(&self) -> &PipageGraph {
        &self.pipage
    }

    pub fn denominator(&self) -> i64 {
        self.pipage.denominator()
    }

    /// Layered node id of the copy of `v` at time `t` (1-based).
    pub fn copy_node(&self, v: usize, t: usize) -> usize {
        v * self.stride() + 4 * t - 3
    }

    pub fn onebar_node(&self, v: usize, t: usize) -> usize {
        v * self.stride() + 4 * t - 2
    }

    pub fn twobar_node(&self, v: usize, t: usize) -> usize {
        v * self.stride() + 4 * t - 1
    }

    /// Carry node after time `t` (0-based `t` up to `T`).
    pub fn carry_node(&self, v: usize, t: usize) -> usize {
        v * self.stride() + 4 * t
    }

    /// Layered edge id of the copy of original edge `e` at time `t`.
    pub fn copy_edge_id(&self, e: usize, t: usize) -> u32 {
        ((t - 1) * self.orig_edges + e) as u32
    }

    pub fn aux_edge_ids(&self, v: usize, t: usize) -> AuxEdges {
        let base = (self.rounds * self.orig_edges + (v * self.rounds + (t - 1)) * 4) as u32;
        AuxEdges {
            carry_in: base,
            carry_out: base + 1,
            degree_down: base + 2,
            degree_up: base + 3,
        }
    }

    pub fn node_name(&self, id: usize) -> &str {
        &self.node_names[id]
    }

    /// Scaled fractional degree of original node `v` at `t`.
    pub fn degree_scaled(&self, v: usize, t: usize) -> i64 {
        self.d_scaled[v][t - 1]
    }

    /// Scaled cumulative fractional degree of `v` through `t`.
    pub fn cumulative_scaled(&self, v: usize, t: usize) -> i128 {
        self.cum_scaled[v][t]
    }

    /// Side of the layered bipartition a node falls on; every edge joins
    /// the two sides.
    pub fn side_one(&self, id: usize) -> bool {
        let v = id / self.stride();
        let r = id % self.stride();
        let in_a = v < self.a_count;
        if r == 0 {
            return !in_a; // carry node after t = 0
        }
        match r % 4 {
            1 => in_a,  // copy
            2 => in_a,  // bar1
            3 => !in_a, // bar2
            _ => !in_a, // carry after t >= 1
        }
    }

    /// Export as a plain single-round weighted instance (for inspection
    /// and the JSON graph format).
    pub fn to_instance(&self) -> WeightedBipartiteInstance {
        let mut a_ids = Vec::new();
        let mut b_ids = Vec::new();
        let mut side_index = vec![(false, 0u32); self.node_count()];
        for id in 0..self.node_count() {
            if self.side_one(id) {
                side_index[id] = (true, a_ids.len() as u32);
                a_ids.push(id);
            } else {
                side_index[id] = (false, b_ids.len() as u32);
                b_ids.push(id);
            }
        }
        let den = i128::from(self.denominator());
        let mut edges = Vec::with_capacity(self.edge_count());
        let mut weights = Vec::with_capacity(self.edge_count());
        for (e, &(u, v)) in self.pipage.ends().iter().enumerate() {
            let (u_side, u_idx) = side_index[u as usize];
            let (_, v_idx) = side_index[v as usize];
            let (ai, bi) = if u_side { (u_idx, v_idx) } else { (v_idx, u_idx) };
            edges.push((ai, bi));
            weights.push(vec![rat(
                i128::from(self.pipage.initial_weights()[e]),
                den,
            )]);
        }
        let graph = crate::bipartite::BipartiteGraph::new(
            a_ids.iter().map(|&id| self.node_names[id].clone()).collect(),
            b_ids.iter().map(|&id| self.node_names[id].clone()).collect(),
            edges,
        )
        .expect("layered export is well-formed");
        WeightedBipartiteInstance::new(graph, 1, weights).expect("layered export is well-formed")
    }
}

/// Build the layered graph and verify its fractional-degree table.
///
/// Node and edge counts are exactly `(1 + 4T) * (|A| + |B|)` and
/// `T*|E| + 4T*(|A| + |B|)`. Construction panics if the built graph's
/// fractional degrees deviate anywhere from the expected table; that check
/// runs on every build.
pub fn build_layered_graph(
    inst: &WeightedBipartiteInstance,
) -> Result<LayeredGraph, InstanceError> {
    inst.validate()?;
    let den = inst.common_denominator()?;
    let big_den = i128::from(den);
    let rounds = inst.rounds();
    let a_count = inst.graph().a_count();
    let m = inst.graph().node_count();
    let e_count = inst.graph().edge_count();
    let stride = 4 * rounds + 1;
    let n_nodes = m * stride;

    // Scaled per-layer and cumulative fractional degrees.
    let mut d_scaled = vec![vec![0i64; rounds]; m];
    for (e, &(a, b)) in inst.graph().edges().iter().enumerate() {
        for t in 1..=rounds {
            let w = scale_weight(inst.weight(e, t), den);
            d_scaled[a as usize][t - 1] += w;
            d_scaled[a_count + b as usize][t - 1] += w;
        }
    }
    let mut cum_scaled = vec![vec![0i128; rounds + 1]; m];
    for v in 0..m {
        for t in 1..=rounds {
            cum_scaled[v][t] = cum_scaled[v][t - 1] + i128::from(d_scaled[v][t - 1]);
        }
    }

    let copy_node = |v: usize, t: usize| v * stride + 4 * t - 3;
    let onebar_node = |v: usize, t: usize| v * stride + 4 * t - 2;
    let twobar_node = |v: usize, t: usize| v * stride + 4 * t - 1;
    let carry_node = |v: usize, t: usize| v * stride + 4 * t;
    let frac = |x: i128| -> i64 { (x.rem_euclid(big_den)) as i64 };

    let mut ends = Vec::with_capacity(rounds * e_count + 4 * rounds * m);
    let mut weights = Vec::with_capacity(ends.capacity());
    for t in 1..=rounds {
        for (e, &(a, b)) in inst.graph().edges().iter().enumerate() {
            ends.push((
                copy_node(a as usize, t) as u32,
                copy_node(a_count + b as usize, t) as u32,
            ));
            weights.push(scale_weight(inst.weight(e, t), den));
        }
    }
    for v in 0..m {
        for t in 1..=rounds {
            let d = i128::from(d_scaled[v][t - 1]);
            ends.push((carry_node(v, t - 1) as u32, onebar_node(v, t) as u32));
            weights.push(frac(cum_scaled[v][t - 1]));
            ends.push((onebar_node(v, t) as u32, carry_node(v, t) as u32));
            weights.push(den - frac(cum_scaled[v][t]));
            ends.push((copy_node(v, t) as u32, twobar_node(v, t) as u32));
            weights.push(den - frac(d));
            ends.push((twobar_node(v, t) as u32, onebar_node(v, t) as u32));
            weights.push(frac(d));
        }
    }
    debug_assert_eq!(ends.len(), rounds * e_count + 4 * rounds * m);

    let mut node_names = vec![String::new(); n_nodes];
    for v in 0..m {
        let name = if v < a_count {
            inst.graph().a_name(v)
        } else {
            inst.graph().b_name(v - a_count)
        };
        node_names[carry_node(v, 0)] = format!("{name}@carry0");
        for t in 1..=rounds {
            node_names[copy_node(v, t)] = format!("{name}@t{t}");
            node_names[onebar_node(v, t)] = format!("{name}@t{t}:bar1");
            node_names[twobar_node(v, t)] = format!("{name}@t{t}:bar2");
            node_names[carry_node(v, t)] = format!("{name}@carry{t}");
        }
    }

    let pipage = PipageGraph::from_scaled(n_nodes, ends, weights, den);
    let layered = LayeredGraph {
        pipage,
        rounds,
        orig_nodes: m,
        a_count,
        orig_edges: e_count,
        d_scaled,
        cum_scaled,
        node_names,
    };
    verify_fractional_degree_table(&layered);
    Ok(layered)
}

/// The fractional degrees of the constructed graph, checked exactly on
/// every build: `deg(v@t) = floor(d_v^t) + 1`, `deg(v@t:bar1) =
/// floor(C_v^t) - floor(C_v^{t-1}) - floor(d_v^t) + 1`, `deg(v@t:bar2) = 1`,
/// `deg(v@carry{t}) = 1` for `1 <= t < T`, and `deg(v@carry0) = 0`. All of
/// these are integers; the only node whose fractional degree may be
/// fractional is the terminal carry `v@carryT`, whose degree is
/// `1 - frac(C_v^T)`.
fn verify_fractional_degree_table(lg: &LayeredGraph) {
    let den = i128::from(lg.denominator());
    let mut deg = vec![0i128; lg.node_count()];
    for (e, &(u, v)) in lg.pipage.ends().iter().enumerate() {
        let w = i128::from(lg.pipage.initial_weights()[e]);
        deg[u as usize] += w;
        deg[v as usize] += w;
    }
    for v in 0..lg.orig_nodes {
        for t in 1..=lg.rounds {
            let d = i128::from(lg.d_scaled[v][t - 1]);
            let c_now = lg.cum_scaled[v][t];
            let c_prev = lg.cum_scaled[v][t - 1];
            let expect_copy = (d.div_euclid(den) + 1) * den;
            assert_eq!(
                deg[lg.copy_node(v, t)],
                expect_copy,
                "degree table: {}",
                lg.node_name(lg.copy_node(v, t))
            );
            let expect_onebar =
                (c_now.div_euclid(den) - c_prev.div_euclid(den) - d.div_euclid(den) + 1) * den;
            assert_eq!(
                deg[lg.onebar_node(v, t)],
                expect_onebar,
                "degree table: {}",
                lg.node_name(lg.onebar_node(v, t))
            );
            assert_eq!(
                deg[lg.twobar_node(v, t)],
                den,
                "degree table: {}",
                lg.node_name(lg.twobar_node(v, t))
            );
            if t < lg.rounds {
                assert_eq!(
                    deg[lg.carry_node(v, t)],
                    den,
                    "degree table: {}",
                    lg.node_name(lg.carry_node(v, t))
                );
            }
        }
        assert_eq!(deg[lg.carry_node(v, 0)], 0, "degree table: carry0 of {v}");
        let c_total = lg.cum_scaled[v][lg.rounds];
        assert_eq!(
            deg[lg.carry_node(v, lg.rounds)],
            den - c_total.rem_euclid(den),
            "terminal carry of {v}"
        );
    }
}

/// Round all `T` copies with the cumulative guarantees. The outcome's
/// per-(edge, t) bits are the copy-edge bits of one dependent rounding of
/// the layered graph; the full layered bit vector rides along for the
/// audit.
pub fn cumulative_round(
    inst: &WeightedBipartiteInstance,
    seed: u64,
) -> Result<RoundingOutcome, RoundingError> {
    let lg = build_layered_graph(inst)?;
    let mut rng = derive_rng(seed, "cumulative-round", &[]);
    let layered_bits = lg.pipage().sample(&mut rng);
    extract_outcome(inst, &lg, &layered_bits)
}

fn extract_outcome(
    inst: &WeightedBipartiteInstance,
    lg: &LayeredGraph,
    layered_bits: &[bool],
) -> Result<RoundingOutcome, RoundingError> {
    let bits = (0..inst.graph().edge_count())
        .map(|e| {
            (1..=inst.rounds())
                .map(|t| layered_bits[lg.copy_edge_id(e, t) as usize])
                .collect()
        })
        .collect();
    Ok(RoundingOutcome::new(inst, bits)?.with_layered_bits(layered_bits.to_vec()))
}

/// One rounding violation found by the audit.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub check: String,
    pub subject: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct AuditReport {
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    fn flag(&mut self, check: &str, subject: String, detail: String) {
        self.violations.push(Violation {
            check: check.to_string(),
            subject,
            detail,
        });
    }
}

/// Hard-check an outcome against its instance: per-time degree
/// preservation, cumulative degree preservation for every prefix (exact
/// equality whenever the fractional quantity is an integer), and, when the
/// outcome carries the layered bit vector, the consistency of every
/// auxiliary bit with the rounding event it encodes.
pub fn audit_outcome(
    inst: &WeightedBipartiteInstance,
    outcome: &RoundingOutcome,
) -> Result<AuditReport, RoundingError> {
    let lg = build_layered_graph(inst)?;
    if outcome.rounds() != inst.rounds() || outcome.bits().len() != inst.graph().edge_count() {
        return Err(RoundingError::Instance(InstanceError::OutcomeShapeMismatch));
    }
    let den = i128::from(lg.denominator());
    let mut report = AuditReport::default();
    let m = inst.graph().node_count();

    for v in 0..m {
        let node = inst.graph().node_ref(v);
        let name = inst.graph().node_name(node).to_string();
        let mut cum_real: i128 = 0;
        for t in 1..=inst.rounds() {
            let realized = i128::from(outcome.degree(node, t));
            cum_real += realized;
            let d = i128::from(lg.degree_scaled(v, t));
            let floor = d.div_euclid(den);
            let ceil = if d % den == 0 { floor } else { floor + 1 };
            if realized < floor || realized > ceil {
                report.flag(
                    "degree-preservation",
                    format!("{name} t={t}"),
                    format!("realized {realized}, fractional degree {d}/{den}"),
                );
            }
            let c = lg.cumulative_scaled(v, t);
            let cfloor = c.div_euclid(den);
            let cceil = if c % den == 0 { cfloor } else { cfloor + 1 };
            if cum_real < cfloor || cum_real > cceil {
                report.flag(
                    "cumulative-degree-preservation",
                    format!("{name} t<={t}"),
                    format!("realized {cum_real}, cumulative fractional {c}/{den}"),
                );
            }
        }
    }

    if let Some(layered_bits) = outcome.layered_bits.as_deref() {
        audit_layered_bits(inst, &lg, outcome, layered_bits, &mut report);
    }
    Ok(report)
}

fn audit_layered_bits(
    inst: &WeightedBipartiteInstance,
    lg: &LayeredGraph,
    outcome: &RoundingOutcome,
    layered_bits: &[bool],
    report: &mut AuditReport,
) {
    if layered_bits.len() != lg.edge_count() {
        report.flag(
            "layered-bits",
            "witness".to_string(),
            format!(
                "expected {} layered bits, got {}",
                lg.edge_count(),
                layered_bits.len()
            ),
        );
        return;
    }
    let den = i128::from(lg.denominator());
    // Copy bits must agree with the reported outcome.
    for e in 0..inst.graph().edge_count() {
        for t in 1..=inst.rounds() {
            let copy_bit = layered_bits[lg.copy_edge_id(e, t) as usize];
            if copy_bit != outcome.bit(e, t) {
                let (a, b) = inst.graph().edge_name(e);
                report.flag(
                    "copy-bit-consistency",
                    format!("{a}-{b} t={t}"),
                    "outcome bit disagrees with layered witness".to_string(),
                );
            }
        }
    }
    // Weight-0 edges are never rounded up, weight-1 edges always.
    for (e, &w) in lg.pipage().initial_weights().iter().enumerate() {
        if w == 0 && layered_bits[e] {
            report.flag(
                "frozen-edges",
                format!("edge {e}"),
                "zero-weight edge rounded up".to_string(),
            );
        }
        if i128::from(w) == den && !layered_bits[e] {
            report.flag(
                "frozen-edges",
                format!("edge {e}"),
                "unit-weight edge rounded down".to_string(),
            );
        }
    }
    // Auxiliary bits must encode the realized rounding events.
    for v in 0..inst.graph().node_count() {
        let node = inst.graph().node_ref(v);
        let name = inst.graph().node_name(node).to_string();
        let mut cum_prev: i128 = 0;
        for t in 1..=inst.rounds() {
            let aux = lg.aux_edge_ids(v, t);
            let realized = i128::from(outcome.degree(node, t));
            let d = i128::from(lg.degree_scaled(v, t));
            let dfloor = d.div_euclid(den);
            let c_prev = lg.cumulative_scaled(v, t - 1);
            let c_now = lg.cumulative_scaled(v, t);
            let events = [
                (
                    aux.degree_down,
                    realized == dfloor,
                    "degree rounded down at t",
                ),
                (
                    aux.degree_up,
                    realized == dfloor + 1,
                    "degree rounded up at t",
                ),
                (
                    aux.carry_in,
                    cum_prev == c_prev.div_euclid(den) + 1,
                    "cumulative degree rounded up through t-1",
                ),
                (
                    aux.carry_out,
                    cum_prev + realized == c_now.div_euclid(den),
                    "cumulative degree rounded down through t",
                ),
            ];
            for (edge, event, what) in events {
                if layered_bits[edge as usize] != event {
                    report.flag(
                        "interpretation",
                        format!("{name} t={t}"),
                        format!(
                            "bit for \"{what}\" is {}, event is {}",
                            layered_bits[edge as usize], event
                        ),
                    );
                }
            }
            cum_prev += realized;
        }
    }
    // Degree preservation inside the layered graph itself.
    let mut realized_deg = vec![0i128; lg.node_count()];
    let mut frac_deg = vec![0i128; lg.node_count()];
    for (e, &(u, v)) in lg.pipage().ends().iter().enumerate() {
        let w = i128::from(lg.pipage().initial_weights()[e]);
        frac_deg[u as usize] += w;
        frac_deg[v as usize] += w;
        if layered_bits[e] {
            realized_deg[u as usize] += den;
            realized_deg[v as usize] += den;
        }
    }
    for id in 0..lg.node_count() {
        let floor = frac_deg[id].div_euclid(den) * den;
        let ceil = if frac_deg[id] % den == 0 {
            floor
        } else {
            floor + den
        };
        if realized_deg[id] < floor || realized_deg[id] > ceil {
            report.flag(
                "layered-degree-preservation",
                lg.node_name(id).to_string(),
                format!(
                    "realized {}, fractional {}/{den}",
                    realized_deg[id] / den,
                    frac_deg[id]
                ),
            );
        }
    }
}

/// A cumulative rounding that can stop early and resume: pipage halts once
/// all edges in the first `prefix` copies are integral, the residual
/// weights serialize, and a resumed run continues the identical
/// deterministic process.
pub struct CumulativeRounder {
    instance: WeightedBipartiteInstance,
    layered: LayeredGraph,
    seed: u64,
    num: Vec<i64>,
    steps: u64,
}

/// Serializable residue of a suspended rounding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuspendedRounding {
    pub seed: u64,
    pub steps: u64,
    pub denominator: String,
    pub weights: Vec<String>,
    pub instance_digest: String,
}

fn instance_digest(inst: &WeightedBipartiteInstance) -> String {
    let mut h = Sha256::new();
    h.update(inst.to_json().as_bytes());
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

impl CumulativeRounder {
    pub fn new(inst: &WeightedBipartiteInstance, seed: u64) -> Result<Self, RoundingError> {
        let layered = build_layered_graph(inst)?;
        let num = layered.pipage().initial_weights().to_vec();
        Ok(Self {
            instance: inst.clone(),
            layered,
            seed,
            num,
            steps: 0,
        })
    }

    pub fn layered(&self) -> &LayeredGraph {
        &self.layered
    }

    /// The rng positioned after the draws already consumed. One step
    /// consumes exactly one draw, so replaying `steps` draws realigns a
    /// resumed stream.
    fn rng(&self) -> impl RngCore {
        let mut rng = derive_rng(self.seed, "cumulative-round", &[]);
        for _ in 0..self.steps {
            rng.next_u64();
        }
        rng
    }

    fn watch_for_prefix(&self, prefix: usize) -> Vec<bool> {
        let mut watched = vec![false; self.layered.edge_count()];
        for t in 1..=prefix.min(self.layered.rounds()) {
            for e in 0..self.instance.graph().edge_count() {
                watched[self.layered.copy_edge_id(e, t) as usize] = true;
            }
            for v in 0..self.instance.graph().node_count() {
                let aux = self.layered.aux_edge_ids(v, t);
                for id in [aux.carry_in, aux.carry_out, aux.degree_down, aux.degree_up] {
                    watched[id as usize] = true;
                }
            }
        }
        watched
    }

    /// Run pipage only until every edge in the first `prefix` copies is
    /// integral; later layers may stay fractional.
    pub fn run_until_prefix_integral(&mut self, prefix: usize) {
        let mut rng = self.rng();
        let mut state = PipageState::with_weights(self.layered.pipage(), std::mem::take(&mut self.num));
        state.set_watch(self.watch_for_prefix(prefix));
        state.run_until_watched_integral(&mut rng);
        self.steps += state.steps() as u64;
        self.num = state.weights_scaled().to_vec();
    }

    /// Copy-edge bits for `t <= prefix`, if that prefix is integral.
    pub fn prefix_bits(&self, prefix: usize) -> Option<Vec<Vec<bool>>> {
        let den = self.layered.denominator();
        let mut out = Vec::with_capacity(self.instance.graph().edge_count());
        for e in 0..self.instance.graph().edge_count() {
            let mut row = Vec::with_capacity(prefix);
            for t in 1..=prefix {
                let w = self.num[self.layered.copy_edge_id(e, t) as usize];
                if w != 0 && w != den {
                    return None;
                }
                row.push(w == den);
            }
            out.push(row);
        }
        Some(out)
    }

    /// Finish the rounding and extract the full outcome.
    pub fn finish(mut self) -> Result<RoundingOutcome, RoundingError> {
        let mut rng = self.rng();
        let mut state =
            PipageState::with_weights(self.layered.pipage(), std::mem::take(&mut self.num));
        state.run_to_integral(&mut rng);
        let bits = state.bits();
        extract_outcome(&self.instance, &self.layered, &bits)
    }

    pub fn suspend(&self) -> SuspendedRounding {
        SuspendedRounding {
            seed: self.seed,
            steps: self.steps,
            denominator: self.layered.denominator().to_string(),
            weights: self.num.iter().map(|w| w.to_string()).collect(),
            instance_digest: instance_digest(&self.instance),
        }
    }

    pub fn resume(
        inst: &WeightedBipartiteInstance,
        suspended: &SuspendedRounding,
    ) -> Result<Self, RoundingError> {
        let mut rounder = Self::new(inst, suspended.seed)?;
        if instance_digest(inst) != suspended.instance_digest {
            return Err(RoundingError::Instance(InstanceError::OutcomeShapeMismatch));
        }
        let weights: Option<Vec<i64>> = suspended
            .weights
            .iter()
            .map(|w| w.parse::<i64>().ok())
            .collect();
        let weights = weights.filter(|w| w.len() == rounder.layered.edge_count());
        let Some(weights) = weights else {
            return Err(RoundingError::Instance(InstanceError::OutcomeShapeMismatch));
        };
        rounder.num = weights;
        rounder.steps = suspended.steps;
        Ok(rounder)
    }
}
