//! Randomized pipage rounding of a weighted bipartite graph.
//!
//! The procedure repeatedly finds either a cycle or a maximal path of
//! edges with strictly fractional weight, labels its edges alternately
//! "odd" and "even", and shifts weight along it: with probability
//! `beta/(alpha+beta)` all odd weights gain `alpha` and all even weights
//! lose `alpha`, otherwise odd weights lose `beta` and even weights gain
//! `beta`, where `alpha` is the largest shift the first branch allows and
//! `beta` the largest the second allows. Every step drives at least one
//! weight to 0 or 1, each edge's expected weight is unchanged, and once a
//! weight is integral it never moves again. The outcome satisfies marginal
//! distribution, degree preservation, and negative correlation.
//!
//! All weights live on the lattice `k / den` for a common denominator
//! `den`, so the whole procedure runs in exact integer arithmetic; there
//! are no epsilon thresholds anywhere. Structure selection is a
//! deterministic scan (lowest-indexed fractional edge, lowest-indexed
//! extension), so a run is a pure function of the seed.

use crate::bipartite::{InstanceError, RoundingOutcome, WeightedBipartiteInstance};
use crate::rng::{coin, derive_rng};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand_core::RngCore;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoundingError {
    #[error("dependent rounding expects a single-round instance, got T={rounds}")]
    NotSingleRound { rounds: usize },
    #[error("{0}")]
    Instance(#[from] InstanceError),
    #[error("{count} fractional edges exceed the enumeration cap of {cap}")]
    TooManyFractionalEdges { count: usize, cap: usize },
}

/// A bipartite graph with scaled-integer edge weights, ready for pipage
/// rounding. Weights are `weight[e] / den`.
#[derive(Debug, Clone)]
pub struct PipageGraph {
    n_nodes: usize,
    ends: Vec<(u32, u32)>,
    adj: Vec<Vec<u32>>,
    start: Vec<i64>,
    den: i64,
}

impl PipageGraph {
    pub fn from_scaled(n_nodes: usize, ends: Vec<(u32, u32)>, start: Vec<i64>, den: i64) -> Self {
        assert_eq!(ends.len(), start.len());
        assert!(den > 0);
        debug_assert!(start.iter().all(|&w| (0..=den).contains(&w)));
        let mut adj = vec![Vec::new(); n_nodes];
        for (e, &(u, v)) in ends.iter().enumerate() {
            adj[u as usize].push(e as u32);
            adj[v as usize].push(e as u32);
        }
        Self {
            n_nodes,
            ends,
            adj,
            start,
            den,
        }
    }

    /// Scale one time layer of an instance onto its common denominator.
    /// A-side nodes come first in the dense numbering.
    pub fn from_instance_layer(
        inst: &WeightedBipartiteInstance,
        t: usize,
    ) -> Result<Self, InstanceError> {
        let den = inst.common_denominator()?;
        let a_count = inst.graph().a_count() as u32;
        let ends = inst
            .graph()
            .edges()
            .iter()
            .map(|&(a, b)| (a, a_count + b))
            .collect();
        let start = (0..inst.graph().edge_count())
            .map(|e| scale_weight(inst.weight(e, t), den))
            .collect();
        Ok(Self::from_scaled(
            inst.graph().node_count(),
            ends,
            start,
            den,
        ))
    }

    pub fn node_count(&self) -> usize {
        self.n_nodes
    }

    pub fn edge_count(&self) -> usize {
        self.ends.len()
    }

    pub fn ends(&self) -> &[(u32, u32)] {
        &self.ends
    }

    pub fn denominator(&self) -> i64 {
        self.den
    }

    pub fn initial_weights(&self) -> &[i64] {
        &self.start
    }

    pub fn initial_fractional_count(&self) -> usize {
        self.start
            .iter()
            .filter(|&&w| w > 0 && w < self.den)
            .count()
    }

    /// One full rounding run; returns the rounded-up bit per edge.
    pub fn sample(&self, rng: &mut impl RngCore) -> Vec<bool> {
        let mut state = PipageState::new(self);
        state.run_to_integral(rng);
        state.bits()
    }
}

pub(crate) fn scale_weight(w: &crate::rational::Rational, den: i64) -> i64 {
    let scaled = w * crate::rational::from_int(i128::from(den));
    debug_assert!(scaled.is_integer(), "common denominator must clear {w}");
    scaled.to_integer() as i64
}

/// A cycle or maximal path of fractional edges, listed in walk order.
/// Edges at even list positions carry the "odd" label, odd positions the
/// "even" label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Structure {
    Cycle(Vec<u32>),
    Path(Vec<u32>),
}

impl Structure {
    pub fn edges(&self) -> &[u32] {
        match self {
            Structure::Cycle(e) | Structure::Path(e) => e,
        }
    }

    pub fn is_cycle(&self) -> bool {
        matches!(self, Structure::Cycle(_))
    }
}

/// Mutable weights of one in-flight rounding run.
#[derive(Debug, Clone)]
pub struct PipageState<'g> {
    graph: &'g PipageGraph,
    num: Vec<i64>,
    cursor: usize,
    steps: usize,
    // walk scratch, reused across steps
    pos: Vec<u32>,
    touched: Vec<u32>,
    walk_nodes: Vec<u32>,
    walk_edges: Vec<u32>,
    structure_is_cycle: bool,
    // optional early-stop bookkeeping
    watched: Option<Vec<bool>>,
    watched_fractional: usize,
}

impl<'g> PipageState<'g> {
    pub fn new(graph: &'g PipageGraph) -> Self {
        Self {
            graph,
            num: graph.start.clone(),
            cursor: 0,
            steps: 0,
            pos: vec![0; graph.n_nodes],
            touched: Vec::new(),
            walk_nodes: Vec::new(),
            walk_edges: Vec::new(),
            structure_is_cycle: false,
            watched: None,
            watched_fractional: 0,
        }
    }

    /// Rebuild a state from mid-run weights (used when resuming a
    /// suspended rounding).
    pub fn with_weights(graph: &'g PipageGraph, num: Vec<i64>) -> Self {
        assert_eq!(num.len(), graph.edge_count());
        let mut s = Self::new(graph);
        s.num = num;
        s
    }

    /// Reset to the graph's initial weights for a fresh run, keeping the
    /// scratch allocations.
    pub fn reset(&mut self) {
        self.num.copy_from_slice(&self.graph.start);
        self.cursor = 0;
        self.steps = 0;
        for &n in &self.touched {
            self.pos[n as usize] = 0;
        }
        self.touched.clear();
        self.walk_nodes.clear();
        self.walk_edges.clear();
        if self.watched.is_some() {
            self.recount_watched();
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn denominator(&self) -> i64 {
        self.graph.den
    }

    pub fn weights_scaled(&self) -> &[i64] {
        &self.num
    }

    #[inline]
    fn is_frac(&self, e: usize) -> bool {
        let w = self.num[e];
        w > 0 && w < self.graph.den
    }

    pub fn is_integral(&self) -> bool {
        (0..self.num.len()).all(|e| !self.is_frac(e))
    }

    /// Watch a subset of edges; `run_until_watched_integral` stops as soon
    /// as all of them are integral.
    pub fn set_watch(&mut self, watched: Vec<bool>) {
        assert_eq!(watched.len(), self.graph.edge_count());
        self.watched = Some(watched);
        self.recount_watched();
    }

    fn recount_watched(&mut self) {
        let watched = self.watched.as_ref().expect("watch set installed");
        self.watched_fractional = (0..self.num.len())
            .filter(|&e| watched[e] && self.is_frac(e))
            .count();
    }

    pub fn watched_fractional(&self) -> usize {
        self.watched_fractional
    }

    /// Deterministic scan for the next structure: seed on the
    /// lowest-indexed fractional edge, extend depth-first along
    /// lowest-indexed fractional edges until the walk closes into a simple
    /// cycle or both ends are stuck (a maximal path). Returns `None` iff
    /// every weight is integral.
    pub fn find_structure(&mut self) -> Option<Structure> {
        if !self.find_structure_internal() {
            return None;
        }
        let edges = self.walk_edges.clone();
        Some(if self.structure_is_cycle {
            Structure::Cycle(edges)
        } else {
            Structure::Path(edges)
        })
    }

    fn find_structure_internal(&mut self) -> bool {
        let e_count = self.graph.edge_count();
        // Integral weights never become fractional again, so the lowest
        // fractional edge only moves forward.
        while self.cursor < e_count && !self.is_frac(self.cursor) {
            self.cursor += 1;
        }
        if self.cursor == e_count {
            return false;
        }
        for &n in &self.touched {
            self.pos[n as usize] = 0;
        }
        self.touched.clear();
        self.walk_nodes.clear();
        self.walk_edges.clear();

        let e0 = self.cursor as u32;
        let (u, v) = self.graph.ends[self.cursor];
        self.push_node(u);
        self.push_node(v);
        self.walk_edges.push(e0);

        if self.extend_tail() {
            return true; // cycle found
        }
        // Turn the path around and grow the other end.
        self.walk_nodes.reverse();
        self.walk_edges.reverse();
        for (i, &n) in self.walk_nodes.iter().enumerate() {
            self.pos[n as usize] = i as u32 + 1;
        }
        if self.extend_tail() {
            return true;
        }
        self.structure_is_cycle = false;
        true
    }

    fn push_node(&mut self, n: u32) {
        self.walk_nodes.push(n);
        self.pos[n as usize] = self.walk_nodes.len() as u32;
        self.touched.push(n);
    }

    /// Extend the walk at its tail; returns true when it closed a cycle,
    /// leaving the cycle's edges in `walk_edges`.
    fn extend_tail(&mut self) -> bool {
        loop {
            let x = *self.walk_nodes.last().unwrap() as usize;
            let arrival = *self.walk_edges.last().unwrap();
            let mut next = None;
            for &f in &self.graph.adj[x] {
                if f != arrival && self.is_frac(f as usize) {
                    next = Some(f);
                    break;
                }
            }
            let Some(f) = next else {
                return false;
            };
            let (p, q) = self.graph.ends[f as usize];
            let y = if p as usize == x { q } else { p };
            let seen = self.pos[y as usize];
            if seen != 0 {
                let at = (seen - 1) as usize;
                self.walk_edges.drain(..at);
                self.walk_edges.push(f);
                self.structure_is_cycle = true;
                debug_assert!(self.walk_edges.len() % 2 == 0, "odd cycle in bipartite graph");
                return true;
            }
            self.walk_edges.push(f);
            self.push_node(y);
        }
    }

    /// The admissible shift pair for a structure: `alpha` bounds the
    /// "+odd/-even" branch, `beta` the "-odd/+even" branch, both strictly
    /// positive for any structure of fractional edges.
    pub fn step_parameters(&self, s: &Structure) -> (i64, i64) {
        self.parameters_of(s.edges())
    }

    fn parameters_of(&self, edges: &[u32]) -> (i64, i64) {
        let den = self.graph.den;
        let mut alpha = i64::MAX;
        let mut beta = i64::MAX;
        for (k, &e) in edges.iter().enumerate() {
            let w = self.num[e as usize];
            if k % 2 == 0 {
                alpha = alpha.min(den - w);
                beta = beta.min(w);
            } else {
                alpha = alpha.min(w);
                beta = beta.min(den - w);
            }
        }
        assert!(
            alpha > 0 && beta > 0,
            "degenerate structure: all edges must be fractional"
        );
        (alpha, beta)
    }

    fn apply_delta(&mut self, edges: &[u32], delta: i64) {
        let den = self.graph.den;
        let mut froze = 0usize;
        for (k, &e) in edges.iter().enumerate() {
            let e = e as usize;
            let w = &mut self.num[e];
            *w = if k % 2 == 0 { *w + delta } else { *w - delta };
            debug_assert!((0..=den).contains(w));
            if *w == 0 || *w == den {
                froze += 1;
                if let Some(watched) = &self.watched {
                    if watched[e] {
                        self.watched_fractional -= 1;
                    }
                }
            }
        }
        debug_assert!(froze >= 1, "every step must freeze an edge");
        self.steps += 1;
    }

    /// Apply one step with a forced branch (`up` = the "+odd/-even" arm).
    pub fn apply(&mut self, s: &Structure, up: bool) {
        let (alpha, beta) = self.step_parameters(s);
        let edges: Vec<u32> = s.edges().to_vec();
        self.apply_delta(&edges, if up { alpha } else { -beta });
    }

    /// Apply one randomized step; returns the branch taken.
    pub fn step(&mut self, s: &Structure, rng: &mut impl RngCore) -> bool {
        let (alpha, beta) = self.step_parameters(s);
        let up = coin(rng, beta as u64, (alpha + beta) as u64);
        let edges: Vec<u32> = s.edges().to_vec();
        self.apply_delta(&edges, if up { alpha } else { -beta });
        up
    }

    fn step_auto(&mut self, rng: &mut impl RngCore) -> bool {
        if !self.find_structure_internal() {
            return false;
        }
        let edges = std::mem::take(&mut self.walk_edges);
        let (alpha, beta) = self.parameters_of(&edges);
        let up = coin(rng, beta as u64, (alpha + beta) as u64);
        self.apply_delta(&edges, if up { alpha } else { -beta });
        self.walk_edges = edges;
        true
    }

    /// Run until every weight is integral.
    pub fn run_to_integral(&mut self, rng: &mut impl RngCore) {
        while self.step_auto(rng) {}
        debug_assert!(self.steps <= self.graph.edge_count());
    }

    /// Run only until the watched edges are integral; returns the number
    /// of steps taken. The remaining weights stay mid-flight and the run
    /// can be continued later.
    pub fn run_until_watched_integral(&mut self, rng: &mut impl RngCore) -> usize {
        let before = self.steps;
        while self.watched_fractional > 0 && self.step_auto(rng) {}
        self.steps - before
    }

    /// Final bits; panics unless the state is fully integral.
    pub fn bits(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.num.len());
        self.bits_into(&mut out);
        out
    }

    pub fn bits_into(&self, out: &mut Vec<bool>) {
        assert!(self.is_integral(), "rounding still has fractional edges");
        out.clear();
        out.extend(self.num.iter().map(|&w| w == self.graph.den));
    }

    /// Bit for a single edge, if that edge is already integral.
    pub fn bit(&self, e: usize) -> Option<bool> {
        if self.is_frac(e) {
            None
        } else {
            Some(self.num[e] == self.graph.den)
        }
    }
}

/// Round a single-round instance with the given seed.
pub fn dependent_round(
    inst: &WeightedBipartiteInstance,
    seed: u64,
) -> Result<RoundingOutcome, RoundingError> {
    if inst.rounds() != 1 {
        return Err(RoundingError::NotSingleRound {
            rounds: inst.rounds(),
        });
    }
    inst.validate()?;
    let graph = PipageGraph::from_instance_layer(inst, 1)?;
    let mut rng = derive_rng(seed, "dependent-round", &[]);
    let bits = graph.sample(&mut rng);
    let outcome = RoundingOutcome::new(inst, bits.into_iter().map(|b| vec![b]).collect())?;
    Ok(outcome)
}

/// The exact outcome distribution of the pipage process: every leaf of the
/// decision tree with its exact probability. The structure sequence is
/// deterministic, so the tree branches only on the per-step coin; with `f`
/// initial fractional edges there are at most `2^f` leaves.
pub fn enumerate_outcomes(
    graph: &PipageGraph,
    max_fractional: usize,
) -> Result<Vec<(Vec<bool>, BigRational)>, RoundingError> {
    let count = graph.initial_fractional_count();
    if count > max_fractional {
        return Err(RoundingError::TooManyFractionalEdges {
            count,
            cap: max_fractional,
        });
    }
    let mut leaves = Vec::new();
    let root = PipageState::new(graph);
    let mut stack: Vec<(PipageState, BigRational)> = vec![(root, BigRational::one())];
    while let Some((mut state, prob)) = stack.pop() {
        match state.find_structure() {
            None => leaves.push((state.bits(), prob)),
            Some(s) => {
                let (alpha, beta) = state.step_parameters(&s);
                let p_up = BigRational::new(BigInt::from(beta), BigInt::from(alpha + beta));
                let p_down = BigRational::one() - &p_up;
                let mut up_state = state.clone();
                up_state.apply(&s, true);
                state.apply(&s, false);
                stack.push((up_state, &prob * p_up));
                stack.push((state, prob * p_down));
            }
        }
    }
    Ok(leaves)
}
