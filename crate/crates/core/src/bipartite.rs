//! Bipartite graphs with exact rational edge weights, the substrate for
//! both rounding procedures.
//!
//! Node ids are opaque strings at the boundary and dense integers
//! internally (A side first, then B side). An instance carries one weight
//! per edge per time step `t = 1..=T`.

use crate::rational::{format_ratio, parse_ratio, rat, Rational};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("duplicate edge {a:?} - {b:?}")]
    DuplicateEdge { a: String, b: String },
    #[error("edge {a:?} - {b:?} has weight {weight} at t={t}, outside [0, 1]")]
    WeightOutOfRange {
        a: String,
        b: String,
        t: usize,
        weight: String,
    },
    #[error("edge {a:?} - {b:?} has {got} weights, expected one per t=1..={expected}")]
    MissingWeight {
        a: String,
        b: String,
        expected: usize,
        got: usize,
    },
    #[error("number of rounds must be positive")]
    ZeroRounds,
    #[error("time index {t} out of range 1..={rounds}")]
    TimeOutOfRange { t: usize, rounds: usize },
    #[error("graph needs at least one node on each side")]
    EmptySide,
    #[error("weight denominators have no common denominator below 2^62")]
    DenominatorOverflow,
    #[error("bad instance JSON: {0}")]
    Json(String),
    #[error("bad weight on edge {a:?} - {b:?}: {detail}")]
    BadWeight { a: String, b: String, detail: String },
    #[error("outcome shape does not match instance")]
    OutcomeShapeMismatch,
}

/// One endpoint of an edge, by side and index within that side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRef {
    A(usize),
    B(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    a_names: Vec<String>,
    b_names: Vec<String>,
    /// (a index, b index) pairs; no duplicates.
    edges: Vec<(u32, u32)>,
}

impl BipartiteGraph {
    pub fn new(
        a_names: Vec<String>,
        b_names: Vec<String>,
        edges: Vec<(u32, u32)>,
    ) -> Result<Self, InstanceError> {
        if a_names.is_empty() || b_names.is_empty() {
            return Err(InstanceError::EmptySide);
        }
        let mut seen = HashMap::new();
        for &(a, b) in &edges {
            if a as usize >= a_names.len() {
                return Err(InstanceError::UnknownNode(format!("a#{a}")));
            }
            if b as usize >= b_names.len() {
                return Err(InstanceError::UnknownNode(format!("b#{b}")));
            }
            if seen.insert((a, b), ()).is_some() {
                return Err(InstanceError::DuplicateEdge {
                    a: a_names[a as usize].clone(),
                    b: b_names[b as usize].clone(),
                });
            }
        }
        Ok(Self {
            a_names,
            b_names,
            edges,
        })
    }

    pub fn a_count(&self) -> usize {
        self.a_names.len()
    }

    pub fn b_count(&self) -> usize {
        self.b_names.len()
    }

    pub fn node_count(&self) -> usize {
        self.a_names.len() + self.b_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn a_name(&self, i: usize) -> &str {
        &self.a_names[i]
    }

    pub fn b_name(&self, i: usize) -> &str {
        &self.b_names[i]
    }

    pub fn node_name(&self, v: NodeRef) -> &str {
        match v {
            NodeRef::A(i) => self.a_name(i),
            NodeRef::B(i) => self.b_name(i),
        }
    }

    /// Dense node index with the A side first.
    pub fn node_index(&self, v: NodeRef) -> usize {
        match v {
            NodeRef::A(i) => i,
            NodeRef::B(i) => self.a_names.len() + i,
        }
    }

    pub fn node_ref(&self, index: usize) -> NodeRef {
        if index < self.a_names.len() {
            NodeRef::A(index)
        } else {
            NodeRef::B(index - self.a_names.len())
        }
    }

    pub fn edge_name(&self, e: usize) -> (String, String) {
        let (a, b) = self.edges[e];
        (
            self.a_names[a as usize].clone(),
            self.b_names[b as usize].clone(),
        )
    }

    /// Edge ids incident to `v`.
    pub fn incident(&self, v: NodeRef) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| match v {
                NodeRef::A(i) => a as usize == i,
                NodeRef::B(i) => b as usize == i,
            })
            .map(|(e, _)| e)
            .collect()
    }
}

/// A bipartite graph plus per-time-step rational weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedBipartiteInstance {
    graph: BipartiteGraph,
    rounds: usize,
    /// weights[edge][t-1]
    weights: Vec<Vec<Rational>>,
}

impl WeightedBipartiteInstance {
    pub fn new(
        graph: BipartiteGraph,
        rounds: usize,
        weights: Vec<Vec<Rational>>,
    ) -> Result<Self, InstanceError> {
        let instance = Self {
            graph,
            rounds,
            weights,
        };
        instance.validate()?;
        Ok(instance)
    }

    /// Re-checks the construction invariants: positive `T`, a complete
    /// weight table, and all weights in `[0, 1]`. Bipartiteness and edge
    /// uniqueness hold by construction of the graph.
    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.rounds == 0 {
            return Err(InstanceError::ZeroRounds);
        }
        if self.weights.len() != self.graph.edge_count() {
            return Err(InstanceError::OutcomeShapeMismatch);
        }
        for (e, ws) in self.weights.iter().enumerate() {
            let (a, b) = self.graph.edge_name(e);
            if ws.len() != self.rounds {
                return Err(InstanceError::MissingWeight {
                    a,
                    b,
                    expected: self.rounds,
                    got: ws.len(),
                });
            }
            for (ti, w) in ws.iter().enumerate() {
                if *w < Rational::zero() || *w > Rational::one() {
                    return Err(InstanceError::WeightOutOfRange {
                        a,
                        b,
                        t: ti + 1,
                        weight: format_ratio(w),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn weight(&self, e: usize, t: usize) -> &Rational {
        &self.weights[e][t - 1]
    }

    pub fn weights(&self) -> &[Vec<Rational>] {
        &self.weights
    }

    /// Exact sum of incident weights at time `t` (1-based).
    pub fn fractional_degree(&self, v: NodeRef, t: usize) -> Result<Rational, InstanceError> {
        self.check_time(t)?;
        self.check_node(v)?;
        let mut d = Rational::zero();
        for (e, &(a, b)) in self.graph.edges().iter().enumerate() {
            let touches = match v {
                NodeRef::A(i) => a as usize == i,
                NodeRef::B(i) => b as usize == i,
            };
            if touches {
                d += self.weight(e, t).clone();
            }
        }
        Ok(d)
    }

    fn check_time(&self, t: usize) -> Result<(), InstanceError> {
        if t == 0 || t > self.rounds {
            return Err(InstanceError::TimeOutOfRange {
                t,
                rounds: self.rounds,
            });
        }
        Ok(())
    }

    fn check_node(&self, v: NodeRef) -> Result<(), InstanceError> {
        let ok = match v {
            NodeRef::A(i) => i < self.graph.a_count(),
            NodeRef::B(i) => i < self.graph.b_count(),
        };
        if ok {
            Ok(())
        } else {
            Err(InstanceError::UnknownNode(format!("{v:?}")))
        }
    }

    /// The single-round instance using only the weights at time `t`.
    pub fn single_layer(&self, t: usize) -> Result<Self, InstanceError> {
        self.check_time(t)?;
        Ok(Self {
            graph: self.graph.clone(),
            rounds: 1,
            weights: self
                .weights
                .iter()
                .map(|ws| vec![ws[t - 1].clone()])
                .collect(),
        })
    }

    /// Least common denominator of every weight in the instance; all
    /// derived quantities (degrees, cumulative degrees, the auxiliary
    /// weights of the layered construction) are integer multiples of its
    /// reciprocal.
    pub fn common_denominator(&self) -> Result<i64, InstanceError> {
        let mut l: i128 = 1;
        for ws in &self.weights {
            for w in ws {
                l = l.lcm(w.denom());
                if l > (1i128 << 62) {
                    return Err(InstanceError::DenominatorOverflow);
                }
            }
        }
        Ok(l as i64)
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| InstanceError::Json(e.to_string()))?;
        file.into_instance()
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            a_nodes: self.graph.a_names.clone(),
            b_nodes: self.graph.b_names.clone(),
            rounds: self.rounds as u32,
            edges: self
                .weights
                .iter()
                .enumerate()
                .map(|(e, ws)| {
                    let (a, b) = self.graph.edge_name(e);
                    EdgeFile {
                        a,
                        b,
                        weights: ws.iter().map(format_ratio).collect(),
                    }
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    a_nodes: Vec<String>,
    b_nodes: Vec<String>,
    #[serde(rename = "T")]
    rounds: u32,
    edges: Vec<EdgeFile>,
}

#[derive(Serialize, Deserialize)]
struct EdgeFile {
    a: String,
    b: String,
    weights: Vec<String>,
}

impl InstanceFile {
    fn into_instance(self) -> Result<WeightedBipartiteInstance, InstanceError> {
        let a_index: HashMap<&str, u32> = self
            .a_nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i as u32))
            .collect();
        let b_index: HashMap<&str, u32> = self
            .b_nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i as u32))
            .collect();
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut weights = Vec::with_capacity(self.edges.len());
        for edge in &self.edges {
            let a = *a_index
                .get(edge.a.as_str())
                .ok_or_else(|| InstanceError::UnknownNode(edge.a.clone()))?;
            let b = *b_index
                .get(edge.b.as_str())
                .ok_or_else(|| InstanceError::UnknownNode(edge.b.clone()))?;
            edges.push((a, b));
            let mut ws = Vec::with_capacity(edge.weights.len());
            for text in &edge.weights {
                let w = parse_ratio(text).map_err(|e| InstanceError::BadWeight {
                    a: edge.a.clone(),
                    b: edge.b.clone(),
                    detail: e.to_string(),
                })?;
                ws.push(w);
            }
            weights.push(ws);
        }
        let graph = BipartiteGraph::new(self.a_nodes, self.b_nodes, edges)?;
        WeightedBipartiteInstance::new(graph, self.rounds as usize, weights)
    }
}

/// A star: one hub on the A side, one spoke edge per member with the given
/// per-round weights.
pub fn star_instance(
    hub: &str,
    member_names: &[String],
    member_weights: &[Vec<Rational>],
) -> Result<WeightedBipartiteInstance, InstanceError> {
    assert_eq!(member_names.len(), member_weights.len());
    let rounds = member_weights.first().map_or(0, Vec::len);
    let graph = BipartiteGraph::new(
        vec![hub.to_string()],
        member_names.to_vec(),
        (0..member_names.len()).map(|i| (0, i as u32)).collect(),
    )?;
    WeightedBipartiteInstance::new(graph, rounds, member_weights.to_vec())
}

/// Bits `X_e^t` for one rounding of an instance, plus enough structure to
/// derive realized degrees without the instance at hand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundingOutcome {
    ends: Vec<(u32, u32)>,
    a_count: usize,
    b_count: usize,
    rounds: usize,
    /// bits[edge][t-1]
    bits: Vec<Vec<bool>>,
    /// Full bit vector of the layered graph that produced this outcome,
    /// if any. Only the audit reads it.
    pub(crate) layered_bits: Option<Vec<bool>>,
}

impl RoundingOutcome {
    pub fn new(
        instance: &WeightedBipartiteInstance,
        bits: Vec<Vec<bool>>,
    ) -> Result<Self, InstanceError> {
        if bits.len() != instance.graph().edge_count()
            || bits.iter().any(|row| row.len() != instance.rounds())
        {
            return Err(InstanceError::OutcomeShapeMismatch);
        }
        Ok(Self {
            ends: instance.graph().edges().to_vec(),
            a_count: instance.graph().a_count(),
            b_count: instance.graph().b_count(),
            rounds: instance.rounds(),
            bits,
            layered_bits: None,
        })
    }

    pub(crate) fn with_layered_bits(mut self, layered: Vec<bool>) -> Self {
        self.layered_bits = Some(layered);
        self
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn bit(&self, e: usize, t: usize) -> bool {
        self.bits[e][t - 1]
    }

    pub fn bits(&self) -> &[Vec<bool>] {
        &self.bits
    }

    /// Realized degree `D_v^t`.
    pub fn degree(&self, v: NodeRef, t: usize) -> u64 {
        self.ends
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| match v {
                NodeRef::A(i) => a as usize == i,
                NodeRef::B(i) => b as usize == i,
            })
            .map(|(e, _)| u64::from(self.bits[e][t - 1]))
            .sum()
    }

    /// Realized cumulative degree over `t' = 1..=t`.
    pub fn cumulative_degree(&self, v: NodeRef, t: usize) -> u64 {
        (1..=t).map(|tt| self.degree(v, tt)).sum()
    }

    /// Flip one bit; used to exercise the audit's fault detection.
    pub fn corrupt(&mut self, e: usize, t: usize) {
        self.bits[e][t - 1] = !self.bits[e][t - 1];
    }
}

/// Canonical test fixture: a three-edge path with three rounds of weights.
pub fn path_fixture() -> WeightedBipartiteInstance {
    let graph = BipartiteGraph::new(
        vec!["v1".into(), "v2".into()],
        vec!["v3".into(), "v4".into()],
        vec![(0, 0), (0, 1), (1, 1)],
    )
    .unwrap();
    let weights = vec![
        vec![rat(1, 4), rat(1, 2), rat(3, 4)],
        vec![rat(1, 2), rat(1, 4), rat(3, 4)],
        vec![rat(1, 2), rat(1, 2), rat(1, 4)],
    ];
    WeightedBipartiteInstance::new(graph, 3, weights).unwrap()
}
