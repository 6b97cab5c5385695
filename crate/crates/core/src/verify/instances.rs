//! Fixed and randomly generated rounding instances used across the
//! statistical and exactness checks.

use crate::bipartite::{path_fixture, star_instance, BipartiteGraph, WeightedBipartiteInstance};
use crate::rational::{rat, Rational};
use crate::rng::uniform_index;
use rand_core::RngCore;

/// The three-edge, three-round path instance drawn with weights
/// 1/4, 1/2, 3/4 / 1/2, 1/4, 3/4 / 1/2, 1/2, 1/4.
pub fn fig_path_instance() -> WeightedBipartiteInstance {
    path_fixture()
}

/// One hub and one spoke per state with weights `p_i / P`, for `rounds`
/// copies: the instance behind the house-monotone method and sortition.
pub fn apportionment_star(populations: &[u64], rounds: usize) -> WeightedBipartiteInstance {
    let total: i128 = populations.iter().map(|&p| i128::from(p)).sum();
    let names: Vec<String> = (0..populations.len()).map(|i| format!("s{i}")).collect();
    let weights: Vec<Vec<Rational>> = populations
        .iter()
        .map(|&p| vec![rat(i128::from(p), total); rounds])
        .collect();
    star_instance("hub", &names, &weights).expect("valid star")
}

/// A four-cycle with distinct fractional weights.
pub fn four_cycle_instance() -> WeightedBipartiteInstance {
    let graph = BipartiteGraph::new(
        vec!["u1".into(), "u2".into()],
        vec!["w1".into(), "w2".into()],
        vec![(0, 0), (0, 1), (1, 0), (1, 1)],
    )
    .unwrap();
    let weights = vec![
        vec![rat(1, 3)],
        vec![rat(1, 2)],
        vec![rat(2, 3)],
        vec![rat(5, 12)],
    ];
    WeightedBipartiteInstance::new(graph, 1, weights).unwrap()
}

/// Mixes frozen (0 and 1) weights with fractional ones.
pub fn frozen_mix_instance() -> WeightedBipartiteInstance {
    let graph = BipartiteGraph::new(
        vec!["u1".into(), "u2".into()],
        vec!["w1".into(), "w2".into(), "w3".into()],
        vec![(0, 0), (0, 1), (1, 1), (1, 2)],
    )
    .unwrap();
    let weights = vec![
        vec![rat(1, 1), rat(1, 2)],
        vec![rat(0, 1), rat(1, 2)],
        vec![rat(3, 4), rat(1, 1)],
        vec![rat(1, 4), rat(0, 1)],
    ];
    WeightedBipartiteInstance::new(graph, 2, weights).unwrap()
}

/// The named instances every statistical suite runs over.
pub fn standard_instances() -> Vec<(String, WeightedBipartiteInstance)> {
    let path = fig_path_instance();
    let mut out: Vec<(String, WeightedBipartiteInstance)> = (1..=3)
        .map(|t| (format!("path3@t{t}"), path.single_layer(t).unwrap()))
        .collect();
    out.push(("path3".into(), path));
    out.push(("star4".into(), {
        let star = apportionment_star(&[1, 2, 1, 2], 1);
        star.single_layer(1).unwrap()
    }));
    out.push(("star4x6".into(), apportionment_star(&[1, 2, 1, 2], 6)));
    out.push(("cycle4".into(), four_cycle_instance()));
    out.push(("frozen".into(), frozen_mix_instance()));
    out
}

/// A random instance with sides up to `max_side`, up to `max_rounds`
/// copies, and rational weights with denominators up to `max_den`. Always
/// has at least one edge.
pub fn random_instance(
    rng: &mut impl RngCore,
    max_side: usize,
    max_rounds: usize,
    max_den: u32,
) -> WeightedBipartiteInstance {
    let na = 1 + uniform_index(rng, max_side as u64) as usize;
    let nb = 1 + uniform_index(rng, max_side as u64) as usize;
    let rounds = 1 + uniform_index(rng, max_rounds as u64) as usize;
    let mut edges = Vec::new();
    for a in 0..na as u32 {
        for b in 0..nb as u32 {
            // Roughly 60% edge density, never an empty graph.
            if uniform_index(rng, 5) < 3 {
                edges.push((a, b));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 0));
    }
    let weights = edges
        .iter()
        .map(|_| {
            (0..rounds)
                .map(|_| {
                    let den = 1 + uniform_index(rng, u64::from(max_den)) as i128;
                    let num = uniform_index(rng, den as u64 + 1) as i128;
                    rat(num, den)
                })
                .collect()
        })
        .collect();
    let graph = BipartiteGraph::new(
        (0..na).map(|i| format!("a{i}")).collect(),
        (0..nb).map(|i| format!("b{i}")).collect(),
        edges,
    )
    .unwrap();
    WeightedBipartiteInstance::new(graph, rounds, weights).unwrap()
}
