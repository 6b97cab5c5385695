//! Desk-scale check of the correspondence between finite quota seat
//! sequences and perfect b-matchings of the layered rounding graph built
//! on the apportionment star with `T = P`.
//!
//! One direction labels each seat sequence's rounding events onto the
//! layered edges and audits that every node hits its integral target
//! degree. The other direction counts perfect b-matchings of the layered
//! graph by independent exhaustive backtracking, knowing nothing about
//! seat sequences. Equal counts certify the bijection on the instance.

use super::instances::apportionment_star;
use super::VerifyError;
use crate::bipartite::RoundingOutcome;
use crate::cumulative_rounding::{audit_outcome, build_layered_graph, LayeredGraph};
use crate::model::PopulationProfile;
use serde::Serialize;

const TOTAL_CAP: u64 = 10;

/// All seat sequences of length `P` satisfying quota at every prefix,
/// found by depth-first search over the quota lattice.
pub fn enumerate_quota_sequences(profile: &PopulationProfile) -> Vec<Vec<u32>> {
    let n = profile.len();
    let total = profile.total();
    let big_total = i128::from(total);
    let mut out = Vec::new();
    let mut counts = vec![0u32; n];
    let mut prefix = Vec::with_capacity(total as usize);

    fn quota_ok(profile: &PopulationProfile, big_total: i128, h: u64, counts: &[u32]) -> bool {
        counts.iter().enumerate().all(|(i, &c)| {
            let num = i128::from(h) * i128::from(profile.population(i));
            let floor = num.div_euclid(big_total);
            let ceil = if num % big_total == 0 { floor } else { floor + 1 };
            (floor..=ceil).contains(&i128::from(c))
        })
    }

    fn dfs(
        profile: &PopulationProfile,
        big_total: i128,
        total: u64,
        counts: &mut Vec<u32>,
        prefix: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        let h = prefix.len() as u64;
        if h == total {
            out.push(prefix.clone());
            return;
        }
        for i in 0..profile.len() {
            counts[i] += 1;
            if quota_ok(profile, big_total, h + 1, counts) {
                prefix.push(i as u32);
                dfs(profile, big_total, total, counts, prefix, out);
                prefix.pop();
            }
            counts[i] -= 1;
        }
    }

    dfs(profile, big_total, total, &mut counts, &mut prefix, &mut out);
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct BijectionCertificate {
    pub populations: Vec<u64>,
    pub sequence_count: u64,
    pub matching_count: u64,
    /// Every sequence's event labeling met all target degrees.
    pub labelings_meet_targets: bool,
    pub counts_equal: bool,
    pub pass: bool,
}

/// Check the sequence/matching correspondence for one profile
/// (guarded to `P <= 10`).
pub fn verify_bijection(profile: &PopulationProfile) -> Result<BijectionCertificate, VerifyError> {
    let total = profile.total();
    if total > TOTAL_CAP {
        return Err(VerifyError::ProfileTooLarge {
            total,
            cap: TOTAL_CAP,
        });
    }
    let sequences = enumerate_quota_sequences(profile);
    let instance = apportionment_star(profile.populations(), total as usize);
    let layered = build_layered_graph(&instance).expect("star instance builds");

    let mut labelings_meet_targets = true;
    for seq in &sequences {
        let outcome = sequence_to_outcome(profile, &layered, &instance, seq);
        let report = audit_outcome(&instance, &outcome).expect("instance is valid");
        labelings_meet_targets &= report.pass();
    }

    let matching_count = count_perfect_b_matchings(&layered);
    let sequence_count = sequences.len() as u64;
    let counts_equal = sequence_count == matching_count;
    Ok(BijectionCertificate {
        populations: profile.populations().to_vec(),
        sequence_count,
        matching_count,
        labelings_meet_targets,
        counts_equal,
        pass: counts_equal && labelings_meet_targets,
    })
}

/// Translate a seat sequence into the full layered bit vector via the
/// event interpretation of each edge, wrapped as an outcome so the
/// standard audit can check every target degree.
fn sequence_to_outcome(
    profile: &PopulationProfile,
    layered: &LayeredGraph,
    instance: &crate::bipartite::WeightedBipartiteInstance,
    seq: &[u32],
) -> RoundingOutcome {
    let n = profile.len();
    let rounds = seq.len();
    let den = i128::from(layered.denominator());
    let mut layered_bits = vec![false; layered.edge_count()];
    let copy_bits: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..rounds).map(|t| seq[t] == i as u32).collect())
        .collect();
    for (e, bits) in copy_bits.iter().enumerate() {
        for (t0, &b) in bits.iter().enumerate() {
            layered_bits[layered.copy_edge_id(e, t0 + 1) as usize] = b;
        }
    }
    // Original node order in the layered graph: the hub, then the states.
    for v in 0..=n {
        let mut cum: i128 = 0;
        for t in 1..=rounds {
            let realized: i128 = if v == 0 {
                1
            } else {
                i128::from(seq[t - 1] == (v - 1) as u32)
            };
            let aux = layered.aux_edge_ids(v, t);
            let d = i128::from(layered.degree_scaled(v, t));
            let c_prev = layered.cumulative_scaled(v, t - 1);
            let c_now = layered.cumulative_scaled(v, t);
            layered_bits[aux.degree_down as usize] = realized == d.div_euclid(den);
            layered_bits[aux.degree_up as usize] = realized == d.div_euclid(den) + 1;
            layered_bits[aux.carry_in as usize] = cum == c_prev.div_euclid(den) + 1;
            layered_bits[aux.carry_out as usize] = cum + realized == c_now.div_euclid(den);
            cum += realized;
        }
    }
    RoundingOutcome::new(instance, copy_bits)
        .expect("bits match instance shape")
        .with_layered_bits(layered_bits)
}

/// Count edge subsets giving every node exactly its target degree, by
/// plain backtracking with feasibility pruning. Zero-weight edges are
/// excluded up front, unit-weight edges are forced and their endpoints'
/// targets decremented.
fn count_perfect_b_matchings(layered: &LayeredGraph) -> u64 {
    let den = i128::from(layered.denominator());
    let n_nodes = layered.node_count();

    // Integral target degrees from the built graph's fractional degrees.
    let mut target = vec![0i64; n_nodes];
    let mut frac = vec![0i128; n_nodes];
    for (e, &(u, v)) in layered.pipage().ends().iter().enumerate() {
        let w = i128::from(layered.pipage().initial_weights()[e]);
        frac[u as usize] += w;
        frac[v as usize] += w;
    }
    for id in 0..n_nodes {
        assert_eq!(
            frac[id] % den,
            0,
            "bijection check requires integral fractional degrees"
        );
        target[id] = (frac[id] / den) as i64;
    }

    // Preprocess frozen edges; keep only fractional ones.
    let mut edges = Vec::new();
    for (e, &(u, v)) in layered.pipage().ends().iter().enumerate() {
        let w = i128::from(layered.pipage().initial_weights()[e]);
        if w == 0 {
            continue;
        }
        if w == den {
            target[u as usize] -= 1;
            target[v as usize] -= 1;
            continue;
        }
        edges.push((u, v));
    }
    if target.iter().any(|&t| t < 0) {
        return 0;
    }

    // Order edges by time layer so node constraints resolve early.
    let stride = 4 * layered.rounds() + 1;
    let layer_of = |id: u32| -> usize {
        let r = id as usize % stride;
        if r == 0 {
            0
        } else {
            (r + 3) / 4
        }
    };
    edges.sort_by_key(|&(u, v)| {
        let ku = (layer_of(u), u);
        let kv = (layer_of(v), v);
        (ku.max(kv), ku.min(kv))
    });

    let mut undecided = vec![0i64; n_nodes];
    for &(u, v) in &edges {
        undecided[u as usize] += 1;
        undecided[v as usize] += 1;
    }
    if (0..n_nodes).any(|id| target[id] > undecided[id]) {
        return 0;
    }

    fn rec(
        edges: &[(u32, u32)],
        k: usize,
        target: &mut [i64],
        undecided: &mut [i64],
    ) -> u64 {
        if k == edges.len() {
            return u64::from(target.iter().all(|&t| t == 0));
        }
        let (u, v) = (edges[k].0 as usize, edges[k].1 as usize);
        undecided[u] -= 1;
        undecided[v] -= 1;
        let mut total = 0;
        if target[u] <= undecided[u] && target[v] <= undecided[v] {
            total += rec(edges, k + 1, target, undecided);
        }
        if target[u] > 0 && target[v] > 0 {
            target[u] -= 1;
            target[v] -= 1;
            if target[u] <= undecided[u] && target[v] <= undecided[v] {
                total += rec(edges, k + 1, target, undecided);
            }
            target[u] += 1;
            target[v] += 1;
        }
        undecided[u] += 1;
        undecided[v] += 1;
        total
    }

    rec(&edges, 0, &mut target, &mut undecided)
}
