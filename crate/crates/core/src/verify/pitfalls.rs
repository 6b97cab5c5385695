//! Two certified pitfalls in building house-monotone randomized methods:
//! a quota allocation that no house-monotone quota solution can reach
//! (so any method whose support contains it is stuck), and a
//! quota-respecting distribution whose house-monotone extensions cannot
//! stay ex ante proportional.

use super::{is_toxic, VerifyError};
use crate::methods::grimmett_with;
use crate::model::{check_quota, standard_quota, Apportionment, PopulationProfile};
use crate::rational::{format_ratio, rat, Rational};
use num_traits::{One, Zero};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Example1Certificate {
    pub populations: Vec<u64>,
    pub house: u64,
    pub allocation: Vec<u32>,
    /// The allocation arises from an explicit uniform draw (identity
    /// permutation, U = 0.7) of Grimmett's method.
    pub produced_by_grimmett: bool,
    pub toxic: bool,
    pub pass: bool,
}

/// Certify that Grimmett's method can output (1,0,1,0) on populations
/// (1,2,1,2) at h=2, and that this allocation is toxic.
pub fn verify_pitfall_example1() -> Result<Example1Certificate, VerifyError> {
    let populations = vec![1u64, 2, 1, 2];
    let profile = PopulationProfile::new(populations.clone()).expect("valid profile");
    let drawn = grimmett_with(&profile, 2, &[0, 1, 2, 3], &rat(7, 10))
        .expect("valid permutation and uniform");
    let expected = [1u32, 0, 1, 0];
    let produced_by_grimmett = drawn.seats() == expected;
    let toxic = is_toxic(&profile, 2, &Apportionment::new(expected.to_vec()))?;
    Ok(Example1Certificate {
        populations,
        house: 2,
        allocation: expected.to_vec(),
        produced_by_grimmett,
        toxic,
        pass: produced_by_grimmett && toxic,
    })
}

const EX2_POPULATIONS: [u64; 4] = [45, 25, 15, 15];

/// The h=3 distribution under study: allocations with probabilities in
/// hundredths (35%, 20%, 20%, 25%).
const EX2_SUPPORT: [([u32; 4], i128); 4] = [
    ([2, 1, 0, 0], 35),
    ([1, 1, 1, 0], 20),
    ([1, 1, 0, 1], 20),
    ([1, 0, 1, 1], 25),
];

#[derive(Debug, Clone, Serialize)]
pub struct SupportPoint {
    pub allocation: Vec<u32>,
    pub probability: String,
    pub toxic: bool,
    /// All quota-compliant one-seat extensions at h=4.
    pub successors: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Example2Certificate {
    pub populations: Vec<u64>,
    pub house: u64,
    pub support: Vec<SupportPoint>,
    /// The sole successor of (1,0,1,1) must be (1,1,1,1).
    pub forced_successor_ok: bool,
    /// max E[state-1 seats at h=4] over house-monotone quota extensions.
    pub max_expected_state1_at_4: String,
    /// State 1's standard quota at h=4.
    pub quota_state1_at_4: String,
    pub expectation_falls_short: bool,
    pub flow: FlowCertificate,
    pub no_support_point_toxic: bool,
    pub pass: bool,
}

/// Certify that the fixed h=3 distribution admits no ex ante proportional
/// house-monotone quota extension to h=4: the best achievable expectation
/// for state 1 is 7/4, strictly below its quota 9/5.
pub fn verify_pitfall_example2() -> Result<Example2Certificate, VerifyError> {
    let profile = PopulationProfile::new(EX2_POPULATIONS.to_vec()).expect("valid profile");
    let mut support = Vec::new();
    let mut max_expectation = Rational::zero();
    let mut forced_successor_ok = false;
    let mut no_support_point_toxic = true;

    for (seats, hundredths) in EX2_SUPPORT {
        let probability = rat(hundredths, 100);
        let successors = quota_successors(&profile, &seats);
        if seats == [1, 0, 1, 1] {
            forced_successor_ok = successors == vec![vec![1, 1, 1, 1]];
        }
        let best_state1 = successors
            .iter()
            .map(|s| i128::from(s[0]))
            .max()
            .expect("every support point extends");
        max_expectation += &probability * rat(best_state1, 1);
        let toxic = is_toxic(&profile, 3, &Apportionment::new(seats.to_vec()))?;
        no_support_point_toxic &= !toxic;
        support.push(SupportPoint {
            allocation: seats.to_vec(),
            probability: format_ratio(&probability),
            toxic,
            successors,
        });
    }

    let quota1 = standard_quota(&profile, 4).value(0).clone();
    let expectation_falls_short = max_expectation < quota1;
    let flow = verify_flow_network()?;
    let pass = forced_successor_ok
        && expectation_falls_short
        && max_expectation == rat(7, 4)
        && quota1 == rat(9, 5)
        && flow.pass
        && no_support_point_toxic;
    Ok(Example2Certificate {
        populations: EX2_POPULATIONS.to_vec(),
        house: 3,
        support,
        forced_successor_ok,
        max_expected_state1_at_4: format_ratio(&max_expectation),
        quota_state1_at_4: format_ratio(&quota1),
        expectation_falls_short,
        flow,
        no_support_point_toxic,
        pass,
    })
}

/// One-seat extensions of `seats` that satisfy quota at the next house
/// size.
fn quota_successors(profile: &PopulationProfile, seats: &[u32; 4]) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for i in 0..4 {
        let mut next = seats.to_vec();
        next[i] += 1;
        if check_quota(profile, &Apportionment::new(next.clone())).expect("dimensions match") {
            out.push(next);
        }
    }
    out
}

/// The three-layer flow network that realizes the h=3 distribution as a
/// house-monotone, quota-compliant, ex ante proportional method for
/// house sizes 1..=3. All flows are fixed constants (in fortieths);
/// feasibility is checked by direct arithmetic, no solver involved.
#[derive(Debug, Clone, Serialize)]
pub struct FlowCertificate {
    pub total_flow: String,
    pub conservation_ok: bool,
    pub ingress_matches_quota: bool,
    pub egress_matches_distribution: bool,
    pub nodes_satisfy_quota: bool,
    pub edges_are_monotone_steps: bool,
    pub layer_expectations_proportional: bool,
    pub all_edges_saturated: bool,
    pub pass: bool,
}

type FlowNode = [u32; 4];

// Layer-1 and layer-3 terminal flows, in fortieths of the unit flow.
const INGRESS: [(FlowNode, i128); 4] = [
    ([1, 0, 0, 0], 18), // 45%
    ([0, 1, 0, 0], 10), // 25%
    ([0, 0, 1, 0], 6),  // 15%
    ([0, 0, 0, 1], 6),  // 15%
];
const EGRESS: [(FlowNode, i128); 4] = [
    ([2, 1, 0, 0], 14), // 35%
    ([1, 1, 1, 0], 8),  // 20%
    ([1, 1, 0, 1], 8),  // 20%
    ([1, 0, 1, 1], 10), // 25%
];
// Internal edges (from, to, flow in fortieths).
const EDGES_1_2: [(FlowNode, FlowNode, i128); 10] = [
    ([1, 0, 0, 0], [1, 1, 0, 0], 8),  // 20%
    ([1, 0, 0, 0], [1, 0, 1, 0], 5),  // 12.5%
    ([1, 0, 0, 0], [1, 0, 0, 1], 5),  // 12.5%
    ([0, 1, 0, 0], [1, 1, 0, 0], 8),  // 20%
    ([0, 1, 0, 0], [0, 1, 1, 0], 1),  // 2.5%
    ([0, 1, 0, 0], [0, 1, 0, 1], 1),  // 2.5%
    ([0, 0, 1, 0], [1, 0, 1, 0], 5),  // 12.5%
    ([0, 0, 1, 0], [0, 1, 1, 0], 1),  // 2.5%
    ([0, 0, 0, 1], [1, 0, 0, 1], 5),  // 12.5%
    ([0, 0, 0, 1], [0, 1, 0, 1], 1),  // 2.5%
];
const EDGES_2_3: [(FlowNode, FlowNode, i128); 9] = [
    ([1, 1, 0, 0], [2, 1, 0, 0], 14), // 35%
    ([1, 1, 0, 0], [1, 1, 1, 0], 1),  // 2.5%
    ([1, 1, 0, 0], [1, 1, 0, 1], 1),  // 2.5%
    ([1, 0, 1, 0], [1, 1, 1, 0], 5),  // 12.5%
    ([1, 0, 1, 0], [1, 0, 1, 1], 5),  // 12.5%
    ([1, 0, 0, 1], [1, 1, 0, 1], 5),  // 12.5%
    ([1, 0, 0, 1], [1, 0, 1, 1], 5),  // 12.5%
    ([0, 1, 1, 0], [1, 1, 1, 0], 2),  // 5%
    ([0, 1, 0, 1], [1, 1, 0, 1], 2),  // 5%
];

fn verify_flow_network() -> Result<FlowCertificate, VerifyError> {
    let profile = PopulationProfile::new(EX2_POPULATIONS.to_vec()).expect("valid profile");
    let forty = rat(40, 1);
    let flow_of = |x: i128| rat(x, 1) / &forty;

    let total_in: Rational = INGRESS.iter().map(|&(_, f)| flow_of(f)).sum();
    let total_out: Rational = EGRESS.iter().map(|&(_, f)| flow_of(f)).sum();
    let total_ok = total_in.is_one() && total_out.is_one();

    // Conservation at both internal layers.
    let mut conservation_ok = true;
    for &(node, inflow) in &INGRESS {
        let out: i128 = EDGES_1_2
            .iter()
            .filter(|&&(from, _, _)| from == node)
            .map(|&(_, _, f)| f)
            .sum();
        conservation_ok &= out == inflow;
    }
    let layer2: Vec<FlowNode> = {
        let mut seen = Vec::new();
        for &(_, to, _) in &EDGES_1_2 {
            if !seen.contains(&to) {
                seen.push(to);
            }
        }
        seen
    };
    for node in &layer2 {
        let inflow: i128 = EDGES_1_2
            .iter()
            .filter(|&&(_, to, _)| to == *node)
            .map(|&(_, _, f)| f)
            .sum();
        let outflow: i128 = EDGES_2_3
            .iter()
            .filter(|&&(from, _, _)| from == *node)
            .map(|&(_, _, f)| f)
            .sum();
        conservation_ok &= inflow == outflow;
    }
    for &(node, egress) in &EGRESS {
        let inflow: i128 = EDGES_2_3
            .iter()
            .filter(|&&(_, to, _)| to == node)
            .map(|&(_, _, f)| f)
            .sum();
        conservation_ok &= inflow == egress;
    }

    // Ingress flows equal the h=1 quotas; egress equals the target
    // distribution by construction of the tables.
    let q1 = standard_quota(&profile, 1);
    let ingress_matches_quota = INGRESS.iter().all(|&(node, f)| {
        let state = (0..4).find(|&i| node[i] == 1).expect("singleton");
        q1.value(state) == &flow_of(f)
    });
    let egress_matches_distribution = EGRESS
        .iter()
        .zip(EX2_SUPPORT)
        .all(|(&(node, f), (support, hundredths))| {
            node == support && flow_of(f) == rat(hundredths, 100)
        });

    // Every node satisfies quota at its layer.
    let mut nodes_satisfy_quota = true;
    for (h, nodes) in [
        (1u64, INGRESS.iter().map(|&(n, _)| n).collect::<Vec<_>>()),
        (2, layer2.clone()),
        (3, EGRESS.iter().map(|&(n, _)| n).collect::<Vec<_>>()),
    ] {
        for node in nodes {
            let a = Apportionment::new(node.to_vec());
            nodes_satisfy_quota &= a.house() == h && check_quota(&profile, &a).expect("dims");
        }
    }

    // Every edge adds exactly one seat and never removes any.
    let monotone = |from: FlowNode, to: FlowNode| {
        let diffs: Vec<i64> = (0..4)
            .map(|i| i64::from(to[i]) - i64::from(from[i]))
            .collect();
        diffs.iter().all(|&d| d >= 0) && diffs.iter().sum::<i64>() == 1
    };
    let edges_are_monotone_steps = EDGES_1_2
        .iter()
        .chain(EDGES_2_3.iter())
        .all(|&(from, to, _)| monotone(from, to));

    // Flow-weighted seats per layer equal the standard quotas: the method
    // defined by path decomposition is ex ante proportional on h = 1..=3.
    let mut layer_expectations_proportional = true;
    for (h, nodes_with_flow) in [
        (1u64, INGRESS.to_vec()),
        (2, {
            layer2
                .iter()
                .map(|node| {
                    let inflow: i128 = EDGES_1_2
                        .iter()
                        .filter(|&&(_, to, _)| to == *node)
                        .map(|&(_, _, f)| f)
                        .sum();
                    (*node, inflow)
                })
                .collect()
        }),
        (3, EGRESS.to_vec()),
    ] {
        let q = standard_quota(&profile, h);
        for state in 0..4 {
            let expected: Rational = nodes_with_flow
                .iter()
                .map(|&(node, f)| flow_of(f) * rat(i128::from(node[state]), 1))
                .sum();
            layer_expectations_proportional &= &expected == q.value(state);
        }
    }

    let all_edges_saturated = EDGES_1_2
        .iter()
        .chain(EDGES_2_3.iter())
        .all(|&(_, _, f)| f > 0)
        && INGRESS.iter().all(|&(_, f)| f > 0)
        && EGRESS.iter().all(|&(_, f)| f > 0);

    let pass = total_ok
        && conservation_ok
        && ingress_matches_quota
        && egress_matches_distribution
        && nodes_satisfy_quota
        && edges_are_monotone_steps
        && layer_expectations_proportional
        && all_edges_saturated;
    Ok(FlowCertificate {
        total_flow: format_ratio(&total_in),
        conservation_ok,
        ingress_matches_quota,
        egress_matches_distribution,
        nodes_satisfy_quota,
        edges_are_monotone_steps,
        layer_expectations_proportional,
        all_edges_saturated,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_certificate_passes() {
        let cert = verify_pitfall_example1().unwrap();
        assert!(cert.pass, "{cert:?}");
    }

    #[test]
    fn example2_certificate_passes() {
        let cert = verify_pitfall_example2().unwrap();
        assert!(cert.pass, "{cert:?}");
        assert_eq!(cert.max_expected_state1_at_4, "7/4");
        assert_eq!(cert.quota_state1_at_4, "9/5");
        assert!(cert.support.iter().all(|s| !s.toxic));
    }

    #[test]
    fn forced_successor_is_unique() {
        let profile = PopulationProfile::new(EX2_POPULATIONS.to_vec()).unwrap();
        let succ = quota_successors(&profile, &[1, 0, 1, 1]);
        assert_eq!(succ, vec![vec![1, 1, 1, 1]]);
    }

    #[test]
    fn flow_network_is_feasible_and_saturating() {
        let cert = verify_flow_network().unwrap();
        assert!(cert.pass, "{cert:?}");
    }
}
