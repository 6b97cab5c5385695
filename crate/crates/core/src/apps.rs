//! Applications of cumulative rounding: repeated sortition of a
//! fixed-size panel, and repeated assignment of courses (or shifts) to
//! faculty (or workers).

use crate::bipartite::{star_instance, BipartiteGraph, InstanceError, WeightedBipartiteInstance};
use crate::cumulative_rounding::{audit_outcome, cumulative_round};
use crate::dependent_rounding::RoundingError;
use crate::rational::{ceil_int, format_ratio, frac_part, rat, Rational};
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AppError {
    #[error(
        "member {name:?} has normalized weight {weight} > 1 in round {round}; \
         split the member into copies, adjust the weights, or raise the \
         per-round seat count"
    )]
    InfeasibleMemberWeight {
        name: String,
        round: usize,
        weight: String,
    },
    #[error("weight of {name:?} must be positive, got {weight}")]
    NonPositiveWeight { name: String, weight: String },
    #[error("course {name:?} has fractional degree {degree} > 1")]
    CourseOverloaded { name: String, degree: String },
    #[error("assignment weight for ({faculty:?}, {course:?}) is {weight}, outside [0, 1]")]
    WeightOutOfRange {
        faculty: String,
        course: String,
        weight: String,
    },
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("{0}")]
    Instance(#[from] InstanceError),
    #[error("{0}")]
    Rounding(#[from] RoundingError),
}

/// Member weights, either fixed or varying per round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightSchedule {
    Constant(Vec<Rational>),
    /// weights[round][member]
    PerRound(Vec<Vec<Rational>>),
}

#[derive(Debug, Clone)]
pub struct SortitionConfig {
    pub member_names: Vec<String>,
    pub weights: WeightSchedule,
    pub seats_per_round: u32,
    pub rounds: u32,
}

impl SortitionConfig {
    pub fn uniform(member_count: usize, seats_per_round: u32, rounds: u32) -> Self {
        Self {
            member_names: (0..member_count).map(|i| format!("m{i}")).collect(),
            weights: WeightSchedule::Constant(vec![Rational::one(); member_count]),
            seats_per_round,
            rounds,
        }
    }

    /// Normalized per-round edge weights `k * w_i / sum_j w_j`, checked
    /// to lie in `(0, 1]`.
    fn normalized_weights(&self) -> Result<Vec<Vec<Rational>>, AppError> {
        let n = self.member_names.len();
        if n == 0 || self.rounds == 0 || self.seats_per_round == 0 {
            return Err(AppError::BadConfig(
                "members, rounds, and seats per round must all be positive".into(),
            ));
        }
        let rounds = self.rounds as usize;
        let per_round: Vec<&[Rational]> = match &self.weights {
            WeightSchedule::Constant(w) => {
                if w.len() != n {
                    return Err(AppError::BadConfig(format!(
                        "{} weights for {n} members",
                        w.len()
                    )));
                }
                vec![w.as_slice(); rounds]
            }
            WeightSchedule::PerRound(table) => {
                if table.len() != rounds || table.iter().any(|row| row.len() != n) {
                    return Err(AppError::BadConfig(
                        "per-round weight table must be rounds x members".into(),
                    ));
                }
                table.iter().map(Vec::as_slice).collect()
            }
        };
        let k = rat(i128::from(self.seats_per_round), 1);
        let mut normalized = vec![Vec::with_capacity(rounds); n];
        for (round, row) in per_round.iter().enumerate() {
            let total: Rational = row.iter().cloned().sum();
            for (i, w) in row.iter().enumerate() {
                if !w.is_positive() {
                    return Err(AppError::NonPositiveWeight {
                        name: self.member_names[i].clone(),
                        weight: format_ratio(w),
                    });
                }
                let scaled = &k * w / &total;
                if scaled > Rational::one() {
                    return Err(AppError::InfeasibleMemberWeight {
                        name: self.member_names[i].clone(),
                        round: round + 1,
                        weight: format_ratio(&scaled),
                    });
                }
                normalized[i].push(scaled);
            }
        }
        Ok(normalized)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SortitionAudit {
    /// Smallest normalized member weight across all rounds, as "num/den".
    pub min_weight: String,
    /// `ceil(2 / min_weight)`: no member may go unselected for this many
    /// consecutive rounds.
    pub window: u64,
    /// Longest unselected streak per member.
    pub max_gap: Vec<u64>,
    pub per_round_count_ok: bool,
    pub cumulative_ok: bool,
    pub window_bound_holds: bool,
    /// Members with normalized weight exactly 1 everywhere, seated in
    /// every round.
    pub always_selected: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SortitionRun {
    /// Selected member indices per round, ascending.
    pub selections: Vec<Vec<usize>>,
    pub audit: SortitionAudit,
}

pub fn run_sortition(config: &SortitionConfig, seed: u64) -> Result<SortitionRun, AppError> {
    let normalized = config.normalized_weights()?;
    let n = config.member_names.len();
    let rounds = config.rounds as usize;
    let instance = star_instance("panel", &config.member_names, &normalized)?;
    let outcome = cumulative_round(&instance, seed)?;

    let mut selections = Vec::with_capacity(rounds);
    let mut per_round_count_ok = true;
    for t in 1..=rounds {
        let chosen: Vec<usize> = (0..n).filter(|&i| outcome.bit(i, t)).collect();
        per_round_count_ok &= chosen.len() == config.seats_per_round as usize;
        selections.push(chosen);
    }
    assert!(
        per_round_count_ok,
        "hub degree preservation seats exactly k members per round"
    );

    let min_weight = normalized
        .iter()
        .flatten()
        .min()
        .expect("nonempty weight table")
        .clone();
    let window = ceil_int(&(rat(2, 1) / &min_weight)) as u64;

    let mut max_gap = vec![0u64; n];
    let mut window_bound_holds = true;
    for i in 0..n {
        let mut streak = 0u64;
        for sel in &selections {
            if sel.contains(&i) {
                streak = 0;
            } else {
                streak += 1;
                max_gap[i] = max_gap[i].max(streak);
            }
        }
        if max_gap[i] >= window {
            window_bound_holds = false;
        }
    }

    let always_selected: Vec<usize> = (0..n)
        .filter(|&i| normalized[i].iter().all(Rational::is_one))
        .collect();
    for &i in &always_selected {
        assert!(
            selections.iter().all(|sel| sel.contains(&i)),
            "weight-1 member {i} must be seated in every round"
        );
    }

    let cumulative_ok = audit_outcome(&instance, &outcome)?.pass();
    Ok(SortitionRun {
        selections,
        audit: SortitionAudit {
            min_weight: format_ratio(&min_weight),
            window,
            max_gap,
            per_round_count_ok,
            cumulative_ok,
            window_bound_holds,
            always_selected,
        },
    })
}

#[derive(Debug, Clone)]
pub struct AssignmentConfig {
    pub faculty: Vec<String>,
    pub courses: Vec<String>,
    /// (faculty index, course index, weight); constant across semesters.
    /// Pairs not listed have weight zero.
    pub weights: Vec<(usize, usize, Rational)>,
    pub semesters: u32,
}

impl AssignmentConfig {
    fn validate(&self) -> Result<(), AppError> {
        if self.faculty.is_empty() || self.courses.is_empty() || self.semesters == 0 {
            return Err(AppError::BadConfig(
                "faculty, courses, and semesters must all be nonempty".into(),
            ));
        }
        let mut course_degree = vec![Rational::zero(); self.courses.len()];
        let mut seen = std::collections::HashSet::new();
        for &(a, b, ref w) in &self.weights {
            if a >= self.faculty.len() || b >= self.courses.len() {
                return Err(AppError::BadConfig(format!("pair ({a}, {b}) out of range")));
            }
            if !seen.insert((a, b)) {
                return Err(AppError::BadConfig(format!("duplicate pair ({a}, {b})")));
            }
            if w.is_negative() || w > &Rational::one() {
                return Err(AppError::WeightOutOfRange {
                    faculty: self.faculty[a].clone(),
                    course: self.courses[b].clone(),
                    weight: format_ratio(w),
                });
            }
            course_degree[b] += w;
        }
        for (b, d) in course_degree.iter().enumerate() {
            if d > &Rational::one() {
                return Err(AppError::CourseOverloaded {
                    name: self.courses[b].clone(),
                    degree: format_ratio(d),
                });
            }
        }
        Ok(())
    }

    fn instance(&self) -> Result<WeightedBipartiteInstance, AppError> {
        self.validate()?;
        let edges: Vec<(u32, u32)> = self
            .weights
            .iter()
            .map(|&(a, b, _)| (a as u32, b as u32))
            .collect();
        let graph = BipartiteGraph::new(self.faculty.clone(), self.courses.clone(), edges)?;
        let weights = self
            .weights
            .iter()
            .map(|(_, _, w)| vec![w.clone(); self.semesters as usize])
            .collect();
        Ok(WeightedBipartiteInstance::new(
            graph,
            self.semesters as usize,
            weights,
        )?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AssignmentAudit {
    pub course_single_teacher_ok: bool,
    pub faculty_load_ok: bool,
    pub cumulative_ok: bool,
    /// Courses with total weight exactly 1/2 are taught exactly once per
    /// aligned pair of semesters.
    pub half_weight_courses_yearly_ok: bool,
    /// Faculty with a half-integer load teach exactly twice their load per
    /// aligned pair of semesters.
    pub half_load_faculty_pairs_ok: bool,
}

#[derive(Debug, Clone)]
pub struct AssignmentRun {
    /// (faculty index, course index) pairs taught per semester.
    pub schedule: Vec<Vec<(usize, usize)>>,
    pub audit: AssignmentAudit,
}

pub fn run_assignment(config: &AssignmentConfig, seed: u64) -> Result<AssignmentRun, AppError> {
    let instance = config.instance()?;
    let outcome = cumulative_round(&instance, seed)?;
    let semesters = config.semesters as usize;

    let mut schedule = vec![Vec::new(); semesters];
    for (e, &(a, b, _)) in config.weights.iter().enumerate() {
        for (t, slot) in schedule.iter_mut().enumerate() {
            if outcome.bit(e, t + 1) {
                slot.push((a, b));
            }
        }
    }
    for slot in &mut schedule {
        slot.sort_unstable();
    }

    let mut course_single_teacher_ok = true;
    let mut faculty_load_ok = true;
    let mut half_weight_courses_yearly_ok = true;
    let mut half_load_faculty_pairs_ok = true;

    let mut course_degree = vec![Rational::zero(); config.courses.len()];
    let mut faculty_degree = vec![Rational::zero(); config.faculty.len()];
    for &(a, b, ref w) in &config.weights {
        faculty_degree[a] += w;
        course_degree[b] += w;
    }

    for slot in &schedule {
        let mut course_seen = vec![0u32; config.courses.len()];
        let mut faculty_load = vec![0i128; config.faculty.len()];
        for &(a, b) in slot {
            course_seen[b] += 1;
            faculty_load[a] += 1;
        }
        course_single_teacher_ok &= course_seen.iter().all(|&c| c <= 1);
        for (a, &load) in faculty_load.iter().enumerate() {
            let d = &faculty_degree[a];
            let lo = crate::rational::floor_int(d);
            let hi = ceil_int(d);
            faculty_load_ok &= load >= lo && load <= hi;
        }
    }

    // Aligned two-semester windows have integer cumulative degrees
    // whenever the per-semester degree is a half-integer; those totals are
    // then exact.
    let half = rat(1, 2);
    for pair_start in (0..semesters.saturating_sub(1)).step_by(2) {
        let in_pair = |b_or_a: &dyn Fn(&(usize, usize)) -> usize, target: usize| -> i128 {
            schedule[pair_start]
                .iter()
                .chain(&schedule[pair_start + 1])
                .filter(|pair| b_or_a(pair) == target)
                .count() as i128
        };
        for (b, d) in course_degree.iter().enumerate() {
            if *d == half {
                half_weight_courses_yearly_ok &= in_pair(&|p: &(usize, usize)| p.1, b) == 1;
            }
        }
        for (a, d) in faculty_degree.iter().enumerate() {
            if frac_part(d) == half {
                let expect = ceil_int(&(d * rat(2, 1)));
                half_load_faculty_pairs_ok &= in_pair(&|p: &(usize, usize)| p.0, a) == expect;
            }
        }
    }

    let cumulative_ok = audit_outcome(&instance, &outcome)?.pass();
    Ok(AssignmentRun {
        schedule,
        audit: AssignmentAudit {
            course_single_teacher_ok,
            faculty_load_ok,
            cumulative_ok,
            half_weight_courses_yearly_ok,
            half_load_faculty_pairs_ok,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_panel_selects_exactly_k_each_round() {
        let config = SortitionConfig::uniform(9, 5, 12);
        let run = run_sortition(&config, 3).unwrap();
        assert_eq!(run.selections.len(), 12);
        for sel in &run.selections {
            assert_eq!(sel.len(), 5);
        }
        assert!(run.audit.per_round_count_ok);
        assert!(run.audit.cumulative_ok);
        // Normalized weight 5/9 gives window ceil(18/5) = 4.
        assert_eq!(run.audit.window, 4);
        assert!(run.audit.window_bound_holds);
    }

    #[test]
    fn infeasible_weights_are_rejected_with_hints() {
        let config = SortitionConfig {
            member_names: vec!["big".into(), "small".into(), "tiny".into()],
            weights: WeightSchedule::Constant(vec![rat(10, 1), rat(1, 1), rat(1, 1)]),
            seats_per_round: 2,
            rounds: 3,
        };
        let err = run_sortition(&config, 0).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, AppError::InfeasibleMemberWeight { .. }));
        assert!(msg.contains("split the member"), "{msg}");
    }

    #[test]
    fn single_round_sortition_is_a_plain_subset_draw() {
        let config = SortitionConfig::uniform(6, 2, 1);
        for seed in 0..20 {
            let run = run_sortition(&config, seed).unwrap();
            assert_eq!(run.selections[0].len(), 2);
        }
    }

    #[test]
    fn weight_one_member_is_always_seated() {
        // Weights sum to 2 and k = 2, so member 0's normalized weight is
        // exactly 1: it is frozen into every round.
        let config = SortitionConfig {
            member_names: (0..4).map(|i| format!("m{i}")).collect(),
            weights: WeightSchedule::Constant(vec![
                rat(1, 1),
                rat(1, 3),
                rat(1, 3),
                rat(1, 3),
            ]),
            seats_per_round: 2,
            rounds: 6,
        };
        let run = run_sortition(&config, 1).unwrap();
        assert_eq!(run.audit.always_selected, vec![0]);
        assert!(run.selections.iter().all(|sel| sel.contains(&0)));
    }

    #[test]
    fn shared_half_course_is_taught_every_semester_by_one_of_two() {
        let config = AssignmentConfig {
            faculty: vec!["ann".into(), "bob".into()],
            courses: vec!["algorithms".into()],
            weights: vec![(0, 0, rat(1, 2)), (1, 0, rat(1, 2))],
            semesters: 4,
        };
        for seed in 0..30 {
            let run = run_assignment(&config, seed).unwrap();
            for slot in &run.schedule {
                assert_eq!(slot.len(), 1, "course degree is exactly 1 per semester");
            }
            assert!(run.audit.course_single_teacher_ok);
            assert!(run.audit.faculty_load_ok);
            assert!(run.audit.cumulative_ok);
        }
    }

    #[test]
    fn three_half_loads_split_two_one_across_pairs() {
        // One faculty member with total weight 3/2 over three courses.
        let config = AssignmentConfig {
            faculty: vec!["ann".into()],
            courses: vec!["c1".into(), "c2".into(), "c3".into()],
            weights: vec![(0, 0, rat(1, 2)), (0, 1, rat(1, 2)), (0, 2, rat(1, 2))],
            semesters: 2,
        };
        for seed in 0..30 {
            let run = run_assignment(&config, seed).unwrap();
            let loads: Vec<usize> = run.schedule.iter().map(Vec::len).collect();
            let mut sorted = loads.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, vec![1, 2], "loads {loads:?} must be 2+1");
            assert!(run.audit.half_load_faculty_pairs_ok);
            assert!(run.audit.half_weight_courses_yearly_ok);
        }
    }

    #[test]
    fn integral_weights_give_a_fixed_timetable() {
        let config = AssignmentConfig {
            faculty: vec!["ann".into(), "bob".into()],
            courses: vec!["c1".into(), "c2".into()],
            weights: vec![(0, 0, rat(1, 1)), (1, 1, rat(1, 1)), (0, 1, rat(0, 1))],
            semesters: 3,
        };
        let run = run_assignment(&config, 9).unwrap();
        for slot in &run.schedule {
            assert_eq!(slot, &vec![(0, 0), (1, 1)]);
        }
    }

    #[test]
    fn overloaded_course_is_rejected() {
        let config = AssignmentConfig {
            faculty: vec!["ann".into(), "bob".into()],
            courses: vec!["c1".into()],
            weights: vec![(0, 0, rat(3, 4)), (1, 0, rat(1, 2))],
            semesters: 2,
        };
        assert!(matches!(
            run_assignment(&config, 0),
            Err(AppError::CourseOverloaded { .. })
        ));
    }
}
