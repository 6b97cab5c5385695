//! Command-line front end: apportion seats from a profile file, round
//! weighted instances, run the verification suites, and simulate the
//! sortition / assignment applications.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 malformed
//! input, 3 infeasible configuration. Output on stdout is byte-identical
//! for identical (command, flags, seed): maps serialize with sorted keys
//! and quotas print as exact "num/den" strings.

use apportion::apps::{
    run_assignment, run_sortition, AppError, AssignmentConfig, SortitionConfig, WeightSchedule,
};
use apportion::bipartite::WeightedBipartiteInstance;
use apportion::cumulative_rounding::{audit_outcome, cumulative_round};
use apportion::methods::{
    divisor, grimmett, hamilton, poisson_method, HouseMonotoneMethod, HuntingtonHill, MethodError,
};
use apportion::model::{standard_quota, Apportionment, PopulationProfile};
use apportion::rational::{format_ratio, parse_ratio};
use apportion::verify::{self, stats::MethodKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "apportion", version, about = "Randomized apportionment toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apportion house seats among the states of a profile file.
    Apportion(ApportionArgs),
    /// Round a weighted bipartite instance file.
    Round(RoundArgs),
    /// Run a verification suite; exit 0 iff every check passes.
    Verify(VerifyArgs),
    /// Simulate repeated sortition or assignment and export CSV.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Hamilton,
    HuntingtonHill,
    Grimmett,
    Poisson,
    Cumulative,
}

#[derive(Args)]
struct ApportionArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// JSON profile: {"states": [{"name": ..., "population": ...}, ...]}
    #[arg(long)]
    profile: PathBuf,
    #[arg(long)]
    house: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Round only this many star copies (house-monotone guarantees then
    /// hold only up to it).
    #[arg(long)]
    hmax: Option<u64>,
}

#[derive(Args)]
struct RoundArgs {
    /// JSON instance: {"a_nodes": [...], "b_nodes": [...], "T": ...,
    /// "edges": [{"a": ..., "b": ..., "weights": ["1/4", ...]}]}
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Embed the audit report (degree preservation, cumulative degree
    /// preservation, auxiliary-bit consistency).
    #[arg(long)]
    audit: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Theorem1,
    Pitfalls,
    Bijection,
    Stats,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replicates per statistical estimate (stats suite only).
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum AppArg {
    Sortition,
    Assignment,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    app: AppArg,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    rounds: u32,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-round CSV output path; the audit JSON goes to stdout.
    #[arg(long)]
    out: PathBuf,
}

enum CliError {
    /// Malformed input (exit 2).
    Input(String),
    /// Structurally valid but infeasible configuration (exit 3).
    Infeasible(String),
    /// A verification check failed (exit 1).
    Failure(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Input(_) => 2,
            CliError::Infeasible(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Failure(m) | CliError::Input(m) | CliError::Infeasible(m) => m,
        }
    }
}

impl From<AppError> for CliError {
    fn from(e: AppError) -> Self {
        match e {
            AppError::InfeasibleMemberWeight { .. } | AppError::CourseOverloaded { .. } => {
                CliError::Infeasible(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<MethodError> for CliError {
    fn from(e: MethodError) -> Self {
        match e {
            MethodError::HouseExceedsLimit { .. } => CliError::Infeasible(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Apportion(args) => cmd_apportion(args),
        Command::Round(args) => cmd_round(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn emit(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

#[derive(Deserialize)]
struct ProfileFile {
    states: Vec<ProfileState>,
}

#[derive(Deserialize)]
struct ProfileState {
    name: String,
    population: u64,
}

fn load_profile(path: &Path) -> Result<(Vec<String>, PopulationProfile), CliError> {
    let file: ProfileFile = serde_json::from_str(&read_file(path)?)
        .map_err(|e| CliError::Input(format!("bad profile JSON: {e}")))?;
    let names: Vec<String> = file.states.iter().map(|s| s.name.clone()).collect();
    let mut unique = names.clone();
    unique.sort();
    unique.dedup();
    if unique.len() != names.len() {
        return Err(CliError::Input("duplicate state names".to_string()));
    }
    let populations = file.states.iter().map(|s| s.population).collect();
    let profile = PopulationProfile::new(populations)
        .map_err(|e| CliError::Input(format!("bad profile: {e}")))?;
    Ok((names, profile))
}

fn resolve_seed(seed: Option<u64>, randomized: bool, method: &str) -> Option<u64> {
    if randomized {
        Some(seed.unwrap_or_else(|| {
            eprintln!("note: no --seed given; {method} uses seed 0");
            0
        }))
    } else {
        if seed.is_some() {
            eprintln!("warning: {method} is deterministic; --seed ignored");
        }
        None
    }
}

fn cmd_apportion(args: ApportionArgs) -> Result<(), CliError> {
    if args.house == 0 {
        return Err(CliError::Input("house size must be positive".to_string()));
    }
    let (names, profile) = load_profile(&args.profile)?;
    let (method_name, randomized) = match args.method {
        MethodArg::Hamilton => ("hamilton", false),
        MethodArg::HuntingtonHill => ("huntington-hill", false),
        MethodArg::Grimmett => ("grimmett", true),
        MethodArg::Poisson => ("poisson", true),
        MethodArg::Cumulative => ("cumulative", true),
    };
    let seed = resolve_seed(args.seed, randomized, method_name);
    if args.hmax.is_some() && !matches!(args.method, MethodArg::Cumulative) {
        eprintln!("warning: --hmax only affects the cumulative method");
    }
    let apportionment: Apportionment = match args.method {
        MethodArg::Hamilton => hamilton(&profile, args.house),
        MethodArg::HuntingtonHill => divisor(&profile, args.house, &HuntingtonHill)?,
        MethodArg::Grimmett => grimmett(&profile, args.house, seed.unwrap()),
        MethodArg::Poisson => poisson_method(&profile, args.house, seed.unwrap()),
        MethodArg::Cumulative => {
            let mut method = match args.hmax {
                Some(m) => HouseMonotoneMethod::with_h_max(seed.unwrap(), m),
                None => HouseMonotoneMethod::new(seed.unwrap()),
            };
            method.apportion(&profile, args.house)?
        }
    };
    let quotas = standard_quota(&profile, args.house);
    let seats: BTreeMap<&str, u32> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), apportionment.seat(i)))
        .collect();
    let quota_map: BTreeMap<&str, String> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), format_ratio(quotas.value(i))))
        .collect();
    emit(&json!({
        "method": method_name,
        "seed": seed,
        "house": args.house,
        "seats": seats,
        "quotas": quota_map,
    }));
    Ok(())
}

fn cmd_round(args: RoundArgs) -> Result<(), CliError> {
    let instance = WeightedBipartiteInstance::from_json(&read_file(&args.instance)?)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let seed = resolve_seed(args.seed, true, "round").unwrap();
    let outcome = cumulative_round(&instance, seed).map_err(|e| CliError::Input(e.to_string()))?;

    let edges: Vec<serde_json::Value> = (0..instance.graph().edge_count())
        .map(|e| {
            let (a, b) = instance.graph().edge_name(e);
            let bits: Vec<u8> = (1..=instance.rounds())
                .map(|t| u8::from(outcome.bit(e, t)))
                .collect();
            json!({"a": a, "b": b, "bits": bits})
        })
        .collect();
    let mut degrees = BTreeMap::new();
    let mut cumulative = BTreeMap::new();
    for idx in 0..instance.graph().node_count() {
        let node = instance.graph().node_ref(idx);
        let name = instance.graph().node_name(node).to_string();
        let per_t: Vec<u64> = (1..=instance.rounds())
            .map(|t| outcome.degree(node, t))
            .collect();
        let cum: Vec<u64> = (1..=instance.rounds())
            .map(|t| outcome.cumulative_degree(node, t))
            .collect();
        degrees.insert(name.clone(), per_t);
        cumulative.insert(name, cum);
    }
    let mut output = json!({
        "seed": seed,
        "T": instance.rounds(),
        "edges": edges,
        "degrees": degrees,
        "cumulative_degrees": cumulative,
    });
    if args.audit {
        let report =
            audit_outcome(&instance, &outcome).map_err(|e| CliError::Input(e.to_string()))?;
        output["audit"] = serde_json::to_value(&report).expect("serializable");
        if !report.pass() {
            emit(&output);
            return Err(CliError::Failure("rounding audit found violations".into()));
        }
    }
    emit(&output);
    Ok(())
}

#[derive(Serialize)]
struct SuiteOutcome<T: Serialize> {
    suite: &'static str,
    pass: bool,
    certificate: T,
}

fn finish_suite<T: Serialize>(suite: &'static str, pass: bool, certificate: T) -> Result<(), CliError> {
    emit(&serde_json::to_value(SuiteOutcome { suite, pass, certificate }).expect("serializable"));
    if pass {
        Ok(())
    } else {
        Err(CliError::Failure(format!("suite {suite} failed")))
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    match args.suite {
        SuiteArg::Theorem1 => {
            let cert = verify::verify_theorem1().map_err(|e| CliError::Input(e.to_string()))?;
            let pass = cert.pass;
            finish_suite("theorem1", pass, cert)
        }
        SuiteArg::Pitfalls => {
            let ex1 = verify::verify_pitfall_example1()
                .map_err(|e| CliError::Input(e.to_string()))?;
            let ex2 = verify::verify_pitfall_example2()
                .map_err(|e| CliError::Input(e.to_string()))?;
            let pass = ex1.pass && ex2.pass;
            finish_suite("pitfalls", pass, json!({"example1": ex1, "example2": ex2}))
        }
        SuiteArg::Bijection => {
            let mut certs = Vec::new();
            let mut pass = true;
            for profile in small_profiles(3, 8) {
                let cert = verify::verify_bijection(&profile)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                pass &= cert.pass;
                certs.push(cert);
            }
            let count = certs.len();
            finish_suite(
                "bijection",
                pass,
                json!({"profiles": count, "certificates": certs}),
            )
        }
        SuiteArg::Stats => {
            if args.samples < 1_000 {
                return Err(CliError::Input(
                    "--samples must be at least 1000".to_string(),
                ));
            }
            let mut reports = BTreeMap::new();
            let mut pass = true;
            for (name, inst) in verify::instances::standard_instances() {
                let marginals = verify::stats::stat_instance_marginals(&inst, args.samples, args.seed)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                pass &= marginals.pass;
                reports.insert(format!("marginals/{name}"), serde_json::to_value(&marginals).unwrap());
                let negcorr = verify::stat_negcorr(&inst, args.samples, args.seed)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                pass &= negcorr.pass;
                reports.insert(format!("negcorr/{name}"), serde_json::to_value(&negcorr).unwrap());
                if let Some(exact) =
                    verify::exact_checks(&inst).map_err(|e| CliError::Input(e.to_string()))?
                {
                    pass &= exact.pass;
                    reports.insert(format!("exact/{name}"), serde_json::to_value(&exact).unwrap());
                }
            }
            let coin = PopulationProfile::new(vec![1, 1]).expect("valid");
            let table = PopulationProfile::new(vec![45, 25, 15, 15]).expect("valid");
            for (kind, profile, h) in [
                (MethodKind::Grimmett, &coin, 1),
                (MethodKind::Grimmett, &table, 3),
                (MethodKind::Poisson, &table, 3),
                (MethodKind::HouseMonotone, &coin, 1),
            ] {
                let report = verify::stat_exante(kind, profile, h, args.samples, args.seed);
                pass &= report.pass;
                reports.insert(
                    format!("exante/{}/{:?}-h{h}", kind.name(), profile.populations()),
                    serde_json::to_value(&report).unwrap(),
                );
            }
            finish_suite("stats", pass, reports)
        }
    }
}

/// Every population profile with `2..=max_states` states and total
/// population at most `max_total`.
fn small_profiles(max_states: usize, max_total: u64) -> Vec<PopulationProfile> {
    let mut out = Vec::new();
    fn rec(parts: &mut Vec<u64>, remaining: u64, max_states: usize, out: &mut Vec<PopulationProfile>) {
        if parts.len() >= 2 {
            out.push(PopulationProfile::new(parts.clone()).expect("valid"));
        }
        if parts.len() == max_states {
            return;
        }
        for next in 1..=remaining {
            parts.push(next);
            rec(parts, remaining - next, max_states, out);
            parts.pop();
        }
    }
    let mut parts = Vec::new();
    for total in 2..=max_total {
        for first in 1..total {
            parts.push(first);
            rec(&mut parts, total - first, max_states, &mut out);
            parts.pop();
        }
    }
    out
}

#[derive(Deserialize)]
struct SortitionFile {
    members: Vec<MemberEntry>,
    seats_per_round: u32,
    /// Optional per-round weight table (rounds x members), overriding the
    /// per-member constant weights.
    per_round_weights: Option<Vec<Vec<String>>>,
}

#[derive(Deserialize)]
struct MemberEntry {
    name: String,
    weight: String,
}

#[derive(Deserialize)]
struct AssignmentFile {
    faculty: Vec<String>,
    courses: Vec<String>,
    weights: Vec<AssignmentEntry>,
}

#[derive(Deserialize)]
struct AssignmentEntry {
    faculty: String,
    course: String,
    weight: String,
}

fn parse_weight(text: &str, what: &str) -> Result<apportion::Rational, CliError> {
    parse_ratio(text).map_err(|e| CliError::Input(format!("bad weight for {what}: {e}")))
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    if args.rounds == 0 {
        return Err(CliError::Input("--rounds must be positive".to_string()));
    }
    let seed = resolve_seed(args.seed, true, "simulate").unwrap();
    let text = read_file(&args.config)?;
    match args.app {
        AppArg::Sortition => {
            let file: SortitionFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("bad sortition config: {e}")))?;
            let member_names: Vec<String> = file.members.iter().map(|m| m.name.clone()).collect();
            let weights = match file.per_round_weights {
                Some(table) => {
                    let mut rows = Vec::with_capacity(table.len());
                    for (r, row) in table.iter().enumerate() {
                        let mut parsed = Vec::with_capacity(row.len());
                        for (i, w) in row.iter().enumerate() {
                            parsed.push(parse_weight(w, &format!("round {} member {i}", r + 1))?);
                        }
                        rows.push(parsed);
                    }
                    WeightSchedule::PerRound(rows)
                }
                None => {
                    let mut parsed = Vec::with_capacity(file.members.len());
                    for m in &file.members {
                        parsed.push(parse_weight(&m.weight, &m.name)?);
                    }
                    WeightSchedule::Constant(parsed)
                }
            };
            let config = SortitionConfig {
                member_names: member_names.clone(),
                weights,
                seats_per_round: file.seats_per_round,
                rounds: args.rounds,
            };
            let run = run_sortition(&config, seed)?;
            let mut csv = String::new();
            csv.push_str("round");
            for s in 1..=file.seats_per_round {
                csv.push_str(&format!(",seat_{s}"));
            }
            csv.push('\n');
            for (round, selected) in run.selections.iter().enumerate() {
                csv.push_str(&format!("{}", round + 1));
                for &i in selected {
                    csv.push_str(&format!(",{}", member_names[i]));
                }
                csv.push('\n');
            }
            write_output(&args.out, &csv)?;
            emit(&json!({
                "app": "sortition",
                "seed": seed,
                "rounds": args.rounds,
                "csv": args.out.display().to_string(),
                "audit": run.audit,
            }));
            Ok(())
        }
        AppArg::Assignment => {
            let file: AssignmentFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("bad assignment config: {e}")))?;
            let faculty_index =
                |name: &str| file.faculty.iter().position(|f| f == name);
            let course_index = |name: &str| file.courses.iter().position(|c| c == name);
            let mut weights = Vec::with_capacity(file.weights.len());
            for entry in &file.weights {
                let a = faculty_index(&entry.faculty).ok_or_else(|| {
                    CliError::Input(format!("unknown faculty {:?}", entry.faculty))
                })?;
                let b = course_index(&entry.course).ok_or_else(|| {
                    CliError::Input(format!("unknown course {:?}", entry.course))
                })?;
                let w = parse_weight(
                    &entry.weight,
                    &format!("({}, {})", entry.faculty, entry.course),
                )?;
                weights.push((a, b, w));
            }
            let config = AssignmentConfig {
                faculty: file.faculty.clone(),
                courses: file.courses.clone(),
                weights,
                semesters: args.rounds,
            };
            let run = run_assignment(&config, seed)?;
            let mut csv = String::from("semester,course,faculty\n");
            for (t, slot) in run.schedule.iter().enumerate() {
                for &(a, b) in slot {
                    csv.push_str(&format!(
                        "{},{},{}\n",
                        t + 1,
                        file.courses[b],
                        file.faculty[a]
                    ));
                }
            }
            write_output(&args.out, &csv)?;
            emit(&json!({
                "app": "assignment",
                "seed": seed,
                "semesters": args.rounds,
                "csv": args.out.display().to_string(),
                "audit": run.audit,
            }));
            Ok(())
        }
    }
}

fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}
