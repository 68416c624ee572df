//! Command-line front end: config ingestion, experiment runners, and file
//! emission. All analysis lives in the library; the `wncs` binary only parses
//! arguments and dispatches here.
//!
//! Exit codes: `0` success, `1` internal failure, `2` invalid configuration
//! or usage, `3` not stabilizable (or, for heterogeneous periods, sufficient
//! condition not met).

use crate::capacity_idle::{self, SweepRow};
use crate::capacity_mdp;
use crate::error::Error;
use crate::lp::{self, LpStatus};
use crate::model::SystemConfig;
use crate::simulator::{self, DecayVerdict, SimOptions};
use crate::Result;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_NOT_STABILIZABLE: i32 = 3;

/// Bisection tolerance used by the `pmin` subcommand.
const PMIN_TOL: f64 = 1e-4;
/// Confidence level of the decay verdicts printed by `simulate`.
const SIM_CONFIDENCE: f64 = 0.99;

#[derive(Parser, Debug)]
#[command(name = "wncs", version, about = "Stabilizability analysis and scheduler/controller co-design for plants sharing one lossy wireless channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Decide stabilizability of the configured system.
    Check(CommonArgs),
    /// Synthesize the scheduling policy and control gains.
    Synthesize(CommonArgs),
    /// Synthesize, co-simulate, and test mean-square decay.
    Simulate(CommonArgs),
    /// Stability verdicts over a sampling-period range (optionally crossed
    /// with a channel grid).
    #[command(name = "sweep-h")]
    SweepH(CommonArgs),
    /// Stability verdicts over a channel-quality grid (optionally crossed
    /// with a period range).
    #[command(name = "sweep-p")]
    SweepP(CommonArgs),
    /// Minimum symmetric channel quality that keeps the system stabilizable.
    Pmin(CommonArgs),
    /// Smallest sampling period from which the perfect-channel condition
    /// holds for all larger periods.
    Hmin(CommonArgs),
}

fn parse_h_range(text: &str) -> std::result::Result<(u32, u32), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {text}"))?;
    let lo: u32 = lo.trim().parse().map_err(|e| format!("bad LO: {e}"))?;
    let hi: u32 = hi.trim().parse().map_err(|e| format!("bad HI: {e}"))?;
    if lo < 1 || hi < lo {
        return Err(format!("need 1 <= LO <= HI, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// JSON system description.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file (CSV/JSON), or output directory for `simulate`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed for Monte-Carlo runs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Frames per simulation run.
    #[arg(long, default_value_t = 200)]
    pub frames: u32,
    /// Monte-Carlo runs.
    #[arg(long, default_value_t = 1000)]
    pub runs: u32,
    /// Sampling-period range LO:HI for sweeps.
    #[arg(long, value_parser = parse_h_range)]
    pub h_range: Option<(u32, u32)>,
    /// Comma-separated channel-quality grid for sweeps.
    #[arg(long, value_delimiter = ',')]
    pub p_grid: Option<Vec<f64>>,
    /// Overrides the config's feasibility margin.
    #[arg(long)]
    pub margin: Option<f64>,
}

/// Which experiment to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Check,
    Synthesize,
    Simulate,
    SweepH,
    SweepP,
    Pmin,
    Hmin,
}

/// A fully parsed experiment request.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub command: Command,
    pub config_path: PathBuf,
    pub output_path: Option<PathBuf>,
    pub seed: u64,
    pub frames: u32,
    pub runs: u32,
    pub h_range: Option<(u32, u32)>,
    pub p_grid: Option<Vec<f64>>,
    pub margin_override: Option<f64>,
}

impl Cli {
    pub fn into_spec(self) -> ExperimentSpec {
        let (command, args) = match self.command {
            CliCommand::Check(a) => (Command::Check, a),
            CliCommand::Synthesize(a) => (Command::Synthesize, a),
            CliCommand::Simulate(a) => (Command::Simulate, a),
            CliCommand::SweepH(a) => (Command::SweepH, a),
            CliCommand::SweepP(a) => (Command::SweepP, a),
            CliCommand::Pmin(a) => (Command::Pmin, a),
            CliCommand::Hmin(a) => (Command::Hmin, a),
        };
        ExperimentSpec {
            command,
            config_path: args.config,
            output_path: args.out,
            seed: args.seed,
            frames: args.frames,
            runs: args.runs,
            h_range: args.h_range,
            p_grid: args.p_grid,
            margin_override: args.margin,
        }
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig { .. } | Error::Json(_) | Error::WrongSpecialization(_) => {
            EXIT_INVALID_CONFIG
        }
        Error::NotStabilizable { .. } | Error::SufficientConditionNotMet(_) => {
            EXIT_NOT_STABILIZABLE
        }
        _ => EXIT_INTERNAL,
    }
}

/// Runs the experiment; prints human-readable diagnostics and returns the
/// process exit code.
pub fn run(spec: &ExperimentSpec) -> i32 {
    match execute(spec) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

fn load_config(spec: &ExperimentSpec) -> Result<SystemConfig> {
    let mut config = SystemConfig::from_json_file(&spec.config_path)?;
    if let Some(margin) = spec.margin_override {
        config.feasibility_margin = margin;
        config = config.validate()?;
    }
    Ok(config)
}

fn execute(spec: &ExperimentSpec) -> Result<i32> {
    let config = load_config(spec)?;
    match spec.command {
        Command::Check => cmd_check(spec, &config),
        Command::Synthesize => cmd_synthesize(spec, &config),
        Command::Simulate => cmd_simulate(spec, &config),
        Command::SweepH => cmd_sweep(spec, &config, Command::SweepH),
        Command::SweepP => cmd_sweep(spec, &config, Command::SweepP),
        Command::Pmin => cmd_pmin(spec, &config),
        Command::Hmin => cmd_hmin(spec, &config),
    }
}

fn write_if_requested(path: &Option<PathBuf>, contents: &str) -> Result<()> {
    if let Some(path) = path {
        std::fs::write(path, contents)?;
    }
    Ok(())
}

fn cmd_check(spec: &ExperimentSpec, config: &SystemConfig) -> Result<i32> {
    if config.is_homogeneous() {
        let verdict = capacity_idle::check_stability_general(config)?;
        println!("{verdict}");
        write_if_requested(&spec.output_path, &serde_json::to_string_pretty(&verdict)?)?;
    } else {
        let plan = capacity_mdp::HeterogeneousPlan::new(&config.sampling_periods)?;
        let (lp, windows) = capacity_mdp::build_heterogeneous_lp(config, &plan)?;
        let strict: Vec<usize> = (0..windows.len()).collect();
        let sol = lp::solve_with_margin(&lp, &strict, 1.0)?;
        if sol.status != LpStatus::Feasible {
            return Err(Error::SolverFailure("occupancy polytope unexpectedly empty".into()));
        }
        let met = sol.margin > config.feasibility_margin;
        println!(
            "sufficient condition {} (margin {:.6e} over {} period windows)",
            if met { "met" } else { "not met" },
            sol.margin,
            windows.len()
        );
        let doc = serde_json::json!({
            "sufficient_condition_met": met,
            "margin": sol.margin,
            "window_count": windows.len(),
        });
        write_if_requested(&spec.output_path, &serde_json::to_string_pretty(&doc)?)?;
    }
    Ok(EXIT_OK)
}

fn cmd_synthesize(spec: &ExperimentSpec, config: &SystemConfig) -> Result<i32> {
    let design = capacity_mdp::synthesize(config)?;
    println!(
        "co-design found: throughput margin {:.6e}, big frame {} slots",
        design.margin, design.plan.big_frame
    );
    for (i, ctrl) in design.controllers.iter().enumerate() {
        println!(
            "  sub-system {}: gain {:.6}, design dropout {:.6}, riccati P {:.6e}",
            i + 1,
            ctrl.gain,
            ctrl.design_q,
            ctrl.dare.p_val
        );
    }
    for w in &design.windows {
        println!(
            "  delivery sub-system {} window {}: achieved {:.9} >= target {:.9}",
            w.subsystem + 1,
            w.window + 1,
            w.achieved,
            w.target
        );
    }
    write_if_requested(&spec.output_path, &design.policy.to_json_string())?;
    Ok(EXIT_OK)
}

fn cmd_simulate(spec: &ExperimentSpec, config: &SystemConfig) -> Result<i32> {
    let design = capacity_mdp::synthesize(config)?;
    let opts = SimOptions::new(spec.frames, spec.runs, spec.seed);
    let traces = simulator::simulate(config, &design, &opts)?;
    let diags = simulator::stability_diagnostic(&traces, SIM_CONFIDENCE)?;
    for d in &diags {
        println!(
            "sub-system {}: {} (slope {:.4e}, t {:.2})",
            d.subsystem + 1,
            match d.verdict {
                DecayVerdict::Decaying => "decaying",
                DecayVerdict::NotDecaying => "not decaying",
                DecayVerdict::Inconclusive => "inconclusive",
            },
            d.slope,
            d.t_statistic
        );
    }
    for est in simulator::empirical_dropout(&traces) {
        println!(
            "  empirical dropout sub-system {} window {}: {:.6} (se {:.2e}, {} samples)",
            est.subsystem + 1,
            est.window + 1,
            est.dropout,
            est.std_error,
            est.samples
        );
    }
    if let Some(dir) = &spec.output_path {
        std::fs::create_dir_all(dir)?;
        let mut buf = Vec::new();
        simulator::write_trace_csv(&traces, &mut buf)?;
        std::fs::write(dir.join("traces.csv"), &buf)?;
        let mut buf = Vec::new();
        simulator::write_diagnostic_csv(&diags, &mut buf)?;
        std::fs::write(dir.join("diagnostic.csv"), &buf)?;
        std::fs::write(dir.join("policy.json"), design.policy.to_json_string())?;
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(spec: &ExperimentSpec, config: &SystemConfig, which: Command) -> Result<i32> {
    let h_values: Vec<u32> = match (which, spec.h_range) {
        (_, Some((lo, hi))) => (lo..=hi).collect(),
        (Command::SweepH, None) => {
            return Err(Error::InvalidConfig {
                violations: vec!["sweep-h requires --h-range LO:HI".to_string()],
            })
        }
        _ => {
            let h = config.common_period().ok_or_else(|| Error::WrongSpecialization(
                "sweep over a heterogeneous-period config needs --h-range".to_string(),
            ))?;
            vec![h]
        }
    };
    let p_values: Vec<Option<f64>> = match (which, &spec.p_grid) {
        (_, Some(grid)) if !grid.is_empty() => grid.iter().copied().map(Some).collect(),
        (Command::SweepP, _) => {
            return Err(Error::InvalidConfig {
                violations: vec!["sweep-p requires --p-grid P1,P2,...".to_string()],
            })
        }
        _ => vec![None],
    };
    for p in p_values.iter().flatten() {
        if !(0.0..=1.0).contains(p) || *p <= 0.0 {
            return Err(Error::InvalidConfig {
                violations: vec![format!("--p-grid entry {p} outside (0, 1]")],
            });
        }
    }

    let mut grid: Vec<(u32, Option<f64>)> = Vec::new();
    for &h in &h_values {
        for &p in &p_values {
            grid.push((h, p));
        }
    }
    let uniform_config_p = config
        .channel
        .windows(2)
        .all(|w| w[0] == w[1])
        .then(|| config.channel[0]);

    let mut rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&(h, p)| -> Result<SweepRow> {
            let mut probe = config.clone();
            probe.sampling_periods = vec![h; config.n()];
            if let Some(p) = p {
                probe.channel = vec![p; config.n()];
            }
            let verdict = capacity_idle::check_stability_general(&probe)?;
            Ok(SweepRow { h, p: p.or(uniform_config_p), verdict })
        })
        .collect::<Result<Vec<_>>>()?;

    match which {
        Command::SweepP => rows.sort_by(|a, b| {
            (a.p.unwrap_or(f64::NAN), a.h)
                .partial_cmp(&(b.p.unwrap_or(f64::NAN), b.h))
                .unwrap_or(std::cmp::Ordering::Equal)
        }),
        _ => rows.sort_by(|a, b| {
            (a.h, a.p.unwrap_or(f64::NAN))
                .partial_cmp(&(b.h, b.p.unwrap_or(f64::NAN)))
                .unwrap_or(std::cmp::Ordering::Equal)
        }),
    }

    let mut buf = Vec::new();
    capacity_idle::write_sweep_csv(&rows, &mut buf)?;
    let text = String::from_utf8(buf).expect("CSV is UTF-8");
    match &spec.output_path {
        Some(path) => std::fs::write(path, &text)?,
        None => print!("{text}"),
    }
    let stable = rows.iter().filter(|r| r.verdict.stabilizable).count();
    eprintln!("swept {} grid points, {stable} stabilizable", rows.len());
    Ok(EXIT_OK)
}

fn symmetric_growth(config: &SystemConfig) -> Result<f64> {
    let a = config.plants[0].a;
    if config.plants.iter().any(|p| p.a != a) {
        return Err(Error::WrongSpecialization(
            "this command needs a symmetric instance (identical growth rates)".to_string(),
        ));
    }
    Ok(a)
}

fn cmd_pmin(spec: &ExperimentSpec, config: &SystemConfig) -> Result<i32> {
    let a = symmetric_growth(config)?;
    let h = config.common_period().ok_or_else(|| {
        Error::WrongSpecialization("pmin needs a common sampling period".to_string())
    })?;
    let result = capacity_idle::min_channel_quality_symmetric(
        config.n(),
        a,
        h,
        config.slot_length,
        PMIN_TOL,
        config.feasibility_margin,
    );
    match result {
        Some(p_min) => {
            println!("{p_min:.4}");
            let doc = serde_json::json!({ "p_min": p_min, "tolerance": PMIN_TOL });
            write_if_requested(&spec.output_path, &serde_json::to_string_pretty(&doc)?)?;
        }
        None => {
            println!("not achievable: unstable even with a perfect channel");
            let doc = serde_json::json!({ "p_min": null });
            write_if_requested(&spec.output_path, &serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_hmin(spec: &ExperimentSpec, config: &SystemConfig) -> Result<i32> {
    let h_min = capacity_idle::min_sampling_period_perfect(config)?;
    println!("{h_min}");
    let doc = serde_json::json!({ "h_min": h_min });
    write_if_requested(&spec.output_path, &serde_json::to_string_pretty(&doc)?)?;
    Ok(EXIT_OK)
}

/// Parses process arguments and runs; the binary's whole `main`.
pub fn main() -> i32 {
    let cli = Cli::parse();
    run(&cli.into_spec())
}
