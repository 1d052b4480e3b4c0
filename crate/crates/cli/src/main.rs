mod config;
mod error;
mod export;
mod reproduce;
mod strategy;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polarize_core::dynamics::{run_with, PopulationState};
use polarize_core::metrics::{polarization_report, RhoOptions};
use polarize_core::seeded_rng;

use config::{read_points, Scenario, StrideSpec};
use error::CliResult;
use export::{write_json, write_metrics, write_trajectory};
use reproduce::Figure;
use strategy::{StrategyArgs, StrategyRegistry};

#[derive(Debug, Parser)]
#[command(name = "polarize", version, about = "Opinion polarization simulator and intervention planner")]
struct Cli {
    /// Seed for every random draw; overrides the config and POLARIZE_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory that receives all output files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Snapshot stride: `standard` or record every k-th step.
    #[arg(long, global = true, value_parser = parse_stride)]
    stride: Option<StrideSpec>,
    /// Suppress the summary printed on success.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run scenario files. Several files run in parallel, each into
    /// `<out-dir>/<file stem>/`.
    Simulate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Override the number of steps.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Regenerate the data behind a figure or demo.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
    /// Compute an intervention strategy and write solution.json and a
    /// replayable scenario.json.
    Strategy {
        #[arg(value_parser = strategy_names())]
        name: String,
        #[command(flatten)]
        args: StrategyArgs,
    },
    /// Polarization metrics of a points CSV.
    Metrics {
        #[arg(long)]
        points: PathBuf,
        /// Enumerate every cut up to this many points.
        #[arg(long)]
        exact_limit: Option<usize>,
        /// Local-search restarts above the exact limit.
        #[arg(long)]
        restarts: Option<usize>,
    },
}

fn parse_stride(s: &str) -> Result<StrideSpec, String> {
    StrideSpec::parse(s).map_err(|e| e.to_string())
}

fn strategy_names() -> clap::builder::PossibleValuesParser {
    clap::builder::PossibleValuesParser::new(StrategyRegistry::with_builtins().names())
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Global {
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub stride: Option<StrideSpec>,
    pub quiet: bool,
}

/// Runs a validated scenario and writes its trajectory and metrics CSVs
/// under `dir`.
pub fn simulate(scenario: &Scenario, dir: &Path) -> CliResult<String> {
    let mut rng = seeded_rng(scenario.seed);
    let initial = PopulationState::new(scenario.initial_opinions(&mut rng)?, scenario.eta)?;
    let mut schedule = scenario.schedule()?;
    let steps = scenario.config.steps;
    let traj = run_with(&initial, schedule.as_mut(), steps, &mut rng, scenario.stride, |_| Ok(()))?;
    let outputs = &scenario.config.outputs;
    write_trajectory(&dir.join(&outputs.trajectory), &traj)?;
    write_metrics(&dir.join(&outputs.metrics), &traj, &scenario.rho_options())?;
    let last = polarization_report(&traj.last().opinions, &scenario.rho_options())?;
    Ok(format!(
        "{} agents, {steps} steps, seed {}: final rho_total {} ({}), max pair disagreement {}",
        initial.len(),
        scenario.seed,
        last.rho_total,
        if last.exact { "exact" } else { "heuristic" },
        last.max_pair_disagreement
    ))
}

fn cmd_simulate(configs: &[PathBuf], steps: Option<usize>, global: &Global) -> CliResult<Vec<String>> {
    let prepare = |path: &PathBuf| -> CliResult<(Scenario, PathBuf)> {
        let mut s = Scenario::from_file(path, global.seed, global.stride)?;
        if let Some(n) = steps {
            s.config.steps = n;
        }
        let dir = if configs.len() == 1 {
            global.out_dir.clone()
        } else {
            global.out_dir.join(path.file_stem().unwrap_or_default())
        };
        Ok((s, dir))
    };
    // Validate everything before running anything.
    let jobs = configs.iter().map(prepare).collect::<CliResult<Vec<_>>>()?;
    if jobs.len() == 1 {
        let (s, dir) = &jobs[0];
        return Ok(vec![simulate(s, dir)?]);
    }
    let results: Vec<CliResult<String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .zip(configs)
            .map(|((s, dir), path)| {
                scope.spawn(move || simulate(s, dir).map(|m| format!("{}: {m}", path.display())))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
    });
    results.into_iter().collect()
}

fn cmd_metrics(points: &Path, exact_limit: Option<usize>, restarts: Option<usize>, global: &Global) -> CliResult<String> {
    let pts = read_points(points)?;
    let mut opts = RhoOptions::default();
    if global.seed.is_some() || std::env::var_os(config::SEED_ENV).is_some() {
        opts.seed = config::resolve_seed(global.seed, None)?;
    }
    opts.exact_limit = exact_limit.unwrap_or(opts.exact_limit);
    opts.restarts = restarts.unwrap_or(opts.restarts);
    let report = polarization_report(&pts, &opts)?;
    write_json(&global.out_dir.join("metrics.json"), &report)?;
    Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
}

fn cmd_strategy(name: &str, args: &StrategyArgs, global: &Global) -> CliResult<String> {
    let registry = StrategyRegistry::with_builtins();
    let out = registry.get(name)?.run(args, global)?;
    write_json(&global.out_dir.join("solution.json"), &out.solution)?;
    if let Some(s) = &out.scenario {
        write_json(&global.out_dir.join("scenario.json"), s)?;
    }
    Ok(out.summary)
}

fn run(cli: Cli) -> CliResult<Vec<String>> {
    let global = Global {
        seed: cli.seed,
        out_dir: cli.out_dir,
        stride: cli.stride,
        quiet: cli.quiet,
    };
    match &cli.command {
        Command::Simulate { configs, steps } => cmd_simulate(configs, *steps, &global),
        Command::Reproduce { figure } => Ok(vec![reproduce::reproduce(*figure, &global)?]),
        Command::Strategy { name, args } => Ok(vec![cmd_strategy(name, args, &global)?]),
        Command::Metrics {
            points,
            exact_limit,
            restarts,
        } => Ok(vec![cmd_metrics(points, *exact_limit, *restarts, &global)?]),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let quiet = cli.quiet;
    match run(cli) {
        Ok(lines) => {
            if !quiet {
                for l in lines {
                    println!("{l}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
