//! `polarize strategy <name>`: each strategy is a [`StrategyCommand`]
//! looked up by name, so new ones only need registering.

use std::path::PathBuf;

use clap::Args;
use polarize_core::strategies::{
    plan_convergence, spherical_cap_intervention, two_agent_intervention, two_agent_setup, HeuristicSolver,
    SolverRegistry,
};
use polarize_core::{seeded_rng, Eta, UnitVector};
use serde_json::{json, Value};

use crate::config::{read_points, AgentInit, AgentSpec, Outputs, ScenarioConfig, ScheduleSpec, CONFIG_VERSION};
use crate::error::{CliError, CliResult};
use crate::Global;

#[derive(Debug, Clone, Args)]
pub struct StrategyArgs {
    /// Points CSV with header coord_1..coord_d.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Target opinion for `plan`, comma separated; normalized before use.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub target: Option<Coords>,
    /// Convergence radius for `plan`.
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Target last coordinate `T` for `cap`.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Correlation of the two equatorial agents for `two-agent` / `one-agent`.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Random restarts for `hemisphere-heuristic`.
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
}

/// Comma-separated coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Coords(pub Vec<f64>);

pub fn parse_vector(s: &str) -> Result<Coords, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}")))
        .collect::<Result<_, _>>()
        .map(Coords)
}

/// What a strategy produced: the solution document, plus a scenario that
/// replays its intervention sequence on the same agents.
pub struct StrategyOutput {
    pub solution: Value,
    pub scenario: Option<ScenarioConfig>,
    pub summary: String,
}

pub trait StrategyCommand: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, args: &StrategyArgs, global: &Global) -> CliResult<StrategyOutput>;
}

pub struct StrategyRegistry {
    commands: Vec<Box<dyn StrategyCommand>>,
}

impl StrategyRegistry {
    pub fn with_builtins() -> Self {
        StrategyRegistry {
            commands: vec![
                Box::new(HemisphereCommand { solver: "exact" }),
                Box::new(HemisphereCommand { solver: "heuristic" }),
                Box::new(CapCommand),
                Box::new(PlanCommand),
                Box::new(TwoAgentCommand),
                Box::new(OneAgentCommand),
            ],
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.commands.iter().map(|c| c.name()).collect()
    }

    pub fn get(&self, name: &str) -> CliResult<&dyn StrategyCommand> {
        self.commands
            .iter()
            .find(|c| c.name() == name)
            .map(|c| c.as_ref())
            .ok_or_else(|| {
                CliError::config(format!("unknown strategy '{name}' (available: {})", self.names().join(", ")))
            })
    }
}

fn eta(args: &StrategyArgs) -> CliResult<Eta> {
    Eta::new(args.eta).map_err(|e| CliError::config(format!("--eta: {e}")))
}

fn points(args: &StrategyArgs) -> CliResult<Vec<UnitVector>> {
    let path = args.points.as_ref().ok_or_else(|| CliError::config("--points is required"))?;
    read_points(path)
}

fn seed(global: &Global) -> CliResult<u64> {
    crate::config::resolve_seed(global.seed, None)
}

fn raw(vs: &[UnitVector]) -> Vec<Vec<f64>> {
    vs.iter().map(|v| v.as_slice().to_vec()).collect()
}

/// Scenario running `schedule` once over explicit agents.
fn replay_scenario(agents: &[UnitVector], eta: Eta, kind: &str, schedule: &[UnitVector], seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        version: CONFIG_VERSION,
        dimension: agents[0].dim(),
        eta: eta.value(),
        agents: AgentSpec {
            count: Some(agents.len()),
            init: AgentInit::Explicit { opinions: raw(agents) },
        },
        schedule: ScheduleSpec {
            kind: kind.to_string(),
            vectors: raw(schedule),
        },
        steps: schedule.len(),
        seed: Some(seed),
        stride: None,
        outputs: Outputs::default(),
        metrics: None,
    }
}

fn with_schedule(mut v: Value, kind: &str, vectors: &[UnitVector]) -> Value {
    v["schedule"] = json!({ "kind": kind, "vectors": raw(vectors) });
    v
}

struct HemisphereCommand {
    solver: &'static str,
}

impl StrategyCommand for HemisphereCommand {
    fn name(&self) -> &'static str {
        match self.solver {
            "exact" => "hemisphere-exact",
            _ => "hemisphere-heuristic",
        }
    }

    fn run(&self, args: &StrategyArgs, global: &Global) -> CliResult<StrategyOutput> {
        let pts = points(args)?;
        let mut registry = SolverRegistry::with_builtins();
        registry.register(Box::new(HeuristicSolver {
            restarts: args.restarts,
        }));
        let seed = if self.solver == "exact" { global.seed.unwrap_or(0) } else { seed(global)? };
        let sol = registry.get(self.solver)?.solve(&pts, &mut seeded_rng(seed))?;
        let mut v = serde_json::to_value(&sol).expect("solution serializes");
        v["solver"] = json!(self.solver);
        v["n"] = json!(pts.len());
        Ok(StrategyOutput {
            summary: format!("{}: {} of {} points in the open hemisphere", self.name(), sol.count, pts.len()),
            solution: v,
            scenario: None,
        })
    }
}

struct CapCommand;

impl StrategyCommand for CapCommand {
    fn name(&self) -> &'static str {
        "cap"
    }

    fn run(&self, args: &StrategyArgs, global: &Global) -> CliResult<StrategyOutput> {
        let pts = points(args)?;
        let t = args.threshold.ok_or_else(|| CliError::config("--threshold is required"))?;
        let eta = eta(args)?;
        let seed = seed(global)?;
        let sol = spherical_cap_intervention(&pts, t, eta, &mut seeded_rng(seed))?;
        let v = serde_json::to_value(&sol).expect("solution serializes");
        let v = with_schedule(v, "explicit", std::slice::from_ref(&sol.intervention));
        Ok(StrategyOutput {
            summary: format!(
                "cap: c = {}, {} of {} agents end above T = {t}",
                sol.cap.threshold,
                sol.count,
                pts.len()
            ),
            scenario: Some(replay_scenario(&pts, eta, "explicit", std::slice::from_ref(&sol.intervention), seed)),
            solution: v,
        })
    }
}

struct PlanCommand;

impl StrategyCommand for PlanCommand {
    fn name(&self) -> &'static str {
        "plan"
    }

    fn run(&self, args: &StrategyArgs, global: &Global) -> CliResult<StrategyOutput> {
        let pts = points(args)?;
        let Coords(raw_target) = args.target.clone().ok_or_else(|| CliError::config("--target is required"))?;
        if raw_target.len() != pts[0].dim() {
            return Err(CliError::config(format!(
                "--target has {} coordinates, points have {}",
                raw_target.len(),
                pts[0].dim()
            )));
        }
        let target = UnitVector::normalize(raw_target).map_err(|e| CliError::config(format!("--target: {e}")))?;
        let eta = eta(args)?;
        let plan = plan_convergence(&pts, &target, eta, args.epsilon)?;
        let seq = plan.interventions();
        let mut v = serde_json::to_value(&plan).expect("plan serializes");
        v["converging"] = json!(plan.converging());
        v["steps"] = json!(seq.len());
        let v = with_schedule(v, "plan", &seq);
        Ok(StrategyOutput {
            summary: format!(
                "plan: {} of {} agents reach the target within {} after {} interventions",
                plan.converging().len(),
                pts.len(),
                args.epsilon,
                seq.len()
            ),
            scenario: Some(replay_scenario(&pts, eta, "plan", &seq, global.seed.unwrap_or(0))),
            solution: v,
        })
    }
}

struct TwoAgentCommand;

impl StrategyCommand for TwoAgentCommand {
    fn name(&self) -> &'static str {
        "two-agent"
    }

    fn run(&self, args: &StrategyArgs, global: &Global) -> CliResult<StrategyOutput> {
        let c = args.c.ok_or_else(|| CliError::config("--c is required"))?;
        let eta = eta(args)?;
        let sol = two_agent_intervention(c, eta)?;
        let v = serde_json::to_value(&sol).expect("solution serializes");
        let v = with_schedule(v, "explicit", std::slice::from_ref(&sol.intervention));
        Ok(StrategyOutput {
            summary: format!("two-agent: both agents reach {}, correlation becomes {}", sol.achieved, sol.c_two),
            scenario: Some(replay_scenario(
                &sol.agents,
                eta,
                "explicit",
                std::slice::from_ref(&sol.intervention),
                global.seed.unwrap_or(0),
            )),
            solution: v,
        })
    }
}

struct OneAgentCommand;

impl StrategyCommand for OneAgentCommand {
    fn name(&self) -> &'static str {
        "one-agent"
    }

    /// Helps the first agent of `--points`, or of the two-agent setup at
    /// correlation `--c`.
    fn run(&self, args: &StrategyArgs, global: &Global) -> CliResult<StrategyOutput> {
        let eta = eta(args)?;
        let agents = match (&args.points, args.c) {
            (Some(_), None) => points(args)?,
            (None, Some(c)) => two_agent_setup(c)?.to_vec(),
            _ => return Err(CliError::config("one-agent needs exactly one of --points or --c")),
        };
        let (v, achieved) = polarize_core::strategies::one_agent_intervention(&agents[0], eta)?;
        let d = v.dim();
        let after: Vec<f64> = agents
            .iter()
            .map(|u| polarize_core::geometry::intervene(u, &v, eta).map(|w| w.as_slice()[d - 1]))
            .collect::<Result<_, _>>()?;
        let sol = with_schedule(
            json!({ "agents": raw(&agents), "intervention": v, "achieved": achieved, "last_coordinate_after": after }),
            "explicit",
            std::slice::from_ref(&v),
        );
        Ok(StrategyOutput {
            summary: format!("one-agent: helped agent reaches {achieved}"),
            scenario: Some(replay_scenario(&agents, eta, "explicit", &[v], global.seed.unwrap_or(0))),
            solution: sol,
        })
    }
}
