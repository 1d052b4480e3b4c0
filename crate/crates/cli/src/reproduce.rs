//! Canned scenarios behind `polarize reproduce <id>`. Each writes plot-ready
//! CSV (no images) into `<out-dir>/<id>/`.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use clap::ValueEnum;
use polarize_core::duel::{Cone, DuelConfig, DuelMonitor};
use polarize_core::dynamics::{run_with, PopulationState, RandomPair, SnapshotStride};
use polarize_core::geometry::{contraction_threshold, pull};
use polarize_core::strategies::{c_one, c_two, one_agent_intervention, polarization_cost, two_agent_intervention, two_agent_setup};
use polarize_core::{geometry, seeded_rng, Eta, UnitVector};
use serde_json::json;

use crate::config::{AgentInit, AgentSpec, Outputs, Scenario, ScenarioConfig, ScheduleSpec, StrideSpec, CONFIG_VERSION};
use crate::error::CliResult;
use crate::export::{num, write_csv, write_json};
use crate::Global;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    #[value(name = "fig1")]
    Fig1,
    #[value(name = "figB")]
    FigB,
    #[value(name = "fig2-3")]
    Fig23,
    #[value(name = "fig5")]
    Fig5,
    #[value(name = "thm31-demo")]
    Thm31Demo,
    #[value(name = "duel-demo")]
    DuelDemo,
}

impl Figure {
    pub fn id(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::FigB => "figB",
            Figure::Fig23 => "fig2-3",
            Figure::Fig5 => "fig5",
            Figure::Thm31Demo => "thm31-demo",
            Figure::DuelDemo => "duel-demo",
        }
    }
}

/// Seed used when neither `--seed` nor `POLARIZE_SEED` is given.
pub const DEFAULT_SEED: u64 = 1;

pub fn c_grid() -> impl Iterator<Item = f64> {
    (-99..=99).map(|k| k as f64 / 100.0)
}

pub const FIG5_POINTS: usize = 10_001;

pub fn figure_scenario(fig: Figure) -> Option<ScenarioConfig> {
    let base = |d: usize, init: AgentInit, count: usize, kind: &str, vectors: Vec<Vec<f64>>, steps: usize| ScenarioConfig {
        version: CONFIG_VERSION,
        dimension: d,
        eta: 1.0,
        agents: AgentSpec {
            count: Some(count),
            init,
        },
        schedule: ScheduleSpec {
            kind: kind.to_string(),
            vectors,
        },
        steps,
        seed: None,
        stride: None,
        outputs: Outputs::default(),
        metrics: None,
    };
    let (a, b) = (0.75, 7f64.sqrt() / 4.0);
    match fig {
        Figure::Fig1 => Some(ScenarioConfig {
            stride: Some(StrideSpec::Every(1)),
            ..base(
                4,
                AgentInit::UniformSphereWithZeroLastK { k: 1 },
                500,
                "fixed",
                vec![vec![b, 0.0, 0.0, a]],
                5,
            )
        }),
        Figure::FigB => Some(ScenarioConfig {
            stride: Some(StrideSpec::Every(1)),
            ..base(
                5,
                AgentInit::UniformSphereWithZeroLastK { k: 2 },
                500,
                "alternating-pair",
                vec![vec![b, 0.0, 0.0, a, 0.0], vec![0.0, b, 0.0, 0.0, a]],
                12,
            )
        }),
        Figure::Thm31Demo => Some(base(3, AgentInit::UniformSphere, 50, "iid-uniform", vec![], 2000)),
        _ => None,
    }
}

fn reproduce_seed(global: &Global) -> CliResult<u64> {
    if global.seed.is_none() && std::env::var_os(crate::config::SEED_ENV).is_none() {
        return Ok(DEFAULT_SEED);
    }
    crate::config::resolve_seed(global.seed, None)
}

pub fn reproduce(fig: Figure, global: &Global) -> CliResult<String> {
    let dir = global.out_dir.join(fig.id());
    match fig {
        Figure::Fig1 | Figure::FigB | Figure::Thm31Demo => {
            let mut cfg = figure_scenario(fig).expect("simulated figure");
            cfg.seed = Some(reproduce_seed(global)?);
            let scenario = Scenario::new(cfg, dir.clone(), None, global.stride)?;
            write_json(&dir.join("scenario.json"), &scenario.config)?;
            let summary = crate::simulate(&scenario, &dir)?;
            Ok(format!("{}: {summary}", fig.id()))
        }
        Figure::Fig23 => fig23(&dir),
        Figure::Fig5 => fig5(&dir),
        Figure::DuelDemo => duel_demo(&dir, global),
    }
}

fn fig23(dir: &Path) -> CliResult<String> {
    let header = [
        "c",
        "c_one",
        "c_two",
        "polarization_cost",
        "one_agent_helped",
        "one_agent_other",
        "two_agent_each",
    ]
    .map(String::from);
    let mut rows = Vec::new();
    for c in c_grid() {
        let [u1, u2] = two_agent_setup(c)?;
        let (v, helped) = one_agent_intervention(&u1, Eta::ONE)?;
        let other = geometry::intervene(&u2, &v, Eta::ONE)?.as_slice()[2];
        let two = two_agent_intervention(c, Eta::ONE)?;
        rows.push(
            [c, c_one(c)?, c_two(c)?, polarization_cost(c)?, helped, other, two.achieved]
                .map(num)
                .to_vec(),
        );
    }
    let n = rows.len();
    write_csv(&dir.join("fig2-3.csv"), &header, rows)?;
    Ok(format!("fig2-3: {n} grid points written"))
}

fn fig5(dir: &Path) -> CliResult<String> {
    let eta = Eta::ONE;
    let mut rows = Vec::with_capacity(FIG5_POINTS);
    let mut peak = (0.0, f64::NEG_INFINITY);
    for k in 0..FIG5_POINTS {
        let alpha = FRAC_PI_2 * k as f64 / (FIG5_POINTS - 1) as f64;
        let f = pull(alpha, eta)?;
        if alpha - f > peak.1 {
            peak = (alpha, alpha - f);
        }
        rows.push(vec![num(alpha), num(f), num(alpha - f)]);
    }
    write_csv(&dir.join("fig5.csv"), &["alpha", "pull", "alpha_minus_pull"].map(String::from), rows)?;
    Ok(format!(
        "fig5: α - f(α) peaks at α = {} (θ* = {})",
        peak.0,
        contraction_threshold(eta).acos()
    ))
}

fn duel_demo(dir: &Path, global: &Global) -> CliResult<String> {
    let (n, steps) = (20, 10_000);
    let seed = reproduce_seed(global)?;
    let stride = match global.stride {
        Some(s) => s.resolve()?,
        None => SnapshotStride::Standard,
    };
    let cfg = DuelConfig::new(
        UnitVector::basis(3, 0)?,
        UnitVector::new(vec![0.8, 0.6, 0.0])?,
        Eta::ONE,
    )?;
    let mut rng = seeded_rng(seed);
    let ops = (0..n)
        .map(|_| geometry::sample_uniform_sphere(3, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let state = PopulationState::new(ops, cfg.eta)?;
    let mut schedule = RandomPair::new(cfg.v.clone(), cfg.v_prime.clone())?;
    let mut monitor = DuelMonitor::new(&cfg, 0.05, true);
    let traj = run_with(&state, &mut schedule, steps, &mut rng, stride, |s| {
        monitor.observe(s.t(), s.opinions())
    })?;
    let mut report = monitor.finish();
    crate::export::write_trajectory(&dir.join("trajectory.csv"), &traj)?;

    let header = ["t", "max_w_norm", "max_cone_distance", "max_pair_disagreement", "absorbed"].map(String::from);
    let last = report.steps.last().map_or(0, |s| s.t);
    let rows: Vec<Vec<String>> = report
        .steps
        .iter()
        .filter(|s| stride.records(s.t) || s.t == last)
        .map(|s| {
            let absorbed = s
                .cones
                .iter()
                .filter(|c| matches!(c, Cone::PlusPlus | Cone::MinusMinus))
                .count();
            vec![
                s.t.to_string(),
                num(s.w_norms.iter().copied().fold(0.0, f64::max)),
                num(s.max_cone_distance),
                num(s.max_pair_disagreement),
                absorbed.to_string(),
            ]
        })
        .collect();
    write_csv(&dir.join("duel.csv"), &header, rows)?;
    report.steps.clear();
    write_json(
        &dir.join("summary.json"),
        &json!({ "seed": seed, "cos_theta": cfg.cos_theta, "eta": cfg.eta, "agents": n, "steps": steps, "report": report }),
    )?;
    Ok(format!(
        "duel-demo: converged at {:?}, {} W-growth steps, {} cone exits",
        report.converged_at, report.w_increase_violations, report.cone_violations
    ))
}
