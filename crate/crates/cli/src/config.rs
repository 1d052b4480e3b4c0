//! Scenario files: JSON, versioned, resolved against the file's directory.

use std::path::{Path, PathBuf};

use polarize_core::dynamics::{Schedule, ScheduleParams, ScheduleRegistry, SnapshotStride};
use polarize_core::geometry::sample_uniform_sphere;
use polarize_core::metrics::RhoOptions;
use polarize_core::{Eta, SimRng, UnitVector};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CONFIG_VERSION: u32 = 1;
pub const SEED_ENV: &str = "POLARIZE_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub dimension: usize,
    pub eta: f64,
    pub agents: AgentSpec,
    pub schedule: ScheduleSpec,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<StrideSpec>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    /// Required for the random initializers; checked against explicit lists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    pub init: AgentInit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AgentInit {
    UniformSphere,
    /// Uniform on the sphere of the first `d - k` coordinates, zeros after.
    UniformSphereWithZeroLastK { k: usize },
    Explicit { opinions: Vec<Vec<f64>> },
    /// Points CSV with header `coord_1..coord_d`.
    PointsCsv { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StrideSpec {
    Every(usize),
    Named(NamedStride),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedStride {
    Standard,
}

impl StrideSpec {
    pub fn parse(s: &str) -> CliResult<Self> {
        if s == "standard" {
            return Ok(StrideSpec::Named(NamedStride::Standard));
        }
        s.parse()
            .map(StrideSpec::Every)
            .map_err(|_| CliError::config(format!("stride must be 'standard' or a positive integer, got '{s}'")))
    }

    pub fn resolve(self) -> CliResult<SnapshotStride> {
        match self {
            StrideSpec::Named(NamedStride::Standard) => Ok(SnapshotStride::Standard),
            StrideSpec::Every(0) => Err(CliError::config("stride must be positive")),
            StrideSpec::Every(k) => Ok(SnapshotStride::Every(k)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_trajectory")]
    pub trajectory: PathBuf,
    #[serde(default = "default_metrics")]
    pub metrics: PathBuf,
}

fn default_trajectory() -> PathBuf {
    "trajectory.csv".into()
}

fn default_metrics() -> PathBuf {
    "metrics.csv".into()
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            trajectory: default_trajectory(),
            metrics: default_metrics(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
}

/// Parses a scenario, reporting the JSON path of the offending field.
pub fn parse_config(text: &str, origin: &str) -> CliResult<ScenarioConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        CliError::config(format!(
            "{origin}: line {}, column {}, at `{}`: {inner}",
            inner.line(),
            inner.column(),
            e.path()
        ))
    })?;
    if cfg.version != CONFIG_VERSION {
        return Err(CliError::config(format!(
            "{origin}: unsupported version {} (expected {CONFIG_VERSION})",
            cfg.version
        )));
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> CliResult<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text, &path.display().to_string())
}

/// Seed precedence: command-line flag, then config, then `POLARIZE_SEED`.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> CliResult<u64> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(_) => Err(CliError::config(format!(
            "no seed: pass --seed, set \"seed\" in the config, or set {SEED_ENV}"
        ))),
    }
}

fn unit(coords: &[f64], d: usize, what: &str) -> CliResult<UnitVector> {
    if coords.len() != d {
        return Err(CliError::config(format!("{what}: expected {d} coordinates, found {}", coords.len())));
    }
    UnitVector::new(coords.to_vec()).map_err(|e| CliError::config(format!("{what}: {e}")))
}

/// Reads a points CSV (header `coord_1..coord_d`). Rows must be unit vectors.
pub fn read_points(path: &Path) -> CliResult<Vec<UnitVector>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let headers = rdr.headers().map_err(|e| CliError::io(path, e))?.clone();
    let d = headers.len();
    for (k, h) in headers.iter().enumerate() {
        if h != format!("coord_{}", k + 1) {
            return Err(CliError::config(format!(
                "{}: header column {} is '{h}', expected 'coord_{}'",
                path.display(),
                k + 1,
                k + 1
            )));
        }
    }
    let mut pts = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let coords = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::config(format!("{}: data row {}: {e}", path.display(), row + 1)))?;
        pts.push(unit(&coords, d, &format!("{} data row {}", path.display(), row + 1))?);
    }
    if pts.is_empty() {
        return Err(CliError::config(format!("{}: no points", path.display())));
    }
    Ok(pts)
}

/// A validated scenario with everything resolved except the RNG-dependent
/// initial opinions.
pub struct Scenario {
    pub config: ScenarioConfig,
    pub base_dir: PathBuf,
    pub eta: Eta,
    pub seed: u64,
    pub stride: SnapshotStride,
    schedule_vectors: Vec<UnitVector>,
}

impl Scenario {
    pub fn new(
        config: ScenarioConfig,
        base_dir: PathBuf,
        seed_flag: Option<u64>,
        stride_flag: Option<StrideSpec>,
    ) -> CliResult<Self> {
        let d = config.dimension;
        if d < 2 {
            return Err(CliError::config(format!("dimension must be at least 2, got {d}")));
        }
        let eta = Eta::new(config.eta).map_err(|e| CliError::config(format!("eta: {e}")))?;
        let seed = resolve_seed(seed_flag, config.seed)?;
        let stride = stride_flag
            .or(config.stride)
            .unwrap_or(StrideSpec::Named(NamedStride::Standard))
            .resolve()?;
        let schedule_vectors = config
            .schedule
            .vectors
            .iter()
            .enumerate()
            .map(|(i, v)| unit(v, d, &format!("schedule.vectors[{i}]")))
            .collect::<CliResult<Vec<_>>>()?;
        let registry = ScheduleRegistry::with_builtins();
        if !registry.names().any(|n| n == config.schedule.kind) {
            return Err(CliError::config(format!(
                "schedule.kind: unknown schedule '{}' (available: {})",
                config.schedule.kind,
                registry.names().collect::<Vec<_>>().join(", ")
            )));
        }
        match &config.agents.init {
            AgentInit::UniformSphere | AgentInit::UniformSphereWithZeroLastK { .. } => {
                if config.agents.count.unwrap_or(0) == 0 {
                    return Err(CliError::config("agents.count: random initializers need a positive count"));
                }
            }
            AgentInit::Explicit { opinions } => {
                if let Some(c) = config.agents.count.filter(|&c| c != opinions.len()) {
                    return Err(CliError::config(format!(
                        "agents.count is {c} but {} explicit opinions are listed",
                        opinions.len()
                    )));
                }
            }
            AgentInit::PointsCsv { .. } => {}
        }
        if let AgentInit::UniformSphereWithZeroLastK { k } = config.agents.init {
            if k + 2 > d {
                return Err(CliError::config(format!(
                    "agents.init.k: zeroing {k} of {d} coordinates leaves fewer than 2"
                )));
            }
        }
        let mut scenario = Scenario {
            config,
            base_dir,
            eta,
            seed,
            stride,
            schedule_vectors,
        };
        // Resolve the schedule once so parameter errors surface before any run.
        scenario.schedule()?;
        if let AgentInit::Explicit { .. } | AgentInit::PointsCsv { .. } = scenario.config.agents.init {
            let mut rng = polarize_core::seeded_rng(0);
            scenario.initial_opinions(&mut rng)?;
        }
        scenario.config.seed = Some(seed);
        Ok(scenario)
    }

    pub fn from_file(path: &Path, seed_flag: Option<u64>, stride_flag: Option<StrideSpec>) -> CliResult<Self> {
        let cfg = load_config(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Scenario::new(cfg, base, seed_flag, stride_flag)
    }

    pub fn dimension(&self) -> usize {
        self.config.dimension
    }

    pub fn schedule(&self) -> CliResult<Box<dyn Schedule>> {
        let params = ScheduleParams {
            dimension: self.dimension(),
            vectors: self.schedule_vectors.clone(),
        };
        ScheduleRegistry::with_builtins()
            .build(&self.config.schedule.kind, &params)
            .map_err(|e| CliError::config(format!("schedule: {e}")))
    }

    pub fn rho_options(&self) -> RhoOptions {
        let mut o = RhoOptions {
            seed: self.seed,
            ..RhoOptions::default()
        };
        if let Some(m) = self.config.metrics {
            o.exact_limit = m.exact_limit.unwrap_or(o.exact_limit);
            o.restarts = m.restarts.unwrap_or(o.restarts);
        }
        o
    }

    pub fn initial_opinions(&self, rng: &mut SimRng) -> CliResult<Vec<UnitVector>> {
        let d = self.dimension();
        let count = self.config.agents.count.unwrap_or(0);
        match &self.config.agents.init {
            AgentInit::UniformSphere => (0..count)
                .map(|_| sample_uniform_sphere(d, rng).map_err(CliError::from))
                .collect(),
            AgentInit::UniformSphereWithZeroLastK { k } => (0..count)
                .map(|_| {
                    let mut c = sample_uniform_sphere(d - k, rng)?.into_inner();
                    c.resize(d, 0.0);
                    Ok(UnitVector::new(c)?)
                })
                .collect(),
            AgentInit::Explicit { opinions } => opinions
                .iter()
                .enumerate()
                .map(|(i, o)| unit(o, d, &format!("agents.init.opinions[{i}]")))
                .collect(),
            AgentInit::PointsCsv { path } => {
                let pts = read_points(&self.base_dir.join(path))?;
                if let Some(p) = pts.first().filter(|p| p.dim() != d) {
                    return Err(CliError::config(format!(
                        "{}: points have dimension {}, scenario has {d}",
                        path.display(),
                        p.dim()
                    )));
                }
                if let Some(c) = self.config.agents.count.filter(|&c| c != pts.len()) {
                    return Err(CliError::config(format!(
                        "agents.count is {c} but {} has {} points",
                        path.display(),
                        pts.len()
                    )));
                }
                Ok(pts)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "version": 1, "dimension": 3, "eta": 1.0,
        "agents": {"count": 4, "init": {"kind": "uniform-sphere"}},
        "schedule": {"kind": "iid-uniform"},
        "steps": 10, "seed": 9
    }"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(MINIMAL, "t").unwrap();
        assert_eq!(cfg.outputs, Outputs::default());
        let s = Scenario::new(cfg, PathBuf::new(), None, None).unwrap();
        assert_eq!(s.seed, 9);
        assert_eq!(s.stride, SnapshotStride::Standard);
        let mut rng = polarize_core::seeded_rng(1);
        assert_eq!(s.initial_opinions(&mut rng).unwrap().len(), 4);
    }

    #[test]
    fn parse_errors_name_the_field() {
        let bad = MINIMAL.replace("\"eta\": 1.0", "\"eta\": \"one\"");
        let err = parse_config(&bad, "t").unwrap_err().to_string();
        assert!(err.contains("`eta`") && err.contains("line 2"), "{err}");
        let bad = MINIMAL.replace("uniform-sphere", "gaussian");
        let err = parse_config(&bad, "t").unwrap_err().to_string();
        assert!(err.contains("agents.init"), "{err}");
        let bad = MINIMAL.replace("\"version\": 1", "\"version\": 7");
        assert!(matches!(parse_config(&bad, "t"), Err(CliError::Config(_))));
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some(2)).unwrap(), 1);
        assert_eq!(resolve_seed(None, Some(2)).unwrap(), 2);
    }

    #[test]
    fn stride_spellings() {
        let cfg: StrideSpec = serde_json::from_str("\"standard\"").unwrap();
        assert_eq!(cfg.resolve().unwrap(), SnapshotStride::Standard);
        let cfg: StrideSpec = serde_json::from_str("5").unwrap();
        assert_eq!(cfg.resolve().unwrap(), SnapshotStride::Every(5));
        assert!(StrideSpec::parse("0").unwrap().resolve().is_err());
        assert!(StrideSpec::parse("often").is_err());
    }

    #[test]
    fn dimension_mismatches_are_config_errors() {
        let bad = MINIMAL.replace(
            r#"{"kind": "iid-uniform"}"#,
            r#"{"kind": "fixed", "vectors": [[1.0, 0.0]]}"#,
        );
        let cfg = parse_config(&bad, "t").unwrap();
        assert!(matches!(Scenario::new(cfg, PathBuf::new(), None, None), Err(CliError::Config(_))));

        let bad = MINIMAL.replace(
            r#"{"count": 4, "init": {"kind": "uniform-sphere"}}"#,
            r#"{"init": {"kind": "explicit", "opinions": [[1.0, 0.0, 0.0], [0.0, 1.0]]}}"#,
        );
        let cfg = parse_config(&bad, "t").unwrap();
        let err = Scenario::new(cfg, PathBuf::new(), None, None).err().unwrap().to_string();
        assert!(err.contains("opinions[1]"), "{err}");
    }

    #[test]
    fn unknown_schedule_lists_alternatives() {
        let bad = MINIMAL.replace("iid-uniform", "zigzag");
        let cfg = parse_config(&bad, "t").unwrap();
        let err = Scenario::new(cfg, PathBuf::new(), None, None).err().unwrap().to_string();
        assert!(err.contains("random-pair"), "{err}");
    }
}
