//! Run configuration: a TOML file with `scenario`, `solver` and `run`
//! sections, plus repeatable `--set key=value` overrides applied on the
//! parsed tree before validation. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use topotrack_core::harness::{InitialEstimate, References, RunParams};
use topotrack_core::scenario::ScenarioConfig;
use topotrack_core::solver::SolverConfig;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub run: RunSection,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            scenario: ScenarioSection::default(),
            solver: SolverSection::default(),
            run: RunSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub n: usize,
    pub total_steps: usize,
    pub segment_length: usize,
    pub perturb_pct: f64,
    pub density: f64,
    pub diag_margin: f64,
    pub spectral_target: f64,
    pub seed: u64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let c = ScenarioConfig::default();
        ScenarioSection {
            n: c.n,
            total_steps: c.total_steps,
            segment_length: c.segment_length,
            perturb_pct: c.perturb_pct,
            density: c.density,
            diag_margin: c.diag_margin,
            spectral_target: c.spectral_target,
            seed: c.seed,
        }
    }
}

impl ScenarioSection {
    pub fn to_config(&self, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            n: self.n,
            total_steps: self.total_steps,
            segment_length: self.segment_length,
            perturb_pct: self.perturb_pct,
            density: self.density,
            diag_margin: self.diag_margin,
            spectral_target: self.spectral_target,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub prediction_steps: usize,
    pub correction_steps: usize,
    pub alpha: f64,
    pub beta: f64,
    pub h: f64,
    pub eps: f64,
    pub gamma: f64,
    /// Ridge installed at the first covariance sample.
    pub init_ridge: f64,
    /// Ridge for ill-conditioned MLE inversions.
    pub mle_ridge: f64,
    /// Initial estimate scale: `init_factor * (n/||x1||^2) * I`; `0` means
    /// the plain identity.
    pub init_factor: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        let p = RunParams::default();
        SolverSection {
            prediction_steps: s.prediction_steps,
            correction_steps: s.correction_steps,
            alpha: s.alpha,
            beta: s.beta,
            h: s.h,
            eps: p.eps,
            gamma: p.gamma,
            init_ridge: p.init_ridge,
            mle_ridge: p.mle_ridge,
            init_factor: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seeds: Vec<u64>,
    /// Reference solutions to compute: any of "bmle", "imle", "truth".
    pub references: Vec<String>,
    pub out_dir: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seeds: (1..=10).collect(),
            references: vec!["bmle".into(), "imle".into()],
            out_dir: "out".into(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        self.scenario
            .to_config(self.scenario.seed)
            .validate()
            .map_err(|e| CliError::config(prefixed("scenario", &e)))?;
        self.to_solver_config()
            .validate()
            .map_err(|e| CliError::config(prefixed("solver", &e)))?;
        if !self.solver.gamma.is_finite() || self.solver.gamma <= 0.0 || self.solver.gamma >= 1.0 {
            return Err(CliError::config(format!(
                "solver.gamma: must lie strictly in (0,1), got {}",
                self.solver.gamma
            )));
        }
        if !self.solver.eps.is_finite() || self.solver.eps <= 0.0 {
            return Err(CliError::config(format!(
                "solver.eps: must be positive, got {}",
                self.solver.eps
            )));
        }
        if !(self.solver.init_ridge.is_finite() && self.solver.init_ridge >= 0.0) {
            return Err(CliError::config(
                "solver.init_ridge: must be nonnegative".into(),
            ));
        }
        if !(self.solver.mle_ridge.is_finite() && self.solver.mle_ridge >= 0.0) {
            return Err(CliError::config(
                "solver.mle_ridge: must be nonnegative".into(),
            ));
        }
        if !(self.solver.init_factor.is_finite() && self.solver.init_factor >= 0.0) {
            return Err(CliError::config(
                "solver.init_factor: must be nonnegative".into(),
            ));
        }
        if self.run.seeds.is_empty() {
            return Err(CliError::config("run.seeds: need at least one seed".into()));
        }
        for r in &self.run.references {
            if !matches!(r.as_str(), "bmle" | "imle" | "truth") {
                return Err(CliError::config(format!(
                    "run.references: unknown reference '{r}' (expected bmle, imle or truth)"
                )));
            }
        }
        Ok(())
    }

    pub fn to_solver_config(&self) -> SolverConfig {
        SolverConfig {
            prediction_steps: self.solver.prediction_steps,
            correction_steps: self.solver.correction_steps,
            alpha: self.solver.alpha,
            beta: self.solver.beta,
            h: self.solver.h,
        }
    }

    pub fn references(&self) -> References {
        References {
            bmle: self.run.references.iter().any(|r| r == "bmle"),
            imle: self.run.references.iter().any(|r| r == "imle"),
            truth: self.run.references.iter().any(|r| r == "truth"),
        }
    }

    pub fn to_run_params(&self) -> RunParams {
        RunParams {
            solver: self.to_solver_config(),
            gamma: self.solver.gamma,
            eps: self.solver.eps,
            init_ridge: self.solver.init_ridge,
            mle_ridge: self.solver.mle_ridge,
            references: self.references(),
            initial: if self.solver.init_factor > 0.0 {
                InitialEstimate::ScaledIdentity {
                    factor: self.solver.init_factor,
                }
            } else {
                InitialEstimate::Identity
            },
        }
    }
}

/// Field-path message for a validation error coming from the core types.
fn prefixed(section: &str, e: &topotrack_core::Error) -> String {
    match e {
        topotrack_core::Error::InvalidParameter { name, reason } => {
            format!("{section}.{name}: {reason}")
        }
        other => format!("{section}: {other}"),
    }
}

/// Loads the config file (or the built-in defaults when `path` is `None`)
/// and applies `--set` overrides before deserialization.
pub fn load_config(path: Option<&std::path::Path>, sets: &[String]) -> Result<RunConfig, CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::io(format!("reading config {}: {e}", p.display())))?,
        None => toml::to_string_pretty(&RunConfig::default()).expect("default config serializes"),
    };
    let mut tree: toml::Table =
        toml::from_str(&text).map_err(|e| CliError::config(format!("config parse error: {e}")))?;
    for set in sets {
        apply_set(&mut tree, set)?;
    }
    let config: RunConfig = tree
        .try_into()
        .map_err(|e| CliError::config(format!("config error: {e}")))?;
    config.validate()?;
    Ok(config)
}

/// Applies one `section.key=value` override to the parsed tree.
fn apply_set(tree: &mut toml::Table, set: &str) -> Result<(), CliError> {
    let (path, raw) = set
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("--set '{set}': expected key=value")))?;
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(CliError::config(format!(
            "--set '{set}': empty key segment"
        )));
    }
    let mut table = tree;
    for seg in &segments[..segments.len() - 1] {
        table = table
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("--set '{set}': {seg} is not a section")))?;
    }
    let key = segments[segments.len() - 1];
    let mut value = coerce(raw);
    // Keep list-valued fields list-valued when a single element is given.
    if let Some(existing) = table.get(key) {
        if existing.is_array() && !value.is_array() {
            value = toml::Value::Array(vec![value]);
        }
    }
    table.insert(key.to_string(), value);
    Ok(())
}

fn coerce(raw: &str) -> toml::Value {
    if raw.contains(',') {
        return toml::Value::Array(raw.split(',').map(|tok| coerce(tok.trim())).collect());
    }
    if let Ok(i) = raw.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return toml::Value::Float(f);
    }
    if let Ok(b) = raw.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    toml::Value::String(raw.to_string())
}
