use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use lbr_core::braid::MIN_GRID;
use lbr_core::fcs::{InitialState, TimeGrid};
use lbr_core::model::{JumpWeight, ModelParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub simulate: SimulateConfig,
    pub retrieve: RetrieveConfig,
    pub reduce: ReduceConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub gamma_b: f64,
    pub gamma_d: f64,
    pub omega_b: f64,
    pub omega_d: f64,
    /// Modulus of the jump weight; 1 is perfect detection.
    pub r: f64,
    pub initial_state: InitialState,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let p = ModelParams::default();
        Self {
            gamma_b: p.gamma_b,
            gamma_d: p.gamma_d,
            omega_b: p.omega_b,
            omega_d: 0.009,
            r: 1.0,
            initial_state: InitialState::Ground,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    /// Multiples of the classical jump period `1/Γ_B`.
    Tcl,
    Absolute,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub k_points: usize,
    /// Counting field for `dynamics`.
    pub k: f64,
    pub omega_range: [f64; 2],
    pub omega_points: usize,
    pub time_unit: TimeUnit,
    pub time_grid: TimeGrid,
    /// Observation time of `pn`.
    pub snapshot: f64,
    pub n_max: Option<usize>,
    pub gamma_d_values: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            k_points: 256,
            k: PI,
            omega_range: [0.001, 0.05],
            omega_points: 50,
            time_unit: TimeUnit::Tcl,
            time_grid: TimeGrid::List { values: vec![3.0, 5.0, 8.0] },
            snapshot: 5.0,
            n_max: None,
            gamma_d_values: vec![0.0, 0.0005, 0.001, 0.002],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub n_trajectories: u64,
    pub dt: f64,
    pub seed: u64,
    /// Emit raw click records instead of the histogram.
    pub records: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { n_trajectories: 10_000, dt: 0.02, seed: 2024, records: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RetrievalInput {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetrieveConfig {
    pub source: RetrievalInput,
    pub k_list: Vec<f64>,
    pub time_grid: TimeGrid,
    pub window: [f64; 2],
}

impl Default for RetrieveConfig {
    fn default() -> Self {
        Self {
            source: RetrievalInput::Exact,
            k_list: (-2..=2).map(|j| PI + 0.2 * j as f64).collect(),
            time_grid: TimeGrid::Linear { start: 1.0, stop: 12.0, points: 45 },
            window: [1.0, 12.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReduceConfig {
    pub z_values: Vec<f64>,
    pub omega_range: [f64; 2],
    pub omega_points: usize,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        Self { z_values: vec![0.1, -0.1], omega_range: [0.001, 0.015], omega_points: 29 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("lbr-output"), format: Format::Csv }
    }
}

impl RunConfig {
    /// Reads a JSON file, applies `key=value` overrides (dotted keys, values
    /// parsed as JSON or taken as strings) and validates the result.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_owned(), source })?;
        let mut value: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        for item in overrides {
            apply_override(&mut value, item)?;
        }
        let config: RunConfig = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn params(&self) -> ModelParams {
        let m = &self.model;
        ModelParams {
            gamma_b: m.gamma_b,
            gamma_d: m.gamma_d,
            omega_b: m.omega_b,
            omega_d: m.omega_d,
            jump_weight: JumpWeight { r: m.r, k: 0.0 },
        }
    }

    pub fn time_scale(&self) -> f64 {
        match self.grid.time_unit {
            TimeUnit::Tcl => 1.0 / self.time_unit_rate(),
            TimeUnit::Absolute => 1.0,
        }
    }

    fn time_unit_rate(&self) -> f64 {
        self.model.omega_b * self.model.omega_b / self.model.gamma_b
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.params().validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.grid.time_unit == TimeUnit::Tcl && !(self.time_unit_rate() > 0.0) {
            return bad("time_unit t_cl needs omega_b > 0".into());
        }
        if self.grid.k_points < MIN_GRID {
            return bad(format!("grid.k_points = {} is below {MIN_GRID}", self.grid.k_points));
        }
        for (name, [lo, hi]) in
            [("grid.omega_range", self.grid.omega_range), ("reduce.omega_range", self.reduce.omega_range)]
        {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0) {
                return bad(format!("{name} must be finite with a positive lower end"));
            }
        }
        for (name, grid) in [("grid.time_grid", &self.grid.time_grid), ("retrieve.time_grid", &self.retrieve.time_grid)]
        {
            let times = grid.times(1.0);
            if times.is_empty() || times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                return bad(format!("{name} must hold finite non-negative times"));
            }
        }
        if !(self.grid.snapshot.is_finite() && self.grid.snapshot >= 0.0) {
            return bad("grid.snapshot must be a finite non-negative time".into());
        }
        if self.grid.gamma_d_values.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return bad("grid.gamma_d_values must be non-negative".into());
        }
        if !(self.simulate.dt > 0.0) || self.simulate.n_trajectories == 0 {
            return bad("simulate needs dt > 0 and at least one trajectory".into());
        }
        let [lo, hi] = self.retrieve.window;
        if !(hi > lo) || self.retrieve.k_list.is_empty() {
            return bad("retrieve needs a non-empty k_list and window[1] > window[0]".into());
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let hash = Sha256::digest(canonical.as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn apply_override(root: &mut Value, item: &str) -> Result<(), CliError> {
    let (key, raw) = item.split_once('=').ok_or_else(|| CliError::Override(item.to_owned()))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Override(item.to_owned()));
    }
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    let mut node = root;
    for part in key.split('.') {
        if !node.is_object() {
            return Err(CliError::Override(item.to_owned()));
        }
        node = node.as_object_mut().unwrap().entry(part).or_insert_with(|| Value::Object(Default::default()));
    }
    *node = parsed;
    Ok(())
}
