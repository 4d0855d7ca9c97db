// SPDX-License-Identifier: Apache-2.0
//! Run configuration: a JSON tree merged over defaults, then patched with
//! `--key.path=value` overrides.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use tfsr_core::fisher::log_grid;
use tfsr_core::{DeviceCalibration, DiNoise, ProcessorParams, TwoSourceSpec};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Synthesize,
    Pipeline,
    Probabilities,
    Fisher,
    Estimate,
    Bootstrap,
    Sweep,
    Compare,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Synthesize => "synthesize",
            Mode::Pipeline => "pipeline",
            Mode::Probabilities => "probabilities",
            Mode::Fisher => "fisher",
            Mode::Estimate => "estimate",
            Mode::Bootstrap => "bootstrap",
            Mode::Sweep => "sweep",
            Mode::Compare => "compare",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    /// Output directory.
    pub output_path: PathBuf,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    pub source: TwoSourceSpec,
    pub calibration: DeviceCalibration,
    pub processor: ProcessorParams,
    pub grid: GridConfig,
    pub sweep: SweepConfig,
    pub pipeline: PipelineConfig,
    pub estimate: EstimateConfig,
    pub di_noise: DiNoise,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            source: TwoSourceSpec::default(),
            calibration: DeviceCalibration::experimental(),
            processor: ProcessorParams::default(),
            grid: GridConfig::default(),
            sweep: SweepConfig::default(),
            pipeline: PipelineConfig::default(),
            estimate: EstimateConfig::default(),
            di_noise: DiNoise::default(),
        }
    }
}

/// Time grid in units of `1/sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub points: usize,
    pub half_span: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points: 4096,
            half_span: 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub eps_min: f64,
    pub eps_max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            eps_min: 0.08,
            eps_max: 2.0,
            points: 25,
            spacing: Spacing::Log,
        }
    }
}

impl SweepConfig {
    pub fn epsilons(&self) -> Result<Vec<f64>, CliError> {
        let bad = |msg: &str| Err(CliError::Config(format!("params.sweep: {msg}")));
        if self.points == 0 {
            return bad("points must be >= 1");
        }
        if !(self.eps_min.is_finite()
            && self.eps_max.is_finite()
            && self.eps_min >= 0.0
            && self.eps_max >= self.eps_min)
        {
            return bad("need 0 <= eps_min <= eps_max");
        }
        if self.points == 1 {
            return Ok(vec![self.eps_min]);
        }
        match self.spacing {
            Spacing::Linear => {
                let h = (self.eps_max - self.eps_min) / (self.points - 1) as f64;
                Ok((0..self.points)
                    .map(|k| self.eps_min + k as f64 * h)
                    .collect())
            }
            Spacing::Log => {
                if self.eps_min <= 0.0 {
                    return bad("log spacing needs eps_min > 0");
                }
                Ok(log_grid(self.eps_min, self.eps_max, self.points)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Relative phases averaged per separation.
    pub phases: usize,
    /// Lock `theta` to the dark fringe of the Gaussian reference first.
    pub lock_dark_fringe: bool,
    /// Divide simulated port powers by the reference-mode throughputs.
    pub calibrate: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            phases: 64,
            lock_dark_fringe: true,
            calibrate: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimateConfig {
    pub photons_per_set: u64,
    pub n_boot: usize,
    /// Separations for `bootstrap`; `estimate` uses `params.source.epsilon`.
    pub epsilons: Vec<f64>,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            photons_per_set: 150_000,
            n_boot: 1000,
            epsilons: vec![0.1, 0.3, 0.5],
        }
    }
}

/// Everything except `mode`, which has no default.
pub fn defaults() -> Value {
    let mut v = serde_json::json!({
        "seed": DEFAULT_SEED,
        "output_path": "out",
        "params": Params::default(),
    });
    // Option fields serialize as null; keep them so they can be overridden.
    v.as_object_mut().expect("object").remove("mode");
    v
}

/// Recursively overlay `patch` onto `base`, rejecting keys `base` lacks.
pub fn merge(base: &mut Value, patch: &Value, path: &str) -> Result<(), CliError> {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, pv) in p {
                let sub = join(path, k);
                match b.get_mut(k) {
                    Some(bv) => merge(bv, pv, &sub)?,
                    None if path.is_empty() && k == "mode" => {
                        b.insert(k.clone(), pv.clone());
                    }
                    None => return Err(CliError::Config(format!("unknown key `{sub}`"))),
                }
            }
            Ok(())
        }
        (b, p) => {
            *b = p.clone();
            Ok(())
        }
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// `a.b.c=value`; the value is parsed as JSON, falling back to a string.
pub fn apply_override(tree: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| {
        CliError::Config(format!(
            "override `{assignment}` needs the form key.path=value"
        ))
    })?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Config(format!("malformed override key `{key}`")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut patch = value;
    for part in key.rsplit('.') {
        let mut m = Map::new();
        m.insert(part.to_string(), patch);
        patch = Value::Object(m);
    }
    merge(tree, &patch, "")
}

pub fn resolve(tree: Value) -> Result<RunConfig, CliError> {
    if tree.get("mode").is_none_or(Value::is_null) {
        return Err(CliError::Config(
            "no mode given (set `mode` in the config or pass --mode)".into(),
        ));
    }
    let cfg: RunConfig =
        serde_json::from_value(tree).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.params;
        p.source.validate()?;
        p.calibration.validate()?;
        p.di_noise.validate()?;
        p.processor.validate()?;
        if p.grid.points < 16 || !p.grid.points.is_multiple_of(2) {
            return Err(CliError::Config(
                "params.grid.points must be even and >= 16".into(),
            ));
        }
        if !(p.grid.half_span.is_finite() && p.grid.half_span > 0.0) {
            return Err(CliError::Config("params.grid.half_span must be > 0".into()));
        }
        match self.mode {
            Mode::Pipeline => {
                p.processor.validate_interferometer()?;
                if p.pipeline.phases == 0 {
                    return Err(CliError::Config(
                        "params.pipeline.phases must be >= 1".into(),
                    ));
                }
                p.sweep.epsilons()?;
            }
            Mode::Probabilities | Mode::Fisher | Mode::Sweep | Mode::Compare => {
                p.sweep.epsilons()?;
            }
            Mode::Estimate => {
                if p.estimate.photons_per_set == 0 {
                    return Err(CliError::Config(
                        "params.estimate.photons_per_set must be >= 1".into(),
                    ));
                }
            }
            Mode::Bootstrap => {
                if p.estimate.n_boot < 2 || p.estimate.photons_per_set == 0 {
                    return Err(CliError::Config(
                        "params.estimate needs n_boot >= 2 and photons_per_set >= 1".into(),
                    ));
                }
                if p.estimate.epsilons.is_empty()
                    || p.estimate
                        .epsilons
                        .iter()
                        .any(|e| !(e.is_finite() && *e >= 0.0))
                {
                    return Err(CliError::Config(
                        "params.estimate.epsilons must be non-empty and >= 0".into(),
                    ));
                }
            }
            Mode::Synthesize => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_sets_nested_value() {
        let mut t = defaults();
        apply_override(&mut t, "params.calibration.v_minus=0.5").unwrap();
        apply_override(&mut t, "mode=fisher").unwrap();
        let c = resolve(t).unwrap();
        assert_eq!(c.params.calibration.v_minus, 0.5);
        assert_eq!(c.mode, Mode::Fisher);
    }

    #[test]
    fn unknown_key_rejected() {
        let mut t = defaults();
        assert!(apply_override(&mut t, "params.calibration.v_mnus=0.5").is_err());
        assert!(apply_override(&mut t, "params..x=1").is_err());
        assert!(apply_override(&mut t, "seed").is_err());
    }

    #[test]
    fn optional_field_can_be_set() {
        let mut t = defaults();
        apply_override(&mut t, "params.di_noise.sigma_bwl=4.0").unwrap();
        apply_override(&mut t, "mode=sweep").unwrap();
        assert_eq!(resolve(t).unwrap().params.di_noise.sigma_bwl, Some(4.0));
    }

    #[test]
    fn mode_is_required() {
        assert!(matches!(resolve(defaults()), Err(CliError::Config(_))));
    }
}
