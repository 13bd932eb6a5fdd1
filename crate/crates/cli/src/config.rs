//! Experiment files and command-line overrides.
//!
//! An experiment file is JSON. It names a preset, embeds a full simulation
//! configuration, or both (the embedded configuration wins), and may carry the
//! same override keys as the command line:
//!
//! ```json
//! { "preset": "table1-P1-d2", "T": 0.05, "t_end": 30, "out_csv": "run.csv" }
//! ```
//!
//! Flags given on the command line take precedence over the file.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use pidmap_core::sim::{Controller, SimConfig};
use pidmap_core::{DisturbanceSignal, ReferenceTrajectory};
use serde::Deserialize;

use crate::commands::UsageError;
use crate::presets;

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[arg(long, allow_negative_numbers = true)]
    pub kp: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub kd: Option<f64>,
    #[arg(long = "T", allow_negative_numbers = true)]
    #[serde(rename = "T")]
    pub t: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub qdot0: Option<f64>,
    /// Disturbance preset (none, d1-elevation, d2-elevation, d1-pitch, d2-pitch).
    #[arg(long)]
    pub disturbance: Option<String>,
    /// Multiplies the disturbance.
    #[arg(long, allow_negative_numbers = true)]
    pub disturbance_scale: Option<f64>,
    /// Reference preset (heli-elevation, heli-pitch, zero).
    #[arg(long)]
    pub trajectory: Option<String>,
    #[arg(long)]
    pub tail_fraction: Option<f64>,
}

impl Overrides {
    /// Fields set here replace those of `base`.
    fn layered_over(self, base: Overrides) -> Overrides {
        Overrides {
            kp: self.kp.or(base.kp),
            kd: self.kd.or(base.kd),
            t: self.t.or(base.t),
            t_end: self.t_end.or(base.t_end),
            dt: self.dt.or(base.dt),
            a1: self.a1.or(base.a1),
            a2: self.a2.or(base.a2),
            b: self.b.or(base.b),
            q0: self.q0.or(base.q0),
            qdot0: self.qdot0.or(base.qdot0),
            disturbance: self.disturbance.or(base.disturbance),
            disturbance_scale: self.disturbance_scale.or(base.disturbance_scale),
            trajectory: self.trajectory.or(base.trajectory),
            tail_fraction: self.tail_fraction.or(base.tail_fraction),
        }
    }

    fn apply(self, mut cfg: SimConfig) -> Result<SimConfig, UsageError> {
        let mut retuned = false;
        if self.kp.is_some() || self.kd.is_some() || self.t.is_some() {
            let Controller::Aux(aux) = &mut cfg.controller else {
                return Err(UsageError("--kp/--kd/--T need a configuration with auxiliary parameters".into()));
            };
            aux.kp = self.kp.unwrap_or(aux.kp);
            aux.kd = self.kd.unwrap_or(aux.kd);
            aux.time_constant = self.t.unwrap_or(aux.time_constant);
            retuned = true;
        }
        if let Some(name) = &self.disturbance {
            cfg.truth.w = DisturbanceSignal::preset(name)
                .ok_or_else(|| UsageError(format!("unknown disturbance preset {name:?}")))?;
        }
        if let Some(k) = self.disturbance_scale {
            cfg.truth.w = cfg.truth.w.scaled(k);
        }
        if let Some(name) = &self.trajectory {
            cfg.trajectory = ReferenceTrajectory::preset(name)
                .ok_or_else(|| UsageError(format!("unknown trajectory preset {name:?}")))?;
        }
        cfg.truth.a1 = self.a1.unwrap_or(cfg.truth.a1);
        cfg.truth.a2 = self.a2.unwrap_or(cfg.truth.a2);
        cfg.truth.b = self.b.unwrap_or(cfg.truth.b);
        cfg.initial_state.q = self.q0.unwrap_or(cfg.initial_state.q);
        cfg.initial_state.qdot = self.qdot0.unwrap_or(cfg.initial_state.qdot);
        cfg.t_end = self.t_end.unwrap_or(cfg.t_end);
        cfg.tail_fraction = self.tail_fraction.unwrap_or(cfg.tail_fraction);
        cfg.dt = match self.dt {
            Some(dt) => dt,
            None if retuned => cfg.controller.default_dt(),
            None => cfg.dt,
        };
        Ok(cfg)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub preset: Option<String>,
    pub simulation: Option<SimConfig>,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
    #[serde(flatten)]
    pub overrides: Overrides,
}

impl ExperimentFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
    }
}

/// A fully resolved `simulate` request.
#[derive(Debug)]
pub struct ExperimentSpec {
    pub config: SimConfig,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
}

pub fn resolve(
    preset: Option<&str>,
    file: Option<ExperimentFile>,
    flags: Overrides,
    out_csv: Option<PathBuf>,
    out_json: Option<PathBuf>,
) -> Result<ExperimentSpec, UsageError> {
    let file = file.unwrap_or_default();
    let preset = preset.map(str::to_owned).or(file.preset);
    let base = match (file.simulation, preset) {
        (Some(cfg), _) => cfg,
        (None, Some(name)) => presets::experiment(&name).ok_or_else(|| {
            UsageError(format!("unknown preset {name:?}; available: {}", presets::NAMES.join(", ")))
        })?,
        (None, None) => return Err(UsageError("simulate needs --preset or --config".into())),
    };
    Ok(ExperimentSpec {
        config: flags.layered_over(file.overrides).apply(base)?,
        out_csv: out_csv.or(file.out_csv),
        out_json: out_json.or(file.out_json),
    })
}
