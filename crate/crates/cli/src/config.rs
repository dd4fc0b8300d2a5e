// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration: one JSON document, every default materialized.

use std::path::{Path, PathBuf};

use alemfs::evolution::{self, EvolutionConfig, MpReference, SingularPolicy};
use alemfs::geometry::{fill_distance, preset, BoundaryCurve, Preset, ReconstructionParams};
use alemfs::mfs::SolveMode;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Square,
    ZeroPadded,
}

impl From<Mode> for SolveMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Square => SolveMode::Square,
            Mode::ZeroPadded => SolveMode::ZeroPadded,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    BoundaryData,
    Circle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnSingular {
    Abort,
    ZeroPadded,
    Unguarded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub preset: String,
    pub n_nodes: usize,
    pub scale: f64,
    pub mode: Mode,
    /// `run` only: repeat the run in the other mode and compare dispersions.
    pub compare_modes: bool,
    /// Source radius; `null` resolves to 2.5 times the maximum initial radius.
    pub r_s: Option<f64>,
    pub r_s_sweep: Vec<f64>,
    /// Node counts realizing the fill-distance sweep.
    pub n_sweep: Vec<usize>,
    pub dt: f64,
    pub t_final: f64,
    pub output_dir: PathBuf,
    pub snapshot_stride: usize,
    /// Mesh file, relative to the config file.
    pub mesh: Option<PathBuf>,
    /// Reserved; presets are deterministic.
    pub seed: u64,
    /// Interior seed grid pitch; `null` disables interior points.
    pub interior_spacing: Option<f64>,
    pub stencil: usize,
    pub eps_tol: f64,
    pub resample: bool,
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub c_cfl: f64,
    pub c_parabolic: f64,
    pub samples_per_node: usize,
    pub mp_reference: Reference,
    pub on_singular: OnSingular,
    /// Steps taken before a sweep cell is evaluated.
    pub burn_in_steps: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let recon = ReconstructionParams::default();
        Self {
            preset: Preset::Circle.name().into(),
            n_nodes: 128,
            scale: 1.0,
            mode: Mode::ZeroPadded,
            compare_modes: false,
            r_s: None,
            r_s_sweep: (0..15)
                .map(|k| 2.2 + 0.2 * k as f64)
                .map(|v| (v * 10.0).round() / 10.0)
                .collect(),
            n_sweep: vec![32, 64, 128, 256],
            dt: 1e-3,
            t_final: 0.1,
            output_dir: PathBuf::from("out"),
            snapshot_stride: 0,
            mesh: None,
            seed: 0,
            interior_spacing: Some(0.1),
            stencil: recon.stencil,
            eps_tol: recon.eps_tol,
            resample: true,
            d_min: None,
            d_max: None,
            c_cfl: evolution::DEFAULT_C_CFL,
            c_parabolic: evolution::DEFAULT_C_PARABOLIC,
            samples_per_node: evolution::DEFAULT_SAMPLES_PER_NODE,
            mp_reference: Reference::BoundaryData,
            on_singular: OnSingular::Abort,
            burn_in_steps: 5,
        }
    }
}

impl ExperimentConfig {
    /// Parses a config file; the mesh path is made relative to its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let Some(mesh) = &config.mesh {
            if mesh.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                config.mesh = Some(base.join(mesh));
            }
        }
        Ok(config)
    }

    pub fn preset_kind(&self) -> Result<Preset, CliError> {
        self.preset
            .parse()
            .map_err(|_| CliError::Config(format!("unknown preset '{}'", self.preset)))
    }

    pub fn curve(&self, n_nodes: usize) -> Result<BoundaryCurve, CliError> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(CliError::Config("scale must be positive".into()));
        }
        preset(self.preset_kind()?, n_nodes, self.scale).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Evolution settings for `curve`, with `r_s` and the resampling
    /// thresholds filled from the curve where unset.
    pub fn evolution(&self, curve: &BoundaryCurve, mode: Mode, r_s: Option<f64>) -> Result<EvolutionConfig, CliError> {
        let mut c = EvolutionConfig::for_curve(curve, self.dt, self.t_final, mode.into());
        if let Some(r) = r_s.or(self.r_s) {
            c.r_s = r;
        }
        c.reconstruction = ReconstructionParams {
            stencil: self.stencil,
            eps_tol: self.eps_tol,
        };
        let h0 = fill_distance(curve);
        c.d_min = self.d_min.unwrap_or(evolution::DEFAULT_D_MIN_FACTOR * h0);
        c.d_max = self.d_max.unwrap_or(evolution::DEFAULT_D_MAX_FACTOR * h0);
        c.resample = self.resample;
        c.c_cfl = self.c_cfl;
        c.c_parabolic = self.c_parabolic;
        c.samples_per_node = self.samples_per_node;
        c.mp_reference = match self.mp_reference {
            Reference::BoundaryData => MpReference::BoundaryData,
            Reference::Circle => MpReference::Circle,
        };
        c.on_singular = match self.on_singular {
            OnSingular::Abort => SingularPolicy::Abort,
            OnSingular::ZeroPadded => SingularPolicy::ZeroPadded,
            OnSingular::Unguarded => SingularPolicy::Unguarded,
        };
        c.snapshot_stride = self.snapshot_stride;
        c.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(c)
    }

    /// Copy with curve-derived defaults written out, for `resolved_config.json`.
    pub fn resolved(&self, evo: &EvolutionConfig) -> Self {
        let mut out = self.clone();
        out.r_s = Some(evo.r_s);
        out.d_min = Some(evo.d_min);
        out.d_max = Some(evo.d_max);
        out
    }

    pub fn check_sweep(&self) -> Result<(), CliError> {
        if self.r_s_sweep.is_empty() || self.n_sweep.is_empty() {
            return Err(CliError::Config("sweep lists must be non-empty".into()));
        }
        if self.r_s_sweep.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(CliError::Config("r_s_sweep values must be positive".into()));
        }
        Ok(())
    }
}
