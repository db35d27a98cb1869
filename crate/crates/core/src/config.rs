//! Experiment configuration: a single JSON document with units spelled out
//! in the key names, plus the two shipped presets.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constants::{BOHR_RADIUS, MASS_RB87};
use crate::error::{Error, Result};
use crate::grid::{make_grid, Geometry, Grid};
use crate::params::{PhysicsParams, PulseSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Groundstate,
    Gpe,
    Tw,
    Twomode,
    LambdaEst,
    Sweep,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub n_atoms: f64,
    /// trap frequencies; either one value (spherical) or three
    pub omega_r_rad_per_s: Vec<f64>,
    pub a11_bohr: f64,
    pub a22_bohr: f64,
    pub a12_bohr: f64,
    #[serde(default = "default_mass")]
    pub mass_kg: f64,
}

fn default_mass() -> f64 {
    MASS_RB87
}

impl PhysicsConfig {
    pub fn build(&self) -> Result<PhysicsParams> {
        let omega: [f64; 3] = match self.omega_r_rad_per_s.as_slice() {
            [w] => [*w; 3],
            [x, y, z] => [*x, *y, *z],
            other => {
                return Err(Error::Config(format!(
                    "omega_r_rad_per_s needs 1 or 3 entries, got {}",
                    other.len()
                )))
            }
        };
        PhysicsParams::new(
            self.mass_kg,
            self.a11_bohr * BOHR_RADIUS,
            self.a22_bohr * BOHR_RADIUS,
            self.a12_bohr * BOHR_RADIUS,
            omega,
            self.n_atoms,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub geometry: Geometry,
    pub points: Vec<usize>,
    pub lengths_m: Vec<f64>,
}

impl GridConfig {
    pub fn build(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(make_grid(self.geometry, &self.points, &self.lengths_m)?))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    /// echo half-period; None means detect it from the first overlap revival
    /// of a mean-field run
    #[serde(default)]
    pub t_pi_s: Option<f64>,
    #[serde(default = "one")]
    pub n_bounces: usize,
    /// readout beamsplitter angle used by single-angle outputs
    #[serde(default = "default_theta")]
    pub theta_final_rad: f64,
    #[serde(default = "default_phi")]
    pub phi_final_rad: f64,
    /// explicit pulse list (theta, phi, time); overrides the echo layout
    #[serde(default)]
    pub pulses: Option<Vec<PulseSpec>>,
    #[serde(default)]
    pub duration_s: Option<f64>,
    /// window scanned for the overlap revival when t_pi_s is absent,
    /// as a multiple of the trap period
    #[serde(default = "default_revival_window")]
    pub revival_window_trap_periods: f64,
}

fn one() -> usize {
    1
}
fn default_theta() -> f64 {
    0.1 * PI
}
fn default_phi() -> f64 {
    -PI / 2.0
}
fn default_revival_window() -> f64 {
    // the revival can land past a full trap period; leave headroom so the
    // peak is interior to the search window
    1.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_trajectories: usize,
    #[serde(default = "one_u64")]
    pub master_seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn one_u64() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    #[serde(default = "default_gs_tol")]
    pub groundstate_tolerance: f64,
    #[serde(default)]
    pub groundstate_dtau_s: Option<f64>,
}

fn default_dt() -> f64 {
    1e-6
}
fn default_gs_tol() -> f64 {
    1e-12
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt_s: default_dt(),
            groundstate_tolerance: default_gs_tol(),
            groundstate_dtau_s: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    OmegaR,
    Theta,
    NBounces,
    NAtoms,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaScanConfig {
    pub start_rad: f64,
    pub stop_rad: f64,
    pub step_rad: f64,
}

impl Default for ThetaScanConfig {
    fn default() -> Self {
        // resolves the narrow squeezing minima
        ThetaScanConfig { start_rad: 0.0, stop_rad: PI, step_rad: PI / 100.0 }
    }
}

impl ThetaScanConfig {
    pub fn angles(&self) -> Result<Vec<f64>> {
        if !(self.step_rad > 0.0) || self.stop_rad < self.start_rad {
            return Err(Error::Config(format!(
                "bad theta scan [{}, {}] step {}",
                self.start_rad, self.stop_rad, self.step_rad
            )));
        }
        let n = ((self.stop_rad - self.start_rad) / self.step_rad).round() as usize;
        Ok((0..n).map(|j| self.start_rad + j as f64 * self.step_rad).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// times at which full field snapshots are written (gpe mode)
    #[serde(default)]
    pub snapshot_times_s: Vec<f64>,
    /// cadence of the scalar time series (gpe mode)
    #[serde(default = "default_sample_dt")]
    pub sample_dt_s: f64,
}

fn default_sample_dt() -> f64 {
    1e-4
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { snapshot_times_s: Vec::new(), sample_dt_s: default_sample_dt() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoModeConfig {
    /// twisting phase; None uses the optimum for n_atoms
    #[serde(default)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: RunMode,
    pub physics: PhysicsConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub sequence: Option<SequenceConfig>,
    #[serde(default)]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub theta_scan: ThetaScanConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub twomode: Option<TwoModeConfig>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.physics.build()?;
        self.grid.build()?;
        match self.mode {
            RunMode::Tw => {
                let ens = self
                    .ensemble
                    .as_ref()
                    .ok_or_else(|| Error::Config("tw mode needs an ensemble block".into()))?;
                if ens.n_trajectories < 2 {
                    return Err(Error::Config(format!(
                        "tw mode needs at least 2 trajectories, got {}",
                        ens.n_trajectories
                    )));
                }
            }
            RunMode::Sweep => {
                self.sweep
                    .as_ref()
                    .ok_or_else(|| Error::Config("sweep mode needs a sweep block".into()))?;
            }
            _ => {}
        }
        if let Some(seq) = &self.sequence {
            if let Some(t) = seq.t_pi_s {
                if !(t > 0.0) {
                    return Err(Error::Config(format!("t_pi_s must be positive, got {t}")));
                }
            }
            if seq.n_bounces == 0 {
                return Err(Error::Config("n_bounces must be at least 1".into()));
            }
        }
        if !(self.solver.dt_s > 0.0) {
            return Err(Error::Config(format!("dt_s must be positive, got {}", self.solver.dt_s)));
        }
        self.theta_scan.angles()?;
        Ok(())
    }

    pub fn sequence_or_default(&self) -> SequenceConfig {
        self.sequence.clone().unwrap_or(SequenceConfig {
            t_pi_s: None,
            n_bounces: 1,
            theta_final_rad: default_theta(),
            phi_final_rad: default_phi(),
            pulses: None,
            duration_s: None,
            revival_window_trap_periods: default_revival_window(),
        })
    }
}

/// Desk-scale preset: spherically symmetric 1D, 1e4 atoms, 100
/// trajectories; minutes on a workstation.
pub fn preset_ci_small() -> ExperimentConfig {
    ExperimentConfig {
        mode: RunMode::Tw,
        physics: PhysicsConfig {
            n_atoms: 1e4,
            omega_r_rad_per_s: vec![2.0 * std::f64::consts::PI * 100.0],
            a11_bohr: 100.4,
            a22_bohr: 95.00,
            a12_bohr: 97.66,
            mass_kg: MASS_RB87,
        },
        grid: GridConfig {
            geometry: Geometry::SphericalRadial1D,
            points: vec![256],
            lengths_m: vec![1.5e-5],
        },
        sequence: Some(SequenceConfig {
            t_pi_s: None,
            n_bounces: 1,
            theta_final_rad: default_theta(),
            phi_final_rad: default_phi(),
            pulses: None,
            duration_s: None,
            revival_window_trap_periods: default_revival_window(),
        }),
        ensemble: Some(EnsembleConfig { n_trajectories: 100, master_seed: 1, workers: None }),
        solver: SolverConfig::default(),
        sweep: None,
        theta_scan: ThetaScanConfig::default(),
        output: OutputConfig::default(),
        twomode: None,
    }
}

/// Full-scale preset matching the published 3D setup: 32^3 box, 1.5e5
/// atoms, 1000 trajectories; hours, not CI.
pub fn preset_paper_3d() -> ExperimentConfig {
    let mut cfg = preset_ci_small();
    cfg.physics.n_atoms = 1.5e5;
    cfg.grid = GridConfig {
        geometry: Geometry::Cartesian3D,
        points: vec![32, 32, 32],
        lengths_m: vec![4.0e-5; 3],
    };
    cfg.ensemble = Some(EnsembleConfig { n_trajectories: 1000, master_seed: 1, workers: None });
    cfg
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        "ci-small" => Ok(preset_ci_small()),
        "paper-3d" => Ok(preset_paper_3d()),
        other => Err(Error::Config(format!(
            "unknown preset '{other}' (available: ci-small, paper-3d)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in ["ci-small", "paper-3d"] {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            let json = cfg.to_json().unwrap();
            let back = ExperimentConfig::from_json(&json).unwrap();
            assert_eq!(back.to_json().unwrap(), json);
        }
    }

    #[test]
    fn rejects_meaningless_inputs() {
        let mut cfg = preset_ci_small();
        cfg.physics.n_atoms = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = preset_ci_small();
        cfg.physics.omega_r_rad_per_s = vec![-5.0];
        assert!(cfg.validate().is_err());

        let mut cfg = preset_ci_small();
        cfg.solver.dt_s = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = preset_ci_small();
        cfg.ensemble.as_mut().unwrap().n_trajectories = 1;
        assert!(cfg.validate().is_err());

        let mut cfg = preset_ci_small();
        cfg.sequence.as_mut().unwrap().t_pi_s = Some(-1.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v: serde_json::Value =
            serde_json::to_value(preset_ci_small()).unwrap();
        v["physics"]["omega_hz"] = 100.0.into();
        let text = serde_json::to_string(&v).unwrap();
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn theta_scan_default_resolution() {
        let angles = ThetaScanConfig::default().angles().unwrap();
        assert_eq!(angles.len(), 100);
        assert!((angles[1] - angles[0] - PI / 100.0).abs() < 1e-15);
        assert!(angles.last().unwrap() < &PI);
    }
}
