//! Truncated-Wigner ensembles: half-quantum vacuum noise on top of the
//! mean-field ground state, trajectory propagation with the
//! symmetrically-ordered nonlinear term, and bias-corrected moment
//! estimation.
//!
//! Results are bitwise independent of the worker count: each trajectory
//! draws from its own counter-mode RNG stream keyed by (master seed,
//! trajectory index), and reductions always run in index order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ComplexField, FieldPair};
use crate::meanfield::run_sequence_with;
use crate::observables::SqueezingReport;
use crate::params::{PhysicsParams, PulseSequence};
use crate::propagator::{Evolver, NonlinearModel};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WignerEnsembleConfig {
    pub n_trajectories: usize,
    pub master_seed: u64,
    pub dt: f64,
    /// Worker threads; None uses the global pool.
    pub workers: Option<usize>,
}

/// Draw one trajectory's initial state: sqrt(N) psi_g in |a> plus
/// half-a-quantum of complex Gaussian noise per mode in both components.
pub fn sample_initial(
    ground: &ComplexField,
    n_atoms: f64,
    master_seed: u64,
    index: u64,
) -> FieldPair {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    let grid = ground.grid.clone();
    let root_n = n_atoms.sqrt();
    let mut a = ComplexField::zeros(grid.clone());
    let mut b = ComplexField::zeros(grid.clone());
    for i in 0..grid.total_points() {
        // each mode gets eta with E[|eta|^2] = 1/2; the basis functions are
        // the point indicators scaled by 1/sqrt(w_i)
        let scale = 0.5 / grid.weight(i).sqrt();
        let (xa, ya): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        let (xb, yb): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        a.values[i] = root_n * ground.values[i] + Complex64::new(xa, ya) * scale;
        b.values[i] = Complex64::new(xb, yb) * scale;
    }
    FieldPair::new(a, b)
}

/// Per-trajectory scalars recorded at the end of the echo sequence, before
/// the readout beamsplitter. Everything the corrected estimators need is a
/// function of these.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub index: u64,
    /// raw populations int |psi|^2 dv
    pub n_a: f64,
    pub n_b: f64,
    /// int psi_a^* psi_b dv
    pub cross_re: f64,
    pub cross_im: f64,
}

impl TrajectoryRecord {
    /// Integrated number difference after a readout beamsplitter
    /// (theta, phi), evaluated analytically from the stored scalars.
    pub fn readout_difference(&self, theta: f64, phi: f64) -> f64 {
        let cross = Complex64::new(self.cross_re, self.cross_im);
        theta.cos() * (self.n_a - self.n_b)
            + 2.0 * theta.sin() * (Complex64::new(0.0, phi).exp() * cross).im
    }
}

/// An ensemble of trajectory records plus the mode count needed for the
/// symmetric-ordering corrections. Mergeable across runs that share the
/// same grid and physics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub records: Vec<TrajectoryRecord>,
    /// number of spatial modes per component
    pub mode_count: usize,
}

fn kahan_mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum / n as f64
}

impl EnsembleResult {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Concatenate two ensembles (e.g. from sharded runs); records are
    /// re-sorted by trajectory index so the reduction order is canonical.
    pub fn merge(mut self, other: EnsembleResult) -> Result<EnsembleResult> {
        if self.mode_count != other.mode_count {
            return Err(Error::Config(format!(
                "cannot merge ensembles with {} and {} modes",
                self.mode_count, other.mode_count
            )));
        }
        self.records.extend(other.records);
        self.records.sort_by_key(|r| r.index);
        if self.records.windows(2).any(|w| w[0].index == w[1].index) {
            return Err(Error::Config("duplicate trajectory indices in merge".into()));
        }
        Ok(self)
    }

    fn require_min(&self, n: usize) -> Result<()> {
        if self.records.len() < n {
            return Err(Error::InsufficientTrajectories { needed: n, got: self.records.len() });
        }
        Ok(())
    }

    /// Corrected mean total atom number: the raw ensemble mean counts half
    /// a quantum per mode in each component, i.e. one whole mode count.
    pub fn n_total(&self) -> Result<f64> {
        self.require_min(1)?;
        let raw = kahan_mean(self.records.iter().map(|r| r.n_a + r.n_b), self.records.len());
        Ok(raw - self.mode_count as f64)
    }

    /// <Jx> before the readout pulse; the per-mode noise contributions
    /// cancel, so the raw mean is already unbiased.
    pub fn jx_mean(&self) -> Result<f64> {
        self.require_min(1)?;
        Ok(kahan_mean(self.records.iter().map(|r| r.cross_re), self.records.len()))
    }

    /// Variance of 2 Jx with the symmetric-ordering offset (one eighth per
    /// mode on <Jx^2>) removed.
    pub fn jx2_variance(&self) -> Result<f64> {
        self.require_min(2)?;
        let n = self.records.len();
        let mean = self.jx_mean()?;
        let second = kahan_mean(self.records.iter().map(|r| r.cross_re * r.cross_re), n)
            - self.mode_count as f64 / 8.0;
        Ok(4.0 * (second - mean * mean))
    }

    /// Interference contrast Q = 2 |<J_perp>| / <N_a + N_b>.
    pub fn overlap_q(&self) -> Result<f64> {
        self.require_min(1)?;
        let n = self.records.len();
        let re = kahan_mean(self.records.iter().map(|r| r.cross_re), n);
        let im = kahan_mean(self.records.iter().map(|r| r.cross_im), n);
        Ok(2.0 * (re * re + im * im).sqrt() / self.n_total()?)
    }

    /// Normalized number-difference variance after the readout beamsplitter
    /// (theta, phi), with its jackknife standard error. The difference
    /// moments need no ordering correction; the normalization uses the
    /// corrected atom number.
    pub fn variance_report(&self, theta: f64, phi: f64) -> Result<(f64, f64)> {
        self.require_min(2)?;
        let n = self.records.len();
        let d: Vec<f64> =
            self.records.iter().map(|r| r.readout_difference(theta, phi)).collect();
        let n_t = self.n_total()?;
        let sum: f64 = kahan_mean(d.iter().cloned(), 1);
        let sum_sq: f64 = kahan_mean(d.iter().map(|x| x * x), 1);
        let v_of = |s: f64, s2: f64, m: usize| {
            let mean = s / m as f64;
            (s2 / m as f64 - mean * mean) / n_t
        };
        let v = v_of(sum, sum_sq, n);
        // leave-one-out jackknife
        let mut acc = 0.0;
        for x in &d {
            let vi = v_of(sum - x, sum_sq - x * x, n - 1);
            acc += (vi - v) * (vi - v);
        }
        let se = ((n - 1) as f64 / n as f64 * acc).sqrt();
        Ok((v, se))
    }

    /// Full squeezing figure of merit at the standard readout phase
    /// phi = -pi/2.
    pub fn squeezing(&self, theta: f64) -> Result<SqueezingReport> {
        let (v, _) = self.variance_report(theta, -std::f64::consts::FRAC_PI_2)?;
        Ok(SqueezingReport::new(v, self.overlap_q()?, self.n_total()?))
    }
}

fn run_one_trajectory(
    ground: &ComplexField,
    params: &PhysicsParams,
    sequence: &PulseSequence,
    cfg: &WignerEnsembleConfig,
    index: u64,
) -> Result<TrajectoryRecord> {
    let mut pair = sample_initial(ground, params.n_atoms, cfg.master_seed, index);
    let mut evolver =
        Evolver::new(ground.grid.clone(), params, NonlinearModel::Wigner, cfg.dt)?;
    run_sequence_with(&mut pair, &mut evolver, sequence, &[], |_| {})?;
    let cross = pair.cross_integral();
    Ok(TrajectoryRecord {
        index,
        n_a: pair.a.norm(),
        n_b: pair.b.norm(),
        cross_re: cross.re,
        cross_im: cross.im,
    })
}

/// Run `cfg.n_trajectories` noise realizations through `sequence` (the echo
/// pulses only — the readout beamsplitter is applied analytically by the
/// estimators). Fails with the lowest offending trajectory index if any
/// realization blows up.
pub fn run_ensemble(
    ground: &ComplexField,
    params: &PhysicsParams,
    sequence: &PulseSequence,
    cfg: &WignerEnsembleConfig,
) -> Result<EnsembleResult> {
    if cfg.n_trajectories == 0 {
        return Err(Error::InsufficientTrajectories { needed: 1, got: 0 });
    }
    let work = || -> Vec<(u64, Result<TrajectoryRecord>)> {
        (0..cfg.n_trajectories as u64)
            .into_par_iter()
            .map(|i| (i, run_one_trajectory(ground, params, sequence, cfg, i)))
            .collect()
    };
    let outcomes = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let mut records = Vec::with_capacity(outcomes.len());
    for (index, res) in outcomes {
        match res {
            Ok(r) => records.push(r),
            Err(e) => {
                return Err(Error::Trajectory { index: index as usize, source: Box::new(e) });
            }
        }
    }
    Ok(EnsembleResult { records, mode_count: ground.grid.total_points() })
}
