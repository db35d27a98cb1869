//! End-to-end experiment pipelines: ground state -> pulse sequence ->
//! observables, with persistence, sweeps, and a checksummed run manifest.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, RunMode, SequenceConfig, SweepParameter};
use crate::error::{Error, Result};
use crate::field::{write_snapshot, ComplexField, FieldPair};
use crate::grid::Grid;
use crate::lambda_est::{
    chi_trace, lambda_from_chi, lambda_from_phase_diffusion, predict_squeezing,
    PhaseDiffusionProbe,
};
use crate::meanfield::{apply_pulse, ground_state, run_sequence_with, GroundState, GroundStateOpts};
use crate::observables::SqueezingReport;
use crate::params::{PhysicsParams, PulseSequence, PulseSpec};
use crate::propagator::{Evolver, NonlinearModel};
use crate::twomode::{optimal_squeezing, two_mode_variance};
use crate::wigner::{run_ensemble, EnsembleResult, WignerEnsembleConfig};

/// Time of the first overlap revival: the first local maximum of Q after
/// the initial decay, ties broken toward earlier time.
pub fn detect_t_pi(times: &[f64], q: &[f64]) -> Result<f64> {
    if times.len() != q.len() || times.len() < 3 {
        return Err(Error::Config("revival detection needs matched series of length >= 3".into()));
    }
    let drop = 1e-4;
    let mut min_seen = q[0];
    let mut decayed = false;
    for i in 1..q.len() - 1 {
        min_seen = min_seen.min(q[i]);
        if q[0] - min_seen > drop {
            decayed = true;
        }
        // local maximum, with the >= on the right breaking ties early
        if decayed && q[i] > min_seen + drop && q[i] >= q[i + 1] && q[i] > q[i - 1] {
            return Ok(times[i]);
        }
    }
    Err(Error::NoRevival)
}

/// Mean-field overlap trace after a pi/2 pulse, sampled every `sample_dt`
/// over `window`.
pub fn overlap_trace(
    ground: &ComplexField,
    params: &PhysicsParams,
    dt: f64,
    sample_dt: f64,
    window: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = ground.grid.clone();
    let mut psi = ground.clone();
    psi.scale(params.n_atoms.sqrt());
    let mut pair = FieldPair::new(psi, ComplexField::zeros(grid.clone()));
    apply_pulse(&mut pair, &PulseSpec { theta: PI / 2.0, phi: 0.0, time: 0.0 });
    let mut evolver = Evolver::new(grid, params, NonlinearModel::MeanField, dt)?;
    let n = (window / sample_dt).round().max(2.0) as usize;
    let step = window / n as f64;
    let mut times = Vec::with_capacity(n + 1);
    let mut qs = Vec::with_capacity(n + 1);
    let q_of = |pair: &FieldPair| {
        let (na, nb) = (pair.a.norm(), pair.b.norm());
        pair.cross_integral().norm() / (na * nb).sqrt()
    };
    times.push(0.0);
    qs.push(q_of(&pair));
    for k in 1..=n {
        evolver.evolve(&mut pair, step)?;
        times.push(k as f64 * step);
        qs.push(q_of(&pair));
    }
    Ok((times, qs))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    pub run_dir: String,
    pub timings: Vec<StageTiming>,
    pub files: Vec<FileEntry>,
}

pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let canonical = serde_json::to_string(cfg)?;
    Ok(hex(&Sha256::digest(canonical.as_bytes())))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

struct RunContext {
    dir: PathBuf,
    timings: Vec<StageTiming>,
    files: Vec<String>,
}

impl RunContext {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self);
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, &serde_json::to_string_pretty(value)?)
    }
}

fn resolve_t_pi(
    seq: &SequenceConfig,
    ground: &ComplexField,
    params: &PhysicsParams,
    dt: f64,
) -> Result<f64> {
    if let Some(t) = seq.t_pi_s {
        return Ok(t);
    }
    let window = seq.revival_window_trap_periods * 2.0 * PI / params.omega_bar();
    let sample = (window / 400.0).max(dt);
    let (times, qs) = overlap_trace(ground, params, dt, sample, window)?;
    detect_t_pi(&times, &qs)
}

fn echo_pulses(t_pi: f64, n_bounces: usize) -> Result<PulseSequence> {
    let mut pulses = vec![PulseSpec { theta: PI / 2.0, phi: 0.0, time: 0.0 }];
    for j in 1..2 * n_bounces {
        pulses.push(PulseSpec { theta: PI, phi: 0.0, time: j as f64 * t_pi });
    }
    PulseSequence::new(pulses, 2.0 * n_bounces as f64 * t_pi)
}

#[derive(Debug, Clone, Serialize)]
struct ThetaRow {
    theta_rad: f64,
    v: f64,
    v_stderr: f64,
    q: f64,
    xi_s: f64,
    delta_phi_rad: f64,
}

fn theta_scan_rows(ens: &EnsembleResult, angles: &[f64], phi: f64) -> Result<Vec<ThetaRow>> {
    let q = ens.overlap_q()?;
    let n_t = ens.n_total()?;
    angles
        .iter()
        .map(|&theta| {
            let (v, se) = ens.variance_report(theta, phi)?;
            let rep = SqueezingReport::new(v, q, n_t);
            Ok(ThetaRow {
                theta_rad: theta,
                v,
                v_stderr: se,
                q,
                xi_s: rep.xi,
                delta_phi_rad: rep.delta_phi,
            })
        })
        .collect()
}

fn rows_to_csv(rows: &[ThetaRow]) -> String {
    let mut out = String::from("theta_rad,v,v_stderr,q,xi_s,delta_phi_rad\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.theta_rad, r.v, r.v_stderr, r.q, r.xi_s, r.delta_phi_rad
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwSummary {
    pub n_total: f64,
    pub q: f64,
    pub t_pi_s: f64,
    pub n_trajectories: usize,
    pub theta_opt_rad: f64,
    pub v_min: f64,
    pub v_min_stderr: f64,
    pub xi_min: f64,
}

fn run_tw_core(
    cfg: &ExperimentConfig,
    gs: &GroundState,
    params: &PhysicsParams,
) -> Result<(EnsembleResult, f64)> {
    let seq_cfg = cfg.sequence_or_default();
    let ens_cfg = cfg
        .ensemble
        .as_ref()
        .ok_or_else(|| Error::Config("tw pipeline needs an ensemble block".into()))?;
    let t_pi = resolve_t_pi(&seq_cfg, &gs.field, params, cfg.solver.dt_s)?;
    let sequence = echo_pulses(t_pi, seq_cfg.n_bounces)?;
    let wcfg = WignerEnsembleConfig {
        n_trajectories: ens_cfg.n_trajectories,
        master_seed: ens_cfg.master_seed,
        dt: cfg.solver.dt_s,
        workers: ens_cfg.workers,
    };
    let ens = run_ensemble(&gs.field, params, &sequence, &wcfg)?;
    Ok((ens, t_pi))
}

fn tw_summary(
    cfg: &ExperimentConfig,
    ens: &EnsembleResult,
    t_pi: f64,
) -> Result<(Vec<ThetaRow>, TwSummary)> {
    let seq_cfg = cfg.sequence_or_default();
    let rows = theta_scan_rows(ens, &cfg.theta_scan.angles()?, seq_cfg.phi_final_rad)?;
    let best = rows
        .iter()
        .min_by(|a, b| a.v.partial_cmp(&b.v).unwrap())
        .ok_or_else(|| Error::Config("empty theta scan".into()))?;
    let summary = TwSummary {
        n_total: ens.n_total()?,
        q: ens.overlap_q()?,
        t_pi_s: t_pi,
        n_trajectories: ens.len(),
        theta_opt_rad: best.theta_rad,
        v_min: best.v,
        v_min_stderr: best.v_stderr,
        xi_min: best.xi_s,
    };
    Ok((rows, summary))
}

fn records_csv(ens: &EnsembleResult) -> String {
    let mut out = String::from("index,n_a,n_b,cross_re,cross_im\n");
    for r in &ens.records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.index, r.n_a, r.n_b, r.cross_re, r.cross_im
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LambdaSummary {
    pub t_pi_s: f64,
    pub lambda_chi: f64,
    pub lambda1_chi: f64,
    pub lambda2_chi: f64,
    pub chi_asymmetric: bool,
    pub lambda_phase: f64,
    /// how strongly the projection route overestimates the phase route
    pub chi_over_phase: f64,
    pub predicted_theta_opt_rad: f64,
    pub predicted_v_min: f64,
    pub predicted_xi: f64,
}

fn run_lambda_core(
    cfg: &ExperimentConfig,
    gs: &GroundState,
    params: &PhysicsParams,
) -> Result<LambdaSummary> {
    let seq_cfg = cfg.sequence_or_default();
    let t_pi = resolve_t_pi(&seq_cfg, &gs.field, params, cfg.solver.dt_s)?;
    let trace = chi_trace(&gs.field, params, t_pi, cfg.solver.dt_s, cfg.output.sample_dt_s)?;
    let chi_est = lambda_from_chi(&trace, t_pi)?;
    let probe = PhaseDiffusionProbe { t_pi, dt: cfg.solver.dt_s, ..Default::default() };
    let lambda_phase = lambda_from_phase_diffusion(&gs.field, params, &probe)?;
    let (theta, rep) = predict_squeezing(params.n_atoms, lambda_phase.abs(), 1.0)?;
    Ok(LambdaSummary {
        t_pi_s: t_pi,
        lambda_chi: chi_est.lambda,
        lambda1_chi: chi_est.lambda1,
        lambda2_chi: chi_est.lambda2,
        chi_asymmetric: chi_est.asymmetric,
        lambda_phase,
        chi_over_phase: chi_est.lambda / lambda_phase.abs().max(1e-300),
        predicted_theta_opt_rad: theta,
        predicted_v_min: rep.v,
        predicted_xi: rep.xi,
    })
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    value: f64,
    t_pi_s: f64,
    q: f64,
    theta_opt_rad: f64,
    v_min_tw: f64,
    v_min_tw_stderr: f64,
    v_min_two_mode: f64,
    lambda_phase: f64,
    xi_s: f64,
}

fn sweep_apply(cfg: &ExperimentConfig, param: SweepParameter, value: f64) -> ExperimentConfig {
    let mut sub = cfg.clone();
    let mut seq = cfg.sequence_or_default();
    match param {
        SweepParameter::OmegaR => {
            sub.physics.omega_r_rad_per_s = vec![value];
            seq.t_pi_s = None; // the revival moves with the trap
        }
        SweepParameter::Theta => seq.theta_final_rad = value,
        SweepParameter::NBounces => seq.n_bounces = value.round().max(1.0) as usize,
        SweepParameter::NAtoms => sub.physics.n_atoms = value,
    }
    sub.sequence = Some(seq);
    sub
}

fn run_sweep_value(cfg: &ExperimentConfig) -> Result<SweepRow> {
    let params = cfg.physics.build()?;
    let grid = cfg.grid.build()?;
    let gs = ground_state(
        &params,
        &grid,
        &GroundStateOpts {
            dtau: cfg.solver.groundstate_dtau_s,
            tolerance: cfg.solver.groundstate_tolerance,
            ..Default::default()
        },
    )?;
    let (ens, t_pi) = run_tw_core(cfg, &gs, &params)?;
    let (rows, summary) = tw_summary(cfg, &ens, t_pi)?;
    let _ = rows;
    let seq_cfg = cfg.sequence_or_default();
    let probe = PhaseDiffusionProbe { t_pi, dt: cfg.solver.dt_s, ..Default::default() };
    let lambda_phase = lambda_from_phase_diffusion(&gs.field, &params, &probe)?;
    // two-mode prediction at the measured twisting phase, n_bounces echoes
    let lam_total = lambda_phase.abs() * seq_cfg.n_bounces as f64;
    let mut v_two = f64::INFINITY;
    for &theta in &cfg.theta_scan.angles()? {
        v_two = v_two.min(two_mode_variance(params.n_atoms, lam_total, theta));
    }
    Ok(SweepRow {
        value: 0.0,
        t_pi_s: t_pi,
        q: summary.q,
        theta_opt_rad: summary.theta_opt_rad,
        v_min_tw: summary.v_min,
        v_min_tw_stderr: summary.v_min_stderr,
        v_min_two_mode: v_two,
        lambda_phase,
        xi_s: summary.xi_min,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    cfg.validate()?;
    let hash = config_hash(cfg)?;
    let dir = out_dir.join(&hash[..12]);
    std::fs::create_dir_all(&dir)?;
    let mut ctx = RunContext { dir: dir.clone(), timings: Vec::new(), files: Vec::new() };
    ctx.write("config.json", &cfg.to_json()?)?;

    match cfg.mode {
        RunMode::Groundstate => run_mode_groundstate(cfg, &mut ctx)?,
        RunMode::Gpe => run_mode_gpe(cfg, &mut ctx)?,
        RunMode::Tw => run_mode_tw(cfg, &mut ctx)?,
        RunMode::Twomode => run_mode_twomode(cfg, &mut ctx)?,
        RunMode::LambdaEst => run_mode_lambda(cfg, &mut ctx)?,
        RunMode::Sweep => run_mode_sweep(cfg, &mut ctx)?,
    }

    let mut files = Vec::new();
    for name in &ctx.files {
        let path = dir.join(name);
        let bytes = std::fs::read(&path)?;
        files.push(FileEntry {
            path: name.clone(),
            sha256: hex(&Sha256::digest(&bytes)),
            bytes: bytes.len() as u64,
        });
    }
    let manifest = RunManifest {
        config_hash: hash,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        run_dir: dir.to_string_lossy().into_owned(),
        timings: ctx.timings,
        files,
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

fn prepare_ground(
    cfg: &ExperimentConfig,
    ctx: &mut RunContext,
) -> Result<(PhysicsParams, Arc<Grid>, GroundState)> {
    let params = cfg.physics.build()?;
    let grid = cfg.grid.build()?;
    let opts = GroundStateOpts {
        dtau: cfg.solver.groundstate_dtau_s,
        tolerance: cfg.solver.groundstate_tolerance,
        ..Default::default()
    };
    let gs = ctx.time("ground_state", |_| ground_state(&params, &grid, &opts))?;
    Ok((params, grid, gs))
}

fn run_mode_groundstate(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<()> {
    let (params, _grid, gs) = prepare_ground(cfg, ctx)?;
    write_snapshot(&gs.field, 0.0, "ground", &ctx.dir.join("ground_state"))?;
    ctx.files.push("ground_state.bin".into());
    ctx.files.push("ground_state.json".into());
    ctx.write_json(
        "summary.json",
        &serde_json::json!({
            "energy_per_atom_j": gs.energy_per_atom,
            "chemical_potential_j": gs.chemical_potential,
            "iterations": gs.iterations,
            "n_atoms": params.n_atoms,
        }),
    )
}

fn run_mode_gpe(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<()> {
    let (params, grid, gs) = prepare_ground(cfg, ctx)?;
    let seq_cfg = cfg.sequence_or_default();
    let t_pi =
        ctx.time("t_pi", |_| resolve_t_pi(&seq_cfg, &gs.field, &params, cfg.solver.dt_s))?;
    let sequence = match &seq_cfg.pulses {
        Some(pulses) => PulseSequence::new(
            pulses.clone(),
            seq_cfg.duration_s.unwrap_or_else(|| {
                pulses.last().map(|p| p.time).unwrap_or(0.0)
            }),
        )?,
        None => echo_pulses(t_pi, seq_cfg.n_bounces)?,
    };
    let mut psi = gs.field.clone();
    psi.scale(params.n_atoms.sqrt());
    let mut pair = FieldPair::new(psi, ComplexField::zeros(grid.clone()));
    let mut evolver = Evolver::new(grid, &params, NonlinearModel::MeanField, cfg.solver.dt_s)?;
    let n_samples = (sequence.duration / cfg.output.sample_dt_s).round().max(1.0) as usize;
    let mut sample_times: Vec<f64> = (0..=n_samples)
        .map(|k| sequence.duration * k as f64 / n_samples as f64)
        .collect();
    sample_times.extend(cfg.output.snapshot_times_s.iter().cloned());
    sample_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sample_times.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let mut csv = String::from("time_s,n_a,n_b,cross_re,cross_im,q\n");
    let mut snapshot_files: Vec<String> = Vec::new();
    let mut snap_idx = 0usize;
    ctx.time("sequence", |ctx| {
        run_sequence_with(&mut pair, &mut evolver, &sequence, &sample_times, |p| {
            let (na, nb) = (p.a.norm(), p.b.norm());
            let cross = p.cross_integral();
            let q = if na > 0.0 && nb > 0.0 { cross.norm() / (na * nb).sqrt() } else { 0.0 };
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.time, na, nb, cross.re, cross.im, q
            ));
            let wanted = cfg
                .output
                .snapshot_times_s
                .iter()
                .any(|&t| (t - p.time).abs() < 1e-12);
            if wanted {
                for (field, tag) in [(&p.a, "a"), (&p.b, "b")] {
                    let base = format!("snapshot_{snap_idx:04}_{tag}");
                    if write_snapshot(field, p.time, tag, &ctx.dir.join(&base)).is_ok() {
                        snapshot_files.push(format!("{base}.bin"));
                        snapshot_files.push(format!("{base}.json"));
                    }
                }
                snap_idx += 1;
            }
        })
    })?;
    ctx.files.extend(snapshot_files);
    ctx.write("timeseries.csv", &csv)?;
    let cross = pair.cross_integral();
    ctx.write_json(
        "summary.json",
        &serde_json::json!({
            "t_pi_s": t_pi,
            "duration_s": sequence.duration,
            "final_n_a": pair.a.norm(),
            "final_n_b": pair.b.norm(),
            "final_phase_rad": (-cross.arg()),
            "chemical_potential_j": gs.chemical_potential,
        }),
    )
}

fn run_mode_tw(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<()> {
    let (params, _grid, gs) = prepare_ground(cfg, ctx)?;
    let (ens, t_pi) = ctx.time("ensemble", |_| run_tw_core(cfg, &gs, &params))?;
    let (rows, summary) = tw_summary(cfg, &ens, t_pi)?;
    ctx.write("theta_scan.csv", &rows_to_csv(&rows))?;
    ctx.write("records.csv", &records_csv(&ens))?;
    ctx.write_json("summary.json", &summary)
}

fn run_mode_twomode(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<()> {
    let n = cfg.physics.n_atoms;
    let opt = optimal_squeezing(n)?;
    let lambda = cfg
        .twomode
        .as_ref()
        .and_then(|t| t.lambda)
        .unwrap_or(opt.lambda);
    let mut csv = String::from("theta_rad,v\n");
    let mut best = (0.0, f64::INFINITY);
    for &theta in &cfg.theta_scan.angles()? {
        let v = two_mode_variance(n, lambda, theta);
        if v < best.1 {
            best = (theta, v);
        }
        csv.push_str(&format!("{theta},{v}\n"));
    }
    ctx.write("variance_scan.csv", &csv)?;
    ctx.write_json(
        "summary.json",
        &serde_json::json!({
            "n_atoms": n,
            "lambda_used": lambda,
            "theta_opt_rad": best.0,
            "v_min": best.1,
            "global_optimum": {
                "lambda": opt.lambda,
                "theta_rad": opt.theta,
                "v": opt.v,
            },
        }),
    )
}

fn run_mode_lambda(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<()> {
    let (params, _grid, gs) = prepare_ground(cfg, ctx)?;
    let summary = ctx.time("lambda_estimation", |_| run_lambda_core(cfg, &gs, &params))?;
    ctx.write_json("lambda.json", &summary)
}

fn run_mode_sweep(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<()> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep mode needs a sweep block".into()))?;
    let mut csv = String::from(
        "value,t_pi_s,q,theta_opt_rad,v_min_tw,v_min_tw_stderr,v_min_two_mode,lambda_phase,xi_s\n",
    );
    let mut failures: Vec<serde_json::Value> = Vec::new();
    let mut n_ok = 0usize;
    for &value in &sweep.values {
        let sub = sweep_apply(cfg, sweep.parameter, value);
        match ctx.time(&format!("sweep[{value}]"), |_| run_sweep_value(&sub)) {
            Ok(mut row) => {
                row.value = value;
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    row.value,
                    row.t_pi_s,
                    row.q,
                    row.theta_opt_rad,
                    row.v_min_tw,
                    row.v_min_tw_stderr,
                    row.v_min_two_mode,
                    row.lambda_phase,
                    row.xi_s
                ));
                n_ok += 1;
            }
            Err(e) => failures.push(serde_json::json!({
                "value": value,
                "error": e.to_string(),
            })),
        }
    }
    ctx.write("sweep.csv", &csv)?;
    ctx.write_json(
        "summary.json",
        &serde_json::json!({
            "parameter": sweep.parameter,
            "n_values": sweep.values.len(),
            "n_ok": n_ok,
            "failures": failures,
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{preset_ci_small, RunMode};
    use crate::grid::{make_grid, Geometry};
    use crate::meanfield::GroundStateOpts;

    #[test]
    fn detects_first_revival() {
        let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.1).collect();
        // decay to a minimum near t = 5, revival peak near t = 10
        let q: Vec<f64> = times
            .iter()
            .map(|&t| 0.9 + 0.1 * (2.0 * PI * t / 10.0).cos())
            .collect();
        let t = detect_t_pi(&times, &q).unwrap();
        assert!((t - 10.0).abs() < 0.2, "t = {t}");
    }

    #[test]
    fn monotone_overlap_signals_no_revival() {
        let times: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let flat = vec![1.0; 50];
        assert!(matches!(detect_t_pi(&times, &flat), Err(Error::NoRevival)));
        let falling: Vec<f64> = times.iter().map(|&t| 1.0 / (1.0 + t)).collect();
        assert!(matches!(detect_t_pi(&times, &falling), Err(Error::NoRevival)));
    }

    #[test]
    fn noninteracting_gas_has_no_revival() {
        let params = PhysicsParams::rb87(1e3, 2.0 * PI * 100.0)
            .unwrap()
            .noninteracting();
        let grid = Arc::new(
            make_grid(Geometry::SphericalRadial1D, &[64], &[1.5e-5]).unwrap(),
        );
        let gs = ground_state(&params, &grid, &GroundStateOpts::default()).unwrap();
        let (times, qs) =
            overlap_trace(&gs.field, &params, 1e-6, 2e-4, 4e-3).unwrap();
        // identical components never dephase
        assert!(qs.iter().all(|&q| (q - 1.0).abs() < 1e-9));
        assert!(matches!(detect_t_pi(&times, &qs), Err(Error::NoRevival)));
    }

    #[test]
    fn empty_sweep_succeeds() {
        let mut cfg = preset_ci_small();
        cfg.mode = RunMode::Sweep;
        cfg.sweep = Some(crate::config::SweepConfig {
            parameter: SweepParameter::Theta,
            values: vec![],
        });
        let dir = tempfile::tempdir().unwrap();
        let manifest = run_experiment(&cfg, dir.path()).unwrap();
        assert!(manifest.files.iter().any(|f| f.path == "sweep.csv"));
        let csv = std::fs::read_to_string(
            Path::new(&manifest.run_dir).join("sweep.csv"),
        )
        .unwrap();
        assert_eq!(csv.lines().count(), 1); // header only
    }

    #[test]
    fn twomode_run_writes_scan_and_summary() {
        let mut cfg = preset_ci_small();
        cfg.mode = RunMode::Twomode;
        let dir = tempfile::tempdir().unwrap();
        let manifest = run_experiment(&cfg, dir.path()).unwrap();
        let names: Vec<_> = manifest.files.iter().map(|f| f.path.as_str()).collect();
        assert!(names.contains(&"variance_scan.csv"));
        assert!(names.contains(&"summary.json"));
        // deterministic outputs: same config hashes to the same files
        let again = run_experiment(&cfg, dir.path()).unwrap();
        for (a, b) in manifest.files.iter().zip(&again.files) {
            assert_eq!(a.sha256, b.sha256);
        }
    }
}
