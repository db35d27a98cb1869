//! Split-step spectral integrator for the coupled field equations.

use std::sync::Arc;

use num_complex::Complex64;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::field::FieldPair;
use crate::grid::{Geometry, Grid};
use crate::params::PhysicsParams;
use crate::spectral::Spectral;

/// Spectral multipliers exp(-i hbar k^2 dt / 2m) advancing the kinetic term
/// by `dt`. Indexed like [`Spectral::apply_multiplier`] expects.
pub fn kinetic_phase_factors(grid: &Grid, dt: f64, mass: f64) -> Vec<Complex64> {
    assert!(dt > 0.0, "dt must be positive");
    assert!(mass > 0.0, "mass must be positive");
    kinetic_multipliers(grid, Complex64::new(0.0, -dt / HBAR), mass)
}

/// Real decay multipliers exp(-hbar k^2 dtau / 2m) for imaginary-time
/// propagation.
pub fn kinetic_decay_factors(grid: &Grid, dtau: f64, mass: f64) -> Vec<Complex64> {
    kinetic_multipliers(grid, Complex64::new(-dtau / HBAR, 0.0), mass)
}

fn kinetic_multipliers(grid: &Grid, prefactor: Complex64, mass: f64) -> Vec<Complex64> {
    let energy = |k: f64| HBAR * HBAR * k * k / (2.0 * mass);
    match grid.geometry() {
        Geometry::Cartesian3D => {
            let (kx, ky, kz) = (grid.wavenumbers(0), grid.wavenumbers(1), grid.wavenumbers(2));
            let fz: Vec<Complex64> =
                kz.iter().map(|&k| (prefactor * energy(k)).exp()).collect();
            let fy: Vec<Complex64> =
                ky.iter().map(|&k| (prefactor * energy(k)).exp()).collect();
            let fx: Vec<Complex64> =
                kx.iter().map(|&k| (prefactor * energy(k)).exp()).collect();
            let mut out = Vec::with_capacity(kx.len() * ky.len() * kz.len());
            for x in &fx {
                for y in &fy {
                    for z in &fz {
                        out.push(x * y * z);
                    }
                }
            }
            out
        }
        Geometry::SphericalRadial1D => {
            let n = grid.points()[0];
            let radius = grid.lengths()[0];
            let m = 2 * (n + 1);
            (0..m)
                .map(|j| {
                    let mode = j.min(m - j) as f64;
                    let k = std::f64::consts::PI * mode / radius;
                    (prefactor * energy(k)).exp()
                })
                .collect()
        }
    }
}

/// One symmetric (Strang) step: half kinetic, full pointwise phase using the
/// mid-step density, half kinetic. `pointwise(i, n_a, n_b)` returns the real
/// effective potentials (J) for each component at point `i`; the step is
/// exactly norm-preserving per component when they are real.
pub fn split_step(
    spectral: &mut Spectral,
    half_kinetic: &[Complex64],
    pair: &mut FieldPair,
    pointwise: &mut dyn FnMut(usize, f64, f64) -> (f64, f64),
    dt: f64,
) -> Result<()> {
    spectral.apply_multiplier(&mut pair.a.values, half_kinetic);
    spectral.apply_multiplier(&mut pair.b.values, half_kinetic);

    let mut density_check = 0.0;
    for i in 0..pair.a.values.len() {
        let na = pair.a.values[i].norm_sqr();
        let nb = pair.b.values[i].norm_sqr();
        let (la, lb) = pointwise(i, na, nb);
        pair.a.values[i] *= Complex64::new(0.0, -la * dt / HBAR).exp();
        pair.b.values[i] *= Complex64::new(0.0, -lb * dt / HBAR).exp();
        density_check += na + nb;
    }
    if !density_check.is_finite() {
        return Err(Error::Integration { step: 0, reason: "non-finite field values".into() });
    }

    spectral.apply_multiplier(&mut pair.a.values, half_kinetic);
    spectral.apply_multiplier(&mut pair.b.values, half_kinetic);
    pair.time += dt;
    Ok(())
}

/// Whether the nonlinear term uses bare densities (mean field) or the
/// Wigner-corrected densities |psi|^2 - c / dv.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearModel {
    MeanField,
    Wigner,
}

/// Drives a [`FieldPair`] through free evolution under the coupled equations
/// with the microwave coupling off.
pub struct Evolver {
    spectral: Spectral,
    grid: Arc<Grid>,
    params: PhysicsParams,
    model: NonlinearModel,
    target_dt: f64,
    cached_dt: f64,
    half_kinetic: Vec<Complex64>,
    potential: Vec<f64>,
    steps_done: usize,
}

impl Evolver {
    pub fn new(
        grid: Arc<Grid>,
        params: &PhysicsParams,
        model: NonlinearModel,
        dt: f64,
    ) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let spectral = Spectral::new(&grid);
        let potential = (0..grid.total_points()).map(|i| params.potential(&grid, i)).collect();
        Ok(Evolver {
            spectral,
            grid,
            params: params.clone(),
            model,
            target_dt: dt,
            cached_dt: 0.0,
            half_kinetic: Vec::new(),
            potential,
            steps_done: 0,
        })
    }

    /// Advance by `duration`, landing on it exactly: the interval is divided
    /// into round(duration / dt) equal steps.
    pub fn evolve(&mut self, pair: &mut FieldPair, duration: f64) -> Result<()> {
        if duration == 0.0 {
            return Ok(());
        }
        if !(duration > 0.0) {
            return Err(Error::Config(format!("duration must be >= 0, got {duration}")));
        }
        let nsteps = (duration / self.target_dt).round().max(1.0) as usize;
        let dt = duration / nsteps as f64;
        if dt != self.cached_dt {
            self.half_kinetic = kinetic_phase_factors(&self.grid, dt / 2.0, self.params.mass);
            self.cached_dt = dt;
        }

        let (u11, u22, u12) = (self.params.u11(), self.params.u22(), self.params.u12());
        let weights = self.grid.weights().to_vec();
        let potential = std::mem::take(&mut self.potential);
        let model = self.model;
        for _ in 0..nsteps {
            let mut pointwise = |i: usize, na: f64, nb: f64| -> (f64, f64) {
                let (ca, cb) = match model {
                    NonlinearModel::MeanField => (na, nb),
                    NonlinearModel::Wigner => (na - 1.0 / weights[i], nb - 1.0 / weights[i]),
                };
                // the cross term carries half the vacuum correction
                let (xa, xb) = match model {
                    NonlinearModel::MeanField => (nb, na),
                    NonlinearModel::Wigner => {
                        (nb - 0.5 / weights[i], na - 0.5 / weights[i])
                    }
                };
                let v = potential[i];
                (v + u11 * ca + u12 * xa, v + u22 * cb + u12 * xb)
            };
            let res = split_step(
                &mut self.spectral,
                &self.half_kinetic,
                pair,
                &mut pointwise,
                dt,
            );
            if let Err(Error::Integration { reason, .. }) = res {
                self.potential = potential;
                return Err(Error::Integration { step: self.steps_done, reason });
            }
            res?;
            self.steps_done += 1;
        }
        self.potential = potential;
        Ok(())
    }

    pub fn steps_done(&self) -> usize {
        self.steps_done
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ComplexField;
    use crate::grid::make_grid;

    fn uniform_pair(grid: Arc<Grid>) -> FieldPair {
        let a = ComplexField::from_fn(grid.clone(), |_| Complex64::new(1.0, 0.0));
        let b = ComplexField::zeros(grid);
        FieldPair::new(a, b)
    }

    #[test]
    fn zero_mode_multiplier_is_one() {
        let grid = make_grid(Geometry::Cartesian3D, &[8, 8, 8], &[1e-5; 3]).unwrap();
        let f = kinetic_phase_factors(&grid, 1e-6, crate::constants::MASS_RB87);
        assert!((f[0] - Complex64::ONE).norm() < 1e-15);
    }

    #[test]
    fn uniform_field_stationary_without_potential() {
        let grid =
            Arc::new(make_grid(Geometry::Cartesian3D, &[8, 8, 8], &[1e-5; 3]).unwrap());
        let mut sp = Spectral::new(&grid);
        let half = kinetic_phase_factors(&grid, 0.5e-6, crate::constants::MASS_RB87);
        let mut pair = uniform_pair(grid);
        let before = pair.a.values.clone();
        for _ in 0..10 {
            split_step(&mut sp, &half, &mut pair, &mut |_, _, _| (0.0, 0.0), 1e-6).unwrap();
        }
        for (x, y) in pair.a.values.iter().zip(&before) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn plane_wave_accrues_free_particle_phase() {
        let mass = crate::constants::MASS_RB87;
        let l = 1e-5;
        let grid = Arc::new(make_grid(Geometry::Cartesian3D, &[16, 8, 8], &[l, l, l]).unwrap());
        let k = grid.wavenumbers(0)[2]; // two full periods across the box
        let a = ComplexField::from_fn(grid.clone(), |i| {
            let (x, _, _) = grid.cartesian_coords(i);
            Complex64::new(0.0, k * x).exp()
        });
        let b = ComplexField::zeros(grid.clone());
        let mut pair = FieldPair::new(a, b);
        let reference = pair.a.values.clone();

        let mut sp = Spectral::new(&grid);
        let dt = 1e-6;
        let half = kinetic_phase_factors(&grid, dt / 2.0, mass);
        let steps = 100;
        for _ in 0..steps {
            split_step(&mut sp, &half, &mut pair, &mut |_, _, _| (0.0, 0.0), dt).unwrap();
        }
        let t = steps as f64 * dt;
        let expect_phase = Complex64::new(0.0, -HBAR * k * k * t / (2.0 * mass)).exp();
        for (x, y) in pair.a.values.iter().zip(&reference) {
            assert!((x - y * expect_phase).norm() < 1e-12);
        }
    }

    #[test]
    fn evolve_lands_exactly_on_duration() {
        let grid =
            Arc::new(make_grid(Geometry::SphericalRadial1D, &[32], &[2e-5]).unwrap());
        let params = PhysicsParams::rb87(100.0, 500.0).unwrap();
        let mut ev = Evolver::new(grid.clone(), &params, NonlinearModel::MeanField, 1e-6).unwrap();
        let a = ComplexField::from_fn(grid.clone(), |i| {
            Complex64::new((-grid.positions(0)[i].powi(2) * 1e10).exp(), 0.0)
        });
        let mut pair = FieldPair::new(a, ComplexField::zeros(grid));
        ev.evolve(&mut pair, 3.3e-6).unwrap();
        assert!((pair.time - 3.3e-6).abs() < 1e-18);
    }
}
