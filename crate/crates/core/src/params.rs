//! Physical parameters and pulse sequences.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{BOHR_RADIUS, HBAR, MASS_RB87};
use crate::error::{Error, Result};

/// Species, trap, and interaction parameters. Scattering lengths are stored
/// in meters; the interaction strengths U_ij = 4 pi hbar^2 a_ij / m are
/// computed once at construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub mass: f64,
    pub a11: f64,
    pub a22: f64,
    pub a12: f64,
    /// Trap frequencies (rad/s); equal values mean a spherical trap.
    pub omega: [f64; 3],
    pub n_atoms: f64,
    /// Detuning of |b> (rad/s). Pulses are assumed resonant, so the solver
    /// works in the delta-free rotating frame; this defaults to 0.
    #[serde(default)]
    pub delta: f64,
    u11: f64,
    u22: f64,
    u12: f64,
}

impl PhysicsParams {
    pub fn new(
        mass: f64,
        a11: f64,
        a22: f64,
        a12: f64,
        omega: [f64; 3],
        n_atoms: f64,
    ) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::Config(format!("mass must be positive, got {mass}")));
        }
        if !(n_atoms > 0.0) {
            return Err(Error::Config(format!("atom number must be positive, got {n_atoms}")));
        }
        for &w in &omega {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Config(format!("trap frequency must be positive, got {w}")));
            }
        }
        let u = |a: f64| 4.0 * PI * HBAR * HBAR * a / mass;
        Ok(PhysicsParams {
            mass,
            a11,
            a22,
            a12,
            omega,
            n_atoms,
            delta: 0.0,
            u11: u(a11),
            u22: u(a22),
            u12: u(a12),
        })
    }

    /// Rb-87 with a11 = 100.4 a0, a22 = 95.00 a0, a12 = 97.66 a0 in a
    /// spherical trap.
    pub fn rb87(n_atoms: f64, omega_r: f64) -> Result<Self> {
        PhysicsParams::new(
            MASS_RB87,
            100.4 * BOHR_RADIUS,
            95.00 * BOHR_RADIUS,
            97.66 * BOHR_RADIUS,
            [omega_r; 3],
            n_atoms,
        )
    }

    pub fn with_scattering_scaled(mut self, factor: f64) -> Self {
        self.a11 *= factor;
        self.a22 *= factor;
        self.a12 *= factor;
        self.u11 *= factor;
        self.u22 *= factor;
        self.u12 *= factor;
        self
    }

    /// Equal intra- and inter-component scattering (chi = 0 test case).
    pub fn with_symmetric_scattering(self, a: f64) -> Result<Self> {
        let mut p = PhysicsParams::new(self.mass, a, a, a, self.omega, self.n_atoms)?;
        p.delta = self.delta;
        Ok(p)
    }

    pub fn noninteracting(self) -> Self {
        let mut p = self;
        p.a11 = 0.0;
        p.a22 = 0.0;
        p.a12 = 0.0;
        p.u11 = 0.0;
        p.u22 = 0.0;
        p.u12 = 0.0;
        p
    }

    pub fn u11(&self) -> f64 {
        self.u11
    }
    pub fn u22(&self) -> f64 {
        self.u22
    }
    pub fn u12(&self) -> f64 {
        self.u12
    }

    /// Trap frequency of a spherical trap; None if the trap is anisotropic.
    pub fn omega_r(&self) -> Option<f64> {
        let [wx, wy, wz] = self.omega;
        if (wx - wy).abs() < 1e-12 * wx && (wx - wz).abs() < 1e-12 * wx {
            Some(wx)
        } else {
            None
        }
    }

    /// Geometric mean trap frequency.
    pub fn omega_bar(&self) -> f64 {
        (self.omega[0] * self.omega[1] * self.omega[2]).cbrt()
    }

    /// Trap potential at flattened grid point `i`.
    pub fn potential(&self, grid: &crate::grid::Grid, i: usize) -> f64 {
        match grid.geometry() {
            crate::grid::Geometry::SphericalRadial1D => {
                let r = grid.positions(0)[i];
                0.5 * self.mass * self.omega[0] * self.omega[0] * r * r
            }
            crate::grid::Geometry::Cartesian3D => {
                let (x, y, z) = grid.cartesian_coords(i);
                0.5 * self.mass
                    * (self.omega[0] * self.omega[0] * x * x
                        + self.omega[1] * self.omega[1] * y * y
                        + self.omega[2] * self.omega[2] * z * z)
            }
        }
    }
}

/// An instantaneous coupling pulse: rotation angle theta and microwave
/// phase phi, applied at `time`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PulseSpec {
    pub theta: f64,
    pub phi: f64,
    pub time: f64,
}

/// Timed list of pulses separating free-evolution intervals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PulseSequence {
    pub pulses: Vec<PulseSpec>,
    pub duration: f64,
}

impl PulseSequence {
    pub fn new(pulses: Vec<PulseSpec>, duration: f64) -> Result<Self> {
        let seq = PulseSequence { pulses, duration };
        seq.validate()?;
        Ok(seq)
    }

    pub fn empty() -> Self {
        PulseSequence { pulses: Vec::new(), duration: 0.0 }
    }

    /// The canonical spin-echo protocol: pi/2 at t = 0, pi at T_pi, and the
    /// adjustable-angle beamsplitter at 2 T_pi.
    pub fn canonical(t_pi: f64, theta_final: f64, phi_final: f64) -> Result<Self> {
        Self::multi_bounce(t_pi, 1, theta_final, phi_final)
    }

    /// `n_bounces` repetitions of the echo: pi pulses at period T_pi, final
    /// beamsplitter after 2 n T_pi of free evolution.
    pub fn multi_bounce(
        t_pi: f64,
        n_bounces: usize,
        theta_final: f64,
        phi_final: f64,
    ) -> Result<Self> {
        if !(t_pi > 0.0) {
            return Err(Error::Config(format!("T_pi must be positive, got {t_pi}")));
        }
        if n_bounces == 0 {
            return Err(Error::Config("n_bounces must be at least 1".into()));
        }
        let mut pulses = vec![PulseSpec { theta: PI / 2.0, phi: 0.0, time: 0.0 }];
        for j in 1..2 * n_bounces {
            pulses.push(PulseSpec { theta: PI, phi: 0.0, time: j as f64 * t_pi });
        }
        pulses.push(PulseSpec {
            theta: theta_final,
            phi: phi_final,
            time: 2.0 * n_bounces as f64 * t_pi,
        });
        PulseSequence::new(pulses, 2.0 * n_bounces as f64 * t_pi)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return Err(Error::Config(format!("sequence duration invalid: {}", self.duration)));
        }
        let mut prev = f64::NEG_INFINITY;
        for p in &self.pulses {
            if !(p.time > prev) {
                return Err(Error::Config(format!(
                    "pulse times must be strictly increasing ({} after {prev})",
                    p.time
                )));
            }
            if p.time < 0.0 || p.time > self.duration {
                return Err(Error::Config(format!(
                    "pulse at t = {} lies outside [0, {}]",
                    p.time, self.duration
                )));
            }
            if !(0.0..2.0 * PI).contains(&p.theta) {
                return Err(Error::Config(format!(
                    "pulse angle must be in [0, 2 pi), got {}",
                    p.theta
                )));
            }
            prev = p.time;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_ij_values() {
        let p = PhysicsParams::rb87(1.5e5, 200.0).unwrap();
        let expect = 4.0 * PI * HBAR * HBAR * 100.4 * BOHR_RADIUS / MASS_RB87;
        assert!((p.u11() - expect).abs() / expect < 1e-14);
        assert!(p.u11() > p.u12() && p.u12() > p.u22());
    }

    #[test]
    fn canonical_sequence_layout() {
        let s = PulseSequence::canonical(13.29e-3, 0.1 * PI, -PI / 2.0).unwrap();
        assert_eq!(s.pulses.len(), 3);
        assert!((s.pulses[1].time - 13.29e-3).abs() < 1e-15);
        assert!((s.duration - 2.0 * 13.29e-3).abs() < 1e-15);
    }

    #[test]
    fn multi_bounce_pulse_count() {
        let s = PulseSequence::multi_bounce(5.3e-3, 4, 0.05 * PI, 0.0).unwrap();
        // pi/2 + 7 pi pulses + final theta
        assert_eq!(s.pulses.len(), 9);
        assert!((s.duration - 8.0 * 5.3e-3).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_increasing_times() {
        let pulses = vec![
            PulseSpec { theta: 1.0, phi: 0.0, time: 1e-3 },
            PulseSpec { theta: 1.0, phi: 0.0, time: 1e-3 },
        ];
        assert!(PulseSequence::new(pulses, 2e-3).is_err());
    }
}
