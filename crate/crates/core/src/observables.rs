//! Collective-spin observables, interferometer readout, and squeezing
//! figures of merit.

use serde::{Deserialize, Serialize};

/// First and second moments of the collective spin of one state (exact or
/// ensemble-estimated). `jxjz_sym` is the symmetrized correlator
/// (Jx Jz + Jz Jx)/2.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct SpinMoments {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub jx2: f64,
    pub jz2: f64,
    pub jxjz_sym: f64,
}

/// Normalized number-difference variance after the final beamsplitter:
/// v = Var(N_a - N_b) / N_t. Shot noise is v = 1.
pub fn number_difference_variance(diff_mean: f64, diff_sq_mean: f64, n_total: f64) -> f64 {
    (diff_sq_mean - diff_mean * diff_mean) / n_total
}

/// Interference contrast Q = 2 |<J_x>| / <N_a + N_b>; equivalently
/// |int psi_a^* psi_b| normalized by the populations for a mean-field state.
pub fn overlap_q(jx_mean: f64, n_total: f64) -> f64 {
    2.0 * jx_mean.abs() / n_total
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SqueezingReport {
    /// Normalized number-difference variance.
    pub v: f64,
    /// Interference contrast in [0, 1].
    pub q: f64,
    /// Wineland parameter xi = sqrt(v) / Q; xi < 1 beats the standard
    /// quantum limit.
    pub xi: f64,
    /// Phase resolution xi / sqrt(N_t) (rad).
    pub delta_phi: f64,
    pub n_total: f64,
}

impl SqueezingReport {
    pub fn new(v: f64, q: f64, n_total: f64) -> Self {
        let xi = if q > 0.0 { v.max(0.0).sqrt() / q } else { f64::INFINITY };
        SqueezingReport { v, q, xi, delta_phi: xi / n_total.sqrt(), n_total }
    }
}

/// Propagate spin moments through a Mach-Zehnder interferometer with
/// accumulated path phase `phi`: a pi/2 entrance beamsplitter, the phase,
/// and a pi/2 exit beamsplitter. Returns the moments of the output state,
/// whose Jz spread sets the phase sensitivity.
pub fn mz_transform(m: &SpinMoments, phi: f64) -> SpinMoments {
    let (c, s) = (phi.cos(), phi.sin());
    // net rotation: (jx, jy, jz) -> (c jx + s jz, -jy, s jx - c jz)
    SpinMoments {
        jx: c * m.jx + s * m.jz,
        jy: -m.jy,
        jz: s * m.jx - c * m.jz,
        jx2: c * c * m.jx2 + s * s * m.jz2 + 2.0 * s * c * m.jxjz_sym,
        jz2: s * s * m.jx2 + c * c * m.jz2 - 2.0 * s * c * m.jxjz_sym,
        jxjz_sym: s * c * (m.jx2 - m.jz2) - (c * c - s * s) * m.jxjz_sym,
    }
}
