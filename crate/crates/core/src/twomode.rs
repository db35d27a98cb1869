//! Exact two-mode model: self-phase-modulation (Kerr) evolution of a
//! two-mode coherent state, closed-form squeezing variance, and a
//! Fock-basis oracle for validating the closed forms and the field solver.
//!
//! Conventions: the first beamsplitter (theta = pi/2, phi = 0) takes all
//! atoms from |a>, giving alpha = sqrt(N/2), beta = -i sqrt(N/2); the final
//! beamsplitter uses phi = -pi/2, which puts the squeezing minimum at
//! positive analysis angle theta.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Expectation values of the mixed-mode operators after each mode of a
/// product coherent state |alpha>|beta> picks up a Kerr phase
/// exp(-i lambda_j n(n-1)).
#[derive(Debug, Clone, Copy)]
pub struct KerrExpectations {
    pub n_a: f64,
    pub n_b: f64,
    /// <a^dag b>
    pub e_ab: Complex64,
    /// <a^dag a a b^dag>
    pub e_naab: Complex64,
    /// <a b^dag b^dag b>
    pub e_abnb: Complex64,
    /// <a^dag a^dag b b>
    pub e_aabb: Complex64,
}

pub fn kerr_coherent_expectations(
    alpha: Complex64,
    beta: Complex64,
    lambda1: f64,
    lambda2: f64,
) -> KerrExpectations {
    let na = alpha.norm_sqr();
    let nb = beta.norm_sqr();
    let phase = |x: f64| Complex64::new(0.0, x).exp();
    // <a^dag b> = alpha^* beta exp[na (e^{2i l1} - 1) + nb (e^{-2i l2} - 1)]
    let e_ab = alpha.conj()
        * beta
        * (na * (phase(2.0 * lambda1) - 1.0) + nb * (phase(-2.0 * lambda2) - 1.0)).exp();
    // <a^dag a a b^dag> = alpha beta^* na e^{-2i l1}
    //     exp[na (e^{-2i l1} - 1) + nb (e^{2i l2} - 1)]
    let common = (na * (phase(-2.0 * lambda1) - 1.0) + nb * (phase(2.0 * lambda2) - 1.0)).exp();
    let e_naab = alpha * beta.conj() * na * phase(-2.0 * lambda1) * common;
    // <a b^dag b^dag b> = alpha beta^* nb e^{2i l2} exp[same]
    let e_abnb = alpha * beta.conj() * nb * phase(2.0 * lambda2) * common;
    // <a^dag a^dag b b> = alpha^*^2 beta^2 e^{2i(l1 - l2)}
    //     exp[na (e^{4i l1} - 1) + nb (e^{-4i l2} - 1)]
    let e_aabb = alpha.conj().powi(2)
        * beta.powi(2)
        * phase(2.0 * (lambda1 - lambda2))
        * (na * (phase(4.0 * lambda1) - 1.0) + nb * (phase(-4.0 * lambda2) - 1.0)).exp();
    KerrExpectations { n_a: na, n_b: nb, e_ab, e_naab, e_abnb, e_aabb }
}

/// Mean and variance of the number difference read out through a final
/// beamsplitter with angle `theta` and phase `phi`, assembled from the
/// mixed-mode expectations of a product-coherent Kerr state.
pub fn difference_stats_from_moments(
    k: &KerrExpectations,
    theta: f64,
    phi: f64,
) -> (f64, f64) {
    let (c, s) = (theta.cos(), theta.sin());
    let ephi = Complex64::new(0.0, phi).exp();
    let i = Complex64::I;
    // D = c (n_a - n_b) + i s (a b^dag e^{-i phi} - a^dag b e^{i phi})
    let mean = c * (k.n_a - k.n_b)
        + (i * s * (ephi.conj() * k.e_ab.conj() - ephi * k.e_ab)).re;
    // <D^2>: number part, beamsplitter part, and the cross term
    let dn2 = k.n_a + k.n_b + (k.n_a - k.n_b).powi(2);
    let bs = 2.0 * k.n_a * k.n_b + k.n_a + k.n_b - 2.0 * (ephi * ephi * k.e_aabb).re;
    let cross = (ephi.conj() * (k.e_naab - k.e_abnb)).im;
    let d2 = c * c * dn2 + s * s * bs - 4.0 * s * c * cross;
    (mean, d2 - mean * mean)
}

/// Normalized number-difference variance v(N, lambda, theta) of the full
/// protocol (pi/2 splitter, symmetric Kerr phase lambda per mode, final
/// beamsplitter at phi = -pi/2) in closed form. Shot noise is v = 1.
pub fn two_mode_variance(n_total: f64, lambda: f64, theta: f64) -> f64 {
    let g1 = (-2.0 * n_total * lambda.sin().powi(2)).exp();
    let g2 = (n_total * ((4.0 * lambda).cos() - 1.0)).exp();
    1.0 + 0.5 * n_total * (1.0 - g2) * theta.sin().powi(2)
        - n_total * g1 * (2.0 * lambda).sin() * (2.0 * theta).sin()
}

/// Leading small-lambda behaviour of [`two_mode_variance`]:
/// v ~ 1 + 4 N^2 lambda^2 sin^2(theta) - 2 N lambda e^{-2 N lambda^2} sin(2 theta).
pub fn two_mode_variance_small_lambda(n_total: f64, lambda: f64, theta: f64) -> f64 {
    1.0 + 4.0 * n_total * n_total * lambda * lambda * theta.sin().powi(2)
        - 2.0 * n_total * lambda * (-2.0 * n_total * lambda * lambda).exp()
            * (2.0 * theta).sin()
}

/// Variance of the doubled transverse spin, V(2 Jx) = N + (N^2/2)(1 - G2),
/// for the same protocol before the final beamsplitter. Grows like
/// N + 4 lambda^2 N^3 while the twisting phase is small.
pub fn two_mode_jx_variance(n_total: f64, lambda: f64) -> f64 {
    let g2 = (n_total * ((4.0 * lambda).cos() - 1.0)).exp();
    n_total + 0.5 * n_total * n_total * (1.0 - g2)
}

#[derive(Debug, Clone, Copy)]
pub struct OptimalSqueezing {
    pub lambda: f64,
    pub theta: f64,
    pub v: f64,
}

/// Analytically optimal readout angle and the variance there, at a fixed
/// twisting phase.
pub fn best_theta_variance(n_total: f64, lambda: f64) -> (f64, f64) {
    // v(theta) = 1 + A sin^2 theta - B sin 2 theta
    let a = 0.5 * n_total * (1.0 - (n_total * ((4.0 * lambda).cos() - 1.0)).exp());
    let b = n_total
        * (-2.0 * n_total * lambda.sin().powi(2)).exp()
        * (2.0 * lambda).sin();
    let theta = 0.5 * (2.0 * b).atan2(a);
    let v = 1.0 + 0.5 * a - 0.5 * (a * a + 4.0 * b * b).sqrt();
    (theta, v)
}

/// Minimize the closed-form variance over the twisting phase and analysis
/// angle by golden-section search in log(lambda); the angle minimization is
/// analytic.
pub fn optimal_squeezing(n_total: f64) -> Result<OptimalSqueezing> {
    if !(n_total > 1.0) {
        return Err(Error::Config(format!("need more than one atom, got {n_total}")));
    }
    // bracket around the collapse scale N^{-2/3}
    let center = n_total.powf(-2.0 / 3.0).ln();
    let (mut lo, mut hi) = (center - 3.0, center + 3.0);
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let f = |x: f64| best_theta_variance(n_total, x.exp()).1;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let lam = (0.5 * (lo + hi)).exp();
    let (theta, v) = best_theta_variance(n_total, lam);
    if !v.is_finite() {
        return Err(Error::OptimizerNonConvergence("non-finite variance at optimum".into()));
    }
    Ok(OptimalSqueezing { lambda: lam, theta, v })
}

/// Exact two-mode reference computed in a truncated Fock basis. The state is
/// the product coherent state produced by the entrance beamsplitter with the
/// Kerr phases applied number-by-number, so every total-number-conserving
/// observable is exact up to the (checked) truncation tail.
pub struct FockOracle {
    n_max: usize,
    psi: Vec<Complex64>,
    n_total: f64,
}

impl FockOracle {
    /// State for `n_total` mean atoms split half-half with relative phase
    /// -i (entrance pi/2 pulse at phi = 0), then Kerr phases `lambda1`,
    /// `lambda2` on the two modes.
    pub fn new(n_total: f64, lambda1: f64, lambda2: f64, tail_tol: f64) -> Result<Self> {
        let alpha = Complex64::new((n_total / 2.0).sqrt(), 0.0);
        let beta = Complex64::new(0.0, -(n_total / 2.0).sqrt());
        Self::from_coherent(alpha, beta, lambda1, lambda2, tail_tol)
    }

    pub fn from_coherent(
        alpha: Complex64,
        beta: Complex64,
        lambda1: f64,
        lambda2: f64,
        tail_tol: f64,
    ) -> Result<Self> {
        let n_total = alpha.norm_sqr() + beta.norm_sqr();
        let n_max = (n_total + 12.0 * n_total.sqrt() + 20.0).ceil() as usize;
        let dim = n_max + 1;
        // coherent amplitudes by upward recurrence
        let coeffs = |z: Complex64| -> Vec<Complex64> {
            let mut c = Vec::with_capacity(dim);
            c.push(Complex64::new((-z.norm_sqr() / 2.0).exp(), 0.0));
            for n in 0..n_max {
                let prev = c[n];
                c.push(prev * z / ((n + 1) as f64).sqrt());
            }
            c
        };
        let ca = coeffs(alpha);
        let cb = coeffs(beta);
        let kerr = |lam: f64, n: usize| -> Complex64 {
            Complex64::new(0.0, -lam * (n * (n.max(1) - 1)) as f64).exp()
        };
        let mut psi = vec![Complex64::ZERO; dim * dim];
        for n1 in 0..dim {
            let pa = ca[n1] * kerr(lambda1, n1);
            for n2 in 0..dim {
                psi[n1 * dim + n2] = pa * cb[n2] * kerr(lambda2, n2);
            }
        }
        // tail mass along the truncation boundary
        let mut tail = 0.0;
        for j in 0..dim {
            tail += psi[n_max * dim + j].norm_sqr();
            if j != n_max {
                tail += psi[j * dim + n_max].norm_sqr();
            }
        }
        if tail > tail_tol {
            return Err(Error::FockTruncation { tail, tol: tail_tol });
        }
        Ok(FockOracle { n_max, psi, n_total })
    }

    pub fn n_total(&self) -> f64 {
        self.n_total
    }

    fn expectation_pair(&self, op: impl Fn(&[Complex64], &mut [Complex64])) -> (f64, f64) {
        let mut out = vec![Complex64::ZERO; self.psi.len()];
        op(&self.psi, &mut out);
        let mean: Complex64 =
            self.psi.iter().zip(&out).map(|(p, o)| p.conj() * o).sum();
        let second: f64 = out.iter().map(|o| o.norm_sqr()).sum();
        (mean.re, second)
    }

    /// Mean and variance of the number difference after the readout
    /// beamsplitter (theta, phi), computed from the exact state.
    pub fn difference_stats(&self, theta: f64, phi: f64) -> (f64, f64) {
        let dim = self.n_max + 1;
        let (c, s) = (theta.cos(), theta.sin());
        let up = Complex64::I * s * Complex64::new(0.0, -phi).exp(); // a b^dag
        let down = -Complex64::I * s * Complex64::new(0.0, phi).exp(); // a^dag b
        let (mean, second) = self.expectation_pair(|psi, out| {
            for n1 in 0..dim {
                for n2 in 0..dim {
                    let v = psi[n1 * dim + n2];
                    if v == Complex64::ZERO {
                        continue;
                    }
                    out[n1 * dim + n2] += c * (n1 as f64 - n2 as f64) * v;
                    if n1 > 0 && n2 < dim - 1 {
                        let amp = ((n1 * (n2 + 1)) as f64).sqrt();
                        out[(n1 - 1) * dim + (n2 + 1)] += up * amp * v;
                    }
                    if n2 > 0 && n1 < dim - 1 {
                        let amp = (((n1 + 1) * n2) as f64).sqrt();
                        out[(n1 + 1) * dim + (n2 - 1)] += down * amp * v;
                    }
                }
            }
        });
        (mean, second - mean * mean)
    }

    /// Normalized variance v = Var(N_a - N_b)/N at the standard readout
    /// phase phi = -pi/2.
    pub fn normalized_variance(&self, theta: f64) -> f64 {
        let (_, var) = self.difference_stats(theta, -std::f64::consts::FRAC_PI_2);
        var / self.n_total
    }

    /// Mean of Jx = (a^dag b + b^dag a)/2 and variance of 2 Jx.
    pub fn jx_stats(&self) -> (f64, f64) {
        let dim = self.n_max + 1;
        let (mean2, second4) = self.expectation_pair(|psi, out| {
            // operator 2 Jx = a^dag b + a b^dag
            for n1 in 0..dim {
                for n2 in 0..dim {
                    let v = psi[n1 * dim + n2];
                    if v == Complex64::ZERO {
                        continue;
                    }
                    if n1 > 0 && n2 < dim - 1 {
                        let amp = ((n1 * (n2 + 1)) as f64).sqrt();
                        out[(n1 - 1) * dim + (n2 + 1)] += amp * v;
                    }
                    if n2 > 0 && n1 < dim - 1 {
                        let amp = (((n1 + 1) * n2) as f64).sqrt();
                        out[(n1 + 1) * dim + (n2 - 1)] += amp * v;
                    }
                }
            }
        });
        (mean2 / 2.0, second4 - mean2 * mean2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn no_twisting_gives_shot_noise() {
        for &theta in &[0.0, 0.1 * PI, 0.37, PI / 2.0] {
            let v = two_mode_variance(1e4, 0.0, theta);
            assert!((v - 1.0).abs() < 1e-12, "v = {v} at theta = {theta}");
        }
    }

    #[test]
    fn moment_route_matches_closed_form() {
        for &n in &[5.0f64, 20.0, 50.0, 500.0] {
            for &lam in &[0.0, 1e-3, 0.05] {
                for &theta in &[0.0, 0.1 * PI, 0.5 * PI, 1.3] {
                    let alpha = Complex64::new((n / 2.0).sqrt(), 0.0);
                    let beta = Complex64::new(0.0, -(n / 2.0).sqrt());
                    let k = kerr_coherent_expectations(alpha, beta, lam, lam);
                    let (_, var) = difference_stats_from_moments(&k, theta, -PI / 2.0);
                    let v_closed = two_mode_variance(n, lam, theta);
                    assert!(
                        (var / n - v_closed).abs() < 1e-9 * v_closed.abs().max(1.0),
                        "N={n} lam={lam} theta={theta}: {} vs {v_closed}",
                        var / n
                    );
                }
            }
        }
    }

    #[test]
    fn fock_oracle_matches_closed_form() {
        for &(n, lam, theta) in
            &[(20.0, 0.05, 0.1 * PI), (50.0, 0.01, 0.3), (12.0, 0.2, 0.5 * PI)]
        {
            let oracle = FockOracle::new(n, lam, lam, 1e-14).unwrap();
            let v_fock = oracle.normalized_variance(theta);
            let v_closed = two_mode_variance(n, lam, theta);
            assert!(
                (v_fock - v_closed).abs() < 1e-10 * v_closed.abs().max(1.0),
                "N={n} lam={lam}: fock {v_fock} vs closed {v_closed}"
            );
        }
    }

    #[test]
    fn fock_jx_variance_matches_closed_form() {
        let (n, lam) = (30.0, 0.03);
        let oracle = FockOracle::new(n, lam, lam, 1e-14).unwrap();
        let (_, v2jx) = oracle.jx_stats();
        let expect = two_mode_jx_variance(n, lam);
        assert!((v2jx - expect).abs() < 1e-9 * expect, "{v2jx} vs {expect}");
    }

    #[test]
    fn coherent_state_jx_is_half_n() {
        let oracle = FockOracle::new(40.0, 0.0, 0.0, 1e-14).unwrap();
        let (jx, v2jx) = oracle.jx_stats();
        // alpha real, beta = -i |beta|: <Jx> = Re(alpha^* beta) = 0
        assert!(jx.abs() < 1e-10);
        assert!((v2jx - 40.0).abs() < 1e-8);
    }

    #[test]
    fn small_lambda_form_consistent() {
        let (n, lam, theta) = (1e3, 1e-5, 0.2);
        let a = two_mode_variance(n, lam, theta);
        let b = two_mode_variance_small_lambda(n, lam, theta);
        assert!((a - b).abs() < 1e-8 * a);
    }

    #[test]
    fn squeezing_dip_at_positive_angle() {
        let (n, lam) = (1e4, 0.6 * 1e4_f64.powf(-2.0 / 3.0));
        let opt = optimal_squeezing(n).unwrap();
        assert!(opt.v < 0.1, "v_min = {}", opt.v);
        assert!(opt.theta > 0.0 && opt.theta < PI / 2.0, "theta = {}", opt.theta);
        assert!((opt.lambda - lam).abs() / lam < 0.25, "lambda = {}", opt.lambda);
        // closed form at the optimum beats nearby points
        let v0 = two_mode_variance(n, opt.lambda, opt.theta);
        assert!((v0 - opt.v).abs() < 1e-12 * v0.abs().max(1.0));
        assert!(two_mode_variance(n, opt.lambda, opt.theta + 0.01) > opt.v);
        assert!(two_mode_variance(n, opt.lambda, opt.theta - 0.01) > opt.v);
    }

    #[test]
    fn truncation_guard_trips() {
        let err = FockOracle::new(30.0, 0.0, 0.0, 1e-300);
        assert!(matches!(err, Err(Error::FockTruncation { .. })));
    }
}
