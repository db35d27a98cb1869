//! Spatial discretization: Cartesian boxes and the spherically symmetric
//! radial line, together with per-point volume weights and spectral
//! wavenumbers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_POINTS_PER_AXIS: usize = 4096;
pub const MIN_POINTS_PER_AXIS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Cartesian3D,
    /// Spherically symmetric fields sampled on a radial line r > 0.
    /// The Laplacian is handled through the substitution u = r psi, which
    /// maps it onto a 1D second derivative with u(0) = u(R) = 0.
    SphericalRadial1D,
}

#[derive(Debug, Clone)]
pub struct Grid {
    geometry: Geometry,
    points: Vec<usize>,
    lengths: Vec<f64>,
    positions: Vec<Vec<f64>>,
    wavenumbers: Vec<Vec<f64>>,
    weights: Vec<f64>,
    dv: f64,
}

impl Grid {
    /// Cartesian grid: `points[i]` samples over a box of size `lengths[i]`
    /// centred on the origin. Radial grid: `points[0]` shells between 0 and
    /// `lengths[0]`.
    pub fn new(geometry: Geometry, points: &[usize], lengths: &[f64]) -> Result<Self> {
        let naxes = match geometry {
            Geometry::Cartesian3D => 3,
            Geometry::SphericalRadial1D => 1,
        };
        if points.len() != naxes || lengths.len() != naxes {
            return Err(Error::Config(format!(
                "{geometry:?} needs {naxes} axes, got {} point counts and {} lengths",
                points.len(),
                lengths.len()
            )));
        }
        for (&n, &l) in points.iter().zip(lengths) {
            if n < MIN_POINTS_PER_AXIS {
                return Err(Error::Config(format!(
                    "at least {MIN_POINTS_PER_AXIS} points per axis required, got {n}"
                )));
            }
            if n > MAX_POINTS_PER_AXIS {
                return Err(Error::Config(format!(
                    "more than {MAX_POINTS_PER_AXIS} points per axis ({n}) is not supported"
                )));
            }
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::Config(format!("axis length must be positive, got {l}")));
            }
        }

        match geometry {
            Geometry::Cartesian3D => Self::new_cartesian(points, lengths),
            Geometry::SphericalRadial1D => Self::new_radial(points[0], lengths[0]),
        }
    }

    fn new_cartesian(points: &[usize], lengths: &[f64]) -> Result<Self> {
        let mut positions = Vec::with_capacity(3);
        let mut wavenumbers = Vec::with_capacity(3);
        let mut dv = 1.0;
        for (&n, &l) in points.iter().zip(lengths) {
            let dx = l / n as f64;
            dv *= dx;
            positions.push((0..n).map(|j| (j as f64 - (n / 2) as f64) * dx).collect());
            // standard DFT ordering: 0, 1, .., n/2-1, -n/2, .., -1 times 2 pi / L
            let dk = 2.0 * PI / l;
            wavenumbers.push(
                (0..n)
                    .map(|j| {
                        let j = j as i64;
                        let m = if j < (n as i64 + 1) / 2 { j } else { j - n as i64 };
                        m as f64 * dk
                    })
                    .collect(),
            );
        }
        let total: usize = points.iter().product();
        Ok(Grid {
            geometry: Geometry::Cartesian3D,
            points: points.to_vec(),
            lengths: lengths.to_vec(),
            positions,
            wavenumbers,
            weights: vec![dv; total],
            dv,
        })
    }

    fn new_radial(n: usize, radius: f64) -> Result<Self> {
        let dr = radius / (n + 1) as f64;
        let positions: Vec<f64> = (0..n).map(|j| (j + 1) as f64 * dr).collect();
        // Shell weights: cell j spans [b_{j-1}, b_j] with b_0 = 0 and b_n = R,
        // interior boundaries at midpoints. The weights tile the full ball, so
        // they sum to 4/3 pi R^3 exactly.
        let mut bounds = Vec::with_capacity(n + 1);
        bounds.push(0.0);
        for j in 1..n {
            bounds.push((j as f64 + 0.5) * dr);
        }
        bounds.push(radius);
        let weights: Vec<f64> = (0..n)
            .map(|j| 4.0 * PI / 3.0 * (bounds[j + 1].powi(3) - bounds[j].powi(3)))
            .collect();
        // sine-mode spectrum of the u = r psi problem
        let wavenumbers: Vec<f64> = (1..=n).map(|m| PI * m as f64 / radius).collect();
        let dv = 4.0 * PI / 3.0 * radius.powi(3) / n as f64;
        Ok(Grid {
            geometry: Geometry::SphericalRadial1D,
            points: vec![n],
            lengths: vec![radius],
            positions: vec![positions],
            wavenumbers: vec![wavenumbers],
            weights,
            dv,
        })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn total_points(&self) -> usize {
        self.points.iter().product()
    }

    /// Coordinates along `axis` (radial grids have a single axis).
    pub fn positions(&self, axis: usize) -> &[f64] {
        &self.positions[axis]
    }

    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    /// Per-point volume weight. Uniform for Cartesian grids; the shell volume
    /// for radial grids.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Mean volume element (the uniform element on Cartesian grids).
    pub fn dv(&self) -> f64 {
        self.dv
    }

    pub fn volume(&self) -> f64 {
        match self.geometry {
            Geometry::Cartesian3D => self.lengths.iter().product(),
            Geometry::SphericalRadial1D => 4.0 * PI / 3.0 * self.lengths[0].powi(3),
        }
    }

    /// |r| at flattened point index `i`.
    pub fn radius_at(&self, i: usize) -> f64 {
        match self.geometry {
            Geometry::SphericalRadial1D => self.positions[0][i],
            Geometry::Cartesian3D => {
                let (x, y, z) = self.cartesian_coords(i);
                (x * x + y * y + z * z).sqrt()
            }
        }
    }

    /// (x, y, z) at flattened index `i` of a Cartesian grid (row-major:
    /// x slowest, z fastest).
    pub fn cartesian_coords(&self, i: usize) -> (f64, f64, f64) {
        debug_assert_eq!(self.geometry, Geometry::Cartesian3D);
        let (ny, nz) = (self.points[1], self.points[2]);
        let iz = i % nz;
        let iy = (i / nz) % ny;
        let ix = i / (nz * ny);
        (self.positions[0][ix], self.positions[1][iy], self.positions[2][iz])
    }
}

/// Convenience wrapper matching the configuration surface.
pub fn make_grid(geometry: Geometry, points: &[usize], lengths: &[f64]) -> Result<Grid> {
    Grid::new(geometry, points, lengths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_point_count() {
        let g = make_grid(Geometry::Cartesian3D, &[32, 32, 32], &[4e-5; 3]).unwrap();
        assert_eq!(g.total_points(), 32768);
    }

    #[test]
    fn cartesian_dv() {
        let g = make_grid(Geometry::Cartesian3D, &[8, 8, 8], &[1.0; 3]).unwrap();
        let expect = (1.0f64 / 8.0).powi(3);
        assert!((g.dv() - expect).abs() < 1e-18);
        assert!(g.weights().iter().all(|&w| (w - expect).abs() < 1e-18));
    }

    #[test]
    fn cartesian_weights_sum_to_box_volume() {
        let g = make_grid(Geometry::Cartesian3D, &[16, 8, 12], &[2.0, 3.0, 0.5]).unwrap();
        let sum: f64 = g.weights().iter().sum();
        assert!((sum - 3.0).abs() / 3.0 < 1e-12);
    }

    #[test]
    fn radial_weights_sum_to_sphere_volume() {
        let r = 50e-6;
        let g = make_grid(Geometry::SphericalRadial1D, &[256], &[r]).unwrap();
        let sum: f64 = g.weights().iter().sum();
        let v = 4.0 * std::f64::consts::PI / 3.0 * r.powi(3);
        assert!((sum - v).abs() / v < 1e-6, "rel err {}", (sum - v).abs() / v);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(make_grid(Geometry::Cartesian3D, &[4, 32, 32], &[1.0; 3]).is_err());
        assert!(make_grid(Geometry::Cartesian3D, &[8192, 32, 32], &[1.0; 3]).is_err());
        assert!(make_grid(Geometry::SphericalRadial1D, &[64], &[-1.0]).is_err());
        assert!(make_grid(Geometry::SphericalRadial1D, &[64], &[f64::NAN]).is_err());
    }

    #[test]
    fn wavenumber_ordering_matches_dft() {
        let g = make_grid(Geometry::Cartesian3D, &[8, 8, 8], &[1.0; 3]).unwrap();
        let k = g.wavenumbers(0);
        let dk = 2.0 * std::f64::consts::PI;
        let expect: Vec<f64> = [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]
            .iter()
            .map(|m| m * dk)
            .collect();
        for (a, b) in k.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
