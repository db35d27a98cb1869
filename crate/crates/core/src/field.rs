//! Complex fields on a grid and the two-component simulation state.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Geometry, Grid};

/// A complex amplitude per grid point, units m^(-3/2).
#[derive(Debug, Clone)]
pub struct ComplexField {
    pub values: Vec<Complex64>,
    pub grid: Arc<Grid>,
}

impl ComplexField {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.total_points();
        ComplexField { values: vec![Complex64::ZERO; n], grid }
    }

    pub fn from_fn(grid: Arc<Grid>, mut f: impl FnMut(usize) -> Complex64) -> Self {
        let values = (0..grid.total_points()).map(|i| f(i)).collect();
        ComplexField { values, grid }
    }

    /// Weighted norm: sum_i |psi_i|^2 w_i.
    pub fn norm(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| v.norm_sqr() * w)
            .sum()
    }

    /// Weighted inner product: sum_i conj(self_i) other_i w_i.
    pub fn inner(&self, other: &ComplexField) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(self.grid.weights())
            .map(|((a, b), w)| a.conj() * b * w)
            .sum()
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    /// Rescale so that norm() == target.
    pub fn normalize(&mut self, target: f64) {
        let n = self.norm();
        if n > 0.0 {
            self.scale((target / n).sqrt());
        }
    }

    /// Weighted mean of f(r, |psi|^2), used for moments like <x> or <r^2>.
    pub fn density_moment(&self, mut f: impl FnMut(usize) -> f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .zip(self.grid.weights())
            .map(|((i, v), w)| f(i) * v.norm_sqr() * w)
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// The two hyperfine components of one trajectory.
#[derive(Debug, Clone)]
pub struct FieldPair {
    pub a: ComplexField,
    pub b: ComplexField,
    pub time: f64,
}

impl FieldPair {
    pub fn new(a: ComplexField, b: ComplexField) -> Self {
        assert!(Arc::ptr_eq(&a.grid, &b.grid), "components must share one grid");
        FieldPair { a, b, time: 0.0 }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.a.grid
    }

    pub fn total_norm(&self) -> f64 {
        self.a.norm() + self.b.norm()
    }

    /// The cross integral int psi_a^* psi_b dv.
    pub fn cross_integral(&self) -> Complex64 {
        self.a.inner(&self.b)
    }
}

/// Sidecar descriptor accompanying a raw field snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub geometry: Geometry,
    pub points: Vec<usize>,
    pub lengths_m: Vec<f64>,
    pub time_s: f64,
    pub component: String,
}

/// Write `field` as little-endian (re, im) f64 pairs in row-major order to
/// `<base>.bin`, with a JSON descriptor at `<base>.json`.
pub fn write_snapshot(field: &ComplexField, time: f64, component: &str, base: &Path) -> Result<()> {
    let meta = SnapshotMeta {
        geometry: field.grid.geometry(),
        points: field.grid.points().to_vec(),
        lengths_m: field.grid.lengths().to_vec(),
        time_s: time,
        component: component.to_string(),
    };
    let mut bin = Vec::with_capacity(field.values.len() * 16);
    for v in &field.values {
        bin.extend_from_slice(&v.re.to_le_bytes());
        bin.extend_from_slice(&v.im.to_le_bytes());
    }
    std::fs::File::create(base.with_extension("bin"))?.write_all(&bin)?;
    let json = serde_json::to_string_pretty(&meta)?;
    std::fs::write(base.with_extension("json"), json)?;
    Ok(())
}

pub fn read_snapshot(base: &Path) -> Result<(ComplexField, SnapshotMeta)> {
    let meta: SnapshotMeta =
        serde_json::from_str(&std::fs::read_to_string(base.with_extension("json"))?)?;
    let grid = Arc::new(Grid::new(meta.geometry, &meta.points, &meta.lengths_m)?);
    let mut bytes = Vec::new();
    std::fs::File::open(base.with_extension("bin"))?.read_to_end(&mut bytes)?;
    let n = grid.total_points();
    if bytes.len() != 16 * n {
        return Err(Error::Config(format!(
            "snapshot holds {} bytes, expected {} for {} points",
            bytes.len(),
            16 * n,
            n
        )));
    }
    let values = (0..n)
        .map(|i| {
            let re = f64::from_le_bytes(bytes[16 * i..16 * i + 8].try_into().unwrap());
            let im = f64::from_le_bytes(bytes[16 * i + 8..16 * i + 16].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Ok((ComplexField { values, grid }, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn snapshot_round_trip() {
        let grid = Arc::new(
            make_grid(Geometry::SphericalRadial1D, &[32], &[1e-5]).unwrap(),
        );
        let f = ComplexField::from_fn(grid, |i| Complex64::new(i as f64, -(i as f64) * 0.5));
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("field_a");
        write_snapshot(&f, 1.5e-3, "a", &base).unwrap();
        let (g, meta) = read_snapshot(&base).unwrap();
        assert_eq!(meta.component, "a");
        assert_eq!(meta.time_s, 1.5e-3);
        assert_eq!(f.values, g.values);
    }
}
