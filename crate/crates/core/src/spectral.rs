//! FFT machinery: 3D transforms for Cartesian grids and the odd-extension
//! transform that realizes the spherically symmetric Laplacian through
//! u = r psi.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::{Geometry, Grid};

pub struct Spectral {
    geometry: Geometry,
    dims: Vec<usize>,
    fw: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
    scratch: Vec<Complex64>,
    line: Vec<Complex64>,
    /// Odd-extended buffer of length 2(n+1) for the radial transform.
    ext: Vec<Complex64>,
    radii: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        match grid.geometry() {
            Geometry::Cartesian3D => {
                let dims = grid.points().to_vec();
                let fw: Vec<_> = dims.iter().map(|&n| planner.plan_fft_forward(n)).collect();
                let inv: Vec<_> = dims.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
                let scratch_len = fw
                    .iter()
                    .chain(&inv)
                    .map(|p| p.get_inplace_scratch_len())
                    .max()
                    .unwrap();
                let max_dim = *dims.iter().max().unwrap();
                Spectral {
                    geometry: Geometry::Cartesian3D,
                    dims,
                    fw,
                    inv,
                    scratch: vec![Complex64::ZERO; scratch_len],
                    line: vec![Complex64::ZERO; max_dim],
                    ext: Vec::new(),
                    radii: Vec::new(),
                }
            }
            Geometry::SphericalRadial1D => {
                let n = grid.points()[0];
                let m = 2 * (n + 1);
                let fw = planner.plan_fft_forward(m);
                let inv = planner.plan_fft_inverse(m);
                let scratch_len = fw.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
                Spectral {
                    geometry: Geometry::SphericalRadial1D,
                    dims: vec![n],
                    fw: vec![fw],
                    inv: vec![inv],
                    scratch: vec![Complex64::ZERO; scratch_len],
                    line: Vec::new(),
                    ext: vec![Complex64::ZERO; m],
                    radii: grid.positions(0).to_vec(),
                }
            }
        }
    }

    /// Length of the spectral multiplier expected by [`apply_multiplier`]:
    /// the flattened grid for Cartesian, the extended buffer for radial.
    pub fn multiplier_len(&self) -> usize {
        match self.geometry {
            Geometry::Cartesian3D => self.dims.iter().product(),
            Geometry::SphericalRadial1D => self.ext.len(),
        }
    }

    fn fft_axis(&mut self, data: &mut [Complex64], axis: usize, forward: bool) {
        let plan = if forward { &self.fw[axis] } else { &self.inv[axis] };
        let (nx, ny, nz) = (self.dims[0], self.dims[1], self.dims[2]);
        match axis {
            2 => plan.process_with_scratch(data, &mut self.scratch),
            1 => {
                for ix in 0..nx {
                    for iz in 0..nz {
                        let base = ix * ny * nz + iz;
                        for iy in 0..ny {
                            self.line[iy] = data[base + iy * nz];
                        }
                        plan.process_with_scratch(&mut self.line[..ny], &mut self.scratch);
                        for iy in 0..ny {
                            data[base + iy * nz] = self.line[iy];
                        }
                    }
                }
            }
            0 => {
                let stride = ny * nz;
                for rest in 0..stride {
                    for ix in 0..nx {
                        self.line[ix] = data[rest + ix * stride];
                    }
                    plan.process_with_scratch(&mut self.line[..nx], &mut self.scratch);
                    for ix in 0..nx {
                        data[rest + ix * stride] = self.line[ix];
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    /// Forward 3D DFT in place (Cartesian only), no normalization.
    pub fn forward3d(&mut self, data: &mut [Complex64]) {
        for axis in 0..3 {
            self.fft_axis(data, axis, true);
        }
    }

    /// Inverse 3D DFT in place (Cartesian only), normalized by 1/N.
    pub fn inverse3d(&mut self, data: &mut [Complex64]) {
        for axis in 0..3 {
            self.fft_axis(data, axis, false);
        }
        let scale = 1.0 / data.len() as f64;
        for v in data {
            *v *= scale;
        }
    }

    /// Multiply the field by `mult` in the spectral basis. For Cartesian grids
    /// `mult` is indexed like the flattened grid in DFT ordering; for radial
    /// grids it is indexed over the 2(n+1) modes of the odd extension of
    /// u = r psi.
    pub fn apply_multiplier(&mut self, values: &mut [Complex64], mult: &[Complex64]) {
        match self.geometry {
            Geometry::Cartesian3D => {
                self.forward3d(values);
                for (v, m) in values.iter_mut().zip(mult) {
                    *v *= m;
                }
                self.inverse3d(values);
            }
            Geometry::SphericalRadial1D => {
                let n = self.dims[0];
                let m = self.ext.len();
                self.ext[0] = Complex64::ZERO;
                self.ext[n + 1] = Complex64::ZERO;
                for j in 0..n {
                    let u = values[j] * self.radii[j];
                    self.ext[j + 1] = u;
                    self.ext[m - 1 - j] = -u;
                }
                self.fw[0].process_with_scratch(&mut self.ext, &mut self.scratch);
                for (v, f) in self.ext.iter_mut().zip(mult) {
                    *v *= f;
                }
                self.inv[0].process_with_scratch(&mut self.ext, &mut self.scratch);
                let scale = 1.0 / m as f64;
                for j in 0..n {
                    values[j] = self.ext[j + 1] * scale / self.radii[j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn cartesian_round_trip() {
        let grid = make_grid(Geometry::Cartesian3D, &[8, 8, 8], &[1.0; 3]).unwrap();
        let mut sp = Spectral::new(&grid);
        let orig: Vec<Complex64> = (0..512)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut data = orig.clone();
        sp.forward3d(&mut data);
        sp.inverse3d(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn radial_identity_multiplier_round_trip() {
        let grid = make_grid(Geometry::SphericalRadial1D, &[64], &[1.0]).unwrap();
        let mut sp = Spectral::new(&grid);
        let ones = vec![Complex64::ONE; sp.multiplier_len()];
        let orig: Vec<Complex64> = grid
            .positions(0)
            .iter()
            .map(|&r| Complex64::new((-r * r * 8.0).exp(), 0.3 * (-r * r * 4.0).exp()))
            .collect();
        let mut data = orig.clone();
        sp.apply_multiplier(&mut data, &ones);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
