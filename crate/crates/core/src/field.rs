//! Node-value containers: 2D fields and the 4D distribution function.

use crate::grid::{PhaseGrid4D, PolarGrid, Weights2D};
use crate::util::compensated_sum;
use crate::{Error, Result};

/// Point values on a 2D grid, row-major with the first coordinate slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub ni: usize,
    pub nj: usize,
    pub values: Vec<f64>,
}

impl Field2D {
    pub fn zeros(ni: usize, nj: usize) -> Self {
        Self {
            ni,
            nj,
            values: vec![0.0; ni * nj],
        }
    }

    pub fn from_fn(ni: usize, nj: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(ni * nj);
        for i in 0..ni {
            for j in 0..nj {
                values.push(f(i, j));
            }
        }
        Self { ni, nj, values }
    }

    /// Evaluate a function of the polar coordinates at every node.
    pub fn from_polar_fn(grid: &PolarGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        Self::from_fn(grid.nr(), grid.ntheta(), |i, j| {
            f(grid.r.coord(i), grid.theta.coord(j))
        })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nj + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.values[i * self.nj + j]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            ni: self.ni,
            nj: self.nj,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }
}

/// Weighted sum `Σ f_{ij} w_{ij}`.
///
/// Summation is left-to-right over the flat row-major order with one
/// compensated pass, so repeated calls bit-match.
pub fn integrate(field: &Field2D, weights: &Weights2D) -> Result<f64> {
    if field.ni != weights.nr || field.nj != weights.ntheta {
        return Err(Error::ShapeMismatch(format!(
            "field {}x{} vs weights {}x{}",
            field.ni, field.nj, weights.nr, weights.ntheta
        )));
    }
    Ok(compensated_sum(
        field
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| v * weights.row(k / field.nj)),
    ))
}

/// Same contract as [`integrate`] for a flat slice already in row-major order.
pub fn integrate_flat(values: &[f64], weights: &Weights2D) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(Error::ShapeMismatch(format!(
            "flat field {} vs weights {}",
            values.len(),
            weights.len()
        )));
    }
    Ok(compensated_sum(
        values
            .iter()
            .enumerate()
            .map(|(k, &v)| v * weights.row(k / weights.ntheta)),
    ))
}

/// The distribution function on the `(r, θ, z, v∥)` tensor grid.
///
/// Storage is row-major in that index order (`i_v` fastest), which is also
/// the snapshot wire order. Slice accessors gather/scatter against the same
/// flat storage:
/// * poloidal slice — `(i_r, i_theta)` plane at fixed `(i_z, i_v)`,
/// * flux-surface slice — `(i_theta, i_z)` plane at fixed `(i_r, i_v)`,
/// * v-line — contiguous run over `i_v` at fixed `(i_r, i_theta, i_z)`.
#[derive(Debug, Clone)]
pub struct Distribution4D {
    pub grid: PhaseGrid4D,
    pub values: Vec<f64>,
}

impl Distribution4D {
    pub fn zeros(grid: PhaseGrid4D) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(grid: PhaseGrid4D, mut f: impl FnMut(f64, f64, f64, f64) -> f64) -> Self {
        let (nr, nth, nz, nv) = (grid.r.n, grid.theta.n, grid.z.n, grid.vpar.n);
        let mut values = Vec::with_capacity(grid.len());
        for ir in 0..nr {
            let r = grid.r.coord(ir);
            for it in 0..nth {
                let th = grid.theta.coord(it);
                for iz in 0..nz {
                    let z = grid.z.coord(iz);
                    for iv in 0..nv {
                        values.push(f(r, th, z, grid.vpar.coord(iv)));
                    }
                }
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn index(&self, ir: usize, it: usize, iz: usize, iv: usize) -> usize {
        let (nth, nz, nv) = (self.grid.theta.n, self.grid.z.n, self.grid.vpar.n);
        ((ir * nth + it) * nz + iz) * nv + iv
    }

    #[inline]
    pub fn at(&self, ir: usize, it: usize, iz: usize, iv: usize) -> f64 {
        self.values[self.index(ir, it, iz, iv)]
    }

    #[inline]
    pub fn at_mut(&mut self, ir: usize, it: usize, iz: usize, iv: usize) -> &mut f64 {
        let k = self.index(ir, it, iz, iv);
        &mut self.values[k]
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Gather the poloidal `(r, θ)` plane at fixed `(i_z, i_v)` into `buf`
    /// (row-major, θ fastest).
    pub fn gather_poloidal(&self, iz: usize, iv: usize, buf: &mut [f64]) {
        let (nr, nth) = (self.grid.r.n, self.grid.theta.n);
        debug_assert_eq!(buf.len(), nr * nth);
        for ir in 0..nr {
            for it in 0..nth {
                buf[ir * nth + it] = self.values[self.index(ir, it, iz, iv)];
            }
        }
    }

    pub fn scatter_poloidal(&mut self, iz: usize, iv: usize, buf: &[f64]) {
        let (nr, nth) = (self.grid.r.n, self.grid.theta.n);
        debug_assert_eq!(buf.len(), nr * nth);
        for ir in 0..nr {
            for it in 0..nth {
                let k = self.index(ir, it, iz, iv);
                self.values[k] = buf[ir * nth + it];
            }
        }
    }

    /// Gather the flux-surface `(θ, z)` plane at fixed `(i_r, i_v)` into
    /// `buf` (row-major, z fastest).
    pub fn gather_flux_surface(&self, ir: usize, iv: usize, buf: &mut [f64]) {
        let (nth, nz) = (self.grid.theta.n, self.grid.z.n);
        debug_assert_eq!(buf.len(), nth * nz);
        for it in 0..nth {
            for iz in 0..nz {
                buf[it * nz + iz] = self.values[self.index(ir, it, iz, iv)];
            }
        }
    }

    pub fn scatter_flux_surface(&mut self, ir: usize, iv: usize, buf: &[f64]) {
        let (nth, nz) = (self.grid.theta.n, self.grid.z.n);
        debug_assert_eq!(buf.len(), nth * nz);
        for it in 0..nth {
            for iz in 0..nz {
                let k = self.index(ir, it, iz, iv);
                self.values[k] = buf[it * nz + iz];
            }
        }
    }

    /// Contiguous v-line at fixed `(i_r, i_theta, i_z)`.
    pub fn v_line(&self, ir: usize, it: usize, iz: usize) -> &[f64] {
        let k = self.index(ir, it, iz, 0);
        &self.values[k..k + self.grid.vpar.n]
    }

    pub fn v_line_mut(&mut self, ir: usize, it: usize, iz: usize) -> &mut [f64] {
        let k = self.index(ir, it, iz, 0);
        let nv = self.grid.vpar.n;
        &mut self.values[k..k + nv]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PolarGrid;
    use crate::util::SplitMix64;

    fn test_grid() -> PolarGrid {
        PolarGrid::new(16, 16, 1.0, 20.0).unwrap()
    }

    /// Independent pairwise (cascade) summation oracle.
    fn pairwise_sum(v: &[f64]) -> f64 {
        match v.len() {
            0 => 0.0,
            1 => v[0],
            n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
        }
    }

    #[test]
    fn integrate_zero_and_constant() {
        let g = test_grid();
        let w = g.weights();
        let zero = Field2D::zeros(16, 16);
        assert_eq!(integrate(&zero, &w).unwrap(), 0.0);

        let c = Field2D::from_fn(16, 16, |_, _| 2.5);
        let got = integrate(&c, &w).unwrap();
        assert!(((got - 2.5 * w.total()) / got).abs() < 1e-14);
    }

    #[test]
    fn integrate_matches_pairwise_oracle() {
        let g = test_grid();
        let w = g.weights();
        let mut rng = SplitMix64::new(7);
        let f = Field2D::from_fn(16, 16, |_, _| rng.uniform(-1.0, 1.0));
        let products: Vec<f64> = f
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| v * w.row(k / 16))
            .collect();
        let oracle = pairwise_sum(&products);
        let got = integrate(&f, &w).unwrap();
        assert!(
            ((got - oracle) / oracle.abs().max(1e-300)).abs() <= 1e-13,
            "got {got}, oracle {oracle}"
        );
    }

    #[test]
    fn integrate_is_linear() {
        let g = test_grid();
        let w = g.weights();
        let mut rng = SplitMix64::new(11);
        let f = Field2D::from_fn(16, 16, |_, _| rng.uniform(-1.0, 1.0));
        let h = Field2D::from_fn(16, 16, |_, _| rng.uniform(-1.0, 1.0));
        let (a, b) = (1.7, -0.3);
        let mut combo = Field2D::zeros(16, 16);
        for k in 0..combo.values.len() {
            combo.values[k] = a * f.values[k] + b * h.values[k];
        }
        let lhs = integrate(&combo, &w).unwrap();
        let rhs = a * integrate(&f, &w).unwrap() + b * integrate(&h, &w).unwrap();
        assert!((lhs - rhs).abs() / lhs.abs().max(1.0) < 1e-13);
    }

    #[test]
    fn integrate_rejects_shape_mismatch() {
        let g = test_grid();
        let w = g.weights();
        let f = Field2D::zeros(8, 16);
        assert!(integrate(&f, &w).is_err());
    }

    #[test]
    fn distribution_slices_alias_storage() {
        let grid = PhaseGrid4D::new(5, 6, 4, 7, 1.0, 20.0, 10.0, 6.0).unwrap();
        let mut rng = SplitMix64::new(3);
        let mut f = Distribution4D::zeros(grid);
        for v in f.values.iter_mut() {
            *v = rng.uniform(-1.0, 1.0);
        }
        assert_eq!(f.values.len(), 5 * 6 * 4 * 7);

        let mut pol = vec![0.0; 5 * 6];
        f.gather_poloidal(2, 3, &mut pol);
        assert_eq!(pol[1 * 6 + 4], f.at(1, 4, 2, 3));
        for x in pol.iter_mut() {
            *x += 1.0;
        }
        f.scatter_poloidal(2, 3, &pol);
        assert_eq!(f.at(1, 4, 2, 3), pol[1 * 6 + 4]);

        let mut fs = vec![0.0; 6 * 4];
        f.gather_flux_surface(1, 5, &mut fs);
        assert_eq!(fs[2 * 4 + 3], f.at(1, 2, 3, 5));

        let line = f.v_line(4, 5, 3).to_vec();
        assert_eq!(line[6], f.at(4, 5, 3, 6));
        f.v_line_mut(4, 5, 3)[0] = 99.0;
        assert_eq!(f.at(4, 5, 3, 0), 99.0);
    }
}
