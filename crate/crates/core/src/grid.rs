//! Structured 1D/2D/4D grids, index flattening and quadrature weights.
//!
//! Layout contract (also the snapshot wire order): row-major with the first
//! coordinate slowest. For a polar field that is `(i_r, i_theta)`, for the
//! 4D distribution `(i_r, i_theta, i_z, i_v)` with `i_v` fastest.

use crate::{Error, Result};

/// A uniform 1D grid.
///
/// Periodic grids cover `[start, stop)` with spacing `(stop-start)/n`; the
/// node at `stop` is *not* stored. Non-periodic grids include both ends and
/// have spacing `(stop-start)/(n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub n: usize,
    pub start: f64,
    pub stop: f64,
    pub spacing: f64,
    pub periodic: bool,
}

impl Grid1D {
    pub fn new(n: usize, start: f64, stop: f64, periodic: bool) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 4 nodes, got {n}"
            )));
        }
        if !(stop > start) {
            return Err(Error::InvalidParameter(format!(
                "grid bounds must satisfy start < stop, got [{start}, {stop}]"
            )));
        }
        let spacing = if periodic {
            (stop - start) / n as f64
        } else {
            (stop - start) / (n - 1) as f64
        };
        Ok(Self {
            n,
            start,
            stop,
            spacing,
            periodic,
        })
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.start + i as f64 * self.spacing
    }

    /// Coordinate at a (possibly out-of-range) integer index, extending the
    /// grid linearly by `spacing` beyond its ends.
    #[inline]
    pub fn coord_extended(&self, i: i64) -> f64 {
        self.start + i as f64 * self.spacing
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Wrap a shifted coordinate into the periodic interval.
    pub fn wrap(&self, x: f64) -> f64 {
        debug_assert!(self.periodic);
        let len = self.stop - self.start;
        let mut y = (x - self.start) % len;
        if y < 0.0 {
            y += len;
        }
        self.start + y
    }
}

/// Annular polar grid: non-periodic `r` in `[r_min, r_max]` with
/// `r_min > 0`, periodic `theta` in `[0, 2π)`.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    pub r: Grid1D,
    pub theta: Grid1D,
}

impl PolarGrid {
    pub fn new(nr: usize, ntheta: usize, rmin: f64, rmax: f64) -> Result<Self> {
        Self::with_radial_periodicity(nr, ntheta, rmin, rmax, false)
    }

    /// Variant with a periodic radial direction. Physically artificial, but
    /// used by the algebraic-indicator and convergence studies that exercise
    /// fully periodic closures.
    pub fn periodic_r(nr: usize, ntheta: usize, rmin: f64, rmax: f64) -> Result<Self> {
        Self::with_radial_periodicity(nr, ntheta, rmin, rmax, true)
    }

    fn with_radial_periodicity(
        nr: usize,
        ntheta: usize,
        rmin: f64,
        rmax: f64,
        periodic: bool,
    ) -> Result<Self> {
        if rmin <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "r_min must be positive (metric weight 1/r), got {rmin}"
            )));
        }
        Ok(Self {
            r: Grid1D::new(nr, rmin, rmax, periodic)?,
            theta: Grid1D::new(ntheta, 0.0, 2.0 * std::f64::consts::PI, true)?,
        })
    }

    #[inline]
    pub fn nr(&self) -> usize {
        self.r.n
    }

    #[inline]
    pub fn ntheta(&self) -> usize {
        self.theta.n
    }

    pub fn len(&self) -> usize {
        self.nr() * self.ntheta()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-node quadrature weight `r_i Δr Δθ`, independent of `j`.
    pub fn weights(&self) -> Weights2D {
        let dr = self.r.spacing;
        let dth = self.theta.spacing;
        let per_row: Vec<f64> = (0..self.nr()).map(|i| self.r.coord(i) * dr * dth).collect();
        Weights2D {
            nr: self.nr(),
            ntheta: self.ntheta(),
            per_row,
        }
    }
}

/// Quadrature weights on a 2D grid, constant along the second index.
#[derive(Debug, Clone)]
pub struct Weights2D {
    pub nr: usize,
    pub ntheta: usize,
    per_row: Vec<f64>,
}

impl Weights2D {
    /// Uniform Cartesian weight `dx·dy` on an `n_x × n_y` grid.
    pub fn cartesian(nx: usize, ny: usize, dx: f64, dy: f64) -> Self {
        Weights2D {
            nr: nx,
            ntheta: ny,
            per_row: vec![dx * dy; nx],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, _j: usize) -> f64 {
        self.per_row[i]
    }

    #[inline]
    pub fn row(&self, i: usize) -> f64 {
        self.per_row[i]
    }

    pub fn total(&self) -> f64 {
        crate::util::compensated_sum(self.per_row.iter().map(|w| w * self.ntheta as f64))
    }

    pub fn len(&self) -> usize {
        self.nr * self.ntheta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Row-major flattening: `(i, j) -> i·n_j + j`.
#[inline]
pub fn flatten_index(i: usize, j: usize, ni: usize, nj: usize) -> Result<usize> {
    if i >= ni || j >= nj {
        return Err(Error::IndexOutOfRange(format!(
            "({i}, {j}) outside {ni}x{nj}"
        )));
    }
    Ok(i * nj + j)
}

/// Inverse of [`flatten_index`].
#[inline]
pub fn unflatten_index(k: usize, ni: usize, nj: usize) -> Result<(usize, usize)> {
    if k >= ni * nj {
        return Err(Error::IndexOutOfRange(format!(
            "{k} outside flat size {}",
            ni * nj
        )));
    }
    Ok((k / nj, k % nj))
}

/// The 4D phase-space grid `(r, θ, z, v∥)`.
///
/// `z` is periodic on `[0, 2πR₀)`, `v∥` non-periodic and symmetric about 0.
#[derive(Debug, Clone)]
pub struct PhaseGrid4D {
    pub r: Grid1D,
    pub theta: Grid1D,
    pub z: Grid1D,
    pub vpar: Grid1D,
    pub major_radius: f64,
}

impl PhaseGrid4D {
    pub fn new(
        nr: usize,
        ntheta: usize,
        nz: usize,
        nv: usize,
        rmin: f64,
        rmax: f64,
        major_radius: f64,
        vmax: f64,
    ) -> Result<Self> {
        if vmax <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "v_max must be positive, got {vmax}"
            )));
        }
        let polar = PolarGrid::new(nr, ntheta, rmin, rmax)?;
        let z = Grid1D::new(nz, 0.0, 2.0 * std::f64::consts::PI * major_radius, true)?;
        let vpar = Grid1D::new(nv, -vmax, vmax, false)?;
        Ok(Self {
            r: polar.r,
            theta: polar.theta,
            z,
            vpar,
            major_radius,
        })
    }

    pub fn poloidal(&self) -> PolarGrid {
        PolarGrid {
            r: self.r.clone(),
            theta: self.theta.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.r.n * self.theta.n * self.z.n * self.vpar.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Phase-space measure `r_i Δr Δθ Δz Δv` at radial index `i`.
    #[inline]
    pub fn weight4(&self, i_r: usize) -> f64 {
        self.r.coord(i_r) * self.r.spacing * self.theta.spacing * self.z.spacing * self.vpar.spacing
    }
}
