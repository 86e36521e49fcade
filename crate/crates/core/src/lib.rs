//! Structure-preserving solver toolkit for a reduced drift-kinetic model on
//! annular (screw-pinch) geometry.
//!
//! The building blocks:
//!
//! * [`grid`], [`field`] — structured grids (Cartesian, polar, 4D phase
//!   space), node-value containers and quadrature weights.
//! * [`bracket`] — the conservative finite-difference Poisson bracket
//!   (9/13-point stencils, selectable order and boundary closure) assembled
//!   as a sparse operator with in-place updates.
//! * [`stepper`] — RK4 and Crank–Nicolson time integration for the poloidal
//!   advection, plus the CFL diagnostic.
//! * [`spline`], [`sl`] — cubic-spline interpolation and backward
//!   semi-Lagrangian substeps (flux-surface and v-parallel advection).
//! * [`qn`] — the quasi-neutrality field solve (Fourier in θ, tridiagonal
//!   in r, z as a batch dimension).
//! * [`physics`] — equilibrium profiles, initial conditions and the
//!   canonical parameter sets.
//! * [`driver`] — the Lie/Strang predictor–corrector splitting driver.
//! * [`diagnostics`] — conserved quantities, algebraic indicators, growth
//!   fits.
//! * [`harness`] — scripted experiments (indicator table, vortex and
//!   constant-advection error studies, refinement studies, reduced full-model
//!   runs).
//! * [`config`], [`io`] — run configuration, manifests, snapshots, CSV.

pub mod bracket;
pub mod config;
pub mod diagnostics;
pub mod driver;
pub mod field;
pub mod grid;
pub mod harness;
pub mod io;
pub mod physics;
pub mod qn;
pub mod sl;
pub mod spline;
pub mod stepper;
pub mod util;

mod error;

pub use error::{Error, Result};
