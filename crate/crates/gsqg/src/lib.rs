//! Co-rotating nested-polygon vortex patches for the generalized surface
//! quasi-geostrophic (gSQG) equations, `1 <= alpha < 2`.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`] — Gamma function, kernel constants, the linearised
//!   self-interaction spectrum and the polygonal lattice sums.
//! * [`equilibria`] — the point-vortex limit: configuration, closed-form
//!   equilibrium, non-degeneracy diagnostics, rigid-rotation check.
//! * [`contour`] — finite-size patch boundaries and the desingularised
//!   boundary functional.
//! * [`solver`] — Fourier–Newton solves, continuation in `eps`, asymptotic
//!   and convexity diagnostics.
//! * [`dynamics`] — an independent contour-dynamics integrator used to check
//!   that solved states rotate rigidly.
//! * [`config`] and [`io`] — the run-configuration format and file outputs.

pub mod config;
pub mod contour;
pub mod dynamics;
pub mod equilibria;
mod error;
pub mod io;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};

/// A point or vector in the plane.
pub type Vec2 = [f64; 2];

#[inline]
pub(crate) fn rotate(v: Vec2, angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

#[inline]
pub(crate) fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}
