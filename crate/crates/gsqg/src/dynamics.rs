//! Contour dynamics for gSQG patches, used as an independent check that
//! solved states rotate rigidly.
//!
//! A patch of amplitude `q` bounded by a counter-clockwise curve `z(ξ)`
//! induces `u(p) = (C_α q / 2π) ∮ z'(ξ) |p − z(ξ)|^{−α} dξ`. On its own
//! boundary the integral diverges for `α >= 1`; the tangential part
//! `z'(τ) ∮ |z(τ) − z(ξ)|^{−α}` is removed, which only reparametrises the
//! curve. The remaining integrand is handled by the same product
//! integration as the boundary functional.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::contour::{sample_boundary, self_weights, SelfQuadrature, VState};
use crate::equilibria::ConfigParams;
use crate::specfun::{kernel_constants, sigma_spectrum, Alpha};
use crate::{cross, rotate, Error, Result, Vec2};

/// One closed boundary, sampled at equispaced parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub patch: usize,
    pub replica: usize,
    /// Uniform scalar value inside the curve.
    pub amplitude: f64,
    pub nodes: Vec<Vec2>,
}

impl Curve {
    pub fn circle(
        patch: usize,
        replica: usize,
        center: Vec2,
        radius: f64,
        amplitude: f64,
        nodes: usize,
    ) -> Self {
        let nodes = (0..nodes)
            .map(|i| {
                let x = 2.0 * PI * i as f64 / nodes as f64;
                [center[0] + radius * x.cos(), center[1] + radius * x.sin()]
            })
            .collect();
        Curve {
            patch,
            replica,
            amplitude,
            nodes,
        }
    }

    /// Enclosed area, exact for trigonometric curves resolved by the nodes.
    pub fn area(&self) -> f64 {
        let d = spectral_derivative(&self.nodes);
        let h = 2.0 * PI / self.nodes.len() as f64;
        0.5 * h
            * self
                .nodes
                .iter()
                .zip(&d)
                .map(|(z, dz)| cross(*z, *dz))
                .sum::<f64>()
    }

    /// `∫∫ |x|² dA`.
    pub fn second_moment(&self) -> f64 {
        let d = spectral_derivative(&self.nodes);
        let h = 2.0 * PI / self.nodes.len() as f64;
        0.25 * h
            * self
                .nodes
                .iter()
                .zip(&d)
                .map(|(z, dz)| (z[0] * z[0] + z[1] * z[1]) * cross(*z, *dz))
                .sum::<f64>()
    }

    fn min_spacing(&self) -> f64 {
        let n = self.nodes.len();
        (0..n)
            .map(|i| dist(self.nodes[i], self.nodes[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Every boundary of a multi-patch configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEnsemble {
    pub curves: Vec<Curve>,
}

impl CurveEnsemble {
    /// Sample all `2m + 1` boundaries of `state` with amplitudes
    /// `γ_j / (ε b_j)²`.
    pub fn from_vstate(state: &VState, params: &ConfigParams, nodes: usize) -> Result<Self> {
        if state.epsilon == 0.0 {
            return Err(Error::Domain(
                "patches have zero size at epsilon = 0".into(),
            ));
        }
        if nodes % 2 != 0 {
            return Err(Error::Domain(format!(
                "node count must be even, got {nodes}"
            )));
        }
        let mut curves = Vec::new();
        for j in 0..3 {
            let amplitude =
                params.strength(j, state.lambda.gamma2) / (state.epsilon * params.b[j]).powi(2);
            for k in 0..params.replicas(j) {
                curves.push(Curve {
                    patch: j,
                    replica: k,
                    amplitude,
                    nodes: sample_boundary(state, params, j, k, nodes)?,
                });
            }
        }
        let e = CurveEnsemble { curves };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if self.curves.is_empty() {
            return Err(Error::Domain("empty ensemble".into()));
        }
        for c in &self.curves {
            let n = c.nodes.len();
            if n < 8 || n % 2 != 0 {
                return Err(Error::Domain(format!(
                    "curve ({}, {}) has {n} nodes; need an even count >= 8",
                    c.patch, c.replica
                )));
            }
            if c.nodes.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!(
                    "non-finite node on curve ({}, {})",
                    c.patch, c.replica
                )));
            }
        }
        for a in &self.curves {
            for b in &self.curves {
                if a.patch == b.patch && a.nodes.len() != b.nodes.len() {
                    return Err(Error::Domain(format!(
                        "replicas of patch {} differ in node count",
                        a.patch
                    )));
                }
            }
        }
        Ok(())
    }

    /// The ensemble rotated about the origin; labels are unchanged.
    pub fn rotated(&self, angle: f64) -> Self {
        CurveEnsemble {
            curves: self
                .curves
                .iter()
                .map(|c| Curve {
                    nodes: c.nodes.iter().map(|p| rotate(*p, angle)).collect(),
                    ..c.clone()
                })
                .collect(),
        }
    }

    pub fn areas(&self) -> Vec<f64> {
        self.curves.iter().map(Curve::area).collect()
    }

    /// `Σ q ∫∫ |x|² dA` over all curves.
    pub fn angular_impulse(&self) -> f64 {
        self.curves
            .iter()
            .map(|c| c.amplitude * c.second_moment())
            .sum()
    }

    pub fn total_nodes(&self) -> usize {
        self.curves.iter().map(|c| c.nodes.len()).sum()
    }

    fn min_spacing(&self) -> f64 {
        self.curves
            .iter()
            .map(Curve::min_spacing)
            .fold(f64::INFINITY, f64::min)
    }
}

fn dist(a: Vec2, b: Vec2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn fft_pair(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
}

fn fourier(nodes: &[Vec2]) -> Vec<Complex<f64>> {
    let n = nodes.len();
    let (fwd, _) = fft_pair(n);
    let mut buf: Vec<Complex<f64>> = nodes
        .iter()
        .map(|p| Complex::new(p[0], p[1]) / n as f64)
        .collect();
    fwd.process(&mut buf);
    buf
}

fn wavenumber(k: usize, n: usize) -> f64 {
    if k < n / 2 {
        k as f64
    } else if k == n / 2 {
        0.0
    } else {
        k as f64 - n as f64
    }
}

/// `dz/dξ` of the trigonometric interpolant through equispaced nodes.
pub fn spectral_derivative(nodes: &[Vec2]) -> Vec<Vec2> {
    let n = nodes.len();
    let (_, inv) = fft_pair(n);
    let mut buf = fourier(nodes);
    for (k, c) in buf.iter_mut().enumerate() {
        *c *= Complex::new(0.0, wavenumber(k, n));
    }
    inv.process(&mut buf);
    buf.iter().map(|c| [c.re, c.im]).collect()
}

/// Tangential node velocity. Only the normal velocity is physical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tangential {
    /// As produced by the subtracted integrals. Nodes slide quickly along
    /// small patches and cluster.
    Subtracted,
    /// Chosen so that every node keeps its fraction of the total arclength;
    /// the mean tangential speed matches the subtracted field.
    Arclength,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityOptions {
    pub quadrature: SelfQuadrature,
    pub tangential: Tangential,
    /// Apply `exp(−36 (|k| / (n/2))^36)` to the node velocities. Without it
    /// the modes next to the Nyquist frequency grow exponentially.
    pub filter: bool,
}

impl Default for VelocityOptions {
    fn default() -> Self {
        VelocityOptions {
            quadrature: SelfQuadrature::Spectral,
            tangential: Tangential::Arclength,
            filter: true,
        }
    }
}

fn spectral_filter(u: &mut [Vec2]) {
    let n = u.len();
    let (_, inv) = fft_pair(n);
    let mut buf = fourier(u);
    for (k, c) in buf.iter_mut().enumerate() {
        let kk = if k <= n / 2 { k } else { n - k } as f64;
        *c *= (-36.0 * (kk / (n / 2) as f64).powi(36)).exp();
    }
    inv.process(&mut buf);
    for (v, c) in u.iter_mut().zip(&buf) {
        *v = [c.re, c.im];
    }
}

/// Replace the tangential part of `u` on a curve by the arclength-fraction
/// preserving one: `T_ξ = (s_ξ / L) ∫ θ_ξ U − θ_ξ U` with `U` the normal
/// speed and `θ_ξ` the turning rate of the tangent. The free constant makes
/// the mean of `T` equal that of `anchor · τ̂`.
fn arclength_tangential(dz: &[Vec2], anchor: &[Vec2], u: &mut [Vec2]) {
    let n = dz.len();
    let ddz = spectral_derivative(dz);
    let h = 2.0 * PI / n as f64;
    let mut s_xi = vec![0.0; n];
    let mut normal = vec![0.0; n];
    let mut tang = vec![0.0; n];
    let mut turn = vec![0.0; n];
    for i in 0..n {
        let len = dz[i][0].hypot(dz[i][1]);
        s_xi[i] = len;
        normal[i] = (u[i][0] * dz[i][1] - u[i][1] * dz[i][0]) / len;
        tang[i] = (anchor[i][0] * dz[i][0] + anchor[i][1] * dz[i][1]) / len;
        turn[i] = cross(dz[i], ddz[i]) / (len * len);
    }
    let length: f64 = h * s_xi.iter().sum::<f64>();
    let growth: f64 = h * turn.iter().zip(&normal).map(|(a, b)| a * b).sum::<f64>();
    let g: Vec<f64> = (0..n)
        .map(|i| s_xi[i] / length * growth - turn[i] * normal[i])
        .collect();
    let mut t = periodic_antiderivative(&g);
    let shift = (tang.iter().sum::<f64>() - t.iter().sum::<f64>()) / n as f64;
    t.iter_mut().for_each(|v| *v += shift);
    for i in 0..n {
        let tau = [dz[i][0] / s_xi[i], dz[i][1] / s_xi[i]];
        let nrm = [tau[1], -tau[0]];
        u[i] = [
            normal[i] * nrm[0] + t[i] * tau[0],
            normal[i] * nrm[1] + t[i] * tau[1],
        ];
    }
}

/// Even-odd rule against the polygon through `nodes`.
fn inside_polygon(p: Vec2, nodes: &[Vec2]) -> bool {
    let mut inside = false;
    let mut prev = nodes[nodes.len() - 1];
    for &cur in nodes {
        if (cur[1] > p[1]) != (prev[1] > p[1]) {
            let x = prev[0] + (p[1] - prev[1]) * (cur[0] - prev[0]) / (cur[1] - prev[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        prev = cur;
    }
    inside
}

/// Patches are disjoint, so no node may lie inside another curve.
fn check_crossings(ensemble: &CurveEnsemble) -> Result<()> {
    for (i, a) in ensemble.curves.iter().enumerate() {
        for (j, b) in ensemble.curves.iter().enumerate() {
            if i == j {
                continue;
            }
            if let Some(p) = a.nodes.iter().find(|p| inside_polygon(**p, &b.nodes)) {
                return Err(Error::Geometry(format!(
                    "curve ({}, {}) enters curve ({}, {}) at ({:.6e}, {:.6e})",
                    a.patch, a.replica, b.patch, b.replica, p[0], p[1]
                )));
            }
        }
    }
    Ok(())
}

/// Zero-mean antiderivative of a zero-mean periodic sample.
fn periodic_antiderivative(g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let (fwd, inv) = fft_pair(n);
    let mut buf: Vec<Complex<f64>> = g.iter().map(|v| Complex::new(*v / n as f64, 0.0)).collect();
    fwd.process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let w = wavenumber(k, n);
        *c = if w == 0.0 {
            Complex::new(0.0, 0.0)
        } else {
            *c / Complex::new(0.0, w)
        };
    }
    inv.process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

struct SelfTables {
    weights: Vec<f64>,
    sin_half_sq4: Vec<f64>,
}

/// Precomputed per-node-count data shared by velocity evaluations.
struct Kernel {
    alpha: f64,
    c_alpha: f64,
    opts: VelocityOptions,
    tables: Vec<(usize, SelfTables)>,
}

impl Kernel {
    fn new(ensemble: &CurveEnsemble, alpha: Alpha, opts: VelocityOptions) -> Result<Self> {
        let a = alpha.value();
        let mut tables: Vec<(usize, SelfTables)> = Vec::new();
        for c in &ensemble.curves {
            let n = c.nodes.len();
            if tables.iter().all(|(m, _)| *m != n) {
                let h = 2.0 * PI / n as f64;
                tables.push((
                    n,
                    SelfTables {
                        weights: self_weights(a, n, opts.quadrature)?,
                        sin_half_sq4: (0..n)
                            .map(|i| 4.0 * (i as f64 * h / 2.0).sin().powi(2))
                            .collect(),
                    },
                ));
            }
        }
        Ok(Kernel {
            alpha: a,
            c_alpha: kernel_constants(a)?.0,
            opts,
            tables,
        })
    }

    fn table(&self, n: usize) -> &SelfTables {
        &self
            .tables
            .iter()
            .find(|(m, _)| *m == n)
            .expect("table built for every node count")
            .1
    }

    fn velocities(&self, ensemble: &CurveEnsemble) -> Result<Vec<Vec<Vec2>>> {
        let derivs: Vec<Vec<Vec2>> = ensemble
            .curves
            .iter()
            .map(|c| spectral_derivative(&c.nodes))
            .collect();
        let min_gap = 0.25 * ensemble.min_spacing();
        check_crossings(ensemble)?;
        let targets: Vec<(usize, usize)> = ensemble
            .curves
            .iter()
            .enumerate()
            .flat_map(|(ci, c)| (0..c.nodes.len()).map(move |t| (ci, t)))
            .collect();
        let half_a = 0.5 * self.alpha;
        // (total, induced by other curves)
        let flat: Vec<Result<(Vec2, Vec2)>> = targets
            .par_iter()
            .map(|&(ci, t)| {
                let p = ensemble.curves[ci].nodes[t];
                let mut v = [0.0, 0.0];
                let mut v_other = [0.0, 0.0];
                for (si, src) in ensemble.curves.iter().enumerate() {
                    let n = src.nodes.len();
                    let dz = &derivs[si];
                    let mut acc = [0.0, 0.0];
                    if si == ci {
                        let tab = self.table(n);
                        let dt = dz[t];
                        for i in (0..n).filter(|&i| i != t) {
                            let m = (i + n - t) % n;
                            let z = src.nodes[i];
                            let g = ((z[0] - p[0]).powi(2) + (z[1] - p[1]).powi(2))
                                / tab.sin_half_sq4[m];
                            let w = tab.weights[m] * (-half_a * g.ln()).exp();
                            acc[0] += w * (dz[i][0] - dt[0]);
                            acc[1] += w * (dz[i][1] - dt[1]);
                        }
                    } else {
                        let mut closest = f64::INFINITY;
                        for (z, d) in src.nodes.iter().zip(dz) {
                            let r2 = (z[0] - p[0]).powi(2) + (z[1] - p[1]).powi(2);
                            closest = closest.min(r2);
                            let w = (-half_a * r2.ln()).exp();
                            acc[0] += w * d[0];
                            acc[1] += w * d[1];
                        }
                        if closest.sqrt() < min_gap {
                            return Err(Error::Geometry(format!(
                                "curves ({}, {}) and ({}, {}) intersect or touch (gap {:e})",
                                ensemble.curves[ci].patch,
                                ensemble.curves[ci].replica,
                                src.patch,
                                src.replica,
                                closest.sqrt()
                            )));
                        }
                        acc[0] /= n as f64;
                        acc[1] /= n as f64;
                    }
                    let pref = self.c_alpha * src.amplitude;
                    v[0] += pref * acc[0];
                    v[1] += pref * acc[1];
                    if si != ci {
                        v_other[0] += pref * acc[0];
                        v_other[1] += pref * acc[1];
                    }
                }
                if !(v[0].is_finite() && v[1].is_finite()) {
                    return Err(Error::Numerical(format!(
                        "non-finite velocity on curve {ci}, node {t}"
                    )));
                }
                Ok((v, v_other))
            })
            .collect();
        let mut out: Vec<Vec<Vec2>> = ensemble
            .curves
            .iter()
            .map(|c| Vec::with_capacity(c.nodes.len()))
            .collect();
        let mut other: Vec<Vec<Vec2>> = out.clone();
        for ((ci, _), v) in targets.into_iter().zip(flat) {
            let (v, w) = v?;
            out[ci].push(v);
            other[ci].push(w);
        }
        if self.opts.tangential == Tangential::Arclength {
            for ((dz, w), u) in derivs.iter().zip(&other).zip(out.iter_mut()) {
                arclength_tangential(dz, w, u);
            }
        }
        if self.opts.filter {
            out.iter_mut().for_each(|u| spectral_filter(u));
        }
        Ok(out)
    }
}

/// Velocity of every node, indexed like `ensemble.curves[c].nodes[i]`.
pub fn cde_velocity(
    ensemble: &CurveEnsemble,
    alpha: Alpha,
    opts: VelocityOptions,
) -> Result<Vec<Vec<Vec2>>> {
    ensemble.validate()?;
    Kernel::new(ensemble, alpha, opts)?.velocities(ensemble)
}

/// A conservative RK4 step for the stiffest boundary wave: the mode `n/2`
/// of a curve of mean radius `r` and amplitude `q` oscillates at roughly
/// `C_α |q| (n/2) σ_{n/2} r^{−α}`.
pub fn stable_dt(ensemble: &CurveEnsemble, alpha: Alpha) -> Result<f64> {
    ensemble.validate()?;
    let c = kernel_constants(alpha.value())?.0.max(1.0);
    let mut omega: f64 = 0.0;
    for curve in &ensemble.curves {
        let n = curve.nodes.len() / 2;
        let sigma = sigma_spectrum(alpha, n.max(2))?.sigma(n).max(1.0);
        let r = (curve.area().abs() / PI).sqrt();
        omega = omega.max(c * curve.amplitude.abs() * n as f64 * sigma * r.powf(-alpha.value()));
    }
    if omega == 0.0 {
        return Err(Error::Domain("ensemble carries no vorticity".into()));
    }
    Ok(2.0 / omega)
}

/// Output of [`evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub ensemble: CurveEnsemble,
    pub dt: f64,
    pub steps: usize,
    pub times: Vec<f64>,
    /// Area of every curve at every recorded time.
    pub areas: Vec<Vec<f64>>,
    pub angular_impulse: Vec<f64>,
}

impl Evolution {
    /// Largest `|A(t) − A(0)| / |A(0)|` over curves and times.
    pub fn area_drift(&self) -> f64 {
        let a0 = &self.areas[0];
        self.areas
            .iter()
            .flat_map(|a| a.iter().zip(a0).map(|(x, y)| ((x - y) / y).abs()))
            .fold(0.0, f64::max)
    }

    pub fn impulse_drift(&self) -> f64 {
        let i0 = self.angular_impulse[0];
        self.angular_impulse
            .iter()
            .map(|i| ((i - i0) / i0).abs())
            .fold(0.0, f64::max)
    }
}

fn axpy(base: &CurveEnsemble, k: &[Vec<Vec2>], h: f64) -> CurveEnsemble {
    CurveEnsemble {
        curves: base
            .curves
            .iter()
            .zip(k)
            .map(|(c, kc)| Curve {
                nodes: c
                    .nodes
                    .iter()
                    .zip(kc)
                    .map(|(p, v)| [p[0] + h * v[0], p[1] + h * v[1]])
                    .collect(),
                ..c.clone()
            })
            .collect(),
    }
}

/// Classical RK4 with `ceil(t_final / dt)` equal steps. Each step checks
/// `dt · max|u| <= 0.2 · min node spacing`.
pub fn evolve(
    ensemble: &CurveEnsemble,
    alpha: Alpha,
    t_final: f64,
    dt: f64,
    opts: VelocityOptions,
) -> Result<Evolution> {
    ensemble.validate()?;
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::Domain(format!(
            "need dt > 0 and t_final >= 0, got dt = {dt}, t_final = {t_final}"
        )));
    }
    let kernel = Kernel::new(ensemble, alpha, opts)?;
    let steps = (t_final / dt).ceil() as usize;
    let h = if steps == 0 {
        dt
    } else {
        t_final / steps as f64
    };
    let mut state = ensemble.clone();
    let mut times = vec![0.0];
    let mut areas = vec![state.areas()];
    let mut angular_impulse = vec![state.angular_impulse()];
    for step in 0..steps {
        let t = step as f64 * h;
        let stamp = |e: Error| match e {
            Error::Geometry(m) => Error::Geometry(format!("at t = {t:.6e}: {m}")),
            other => other,
        };
        let k1 = kernel.velocities(&state).map_err(stamp)?;
        let vmax = k1
            .iter()
            .flatten()
            .map(|v| v[0].hypot(v[1]))
            .fold(0.0, f64::max);
        let spacing = state.min_spacing();
        if h * vmax > 0.2 * spacing {
            return Err(Error::TimeStep(format!(
                "dt * max|u| = {:e} exceeds 0.2 * min spacing = {:e} at t = {t:.6e}; use dt <= {:e}",
                h * vmax,
                0.2 * spacing,
                0.2 * spacing / vmax
            )));
        }
        let k2 = kernel
            .velocities(&axpy(&state, &k1, 0.5 * h))
            .map_err(stamp)?;
        let k3 = kernel
            .velocities(&axpy(&state, &k2, 0.5 * h))
            .map_err(stamp)?;
        let k4 = kernel.velocities(&axpy(&state, &k3, h)).map_err(stamp)?;
        for (ci, c) in state.curves.iter_mut().enumerate() {
            for (i, p) in c.nodes.iter_mut().enumerate() {
                for d in 0..2 {
                    p[d] += h / 6.0
                        * (k1[ci][i][d] + 2.0 * k2[ci][i][d] + 2.0 * k3[ci][i][d] + k4[ci][i][d]);
                }
            }
        }
        times.push((step + 1) as f64 * h);
        areas.push(state.areas());
        angular_impulse.push(state.angular_impulse());
    }
    Ok(Evolution {
        ensemble: state,
        dt: h,
        steps,
        times,
        areas,
        angular_impulse,
    })
}

/// How final boundaries are compared with rotated initial ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// Node `i` against node `i`; exact in closed form.
    Nodes,
    /// Each final node against the nearest point of the rotated initial
    /// curve, which ignores tangential sliding of nodes.
    ClosestPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationFit {
    pub angle: f64,
    pub omega_fit: f64,
    /// Root-mean-square node distance after the best rotation.
    pub deviation: f64,
}

/// Trigonometric interpolant of a closed curve.
struct TrigCurve {
    coeffs: Vec<(f64, Complex<f64>)>,
    dense: Vec<(f64, Vec2)>,
}

impl TrigCurve {
    fn new(nodes: &[Vec2]) -> Self {
        let n = nodes.len();
        let c = fourier(nodes);
        let coeffs: Vec<(f64, Complex<f64>)> = c
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if k == n / 2 {
                    (k as f64, *v)
                } else {
                    (wavenumber(k, n), *v)
                }
            })
            .collect();
        let mut tc = TrigCurve {
            coeffs,
            dense: Vec::new(),
        };
        let m = 8 * n;
        tc.dense = (0..m)
            .map(|i| {
                let s = 2.0 * PI * i as f64 / m as f64;
                (s, tc.eval(s).0)
            })
            .collect();
        tc
    }

    /// `(z, z', z'')` at parameter `s`. The Nyquist term is split evenly
    /// between `±n/2` so the interpolant is real-symmetric.
    fn eval(&self, s: f64) -> (Vec2, Vec2, Vec2) {
        let n = self.coeffs.len();
        let mut z = Complex::new(0.0, 0.0);
        let mut d1 = z;
        let mut d2 = z;
        for (k, (wn, c)) in self.coeffs.iter().enumerate() {
            let ks: &[(f64, f64)] = if k == n / 2 {
                &[(*wn, 0.5), (-*wn, 0.5)]
            } else {
                &[(*wn, 1.0)]
            };
            for &(kk, wt) in ks {
                let e = Complex::from_polar(wt, kk * s) * c;
                z += e;
                d1 += e * Complex::new(0.0, kk);
                d2 += e * (-kk * kk);
            }
        }
        ([z.re, z.im], [d1.re, d1.im], [d2.re, d2.im])
    }

    /// Signed distance (positive outside for a counter-clockwise curve) and
    /// unit outward normal at the closest point.
    fn closest(&self, q: Vec2) -> (f64, Vec2) {
        let mut s = self
            .dense
            .iter()
            .min_by(|a, b| dist(a.1, q).total_cmp(&dist(b.1, q)))
            .map(|d| d.0)
            .unwrap_or(0.0);
        for _ in 0..20 {
            let (z, d1, d2) = self.eval(s);
            let r = [z[0] - q[0], z[1] - q[1]];
            let g = r[0] * d1[0] + r[1] * d1[1];
            let gp = d1[0] * d1[0] + d1[1] * d1[1] + r[0] * d2[0] + r[1] * d2[1];
            let ds = if gp > 0.0 { g / gp } else { 0.0 };
            s -= ds;
            if ds.abs() < 1e-15 {
                break;
            }
        }
        let (z, d1, _) = self.eval(s);
        let len = d1[0].hypot(d1[1]);
        let nrm = [d1[1] / len, -d1[0] / len];
        ((q[0] - z[0]) * nrm[0] + (q[1] - z[1]) * nrm[1], nrm)
    }
}

/// Best rigid rotation about the origin mapping `initial` onto `final_`.
/// Curves are matched by position in the ensemble.
pub fn rotation_fit(
    initial: &CurveEnsemble,
    final_: &CurveEnsemble,
    t: f64,
    mode: FitMode,
) -> Result<RotationFit> {
    if t == 0.0 {
        return Err(Error::Domain("rotation fit needs t != 0".into()));
    }
    if initial.curves.len() != final_.curves.len()
        || initial
            .curves
            .iter()
            .zip(&final_.curves)
            .any(|(a, b)| a.nodes.len() != b.nodes.len())
    {
        return Err(Error::Domain(
            "ensembles have different curve or node counts".into(),
        ));
    }
    let pairs = || {
        initial
            .curves
            .iter()
            .zip(&final_.curves)
            .flat_map(|(a, b)| a.nodes.iter().zip(&b.nodes))
    };
    let (mut sc, mut sd) = (0.0, 0.0);
    for (a, b) in pairs() {
        sc += cross(*a, *b);
        sd += a[0] * b[0] + a[1] * b[1];
    }
    let mut angle = sc.atan2(sd);
    let count = initial.total_nodes() as f64;
    let deviation = match mode {
        FitMode::Nodes => (pairs()
            .map(|(a, b)| {
                let r = rotate(*a, angle);
                (r[0] - b[0]).powi(2) + (r[1] - b[1]).powi(2)
            })
            .sum::<f64>()
            / count)
            .sqrt(),
        FitMode::ClosestPoint => {
            let curves: Vec<TrigCurve> = initial
                .curves
                .iter()
                .map(|c| TrigCurve::new(&c.nodes))
                .collect();
            let residuals = |phi: f64| -> (Vec<f64>, Vec<f64>) {
                let mut r = Vec::new();
                let mut dr = Vec::new();
                for (tc, fc) in curves.iter().zip(&final_.curves) {
                    for b in &fc.nodes {
                        let q = rotate(*b, -phi);
                        let (d, nrm) = tc.closest(q);
                        r.push(d);
                        // d/dφ of Q_{−φ} b is −J q with J the quarter turn
                        dr.push(nrm[0] * q[1] - nrm[1] * q[0]);
                    }
                }
                (r, dr)
            };
            for _ in 0..30 {
                let (r, dr) = residuals(angle);
                let num: f64 = r.iter().zip(&dr).map(|(a, b)| a * b).sum();
                let den: f64 = dr.iter().map(|b| b * b).sum();
                if den == 0.0 {
                    break;
                }
                let step = num / den;
                angle -= step;
                if step.abs() <= 1e-15 * angle.abs().max(1.0) {
                    break;
                }
            }
            let (r, _) = residuals(angle);
            (r.iter().map(|a| a * a).sum::<f64>() / count).sqrt()
        }
    };
    Ok(RotationFit {
        angle,
        omega_fit: angle / t,
        deviation,
    })
}
