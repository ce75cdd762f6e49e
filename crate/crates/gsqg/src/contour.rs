//! Finite-size patch boundaries and the desingularised boundary functional.
//!
//! Patch `j`, replica `k` occupies the region bounded by
//! `Q_{φ_jk}( c_j + ε b_j R_j(x) e_r(x) )` with `c_0 = 0`, `c_j = d_j e_1` and
//! `R_j = 1 + η_j f_j`, `η_j = ε|ε|^α b_j^{1+α}`. The vorticity amplitude of
//! patch `j` is `γ_j / (ε b_j)²`, so every patch carries mass `π γ_j`.
//!
//! The functional is the normal velocity in the rotating frame, normalised so
//! that it stays finite as `ε → 0`:
//!
//! `F_j(x) = [ t × u(p) − Ω t·p ] / (ε b_j)`, with `p = z_j(x)`, `t = z_j'(x)`,
//!
//! evaluated on replica 0 of each patch. At `ε = 0` it reduces to
//! `P_j sin x` plus the linear self-interaction `−γ_j n σ_n a_n sin(nx)`.
//! Both the self term and the cross terms are written so that the
//! `1/η` and `1/ε` prefactors are absorbed analytically; nothing cancels
//! numerically when `ε` is small, and `ε = 0` is evaluated by the same code.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::equilibria::{ConfigParams, Lambda, LatticeSums};
use crate::specfun::{kernel_constants, kernel_mode_differences, sigma_spectrum, Alpha};
use crate::{cross, rotate, Error, Result, Vec2};

/// Cosine coefficients `a_n`, `n = 2..=n_max`, of one patch shape `f_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchShape {
    pub j: usize,
    /// `m` for the central patch, 1 for ring patches.
    pub fold: usize,
    /// `coeffs[i] = a_{i+2}`.
    pub coeffs: Vec<f64>,
}

impl PatchShape {
    pub fn zero(j: usize, fold: usize, n_max: usize) -> Self {
        PatchShape {
            j,
            fold,
            coeffs: vec![0.0; n_max.saturating_sub(1)],
        }
    }

    /// Highest mode carried.
    pub fn n_max(&self) -> usize {
        self.coeffs.len() + 1
    }

    /// `a_n` (zero outside the stored range).
    pub fn get(&self, n: usize) -> f64 {
        if n < 2 {
            0.0
        } else {
            self.coeffs.get(n - 2).copied().unwrap_or(0.0)
        }
    }

    pub fn set(&mut self, n: usize, value: f64) {
        self.coeffs[n - 2] = value;
    }

    /// Modes this patch may carry: multiples of `fold`, `2..=n_max`.
    pub fn allowed_modes(fold: usize, n_max: usize) -> impl Iterator<Item = usize> {
        (2..=n_max).filter(move |n| n % fold == 0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fold == 0 {
            return Err(Error::ShapeValidity(format!(
                "patch {}: fold must be positive",
                self.j
            )));
        }
        for (i, a) in self.coeffs.iter().enumerate() {
            let n = i + 2;
            if !a.is_finite() {
                return Err(Error::ShapeValidity(format!(
                    "patch {}: a_{n} is not finite",
                    self.j
                )));
            }
            if n % self.fold != 0 && *a != 0.0 {
                return Err(Error::ShapeValidity(format!(
                    "patch {}: a_{n} = {a:e} breaks the {}-fold symmetry",
                    self.j, self.fold
                )));
            }
        }
        Ok(())
    }

    /// `(f, f', f'')` at the given angles.
    pub fn eval(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut f = vec![0.0; x.len()];
        let mut fp = vec![0.0; x.len()];
        let mut fpp = vec![0.0; x.len()];
        for (i, &xi) in x.iter().enumerate() {
            for (k, &a) in self.coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let n = (k + 2) as f64;
                let (s, c) = (n * xi).sin_cos();
                f[i] += a * c;
                fp[i] -= n * a * s;
                fpp[i] -= n * n * a * c;
            }
        }
        (f, fp, fpp)
    }
}

/// Shape amplitude scale `η = ε|ε|^α b^{1+α}`.
pub fn eta(epsilon: f64, b: f64, alpha: f64) -> f64 {
    epsilon * epsilon.abs().powf(alpha) * b.powf(1.0 + alpha)
}

/// A candidate solution: three patch shapes plus `λ` at a given `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct VState {
    pub epsilon: f64,
    pub shapes: [PatchShape; 3],
    pub lambda: Lambda,
}

impl VState {
    /// Circular patches (`f = 0`) at the given `ε` and `λ`.
    pub fn circular(epsilon: f64, params: &ConfigParams, n_max: usize, lambda: Lambda) -> Self {
        VState {
            epsilon,
            shapes: [
                PatchShape::zero(0, params.m, n_max),
                PatchShape::zero(1, 1, n_max),
                PatchShape::zero(2, 1, n_max),
            ],
            lambda,
        }
    }

    pub fn n_max(&self) -> usize {
        self.shapes[0].n_max()
    }

    pub fn validate(&self, params: &ConfigParams) -> Result<()> {
        if !self.epsilon.is_finite()
            || !self.lambda.omega.is_finite()
            || !self.lambda.gamma2.is_finite()
        {
            return Err(Error::ShapeValidity(
                "epsilon and lambda must be finite".into(),
            ));
        }
        let n = self.n_max();
        for (j, s) in self.shapes.iter().enumerate() {
            if s.j != j {
                return Err(Error::ShapeValidity(format!(
                    "shape {j} is labelled as patch {}",
                    s.j
                )));
            }
            let want = if j == 0 { params.m } else { 1 };
            if s.fold != want {
                return Err(Error::ShapeValidity(format!(
                    "patch {j} has fold {} (expected {want})",
                    s.fold
                )));
            }
            if s.n_max() != n {
                return Err(Error::ShapeValidity(
                    "patches carry different numbers of modes".into(),
                ));
            }
            s.validate()?;
        }
        Ok(())
    }
}

/// Smallest admissible radius function value at any node.
pub const MIN_RADIUS: f64 = 0.1;
/// Smallest admissible distance between boundaries of different patches.
pub const MIN_SEPARATION: f64 = 1e-8;

/// Boundary samples of replica `k` of patch `j` at `nodes` equispaced angles.
pub fn sample_boundary(
    state: &VState,
    params: &ConfigParams,
    j: usize,
    k: usize,
    nodes: usize,
) -> Result<Vec<Vec2>> {
    if nodes < 8 {
        return Err(Error::Domain(format!("need at least 8 nodes, got {nodes}")));
    }
    if j > 2 || k >= params.replicas(j) {
        return Err(Error::Domain(format!("no replica {k} of patch {j}")));
    }
    let a = params.alpha.value();
    let x: Vec<f64> = (0..nodes)
        .map(|i| 2.0 * PI * i as f64 / nodes as f64)
        .collect();
    let (f, _, _) = state.shapes[j].eval(&x);
    let e = eta(state.epsilon, params.b[j], a);
    let scale = state.epsilon * params.b[j];
    let phi = params.replica_angle(j, k);
    let c = [params.center_radius(j), 0.0];
    let mut out = Vec::with_capacity(nodes);
    for (i, xi) in x.iter().enumerate() {
        let r = 1.0 + e * f[i];
        if r < MIN_RADIUS {
            return Err(Error::ShapeValidity(format!(
                "patch {j}: radius {r} at x = {xi} below {MIN_RADIUS}"
            )));
        }
        let p = [c[0] + scale * r * xi.cos(), c[1] + scale * r * xi.sin()];
        out.push(rotate(p, phi));
    }
    Ok(out)
}

/// How the singular self-interaction integral is discretised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfQuadrature {
    /// Product integration: the kernel `|2 sin((x−y)/2)|^{−α}` is integrated
    /// exactly against the trigonometric interpolant of the smooth factor.
    /// Spectrally accurate.
    Spectral,
    /// Periodic trapezoid with the coincident node dropped. Converges like
    /// `h^{3−α}`; kept as the simple reference scheme.
    SkipNode,
}

/// Circulant weights `W_m` such that
/// `(1/2π) ∫ g(y) |2 sin((x_t − y)/2)|^{−α} dy ≈ Σ_i g(y_i) W_{(i−t) mod n}`
/// for smooth periodic `g` with `g(x_t) = 0`.
pub fn self_weights(alpha: f64, n: usize, scheme: SelfQuadrature) -> Result<Vec<f64>> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::Domain(format!(
            "quadrature size must be even and >= 4, got {n}"
        )));
    }
    let h = 2.0 * PI / n as f64;
    match scheme {
        SelfQuadrature::SkipNode => Ok((0..n)
            .map(|m| {
                if m == 0 {
                    0.0
                } else {
                    (2.0 * (m as f64 * h / 2.0).sin()).abs().powf(-alpha) / n as f64
                }
            })
            .collect()),
        SelfQuadrature::Spectral => {
            let c = kernel_mode_differences(alpha, n / 2)?;
            let mut w = vec![0.0; n];
            for (m, wm) in w.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (k, ck) in c.iter().enumerate().take(n / 2).skip(1) {
                    // index (k m) mod n keeps the argument exact
                    acc += 2.0 * ck * (((k * m) % n) as f64 * h).cos();
                }
                acc += if m % 2 == 0 { c[n / 2] } else { -c[n / 2] };
                *wm = acc / n as f64;
            }
            Ok(w)
        }
    }
}

/// Sine (and diagnostic cosine) coefficients of the pointwise functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSpectrum {
    /// `sine[j][n − 1] = A_n^j`, `n = 1..=n_max`.
    pub sine: [Vec<f64>; 3],
    /// `cosine[j][n] = B_n^j`, `n = 0..=n_max`; vanish for even shapes.
    pub cosine: [Vec<f64>; 3],
}

impl ResidualSpectrum {
    pub fn a(&self, j: usize, n: usize) -> f64 {
        self.sine[j][n - 1]
    }

    /// `max_{j,n} |A_n^j|`.
    pub fn max_abs(&self) -> f64 {
        self.sine.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Σ_{j,n} (B_n^j)²`.
    pub fn cosine_energy(&self) -> f64 {
        self.cosine.iter().flatten().map(|v| v * v).sum()
    }

    /// `max |A_n^0|` over `n` not divisible by `m`.
    pub fn central_off_fold(&self, m: usize) -> f64 {
        self.sine[0]
            .iter()
            .enumerate()
            .filter(|(i, _)| (i + 1) % m != 0)
            .fold(0.0, |acc, (_, v)| acc.max(v.abs()))
    }
}

/// Reusable evaluator of the boundary functional for fixed parameters and
/// quadrature size.
#[derive(Debug, Clone)]
pub struct Functional {
    params: ConfigParams,
    n_quad: usize,
    alpha: f64,
    c_alpha: f64,
    weights: Vec<f64>,
    x: Vec<f64>,
    cos_tab: Vec<f64>,
    sin_tab: Vec<f64>,
    sin_half_sq4: Vec<f64>,
}

struct PatchGeom {
    f: Vec<f64>,
    fp: Vec<f64>,
    /// Unit-scale offset `R e_r`.
    rho: Vec<Vec2>,
    /// Unit-scale tangent `R' e_r + R e_θ`.
    tau: Vec<Vec2>,
    r: Vec<f64>,
    eta: f64,
}

/// `expm1(−(α/2) ln1p(η q)) / η`, continuous at `η = 0`.
#[inline]
fn dpow(alpha: f64, eta: f64, q: f64) -> f64 {
    if eta == 0.0 {
        -0.5 * alpha * q
    } else {
        (-0.5 * alpha * (eta * q).ln_1p()).exp_m1() / eta
    }
}

impl Functional {
    pub fn new(params: &ConfigParams, n_quad: usize, scheme: SelfQuadrature) -> Result<Self> {
        params.validate()?;
        let alpha = params.alpha.value();
        let weights = self_weights(alpha, n_quad, scheme)?;
        let h = 2.0 * PI / n_quad as f64;
        let x: Vec<f64> = (0..n_quad).map(|i| i as f64 * h).collect();
        Ok(Functional {
            params: params.clone(),
            n_quad,
            alpha,
            c_alpha: kernel_constants(alpha)?.0,
            weights,
            cos_tab: x.iter().map(|v| v.cos()).collect(),
            sin_tab: x.iter().map(|v| v.sin()).collect(),
            sin_half_sq4: x.iter().map(|v| 4.0 * (v / 2.0).sin().powi(2)).collect(),
            x,
        })
    }

    pub fn params(&self) -> &ConfigParams {
        &self.params
    }

    pub fn n_quad(&self) -> usize {
        self.n_quad
    }

    fn geometry(&self, state: &VState) -> Result<[PatchGeom; 3]> {
        let build = |j: usize| -> Result<PatchGeom> {
            let (f, fp, _) = state.shapes[j].eval(&self.x);
            let e = eta(state.epsilon, self.params.b[j], self.alpha);
            let mut rho = Vec::with_capacity(self.n_quad);
            let mut tau = Vec::with_capacity(self.n_quad);
            let mut r = Vec::with_capacity(self.n_quad);
            for i in 0..self.n_quad {
                let ri = 1.0 + e * f[i];
                let rpi = e * fp[i];
                if ri < MIN_RADIUS {
                    return Err(Error::ShapeValidity(format!(
                        "patch {j}: radius {ri} at x = {} below {MIN_RADIUS}",
                        self.x[i]
                    )));
                }
                let (c, s) = (self.cos_tab[i], self.sin_tab[i]);
                rho.push([ri * c, ri * s]);
                tau.push([rpi * c - ri * s, rpi * s + ri * c]);
                r.push(ri);
            }
            Ok(PatchGeom {
                f,
                fp,
                rho,
                tau,
                r,
                eta: e,
            })
        };
        Ok([build(0)?, build(1)?, build(2)?])
    }

    /// Pointwise values `F_j(x_i)` on the quadrature nodes, `j = 0, 1, 2`.
    pub fn pointwise(&self, state: &VState) -> Result<[Vec<f64>; 3]> {
        state.validate(&self.params)?;
        let geom = self.geometry(state)?;
        if state.epsilon != 0.0 {
            self.check_disjoint(state, &geom)?;
        }
        let out = [
            self.patch_values(state, &geom, 0)?,
            self.patch_values(state, &geom, 1)?,
            self.patch_values(state, &geom, 2)?,
        ];
        Ok(out)
    }

    /// Every boundary node of replica 0 of each patch must lie outside every
    /// other replica by at least [`MIN_SEPARATION`]. Patches are star-shaped
    /// about their centres, so the radial comparison is exact.
    fn check_disjoint(&self, state: &VState, geom: &[PatchGeom; 3]) -> Result<()> {
        let p = &self.params;
        let eps = state.epsilon;
        for j in 0..3 {
            let cj = [p.center_radius(j), 0.0];
            let phi_j0 = p.replica_angle(j, 0);
            for l in 0..3 {
                let scale = eps.abs() * p.b[l];
                for k in 0..p.replicas(l) {
                    if l == j && k == 0 {
                        continue;
                    }
                    let psi = p.replica_angle(l, k) - phi_j0;
                    let center = rotate([p.center_radius(l), 0.0], psi);
                    for (t, rho) in geom[j].rho.iter().enumerate() {
                        let pt = [cj[0] + eps * p.b[j] * rho[0], cj[1] + eps * p.b[j] * rho[1]];
                        let q = rotate([pt[0] - center[0], pt[1] - center[1]], -psi);
                        let dist = q[0].hypot(q[1]);
                        // ε < 0 traces the same radial function rotated by π
                        let theta = q[1].atan2(q[0]) + if eps < 0.0 { PI } else { 0.0 };
                        let (f, _, _) = state.shapes[l].eval(&[theta]);
                        let radius = scale * (1.0 + geom[l].eta * f[0]);
                        if dist - radius < MIN_SEPARATION {
                            return Err(Error::Geometry(format!(
                                "patch {j} overlaps replica {k} of patch {l} near x = {}",
                                self.x[t]
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn patch_values(&self, state: &VState, geom: &[PatchGeom; 3], j: usize) -> Result<Vec<f64>> {
        let p = &self.params;
        let n = self.n_quad;
        let eps = state.epsilon;
        let a = self.alpha;
        let gj = &geom[j];
        let bj = p.b[j];
        let cj = [p.center_radius(j), 0.0];
        let omega = state.lambda.omega;
        let mut out = vec![0.0; n];

        // rigid rotation: −Ω τ·p
        for t in 0..n {
            let tau = gj.tau[t];
            let pt = [
                cj[0] + eps * bj * gj.rho[t][0],
                cj[1] + eps * bj * gj.rho[t][1],
            ];
            out[t] = -omega * (tau[0] * pt[0] + tau[1] * pt[1]);
        }

        // self interaction
        let gamma_j = p.strength(j, state.lambda.gamma2);
        let pref = self.c_alpha * gamma_j;
        if pref != 0.0 {
            let e = gj.eta;
            for (t, slot) in out.iter_mut().enumerate() {
                let (fx, fpx) = (gj.f[t], gj.fp[t]);
                let mut acc = 0.0;
                for i in 0..n {
                    if i == t {
                        continue;
                    }
                    let m = (i + n - t) % n;
                    let (fy, fpy) = (gj.f[i], gj.fp[i]);
                    let s_yx = self.sin_tab[m];
                    let c_yx = self.cos_tab[m];
                    let df = fx - fy;
                    // (N − sin(y−x))/η
                    let n_lin = (fx + fy + e * (fx * fy + fpx * fpy)) * s_yx
                        + (fpx * (1.0 + e * fy) - fpy * (1.0 + e * fx)) * c_yx;
                    // G = (R(x)R(y) + (R(x)−R(y))²/(4 sin²))^{−α/2} = 1 + η g
                    let q = fx + fy + e * fx * fy + e * df * df / self.sin_half_sq4[m];
                    let g = dpow(a, e, q);
                    let psi = n_lin * (1.0 + e * g) + s_yx * g;
                    acc += psi * self.weights[m];
                }
                *slot += pref * acc;
            }
        }

        // every other replica of every patch
        let inv_n = 1.0 / n as f64;
        let phi_j0 = p.replica_angle(j, 0);
        for l in 0..3 {
            let gl = &geom[l];
            let gamma_l = p.strength(l, state.lambda.gamma2);
            let bl = p.b[l];
            let cl = [p.center_radius(l), 0.0];
            for k in 0..p.replicas(l) {
                if l == j && k == 0 {
                    continue;
                }
                let psi = p.replica_angle(l, k) - phi_j0;
                let center = rotate(cl, psi);
                let rho: Vec<Vec2> = gl.rho.iter().map(|v| rotate(*v, psi)).collect();
                let tau: Vec<Vec2> = gl.tau.iter().map(|v| rotate(*v, psi)).collect();
                let rho2: Vec<f64> = gl.r.iter().map(|r| r * r).collect();
                let pref = gamma_l * self.c_alpha / bl;
                for (t, slot) in out.iter_mut().enumerate() {
                    let pt = [
                        cj[0] + eps * bj * gj.rho[t][0],
                        cj[1] + eps * bj * gj.rho[t][1],
                    ];
                    let r = [pt[0] - center[0], pt[1] - center[1]];
                    let big_a = r[0] * r[0] + r[1] * r[1];
                    let tj = gj.tau[t];
                    let mut acc = 0.0;
                    for i in 0..n {
                        let delta = -2.0 * bl * (r[0] * rho[i][0] + r[1] * rho[i][1])
                            + eps * bl * bl * rho2[i];
                        let dist2 = big_a + eps * delta;
                        if !(dist2 > MIN_SEPARATION * MIN_SEPARATION) {
                            return Err(Error::Geometry(format!(
                                "patch {j} overlaps replica {k} of patch {l} near x = {}",
                                self.x[t]
                            )));
                        }
                        acc += cross(tj, tau[i]) * dpow(a, eps, delta / big_a);
                    }
                    *slot += pref * big_a.powf(-a / 2.0) * acc * inv_n;
                }
            }
        }

        if let Some(t) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "patch {j}: non-finite functional at x = {}",
                self.x[t]
            )));
        }
        Ok(out)
    }

    /// Project pointwise values onto sine (and cosine) modes `1..=n_max`.
    pub fn project(&self, values: &[Vec<f64>; 3], n_max: usize) -> ResidualSpectrum {
        let n = self.n_quad;
        let proj = |v: &Vec<f64>| {
            let mut s = vec![0.0; n_max];
            let mut c = vec![0.0; n_max + 1];
            for mode in 0..=n_max {
                let (mut as_, mut ac) = (0.0, 0.0);
                for (t, vt) in v.iter().enumerate() {
                    let idx = (mode * t) % n;
                    as_ += vt * self.sin_tab[idx];
                    ac += vt * self.cos_tab[idx];
                }
                let w = if mode == 0 || 2 * mode == n { 1.0 } else { 2.0 } / n as f64;
                if mode >= 1 {
                    s[mode - 1] = w * as_;
                }
                c[mode] = w * ac;
            }
            (s, c)
        };
        let (s0, c0) = proj(&values[0]);
        let (s1, c1) = proj(&values[1]);
        let (s2, c2) = proj(&values[2]);
        ResidualSpectrum {
            sine: [s0, s1, s2],
            cosine: [c0, c1, c2],
        }
    }

    pub fn evaluate(&self, state: &VState) -> Result<ResidualSpectrum> {
        let n_max = state.n_max();
        if self.n_quad < 4 * n_max {
            return Err(Error::Domain(format!(
                "n_quad = {} must be >= 4 n_max = {}",
                self.n_quad,
                4 * n_max
            )));
        }
        let v = self.pointwise(state)?;
        Ok(self.project(&v, n_max))
    }
}

/// One-shot evaluation with the spectral self quadrature.
pub fn evaluate_functional(
    state: &VState,
    params: &ConfigParams,
    n_quad: usize,
) -> Result<ResidualSpectrum> {
    Functional::new(params, n_quad, SelfQuadrature::Spectral)?.evaluate(state)
}

/// `γ_j n σ_n`: magnitude of the diagonal shape block of the linearisation at
/// the point-vortex state. The response of `F_j` to `cos(nx)` is
/// `−γ_j n σ_n sin(nx)` (see [`Functional`] for the sign convention).
pub fn linearized_diag(alpha: Alpha, gamma_j: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "shape modes start at n = 2, got {n}"
        )));
    }
    Ok(gamma_j * n as f64 * sigma_spectrum(alpha, n)?.sigma(n))
}

/// `∂(A_1^1, A_1^2)/∂(Ω, γ₂)` at `ε = 0`.
pub fn jacobian_lambda(params: &ConfigParams) -> Result<[[f64; 2]; 2]> {
    let s = LatticeSums::new(params)?;
    let a = params.alpha.value();
    Ok([
        [
            params.d1,
            -s.c_hat * s.t_plus / (2.0 * params.d1.powf(1.0 + a)),
        ],
        [
            params.d2,
            -s.c_hat * s.s_alpha / (4.0 * params.d2.powf(1.0 + a)),
        ],
    ])
}

/// Signed curvature of the normalised boundary `R(x) e_r(x)`:
/// `κ = (R² + 2R'² − R R'') / (R² + R'²)^{3/2}`.
pub fn curvature(
    shape: &PatchShape,
    epsilon: f64,
    b: f64,
    alpha: f64,
    nodes: usize,
) -> Result<Vec<f64>> {
    let x: Vec<f64> = (0..nodes)
        .map(|i| 2.0 * PI * i as f64 / nodes as f64)
        .collect();
    let (f, fp, fpp) = shape.eval(&x);
    let e = eta(epsilon, b, alpha);
    let mut out = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let (r, rp, rpp) = (1.0 + e * f[i], e * fp[i], e * fpp[i]);
        let den = (r * r + rp * rp).powf(1.5);
        if !(den > 0.0) || r <= 0.0 {
            return Err(Error::ShapeValidity(format!(
                "patch {}: degenerate radius at x = {}",
                shape.j, x[i]
            )));
        }
        out.push((r * r + 2.0 * rp * rp - r * rpp) / den);
    }
    Ok(out)
}

/// Exact area `½ ∫ (εb R)² dx = π(εb)² (1 + η² Σ a_n² / 2)`.
pub fn patch_area(shape: &PatchShape, epsilon: f64, b: f64, alpha: f64) -> f64 {
    let e = eta(epsilon, b, alpha);
    let sum_sq: f64 = shape.coeffs.iter().map(|a| a * a).sum();
    PI * (epsilon * b).powi(2) * (1.0 + 0.5 * e * e * sum_sq)
}

/// The quadrature floor: `max |A_n^j|` at `(ε, f, λ) = (0, 0, λ*)`, and the
/// derived tolerance `τ_q = 10 · max(floor, 4 ε_mach · scale)` with
/// `ε_mach` the machine epsilon and `scale = max(1, |Ω*| d₂)`.
pub fn quadrature_tolerance(
    params: &ConfigParams,
    lambda_star: Lambda,
    n_max: usize,
    n_quad: usize,
) -> Result<(f64, f64)> {
    let f = Functional::new(params, n_quad, SelfQuadrature::Spectral)?;
    let state = VState::circular(0.0, params, n_max, lambda_star);
    let floor = f.evaluate(&state)?.max_abs();
    let scale = 1f64.max(lambda_star.omega.abs() * params.d2);
    Ok((floor, 10.0 * floor.max(4.0 * f64::EPSILON * scale)))
}
