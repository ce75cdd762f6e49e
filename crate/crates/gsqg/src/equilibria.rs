//! The point-vortex limit: nested-polygon configurations, the closed-form
//! relative equilibrium `λ* = (Ω*, γ₂*)`, non-degeneracy diagnostics and a
//! direct RK4 check that the equilibrium rotates rigidly.
//!
//! Strength convention: a vortex of strength γ moves a test point at
//! distance r with speed `Ĉ_α γ / (2 r^{1+α})`, counter-clockwise for γ > 0.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::specfun::{interaction_sum, kernel_constants, polygon_sum, Alpha, RingSign};
use crate::{rotate, Error, Result, Vec2};

/// Physical and geometric parameters of a nested-polygon configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigParams {
    pub alpha: Alpha,
    /// Fold number, `m >= 2`.
    pub m: usize,
    /// 0 = aligned rings, 1 = staggered rings.
    pub vartheta: u8,
    /// Patch scale factors `b_0, b_1, b_2`.
    pub b: [f64; 3],
    pub d1: f64,
    pub d2: f64,
    pub gamma0: f64,
    pub gamma1: f64,
}

impl ConfigParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Configuration(m));
        if self.m < 2 {
            return bad(format!("m must be >= 2, got {}", self.m));
        }
        if self.vartheta > 1 {
            return bad(format!("vartheta must be 0 or 1, got {}", self.vartheta));
        }
        if self.b.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return bad(format!("patch scales must be positive, got {:?}", self.b));
        }
        if !(self.d1.is_finite() && self.d1 > 0.0 && self.d2.is_finite()) {
            return bad(format!(
                "ring radii must be positive, got d1 = {}, d2 = {}",
                self.d1, self.d2
            ));
        }
        if self.d2 < self.d1 {
            return bad(format!(
                "need d2 > d1, got d1 = {}, d2 = {}",
                self.d1, self.d2
            ));
        }
        if self.d2 == self.d1 && self.vartheta == 0 {
            return bad("rings intersect: d2 = d1 with aligned rings".into());
        }
        if self.d2 == self.d1 {
            return bad(format!("need d2 > d1, got d1 = d2 = {}", self.d1));
        }
        if !(self.gamma0.is_finite() && self.gamma0 != 0.0)
            || !(self.gamma1.is_finite() && self.gamma1 != 0.0)
        {
            return bad(format!(
                "gamma0 and gamma1 must be nonzero, got {} and {}",
                self.gamma0, self.gamma1
            ));
        }
        Ok(())
    }

    /// `d = d2 / d1`.
    pub fn ratio(&self) -> f64 {
        self.d2 / self.d1
    }

    /// Ring radius of patch `j` (zero for the central patch).
    pub fn center_radius(&self, j: usize) -> f64 {
        match j {
            0 => 0.0,
            1 => self.d1,
            _ => self.d2,
        }
    }

    /// Polar angle of replica `k` of patch `j`: `2kπ/m` on ring 1 and
    /// `(2k+ϑ)π/m` on ring 2.
    pub fn replica_angle(&self, j: usize, k: usize) -> f64 {
        let m = self.m as f64;
        match j {
            0 | 1 => 2.0 * k as f64 * PI / m,
            _ => (2.0 * k as f64 + self.vartheta as f64) * PI / m,
        }
    }

    /// Number of replicas of patch `j`.
    pub fn replicas(&self, j: usize) -> usize {
        if j == 0 {
            1
        } else {
            self.m
        }
    }

    /// Strength of patch `j` given `γ₂`.
    pub fn strength(&self, j: usize, gamma2: f64) -> f64 {
        match j {
            0 => self.gamma0,
            1 => self.gamma1,
            _ => gamma2,
        }
    }
}

/// `λ = (Ω, γ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambda {
    pub omega: f64,
    pub gamma2: f64,
}

/// The lattice sums and constants entering the balance equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSums {
    pub c_hat: f64,
    pub s_alpha: f64,
    pub t_plus: f64,
    pub t_minus: f64,
    pub d: f64,
}

impl LatticeSums {
    pub fn new(params: &ConfigParams) -> Result<Self> {
        params.validate()?;
        let a = params.alpha.value();
        let d = params.ratio();
        Ok(LatticeSums {
            c_hat: kernel_constants(a)?.1,
            s_alpha: polygon_sum(params.m, a)?,
            t_plus: interaction_sum(d, params.vartheta, params.m, a, RingSign::Plus)?,
            t_minus: interaction_sum(d, params.vartheta, params.m, a, RingSign::Minus)?,
            d,
        })
    }
}

/// Vortex positions and strengths; index 0 is the centre, then ring 1
/// (`k = 0..m`), then ring 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub alpha: f64,
    pub d1: f64,
    pub positions: Vec<Vec2>,
    pub strengths: Vec<f64>,
}

pub fn build_configuration(params: &ConfigParams, gamma2: f64) -> Result<Configuration> {
    params.validate()?;
    let mut positions = vec![[0.0, 0.0]];
    let mut strengths = vec![params.gamma0];
    for j in 1..=2 {
        let r = params.center_radius(j);
        for k in 0..params.m {
            let (s, c) = params.replica_angle(j, k).sin_cos();
            positions.push([r * c, r * s]);
            strengths.push(params.strength(j, gamma2));
        }
    }
    Ok(Configuration {
        alpha: params.alpha.value(),
        d1: params.d1,
        positions,
        strengths,
    })
}

/// `(P₁, P₂)`: azimuthal balance of a ring-1 and a ring-2 vortex.
///
/// `P₁ = Ω d₁ − Ĉ/(2 d₁^{1+α}) [γ₀ + γ₁ S/2 + γ₂ T⁺]`,
/// `P₂ = Ω d₂ − Ĉ/(2 d₂^{1+α}) [γ₀ + γ₁ T⁻ + γ₂ S/2]`.
pub fn point_vortex_residual(lambda: Lambda, params: &ConfigParams) -> Result<[f64; 2]> {
    let sums = LatticeSums::new(params)?;
    Ok(residual_with(&sums, lambda, params))
}

pub(crate) fn residual_with(s: &LatticeSums, lambda: Lambda, p: &ConfigParams) -> [f64; 2] {
    let a = p.alpha.value();
    let (g0, g1, g2) = (p.gamma0, p.gamma1, lambda.gamma2);
    let p1 = lambda.omega * p.d1
        - s.c_hat / (2.0 * p.d1.powf(1.0 + a)) * (g0 + g1 * s.s_alpha / 2.0 + g2 * s.t_plus);
    let p2 = lambda.omega * p.d2
        - s.c_hat / (2.0 * p.d2.powf(1.0 + a)) * (g0 + g1 * s.t_minus + g2 * s.s_alpha / 2.0);
    [p1, p2]
}

/// The point-vortex relative equilibrium and its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub omega_star: f64,
    pub gamma2_star: f64,
    pub s_alpha: f64,
    pub t_plus: f64,
    pub t_minus: f64,
    pub det_jacobian: f64,
    pub nondeg_lhs: f64,
    pub residuals: [f64; 2],
    /// Set when `nondeg_lhs` vanishes within tolerance, i.e. `γ₂* = 0`.
    pub gamma2_vanishes: bool,
}

impl Equilibrium {
    pub fn lambda(&self) -> Lambda {
        Lambda {
            omega: self.omega_star,
            gamma2: self.gamma2_star,
        }
    }
}

const DEGENERACY_TOL: f64 = 1e-10;

/// Closed-form solution of `P₁ = P₂ = 0`:
///
/// `γ₂* = [(d^{α+2}−1)γ₀ + (S d^{α+2}/2 − T⁻)γ₁] / (S/2 − T⁺ d^{α+2})`,
/// `Ω* = Ĉ/(2(d₁^{α+2}+d₂^{α+2})) · (2γ₀ + γ₁(S/2+T⁻) + γ₂*(T⁺+S/2))`.
pub fn solve_equilibrium(params: &ConfigParams) -> Result<Equilibrium> {
    let s = LatticeSums::new(params)?;
    let a = params.alpha.value();
    let dp = s.d.powf(a + 2.0);
    let half_s = s.s_alpha / 2.0;
    let den = half_s - s.t_plus * dp;
    let den_scale = half_s.abs().max((s.t_plus * dp).abs());
    if den.abs() <= DEGENERACY_TOL * den_scale {
        return Err(Error::Degenerate(format!(
            "Jacobian determinant vanishes: S/2 - T+ d^(alpha+2) = {den:e}"
        )));
    }
    let num = (dp - 1.0) * params.gamma0 + (half_s * dp - s.t_minus) * params.gamma1;
    let num_scale = ((dp - 1.0) * params.gamma0)
        .abs()
        .max(((half_s * dp - s.t_minus) * params.gamma1).abs());
    let gamma2 = num / den;
    let omega = s.c_hat / (2.0 * (params.d1.powf(a + 2.0) + params.d2.powf(a + 2.0)))
        * (2.0 * params.gamma0
            + params.gamma1 * (half_s + s.t_minus)
            + gamma2 * (s.t_plus + half_s));
    let lambda = Lambda { omega, gamma2 };
    Ok(Equilibrium {
        omega_star: omega,
        gamma2_star: gamma2,
        s_alpha: s.s_alpha,
        t_plus: s.t_plus,
        t_minus: s.t_minus,
        det_jacobian: determinant(&s, params),
        nondeg_lhs: num,
        residuals: residual_with(&s, lambda, params),
        gamma2_vanishes: num.abs() <= DEGENERACY_TOL * num_scale,
    })
}

fn determinant(s: &LatticeSums, p: &ConfigParams) -> f64 {
    let a = p.alpha.value();
    -(s.c_hat * p.d1 / (2.0 * p.d2.powf(a + 1.0)))
        * (s.s_alpha / 2.0 - s.d.powf(a + 2.0) * s.t_plus)
}

/// Non-degeneracy quantities with their tolerance verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    pub nondeg_lhs: f64,
    pub nondeg_nonzero: bool,
    pub det: f64,
    pub det_nonzero: bool,
}

pub fn nondegeneracy_report(params: &ConfigParams, eq: &Equilibrium) -> NondegeneracyReport {
    let a = params.alpha.value();
    let d = params.ratio();
    let dp = d.powf(a + 2.0);
    let half_s = eq.s_alpha / 2.0;
    let t0 = (dp - 1.0) * params.gamma0;
    let t1 = (half_s * dp - eq.t_minus) * params.gamma1;
    let lhs = t0 + t1;
    let c_hat = kernel_constants(a).map(|c| c.1).unwrap_or(f64::NAN);
    let pref = c_hat * params.d1 / (2.0 * params.d2.powf(a + 1.0));
    let det = -pref * (half_s - dp * eq.t_plus);
    let det_scale = pref * half_s.abs().max((dp * eq.t_plus).abs());
    NondegeneracyReport {
        nondeg_lhs: lhs,
        nondeg_nonzero: lhs.abs() > DEGENERACY_TOL * t0.abs().max(t1.abs()),
        det,
        det_nonzero: det.abs() > DEGENERACY_TOL * det_scale,
    }
}

/// Velocity induced at `point` by every vortex of `config`.
pub fn induced_velocity(point: Vec2, config: &Configuration, alpha: f64) -> Result<Vec2> {
    let c_hat = kernel_constants(alpha)?.1;
    let mut u = [0.0; 2];
    for (z, g) in config.positions.iter().zip(&config.strengths) {
        let r = [point[0] - z[0], point[1] - z[1]];
        let r2 = r[0] * r[0] + r[1] * r[1];
        if r2.sqrt() <= 1e-10 {
            return Err(Error::Geometry(format!(
                "velocity requested at a vortex location {z:?}"
            )));
        }
        let f = c_hat * g / 2.0 * r2.powf(-(alpha + 2.0) / 2.0);
        u[0] -= f * r[1];
        u[1] += f * r[0];
    }
    Ok(u)
}

fn vortex_rhs(
    z: &[Vec2],
    g: &[f64],
    c_hat: f64,
    alpha: f64,
    min_sep: f64,
    out: &mut [Vec2],
) -> Result<()> {
    let e = -(alpha + 2.0) / 2.0;
    for (i, o) in out.iter_mut().enumerate() {
        let mut u = [0.0; 2];
        for (j, (zj, gj)) in z.iter().zip(g).enumerate() {
            if i == j {
                continue;
            }
            let r = [z[i][0] - zj[0], z[i][1] - zj[1]];
            let r2 = r[0] * r[0] + r[1] * r[1];
            if r2 < min_sep * min_sep {
                return Err(Error::Geometry(format!(
                    "vortex collision: vortices {i} and {j} closer than {min_sep:e}"
                )));
            }
            let f = c_hat * gj / 2.0 * r2.powf(e);
            u[0] -= f * r[1];
            u[1] += f * r[0];
        }
        *o = u;
    }
    Ok(())
}

/// Integrate the point-vortex ODE with classical RK4 and return
/// `max_t max_i |z_i(t) − Q_{Ω* t} z_i(0)|` sampled at every step.
///
/// `dt` is adjusted down so that an integer number of steps lands on
/// `t_final`.
pub fn rigid_rotation_check(
    config: &Configuration,
    eq: &Equilibrium,
    t_final: f64,
    dt: f64,
) -> Result<f64> {
    if t_final == 0.0 {
        return Ok(0.0);
    }
    if !(dt > 0.0) || !(t_final >= 10.0 * dt) {
        return Err(Error::Domain(format!(
            "need dt > 0 and t_final >= 10 dt, got dt = {dt}, t_final = {t_final}"
        )));
    }
    let c_hat = kernel_constants(config.alpha)?.1;
    let steps = (t_final / dt).ceil() as usize;
    let h = t_final / steps as f64;
    let n = config.positions.len();
    let min_sep = 1e-6 * config.d1;
    let z0 = config.positions.clone();
    let g = &config.strengths;
    let mut z = z0.clone();
    let mut k = vec![vec![[0.0; 2]; n]; 4];
    let mut tmp = vec![[0.0; 2]; n];
    let mut worst: f64 = 0.0;
    for step in 1..=steps {
        vortex_rhs(&z, g, c_hat, config.alpha, min_sep, &mut k[0])?;
        for stage in 1..4 {
            let w = if stage == 3 { h } else { h / 2.0 };
            for i in 0..n {
                tmp[i] = [
                    z[i][0] + w * k[stage - 1][i][0],
                    z[i][1] + w * k[stage - 1][i][1],
                ];
            }
            vortex_rhs(&tmp, g, c_hat, config.alpha, min_sep, &mut k[stage])?;
        }
        for i in 0..n {
            for c in 0..2 {
                z[i][c] +=
                    h / 6.0 * (k[0][i][c] + 2.0 * k[1][i][c] + 2.0 * k[2][i][c] + k[3][i][c]);
            }
        }
        let t = step as f64 * h;
        for i in 0..n {
            let target = rotate(z0[i], eq.omega_star * t);
            worst =
                worst.max(((z[i][0] - target[0]).powi(2) + (z[i][1] - target[1]).powi(2)).sqrt());
        }
    }
    Ok(worst)
}
