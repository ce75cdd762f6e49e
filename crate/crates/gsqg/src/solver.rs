//! Fourier–Newton solution of `F(ε, f, λ) = 0`, continuation in `ε`, and
//! the asymptotic / convexity diagnostics of the solution curve.
//!
//! Unknowns are the permitted cosine modes of the three shapes followed by
//! `(Ω, γ₂)`; residuals are the matching sine modes followed by
//! `(A_1^1, A_1^2)`. Cosine mode `n` of patch `j` pairs with sine mode `n`
//! of the same patch, which makes the linearisation at the point-vortex
//! state diagonal in the shape block.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{
    curvature, jacobian_lambda, quadrature_tolerance, Functional, PatchShape, ResidualSpectrum,
    SelfQuadrature, VState,
};
use crate::equilibria::{solve_equilibrium, ConfigParams, Equilibrium, Lambda};
use crate::specfun::{sigma_spectrum, xi_alpha};
use crate::{Error, Result};

/// How the Newton matrix is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianStrategy {
    /// Central differences at every iterate (analytic at the trivial state).
    FiniteDifference,
    /// Chord method with the analytic linearisation at `(0, 0, λ*)`.
    Frozen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub n_modes: usize,
    pub n_quad: usize,
    /// Target for `max |A_n^j|`.
    pub tol: f64,
    pub max_iter: usize,
    pub continuation_steps: usize,
    pub jacobian: JacobianStrategy,
    pub quadrature: SelfQuadrature,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            n_modes: 64,
            n_quad: 512,
            tol: 1e-9,
            max_iter: 20,
            continuation_steps: 4,
            jacobian: JacobianStrategy::FiniteDifference,
            quadrature: SelfQuadrature::Spectral,
            fd_step: 1e-6,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n_modes < 2 {
            return Err(Error::Configuration(format!(
                "n_modes must be >= 2, got {}",
                self.n_modes
            )));
        }
        if self.n_quad < 4 * self.n_modes || self.n_quad % 2 != 0 {
            return Err(Error::Configuration(format!(
                "n_quad must be even and >= 4 n_modes, got {} for n_modes = {}",
                self.n_quad, self.n_modes
            )));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 || !(self.fd_step > 0.0) {
            return Err(Error::Configuration(
                "tol, max_iter and fd_step must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Index bookkeeping between `VState`s and flat Newton vectors.
#[derive(Debug, Clone)]
pub struct Layout {
    pub n_max: usize,
    /// `(patch, mode)` for every shape unknown, in vector order.
    pub shape_modes: Vec<(usize, usize)>,
}

impl Layout {
    pub fn new(params: &ConfigParams, n_max: usize) -> Self {
        let mut shape_modes = Vec::new();
        for j in 0..3 {
            let fold = if j == 0 { params.m } else { 1 };
            shape_modes.extend(PatchShape::allowed_modes(fold, n_max).map(|n| (j, n)));
        }
        Layout { n_max, shape_modes }
    }

    pub fn len(&self) -> usize {
        self.shape_modes.len() + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pack(&self, state: &VState) -> Vec<f64> {
        let mut x: Vec<f64> = self
            .shape_modes
            .iter()
            .map(|&(j, n)| state.shapes[j].get(n))
            .collect();
        x.push(state.lambda.omega);
        x.push(state.lambda.gamma2);
        x
    }

    pub fn unpack(&self, x: &[f64], epsilon: f64, params: &ConfigParams) -> VState {
        let k = self.shape_modes.len();
        let mut s = VState::circular(
            epsilon,
            params,
            self.n_max,
            Lambda {
                omega: x[k],
                gamma2: x[k + 1],
            },
        );
        for (&(j, n), v) in self.shape_modes.iter().zip(x) {
            s.shapes[j].set(n, *v);
        }
        s
    }

    pub fn residual(&self, r: &ResidualSpectrum) -> Vec<f64> {
        let mut v: Vec<f64> = self.shape_modes.iter().map(|&(j, n)| r.a(j, n)).collect();
        v.push(r.a(1, 1));
        v.push(r.a(2, 1));
        v
    }
}

/// A converged state with its Newton history.
#[derive(Debug, Clone)]
pub struct Solution {
    pub state: VState,
    pub iterations: usize,
    /// `max |A_n^j|` over all patches and modes `1..=n_max`.
    pub residual: f64,
    pub history: Vec<f64>,
}

struct Problem<'a> {
    params: &'a ConfigParams,
    functional: Functional,
    layout: Layout,
    epsilon: f64,
}

impl Problem<'_> {
    fn spectrum(&self, x: &[f64]) -> Result<ResidualSpectrum> {
        self.functional
            .evaluate(&self.layout.unpack(x, self.epsilon, self.params))
    }

    fn fd_jacobian(&self, x: &[f64], rel_step: f64) -> Result<DMatrix<f64>> {
        let n = self.layout.len();
        let cols: Vec<Result<Vec<f64>>> = (0..n)
            .into_par_iter()
            .map(|c| {
                let h = rel_step * x[c].abs().max(1.0);
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[c] += h;
                xm[c] -= h;
                let rp = self.layout.residual(&self.spectrum(&xp)?);
                let rm = self.layout.residual(&self.spectrum(&xm)?);
                Ok(rp
                    .iter()
                    .zip(&rm)
                    .map(|(a, b)| (a - b) / (2.0 * h))
                    .collect())
            })
            .collect();
        let mut j = DMatrix::zeros(n, n);
        for (c, col) in cols.into_iter().enumerate() {
            for (r, v) in col?.into_iter().enumerate() {
                j[(r, c)] = v;
            }
        }
        Ok(j)
    }
}

/// The linearisation at `(ε, f) = (0, 0)`: diagonal `−γ_j n σ_n` on the shape
/// block (with `γ₂` taken from `lambda`) and the 2×2 `λ`-block.
pub fn analytic_jacobian(
    params: &ConfigParams,
    layout: &Layout,
    lambda: Lambda,
) -> Result<DMatrix<f64>> {
    let n = layout.len();
    let sigma = sigma_spectrum(params.alpha, layout.n_max.max(2))?;
    let mut j = DMatrix::zeros(n, n);
    for (i, &(p, mode)) in layout.shape_modes.iter().enumerate() {
        j[(i, i)] = -params.strength(p, lambda.gamma2) * mode as f64 * sigma.sigma(mode);
    }
    let jl = jacobian_lambda(params)?;
    let k = layout.shape_modes.len();
    for r in 0..2 {
        for c in 0..2 {
            j[(k + r, k + c)] = jl[r][c];
        }
    }
    Ok(j)
}

/// Newton matrix at `state` with its 2-norm condition number.
#[derive(Debug, Clone)]
pub struct JacobianReport {
    pub matrix: DMatrix<f64>,
    pub condition: f64,
    pub analytic: bool,
}

fn is_trivial(state: &VState) -> bool {
    state.epsilon == 0.0
        && state
            .shapes
            .iter()
            .all(|s| s.coeffs.iter().all(|a| *a == 0.0))
}

pub fn newton_jacobian(
    state: &VState,
    params: &ConfigParams,
    opts: &SolveOptions,
) -> Result<JacobianReport> {
    opts.validate()?;
    let layout = Layout::new(params, state.n_max());
    let (matrix, analytic) = if is_trivial(state) {
        (analytic_jacobian(params, &layout, state.lambda)?, true)
    } else {
        let problem = Problem {
            params,
            functional: Functional::new(params, opts.n_quad, opts.quadrature)?,
            layout: layout.clone(),
            epsilon: state.epsilon,
        };
        (
            problem.fd_jacobian(&layout.pack(state), opts.fd_step)?,
            false,
        )
    };
    let condition = condition_number(&matrix)?;
    Ok(JacobianReport {
        matrix,
        condition,
        analytic,
    })
}

fn condition_number(m: &DMatrix<f64>) -> Result<f64> {
    let sv = m.clone().singular_values();
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), s| {
        (lo.min(*s), hi.max(*s))
    });
    if !(lo > hi * 1e-14) {
        return Err(Error::Degenerate(
            "Newton matrix singular to working precision: the λ-block determinant vanishes or a shape eigenvalue is zero"
                .into(),
        ));
    }
    Ok(hi / lo)
}

fn linear_solve(j: &DMatrix<f64>, r: &[f64]) -> Result<Vec<f64>> {
    let rhs = DVector::from_column_slice(r);
    let sol = j
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Degenerate("Newton matrix is singular".into()))?;
    Ok(sol.iter().copied().collect())
}

/// Solve `F(ε, f, λ) = 0` by Newton's method.
///
/// Without an initial guess the iteration starts from circular patches at
/// the point-vortex equilibrium `λ*`.
pub fn solve_vstate(
    epsilon: f64,
    params: &ConfigParams,
    opts: &SolveOptions,
    initial: Option<&VState>,
) -> Result<Solution> {
    opts.validate()?;
    let eq = solve_equilibrium(params)?;
    check_tolerance(params, &eq, opts)?;
    solve_with(epsilon, params, opts, initial, &eq)
}

/// `tol` may not undercut ten times the quadrature floor.
fn check_tolerance(params: &ConfigParams, eq: &Equilibrium, opts: &SolveOptions) -> Result<()> {
    let (_, tau_q) = quadrature_tolerance(params, eq.lambda(), opts.n_modes, opts.n_quad)?;
    if opts.tol < 10.0 * tau_q {
        return Err(Error::Configuration(format!(
            "tol = {:e} is below 10 tau_q = {:e}; the quadrature floor cannot be beaten",
            opts.tol,
            10.0 * tau_q
        )));
    }
    Ok(())
}

fn solve_with(
    epsilon: f64,
    params: &ConfigParams,
    opts: &SolveOptions,
    initial: Option<&VState>,
    eq: &Equilibrium,
) -> Result<Solution> {
    let layout = Layout::new(params, opts.n_modes);
    let start = match initial {
        Some(s) => {
            if s.n_max() != opts.n_modes {
                return Err(Error::Configuration(format!(
                    "initial guess carries {} modes, options ask for {}",
                    s.n_max(),
                    opts.n_modes
                )));
            }
            VState {
                epsilon,
                ..s.clone()
            }
        }
        None => VState::circular(epsilon, params, opts.n_modes, eq.lambda()),
    };
    let problem = Problem {
        params,
        functional: Functional::new(params, opts.n_quad, opts.quadrature)?,
        layout: layout.clone(),
        epsilon,
    };
    let frozen = match opts.jacobian {
        JacobianStrategy::Frozen => Some(analytic_jacobian(params, &layout, eq.lambda())?),
        JacobianStrategy::FiniteDifference => None,
    };
    let mut x = layout.pack(&start);
    let mut spec = problem.spectrum(&x)?;
    let mut norm = spec.max_abs();
    let mut history = vec![norm];
    let mut iterations = 0;
    while norm > opts.tol {
        if iterations == opts.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                history,
            });
        }
        iterations += 1;
        let jac = match &frozen {
            Some(j) => j.clone(),
            None if epsilon == 0.0 && is_trivial(&layout.unpack(&x, epsilon, params)) => {
                analytic_jacobian(
                    params,
                    &layout,
                    Lambda {
                        omega: x[x.len() - 2],
                        gamma2: x[x.len() - 1],
                    },
                )?
            }
            None => problem.fd_jacobian(&x, opts.fd_step)?,
        };
        let r = layout.residual(&spec);
        let step = linear_solve(&jac, &r)?;
        // backtrack on growth; a full step is always tried first
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a - t * d).collect();
            match problem.spectrum(&trial) {
                Ok(s) if s.max_abs() < norm || t < 1.0 / 32.0 => {
                    x = trial;
                    spec = s;
                    break;
                }
                Err(e) if t < 1.0 / 32.0 => return Err(e),
                _ => t /= 2.0,
            }
        }
        norm = spec.max_abs();
        history.push(norm);
        if !norm.is_finite() {
            return Err(Error::NonConvergence {
                iterations,
                history,
            });
        }
    }
    Ok(Solution {
        state: layout.unpack(&x, epsilon, params),
        iterations,
        residual: norm,
        history,
    })
}

/// `ε_k = ε_max 2^{k−K}`, `k = 1..=K`.
pub fn geometric_ladder(eps_max: f64, steps: usize) -> Vec<f64> {
    (1..=steps)
        .map(|k| eps_max * 2f64.powi(k as i32 - steps as i32))
        .collect()
}

/// Result of a continuation run: every converged state, and the first
/// failure if the ladder was not completed.
#[derive(Debug)]
pub struct Continuation {
    pub states: Vec<Solution>,
    pub failure: Option<(f64, Error)>,
}

/// Warm-started solves along increasing `ε` targets. Shapes are predicted by
/// linear scaling in `ε` from the previous state (the shape amplitudes grow
/// linearly to leading order).
pub fn continuation(
    eps_targets: &[f64],
    params: &ConfigParams,
    opts: &SolveOptions,
) -> Result<Continuation> {
    opts.validate()?;
    let eq = solve_equilibrium(params)?;
    check_tolerance(params, &eq, opts)?;
    let mut states: Vec<Solution> = Vec::new();
    for &eps in eps_targets {
        let guess = states.last().map(|prev| {
            let mut g = prev.state.clone();
            if prev.state.epsilon != 0.0 {
                let ratio = eps / prev.state.epsilon;
                for s in g.shapes.iter_mut() {
                    s.coeffs.iter_mut().for_each(|a| *a *= ratio);
                }
            }
            g
        });
        match solve_with(eps, params, opts, guess.as_ref(), &eq) {
            Ok(s) => states.push(s),
            Err(e) => {
                return Ok(Continuation {
                    states,
                    failure: Some((eps, e)),
                })
            }
        }
    }
    Ok(Continuation {
        states,
        failure: None,
    })
}

/// `(d/dε)(f, λ)` at `ε = 0` obtained from `−J₀⁻¹ ∂_ε F(0, 0, λ*)`, with the
/// `ε`-derivative taken by central differences (step `1e−4`).
pub fn first_order_tangent(params: &ConfigParams, n_max: usize, n_quad: usize) -> Result<VState> {
    let eq = solve_equilibrium(params)?;
    let layout = Layout::new(params, n_max);
    let functional = Functional::new(params, n_quad, SelfQuadrature::Spectral)?;
    let h = 1e-4;
    let zero = |e: f64| VState::circular(e, params, n_max, eq.lambda());
    let rp = layout.residual(&functional.evaluate(&zero(h))?);
    let rm = layout.residual(&functional.evaluate(&zero(-h))?);
    let d_eps: Vec<f64> = rp
        .iter()
        .zip(&rm)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect();
    let j0 = analytic_jacobian(params, &layout, eq.lambda())?;
    let t: Vec<f64> = linear_solve(&j0, &d_eps)?.into_iter().map(|v| -v).collect();
    // t holds d/dε of every unknown, including (Ω, γ₂)
    Ok(layout.unpack(&t, 1.0, params))
}

/// Least-squares fit `y = c + p x`; returns `(p, c, rms residual)`.
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let p = sxy / sxx;
    let c = my - p * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - c - p * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (p, c, rms)
}

/// A fitted power law `|quantity| ∝ ε^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub residual: f64,
}

fn power_fit(eps: &[f64], vals: &[f64]) -> Option<PowerFit> {
    if vals.iter().any(|v| !(v.abs() > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = eps.iter().map(|e| e.abs().ln()).collect();
    let ly: Vec<f64> = vals.iter().map(|v| v.abs().ln()).collect();
    let (p, _, r) = fit_line(&lx, &ly);
    Some(PowerFit {
        exponent: p,
        residual: r,
    })
}

/// Measured versus predicted small-`ε` behaviour of a solution family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    /// `H_j` with the denominator as printed, `d_ℓ² + 2 d_j d_ℓ cos θ − d_j²`.
    pub h1: f64,
    pub h2: f64,
    /// `H_j` with the squared inter-vortex distance `d_ℓ² − 2 d_j d_ℓ cos θ + d_j²`.
    pub h1_distance: f64,
    pub h2_distance: f64,
    pub xi: f64,
    /// `Ξ b_j H_j / (γ_j d_j^{α+2})` for rings 1, 2 (printed denominator).
    pub predicted_slope: [f64; 2],
    /// Same with the distance denominator.
    pub predicted_slope_distance: [f64; 2],
    /// `da_n/dε` at `ε = 0` of the leading ring mode from `−J₀⁻¹ ∂_ε F`.
    pub linearized_slope: [f64; 2],
    /// Least-squares `a_n/ε` of the leading ring mode over the family.
    pub measured_slope: [f64; 2],
    /// Mode number carrying the largest ring amplitude.
    pub leading_mode: [usize; 2],
    pub ring_amplitude_fit: [Option<PowerFit>; 2],
    pub central_amplitude_fit: Option<PowerFit>,
    pub lambda_drift_fit: Option<PowerFit>,
    /// `max|a^0| / max(max|a^1|, max|a^2|)` at the smallest `ε`.
    pub central_to_ring_ratio: f64,
    /// `λ`-drift exponent `>= 1.5`.
    pub lambda_superlinear: bool,
    /// Ring exponents within `1 ± 0.1`.
    pub ring_linear: bool,
    /// Central-to-ring ratio `<= 0.1`.
    pub central_subdominant: bool,
}

fn h_sums(params: &ConfigParams, gamma2: f64) -> ([f64; 2], [f64; 2]) {
    let a = params.alpha.value();
    let m = params.m as f64;
    let mut printed = [0.0; 2];
    let mut distance = [0.0; 2];
    for j in 1..=2usize {
        let dj = params.center_radius(j);
        let (mut hp, mut hd) = (params.gamma0, params.gamma0);
        for l in 1..=2usize {
            let dl = params.center_radius(l);
            let gl = params.strength(l, gamma2);
            let shift = (l == 2) as i32 as f64 - (j == 2) as i32 as f64;
            for k in (l == j) as usize..params.m {
                let th = 2.0 * k as f64 * PI / m - shift * params.vartheta as f64 * PI / m;
                let num = 2.0 * dj * dl * th.cos() - dj * dj - dl * dl * (2.0 * th).cos();
                hp += gl * num / (dl * dl + 2.0 * dj * dl * th.cos() - dj * dj).powf(a / 2.0 + 2.0);
                hd += gl * num / (dl * dl - 2.0 * dj * dl * th.cos() + dj * dj).powf(a / 2.0 + 2.0);
            }
        }
        printed[j - 1] = hp;
        distance[j - 1] = hd;
    }
    (printed, distance)
}

pub fn asymptotic_report(family: &[VState], params: &ConfigParams) -> Result<AsymptoticReport> {
    let mut fam: Vec<&VState> = family.iter().filter(|s| s.epsilon != 0.0).collect();
    fam.sort_by(|a, b| a.epsilon.abs().total_cmp(&b.epsilon.abs()));
    fam.dedup_by(|a, b| a.epsilon == b.epsilon);
    if fam.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 states at distinct nonzero epsilon, got {}",
            fam.len()
        )));
    }
    let eq = solve_equilibrium(params)?;
    let a = params.alpha.value();
    let xi = xi_alpha(a)?;
    let (hp, hd) = h_sums(params, eq.gamma2_star);
    let mut predicted_slope = [0.0; 2];
    let mut predicted_slope_distance = [0.0; 2];
    for j in 1..=2 {
        let pref = xi * params.b[j]
            / (params.strength(j, eq.gamma2_star) * params.center_radius(j).powf(a + 2.0));
        predicted_slope[j - 1] = pref * hp[j - 1];
        predicted_slope_distance[j - 1] = pref * hd[j - 1];
    }

    let eps: Vec<f64> = fam.iter().map(|s| s.epsilon).collect();
    let largest = fam[fam.len() - 1];
    let n_max = largest.n_max();
    let tangent = first_order_tangent(params, n_max, (8 * n_max).max(64))?;
    let mut leading_mode = [2usize; 2];
    let mut measured_slope = [0.0; 2];
    let mut linearized_slope = [0.0; 2];
    let mut ring_amplitude_fit = [None, None];
    for j in 1..=2 {
        let shape = &largest.shapes[j];
        let lead = (2..=n_max)
            .max_by(|&p, &q| shape.get(p).abs().total_cmp(&shape.get(q).abs()))
            .unwrap_or(2);
        leading_mode[j - 1] = lead;
        let amps: Vec<f64> = fam.iter().map(|s| s.shapes[j].get(lead)).collect();
        let num: f64 = eps.iter().zip(&amps).map(|(e, v)| e * v).sum();
        let den: f64 = eps.iter().map(|e| e * e).sum();
        measured_slope[j - 1] = num / den;
        linearized_slope[j - 1] = tangent.shapes[j].get(lead);
        ring_amplitude_fit[j - 1] = power_fit(&eps, &amps);
    }
    let max_amp = |s: &PatchShape| s.coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let central: Vec<f64> = fam.iter().map(|s| max_amp(&s.shapes[0])).collect();
    let central_amplitude_fit = power_fit(&eps, &central);
    let smallest = fam[0];
    let ring_max = max_amp(&smallest.shapes[1]).max(max_amp(&smallest.shapes[2]));
    let central_to_ring_ratio = max_amp(&smallest.shapes[0]) / ring_max;
    let drift: Vec<f64> = fam
        .iter()
        .map(|s| {
            (s.lambda.omega - eq.omega_star)
                .abs()
                .max((s.lambda.gamma2 - eq.gamma2_star).abs())
        })
        .collect();
    let lambda_drift_fit = power_fit(&eps, &drift);

    Ok(AsymptoticReport {
        h1: hp[0],
        h2: hp[1],
        h1_distance: hd[0],
        h2_distance: hd[1],
        xi,
        predicted_slope,
        predicted_slope_distance,
        linearized_slope,
        measured_slope,
        leading_mode,
        lambda_superlinear: lambda_drift_fit.as_ref().is_some_and(|f| f.exponent >= 1.5),
        ring_linear: ring_amplitude_fit
            .iter()
            .all(|f| f.as_ref().is_some_and(|f| (f.exponent - 1.0).abs() <= 0.1)),
        central_subdominant: central_to_ring_ratio <= 0.1,
        ring_amplitude_fit,
        central_amplitude_fit,
        lambda_drift_fit,
        central_to_ring_ratio,
    })
}

/// Minimum boundary curvature per patch for one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityRow {
    pub epsilon: f64,
    pub min_kappa: [f64; 3],
}

impl ConvexityRow {
    pub fn convex(&self) -> bool {
        self.min_kappa.iter().all(|k| *k > 0.0)
    }
}

/// `min_x κ_j(x)` for every state and patch, on `nodes` samples. Negative
/// values are reported, not rejected.
pub fn convexity_sweep(
    family: &[VState],
    params: &ConfigParams,
    nodes: usize,
) -> Result<Vec<ConvexityRow>> {
    let a = params.alpha.value();
    family
        .iter()
        .map(|s| {
            let mut min_kappa = [0.0; 3];
            for j in 0..3 {
                let k = curvature(&s.shapes[j], s.epsilon, params.b[j], a, nodes)?;
                min_kappa[j] = k.iter().copied().fold(f64::INFINITY, f64::min);
            }
            Ok(ConvexityRow {
                epsilon: s.epsilon,
                min_kappa,
            })
        })
        .collect()
}
