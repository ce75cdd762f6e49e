//! Special constants, spectra and lattice interaction sums.
//!
//! Everything here is a pure function of its arguments. Sums over lattice
//! indices are accumulated left to right in `k` so results are
//! bit-reproducible.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The gSQG exponent. Solver and dynamics paths require `1 <= alpha < 2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (1.0..2.0).contains(&value) {
            Ok(Alpha(value))
        } else {
            Err(Error::Domain(format!("alpha = {value} outside [1, 2)")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Alpha::new(v)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_P: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) by the Lanczos approximation (g = 7, nine terms), with the
/// reflection formula below 1/2.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("gamma of NaN".into()));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Domain(format!("gamma has a pole at x = {x}")));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma_unchecked(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_P[0];
        for (i, p) in LANCZOS_P.iter().enumerate().skip(1) {
            acc += p / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// Kernel constants `(C_α, Ĉ_α)`, defined for `0 < α < 2`.
///
/// `C_α = Γ(α/2) / (2^{1−α} Γ(1−α/2))` normalises the velocity kernel and
/// `Ĉ_α = α C_α` is the point-vortex speed constant: a vortex of strength γ
/// moves a test point at distance r with speed `Ĉ_α γ / (2 r^{1+α})`.
pub fn kernel_constants(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain(format!(
            "kernel constants need 0 < alpha < 2, got {alpha}"
        )));
    }
    let c = gamma_fn(alpha / 2.0)? / (2f64.powf(1.0 - alpha) * gamma_fn(1.0 - alpha / 2.0)?);
    Ok((c, alpha * c))
}

/// Closed form `Ĉ_α = 2^α Γ(1+α/2) / Γ(1−α/2)`, used to cross-check
/// [`kernel_constants`].
pub fn c_hat_closed_form(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain(format!(
            "kernel constants need 0 < alpha < 2, got {alpha}"
        )));
    }
    Ok(2f64.powf(alpha) * gamma_fn(1.0 + alpha / 2.0)? / gamma_fn(1.0 - alpha / 2.0)?)
}

/// Eigenvalues σ_1..σ_N of the linearised self-interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub alpha: f64,
    /// `values[n - 1] = σ_n`.
    pub values: Vec<f64>,
}

impl SpectrumTable {
    /// σ_n for `1 <= n <= n_max`.
    pub fn sigma(&self, n: usize) -> f64 {
        self.values[n - 1]
    }
}

/// The linearised self-interaction spectrum.
///
/// A cosine perturbation `cos(nx)` of a patch of strength γ produces the
/// normal-velocity response `γ n σ_n sin(nx)`.
///
/// * `1 < α < 2`: `σ_n = 2^{α−1} Γ(1−α)/Γ(1−α/2)² · (Γ(1+α/2)/Γ(2−α/2) − Γ(n+α/2)/Γ(n+1−α/2))`,
///   evaluated through the product form of the Gamma ratio so it stays
///   accurate for large `n` and close to α = 1.
/// * `α = 1`: `σ_n = (2/π) Σ_{i=2}^{n} 1/(2i−1)`. The odd-harmonic sum with
///   the `i = 1` term included ([`odd_harmonic_sum`]) is larger by exactly
///   `2/π`; finite differences of the boundary functional fix the version
///   used here, which also makes `σ_1 = 0` on both branches.
pub fn sigma_spectrum(alpha: Alpha, n_max: usize) -> Result<SpectrumTable> {
    if n_max < 2 {
        return Err(Error::Domain(format!("n_max must be >= 2, got {n_max}")));
    }
    let a = alpha.value();
    let mut values = Vec::with_capacity(n_max);
    if a == 1.0 {
        let mut acc = 0.0;
        values.push(0.0);
        for i in 2..=n_max {
            acc += 1.0 / (2 * i - 1) as f64;
            values.push(2.0 / PI * acc);
        }
    } else {
        // Γ(1−α)(g_1 − g_n) = Γ(2−α) g_1 expm1(S_n)/(α−1), with
        // g_n = Γ(n+α/2)/Γ(n+1−α/2) and S_n = Σ_{i=1}^{n−1} ln(1 + (α−1)/(i+1−α/2)).
        let g1 = gamma_fn(1.0 + a / 2.0)? / gamma_fn(2.0 - a / 2.0)?;
        let gamma_2ma = gamma_fn(2.0 - a)?;
        let pref = 2f64.powf(a - 1.0) * gamma_2ma / gamma_fn(1.0 - a / 2.0)?.powi(2) * g1;
        if !pref.is_finite() {
            return Err(Error::Numerical(format!(
                "spectrum prefactor not finite at alpha = {a}"
            )));
        }
        let d = a - 1.0;
        let mut s = 0.0;
        values.push(0.0);
        for n in 2..=n_max {
            let i = (n - 1) as f64;
            s += (d / (i + 1.0 - a / 2.0)).ln_1p();
            values.push(pref * s.exp_m1() / d);
        }
    }
    Ok(SpectrumTable { alpha: a, values })
}

/// `(2/π) Σ_{i=1}^{n} 1/(2i−1)`: the odd-harmonic partial sum that appears
/// in the α = 1 literature. Equals `σ_n(α=1) + 2/π`.
pub fn odd_harmonic_sum(n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 1..=n {
        acc += 1.0 / (2 * i - 1) as f64;
    }
    2.0 / PI * acc
}

/// Differences `ĉ_k = c_k − c_0`, `k = 0..=k_max`, of the Fourier
/// coefficients of the kernel `|2 sin(u/2)|^{−α}`:
/// `(1/2π) ∫ e^{iku} |2 sin(u/2)|^{−α} du = c_k` (finite-part sense for α ≥ 1).
///
/// Only the differences are finite uniformly in α ∈ (0, 2); they are exactly
/// what is needed to integrate functions vanishing at the singular point.
pub fn kernel_mode_differences(alpha: f64, k_max: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain(format!(
            "kernel needs 0 < alpha < 2, got {alpha}"
        )));
    }
    let h = alpha / 2.0;
    let mut out = vec![0.0; k_max + 1];
    if alpha == 1.0 {
        let mut acc = 0.0;
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            acc += 1.0 / ((k - 1) as f64 + 0.5);
            *slot = -acc / PI;
        }
        return Ok(out);
    }
    // c_k = Γ(1−α) sin(πα/2)/π · Γ(k+α/2)/Γ(k+1−α/2)
    let pref = (PI * h).sin() / PI * gamma_fn(2.0 - alpha)? * gamma_fn(h)? / gamma_fn(1.0 - h)?;
    let d = alpha - 1.0;
    let mut s = 0.0;
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        s += (d / ((k - 1) as f64 + 1.0 - h)).ln_1p();
        *slot = pref * s.exp_m1() / (1.0 - alpha);
    }
    Ok(out)
}

/// `S_α = Σ_{k=1}^{m−1} (2 sin(kπ/m))^{−α}`.
pub fn polygon_sum(m: usize, alpha: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain(format!("polygon sum needs m >= 2, got {m}")));
    }
    let mut acc = 0.0;
    for k in 1..m {
        acc += (2.0 * (k as f64 * PI / m as f64).sin()).powf(-alpha);
    }
    Ok(acc)
}

/// Which ring-to-ring sum: `Plus` is what ring 1 feels from ring 2
/// (`d^{+1}`, angles `(2k+ϑ)π/m`), `Minus` the converse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingSign {
    Plus,
    Minus,
}

/// Denominators below this are treated as coincident vortices.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// `T_α^± = Σ_{k=0}^{m−1} [1 − e cos θ_k] / [1 + e² − 2e cos θ_k]^{α/2+1}`
/// with `e = d^{±1}` and `θ_k = (2k ± ϑ)π/m`.
pub fn interaction_sum(d: f64, vartheta: u8, m: usize, alpha: f64, sign: RingSign) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain(format!(
            "interaction sum needs m >= 2, got {m}"
        )));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!(
            "ring ratio must be positive, got {d}"
        )));
    }
    let (e, s) = match sign {
        RingSign::Plus => (d, 1.0),
        RingSign::Minus => (1.0 / d, -1.0),
    };
    let mut acc = 0.0;
    for k in 0..m {
        let theta = (2.0 * k as f64 + s * vartheta as f64) * PI / m as f64;
        let c = theta.cos();
        let den = 1.0 + e * e - 2.0 * e * c;
        if den < COINCIDENCE_TOL {
            return Err(Error::Configuration(format!(
                "rings intersect: vortices coincide (d = {d}, vartheta = {vartheta}, k = {k})"
            )));
        }
        acc += (1.0 - e * c) / den.powf(alpha / 2.0 + 1.0);
    }
    Ok(acc)
}

/// `Ξ_α = (α+2) Γ(1−α/2) Γ(3−α/2) / (4 Γ(2−α))`.
pub fn xi_alpha(alpha: f64) -> Result<f64> {
    Ok(
        (alpha + 2.0) * gamma_fn(1.0 - alpha / 2.0)? * gamma_fn(3.0 - alpha / 2.0)?
            / (4.0 * gamma_fn(2.0 - alpha)?),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_small_integers() {
        let mut fact = 1.0;
        for n in 1..=10 {
            let g = gamma_fn(n as f64).unwrap();
            assert!((g - fact).abs() <= 1e-13 * fact, "Γ({n}) = {g}");
            fact *= n as f64;
        }
    }

    #[test]
    fn gamma_poles_rejected() {
        for x in [0.0, -1.0, -2.0, -7.0] {
            assert!(matches!(gamma_fn(x), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn mode_differences_alpha_one_are_odd_harmonics() {
        let c = kernel_mode_differences(1.0, 4).unwrap();
        assert_eq!(c[0], 0.0);
        assert!((c[1] + 2.0 / PI).abs() < 1e-15);
        assert!((c[2] + 2.0 / PI * (1.0 + 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn spectrum_sqg_shift() {
        let t = sigma_spectrum(Alpha::new(1.0).unwrap(), 8).unwrap();
        for n in 1..=8 {
            assert!((t.sigma(n) + 2.0 / PI - odd_harmonic_sum(n)).abs() < 1e-15);
        }
    }
}
