use std::f64::consts::PI;

use gsqg::contour::*;
use gsqg::equilibria::{point_vortex_residual, solve_equilibrium, ConfigParams, Lambda};
use gsqg::specfun::{polygon_sum, Alpha};
use gsqg::Error;
use proptest::prelude::*;

const N: usize = 8;
const NQ: usize = 64;

fn params(alpha: f64, m: usize) -> ConfigParams {
    ConfigParams {
        alpha: Alpha::new(alpha).unwrap(),
        m,
        vartheta: 1,
        b: [0.4, 0.5, 0.6],
        d1: 1.0,
        d2: 1.3,
        gamma0: 1.0,
        gamma1: 1.0,
    }
}

fn trivial(p: &ConfigParams) -> (VState, f64) {
    let eq = solve_equilibrium(p).unwrap();
    let (_, tau) = quadrature_tolerance(p, eq.lambda(), N, NQ).unwrap();
    (VState::circular(0.0, p, N, eq.lambda()), tau)
}

#[test]
fn patch_shape_modes() {
    let mut s = PatchShape::zero(0, 3, 9);
    assert_eq!(s.n_max(), 9);
    assert_eq!(
        PatchShape::allowed_modes(3, 9).collect::<Vec<_>>(),
        vec![3, 6, 9]
    );
    assert_eq!(
        PatchShape::allowed_modes(1, 4).collect::<Vec<_>>(),
        vec![2, 3, 4]
    );
    s.set(6, 0.25);
    assert_eq!(s.get(6), 0.25);
    assert_eq!(s.get(1), 0.0);
    assert_eq!(s.get(40), 0.0);
    assert!(s.validate().is_ok());
    s.set(4, 1e-3);
    assert!(matches!(s.validate(), Err(Error::ShapeValidity(_))));
    s.set(4, 0.0);
    s.set(3, f64::NAN);
    assert!(s.validate().is_err());
}

#[test]
fn circles_at_replica_centres() {
    let p = params(1.5, 2);
    let eps = 0.1;
    let state = VState::circular(
        eps,
        &p,
        N,
        Lambda {
            omega: 0.0,
            gamma2: -1.0,
        },
    );
    for (j, k, centre) in [
        (0, 0, [0.0, 0.0]),
        (1, 0, [1.0, 0.0]),
        (2, 0, [0.0, 1.3]),
        (2, 1, [0.0, -1.3]),
    ] {
        let pts = sample_boundary(&state, &p, j, k, 16).unwrap();
        assert_eq!(pts.len(), 16);
        for q in pts {
            let r = ((q[0] - centre[0]).powi(2) + (q[1] - centre[1]).powi(2)).sqrt();
            assert!((r - eps * p.b[j]).abs() < 1e-14, "patch {j}.{k}: r = {r}");
        }
    }
    assert!(sample_boundary(&state, &p, 1, 2, 16).is_err());
    assert!(sample_boundary(&state, &p, 0, 0, 4).is_err());
}

#[test]
fn trivial_state_is_a_zero() {
    for a in [1.0, 1.5] {
        let p = params(a, 2);
        let (state, tau) = trivial(&p);
        assert!(tau <= 1e-8, "tau = {tau}");
        let r = evaluate_functional(&state, &p, NQ).unwrap();
        assert!(r.max_abs() <= tau, "alpha {a}: {} > {tau}", r.max_abs());
    }
}

#[test]
fn point_vortex_limit_only_first_sine_mode() {
    let p = params(1.25, 3);
    let lam = Lambda {
        omega: 0.3,
        gamma2: -0.7,
    };
    let state = VState::circular(0.0, &p, N, lam);
    let r = evaluate_functional(&state, &p, NQ).unwrap();
    let pv = point_vortex_residual(lam, &p).unwrap();
    assert!(
        (r.a(1, 1) - pv[0]).abs() < 1e-12,
        "{} vs {}",
        r.a(1, 1),
        pv[0]
    );
    assert!(
        (r.a(2, 1) - pv[1]).abs() < 1e-12,
        "{} vs {}",
        r.a(2, 1),
        pv[1]
    );
    for j in 0..3 {
        for n in 1..=N {
            if (j == 1 || j == 2) && n == 1 {
                continue;
            }
            assert!(r.a(j, n).abs() < 1e-12, "A_{n}^{j} = {}", r.a(j, n));
        }
    }
}

#[test]
fn linearized_diag_values() {
    let one = Alpha::new(1.0).unwrap();
    // 2·σ₂ with σ₂ = 8/(3π) − 2/π; the unshifted odd-harmonic value would be
    // 2·8/(3π) ≈ 1.6976527.
    let v = linearized_diag(one, 1.0, 2).unwrap();
    assert!((v - 4.0 / (3.0 * PI)).abs() < 1e-15, "{v}");
    assert!((2.0 * gsqg::specfun::odd_harmonic_sum(2) - 1.697_652_726_313_550_6).abs() < 1e-15);
    assert_eq!(
        linearized_diag(Alpha::new(1.5).unwrap(), 0.0, 5).unwrap(),
        0.0
    );
    assert!(linearized_diag(one, 1.0, 1).is_err());
}

#[test]
fn shape_block_matches_finite_differences() {
    let h = 1e-5;
    for a in [1.0, 1.5] {
        let p = params(a, 2);
        let (state, tau) = trivial(&p);
        let f = Functional::new(&p, NQ, SelfQuadrature::Spectral).unwrap();
        let gammas = [p.gamma0, p.gamma1, state.lambda.gamma2];
        for j in 0..3 {
            for n in [2, 4, 6] {
                let mut plus = state.clone();
                plus.shapes[j].set(n, h);
                let mut minus = state.clone();
                minus.shapes[j].set(n, -h);
                let (rp, rm) = (f.evaluate(&plus).unwrap(), f.evaluate(&minus).unwrap());
                let exact = linearized_diag(p.alpha, gammas[j], n).unwrap();
                let fd = (rp.a(j, n) - rm.a(j, n)) / (2.0 * h);
                assert!(
                    (fd + exact).abs() <= 1e-6f64.max(10.0 * tau),
                    "alpha {a} patch {j} n {n}: {fd} vs -{exact}"
                );
                for l in 0..3 {
                    for k in 1..=N {
                        if l == j && k == n {
                            continue;
                        }
                        let off = (rp.a(l, k) - rm.a(l, k)) / (2.0 * h);
                        assert!(
                            off.abs() <= 1e-6,
                            "alpha {a}: dA_{k}^{l}/da_{n}^{j} = {off}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn lambda_block() {
    for a in [1.0, 1.5] {
        let p = params(a, 3);
        let (state, _) = trivial(&p);
        let j = jacobian_lambda(&p).unwrap();
        assert_eq!([j[0][0], j[1][0]], [p.d1, p.d2]);
        let eq = solve_equilibrium(&p).unwrap();
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        assert!((det - eq.det_jacobian).abs() <= 1e-12 * det.abs());

        let h = 1e-6;
        let f = Functional::new(&p, NQ, SelfQuadrature::Spectral).unwrap();
        let shifted = |dw: f64, dg: f64| {
            let mut s = state.clone();
            s.lambda.omega += dw;
            s.lambda.gamma2 += dg;
            let r = f.evaluate(&s).unwrap();
            [r.a(1, 1), r.a(2, 1)]
        };
        for (col, (dw, dg)) in [(h, 0.0), (0.0, h)].into_iter().enumerate() {
            let (up, dn) = (shifted(dw, dg), shifted(-dw, -dg));
            for row in 0..2 {
                let fd = (up[row] - dn[row]) / (2.0 * h);
                assert!(
                    (fd - j[row][col]).abs() < 1e-8,
                    "alpha {a} ({row},{col}): {fd} vs {}",
                    j[row][col]
                );
            }
        }
    }
}

#[test]
fn quadrature_size_is_checked() {
    let p = params(1.5, 2);
    let (state, _) = trivial(&p);
    let f = Functional::new(&p, 16, SelfQuadrature::Spectral).unwrap();
    assert!(matches!(f.evaluate(&state), Err(Error::Domain(_))));
    assert!(self_weights(1.5, 7, SelfQuadrature::Spectral).is_err());
}

#[test]
fn self_weights_integrate_trig_polynomials() {
    // (1/2π)∫ (1 − cos(k(y − x))) |2 sin((x−y)/2)|^{−α} dy = −ĉ_k.
    for a in [1.0, 1.4, 1.8] {
        let n = 32;
        let w = self_weights(a, n, SelfQuadrature::Spectral).unwrap();
        let c = gsqg::specfun::kernel_mode_differences(a, n / 2).unwrap();
        for k in 1..n / 2 {
            let h = 2.0 * PI / n as f64;
            let s: f64 = (0..n)
                .map(|i| w[i] * (1.0 - (k as f64 * i as f64 * h).cos()))
                .sum();
            assert!(
                (s + c[k]).abs() < 1e-12 * c[k].abs().max(1.0),
                "alpha {a} k {k}: {s} vs {}",
                -c[k]
            );
        }
    }
}

#[test]
fn skip_node_converges_to_spectral() {
    let p = params(1.5, 2);
    let (mut state, _) = trivial(&p);
    state.epsilon = 0.05;
    state.shapes[1].set(2, 0.3);
    let reference = Functional::new(&p, 128, SelfQuadrature::Spectral)
        .unwrap()
        .evaluate(&state)
        .unwrap();
    let err = |nq| {
        let r = Functional::new(&p, nq, SelfQuadrature::SkipNode)
            .unwrap()
            .evaluate(&state)
            .unwrap();
        (1..=N)
            .map(|n| (r.a(1, n) - reference.a(1, n)).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(64), err(256));
    assert!(fine < coarse, "{coarse} -> {fine}");
}

#[test]
fn curvature_of_circle_and_small_perturbation() {
    let mut s = PatchShape::zero(1, 1, 4);
    let k = curvature(&s, 0.3, 0.5, 1.5, 32).unwrap();
    assert!(k.iter().all(|&v| v == 1.0));
    s.set(2, 1.0);
    // κ(0) = 1 + 3η + O(η²); the slope from two small ε isolates the 3.
    let (a, b) = (1.5, 0.5);
    let slope = |eps: f64| (curvature(&s, eps, b, a, 8).unwrap()[0] - 1.0) / eta(eps, b, a);
    let (s1, s2) = (slope(0.02), slope(0.01));
    let richardson = 2.0 * s2 - s1;
    assert!((richardson - 3.0).abs() < 1e-4, "slopes {s1}, {s2}");
}

#[test]
fn large_perturbation_reports_negative_curvature() {
    let mut s = PatchShape::zero(1, 1, 2);
    s.set(2, 0.9);
    // η = 1 at ε = 1, b = 1.
    let k = curvature(&s, 1.0, 1.0, 1.5, 64).unwrap();
    assert!(k.iter().any(|&v| v < 0.0));
}

#[test]
fn area_formula() {
    let s = PatchShape::zero(0, 2, 4);
    assert!((patch_area(&s, 1.0, 1.0, 1.5) - PI).abs() < 1e-15);
    let mut s = PatchShape::zero(1, 1, 4);
    s.set(2, 1.0);
    let (eps, b, a): (f64, f64, f64) = (0.3, 0.7, 1.25);
    let e: f64 = eps * f64::powf(eps, a) * f64::powf(b, 1.0 + a);
    let expect = PI * (eps * b).powi(2) * (1.0 + 0.5 * e * e);
    assert!((patch_area(&s, eps, b, a) - expect).abs() < 1e-15 * expect);
}

#[test]
fn negative_epsilon_flips_amplitude_sign() {
    assert_eq!(eta(-0.2, 0.5, 1.5), -eta(0.2, 0.5, 1.5));
}

#[test]
fn overlapping_patches_are_rejected() {
    let mut p = params(1.5, 2);
    p.b = [4.0, 4.0, 4.0];
    let eq = solve_equilibrium(&p).unwrap();
    let state = VState::circular(0.2, &p, N, eq.lambda());
    let err = evaluate_functional(&state, &p, NQ).unwrap_err();
    assert!(
        matches!(err, Error::Geometry(_) | Error::ShapeValidity(_)),
        "{err:?}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn even_shapes_give_odd_residuals(
        a in 1.0f64..1.9,
        eps in 0.005f64..0.06,
        c0 in -0.5f64..0.5,
        c1 in proptest::collection::vec(-0.5f64..0.5, N - 1),
        c2 in proptest::collection::vec(-0.5f64..0.5, N - 1),
    ) {
        let p = params(a, 2);
        let (mut state, tau) = trivial(&p);
        state.epsilon = eps;
        state.shapes[0].set(2, c0);
        state.shapes[0].set(4, -c0 / 2.0);
        state.shapes[1].coeffs = c1;
        state.shapes[2].coeffs = c2;
        let r = evaluate_functional(&state, &p, NQ).unwrap();
        prop_assert!(r.cosine_energy() <= tau, "cosine energy {}", r.cosine_energy());
    }

    #[test]
    fn central_residual_respects_fold(
        m in 2usize..5,
        eps in 0.005f64..0.05,
        c in proptest::collection::vec(-0.5f64..0.5, N - 1),
    ) {
        let p = params(1.5, m);
        let (mut state, tau) = trivial(&p);
        state.epsilon = eps;
        state.shapes[1].coeffs = c.clone();
        state.shapes[2].coeffs = c.iter().map(|v| -v).collect();
        for n in PatchShape::allowed_modes(m, N) {
            state.shapes[0].set(n, 0.1);
        }
        let r = evaluate_functional(&state, &p, NQ).unwrap();
        prop_assert!(r.central_off_fold(m) <= tau, "off-fold {}", r.central_off_fold(m));
    }

    #[test]
    fn area_homogeneous(eps in 0.01f64..1.0, b in 0.1f64..2.0, c in 1.5f64..3.0) {
        let s = PatchShape::zero(0, 2, 2);
        let a0 = patch_area(&s, eps, b, 1.5);
        let a1 = patch_area(&s, c * eps, b, 1.5);
        prop_assert!((a1 - c * c * a0).abs() <= 1e-14 * a1);
    }

    #[test]
    fn polygon_sum_enters_ring_self_term(m in 2usize..6) {
        // Sanity link between modules: the ring coupling entry of the
        // λ-block is −Ĉ S/(4 d₂^{1+α}).
        let p = params(1.5, m);
        let j = jacobian_lambda(&p).unwrap();
        let c_hat = gsqg::specfun::kernel_constants(1.5).unwrap().1;
        let s = polygon_sum(m, 1.5).unwrap();
        prop_assert!((j[1][1] + c_hat * s / (4.0 * 1.3f64.powf(2.5))).abs() < 1e-14);
    }
}
