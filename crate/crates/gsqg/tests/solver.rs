use gsqg::contour::{evaluate_functional, linearized_diag, VState};
use gsqg::equilibria::{solve_equilibrium, ConfigParams};
use gsqg::solver::*;
use gsqg::specfun::Alpha;
use gsqg::Error;
use proptest::prelude::*;

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

fn small() -> SolveOptions {
    SolveOptions {
        n_modes: 8,
        n_quad: 64,
        ..SolveOptions::default()
    }
}

#[test]
fn ladder_is_geometric() {
    assert_eq!(geometric_ladder(0.4, 4), vec![0.05, 0.1, 0.2, 0.4]);
    assert_eq!(geometric_ladder(1.0, 1), vec![1.0]);
    assert!(geometric_ladder(1.0, 0).is_empty());
}

#[test]
fn options_are_validated() {
    let mut o = small();
    o.n_quad = 30;
    assert!(matches!(o.validate(), Err(Error::Configuration(_))));
    o.n_quad = 65;
    assert!(o.validate().is_err());
    let mut o = small();
    o.tol = 0.0;
    assert!(o.validate().is_err());
    let mut o = small();
    o.tol = 1e-17;
    let err = solve_vstate(0.01, &params(1.5, 2), &o, None).unwrap_err();
    assert!(
        matches!(err, Error::Configuration(ref m) if m.contains("tau_q")),
        "{err}"
    );
}

#[test]
fn layout_orders_unknowns() {
    let l = Layout::new(&params(1.5, 3), 6);
    assert_eq!(l.shape_modes[..2], [(0, 3), (0, 6)]);
    assert_eq!(l.shape_modes.len(), 2 + 5 + 5);
    assert_eq!(l.len(), 14);
}

#[test]
fn analytic_jacobian_matches_finite_differences() {
    let p = params(1.5, 2);
    let eq = solve_equilibrium(&p).unwrap();
    let state = VState::circular(0.0, &p, 8, eq.lambda());
    let report = newton_jacobian(&state, &p, &small()).unwrap();
    assert!(report.analytic);
    let layout = Layout::new(&p, 8);
    let h = 1e-6;
    let base = layout.pack(&state);
    for col in 0..layout.len() {
        let mut up = base.clone();
        up[col] += h;
        let mut dn = base.clone();
        dn[col] -= h;
        let rp =
            layout.residual(&evaluate_functional(&layout.unpack(&up, 0.0, &p), &p, 64).unwrap());
        let rm =
            layout.residual(&evaluate_functional(&layout.unpack(&dn, 0.0, &p), &p, 64).unwrap());
        for row in 0..layout.len() {
            let fd = (rp[row] - rm[row]) / (2.0 * h);
            assert!(
                (fd - report.matrix[(row, col)]).abs() < 1e-6,
                "({row},{col}): {fd} vs {}",
                report.matrix[(row, col)]
            );
        }
    }
    // mode 2 of patch 1 sits right after the central patch's modes 2, 4, 6, 8
    let idx = layout
        .shape_modes
        .iter()
        .position(|&m| m == (1, 2))
        .unwrap();
    let diag = linearized_diag(p.alpha, p.gamma1, 2).unwrap();
    assert!((report.matrix[(idx, idx)] + diag).abs() < 1e-12);
    assert!(report.condition.is_finite() && report.condition >= 1.0);
}

#[test]
fn zero_epsilon_needs_no_iterations() {
    let p = params(1.0, 2);
    let sol = solve_vstate(0.0, &p, &small(), None).unwrap();
    assert_eq!(sol.iterations, 0);
    assert!(sol.residual <= 1e-9);
    let eq = solve_equilibrium(&p).unwrap();
    assert_eq!(sol.state.lambda, eq.lambda());
}

#[test]
fn newton_converges_from_circles() {
    for a in [1.0, 1.5] {
        let p = params(a, 2);
        let eps = 0.02 / 0.6;
        let sol = solve_vstate(eps, &p, &small(), None).unwrap();
        assert!(
            sol.iterations <= 8,
            "alpha {a}: {} iterations",
            sol.iterations
        );
        assert!(sol.residual <= 1e-9);
        assert_eq!(sol.history.len(), sol.iterations + 1);
        let check = evaluate_functional(&sol.state, &p, 64).unwrap();
        assert!(check.max_abs() <= 1e-9);
        assert!(sol.state.shapes[1].get(2).abs() > 0.0);
    }
}

#[test]
fn negative_epsilon_mirrors_leading_modes() {
    let p = params(1.5, 3);
    let eps = 0.02;
    let plus = solve_vstate(eps, &p, &small(), None).unwrap().state;
    let minus = solve_vstate(-eps, &p, &small(), None).unwrap().state;
    for j in 1..=2 {
        let (a, b) = (plus.shapes[j].get(2), minus.shapes[j].get(2));
        assert!((a + b).abs() < 0.1 * a.abs(), "patch {j}: {a} vs {b}");
    }
}

#[test]
fn iteration_limit_reports_history() {
    let p = params(1.5, 2);
    let o = SolveOptions {
        max_iter: 1,
        ..small()
    };
    match solve_vstate(0.1, &p, &o, None) {
        Err(Error::NonConvergence {
            iterations,
            history,
        }) => {
            assert_eq!(iterations, 1);
            assert_eq!(history.len(), 2);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn initial_guess_must_match_resolution() {
    let p = params(1.5, 2);
    let eq = solve_equilibrium(&p).unwrap();
    let guess = VState::circular(0.0, &p, 4, eq.lambda());
    assert!(matches!(
        solve_vstate(0.01, &p, &small(), Some(&guess)),
        Err(Error::Configuration(_))
    ));
}

#[test]
fn frozen_jacobian_is_at_most_twice_as_slow() {
    let p = params(1.5, 3);
    let targets = geometric_ladder(0.1, 4);
    let full = continuation(&targets[..2], &p, &small()).unwrap();
    let frozen = continuation(
        &targets[..2],
        &p,
        &SolveOptions {
            jacobian: JacobianStrategy::Frozen,
            ..small()
        },
    )
    .unwrap();
    assert!(full.failure.is_none() && frozen.failure.is_none());
    for (f, q) in full.states.iter().zip(&frozen.states) {
        assert!(
            q.iterations <= 2 * f.iterations.max(1),
            "{} vs {}",
            q.iterations,
            f.iterations
        );
    }
}

#[test]
fn continuation_approaches_point_vortex_limit() {
    let p = params(1.5, 3);
    let eq = solve_equilibrium(&p).unwrap();
    let run = continuation(&geometric_ladder(0.2, 6), &p, &small()).unwrap();
    assert!(run.failure.is_none(), "{:?}", run.failure);
    assert_eq!(run.states.len(), 6);
    let drift: Vec<f64> = run
        .states
        .iter()
        .map(|s| {
            (s.state.lambda.omega - eq.omega_star)
                .abs()
                .max((s.state.lambda.gamma2 - eq.gamma2_star).abs())
        })
        .collect();
    assert!(drift.windows(2).all(|w| w[0] < w[1]), "{drift:?}");
    assert!(run.states.iter().all(|s| s.residual <= 1e-9));
}

#[test]
fn asymptotics_need_three_states() {
    let p = params(1.5, 3);
    let run = continuation(&[0.05, 0.1], &p, &small()).unwrap();
    let family: Vec<VState> = run.states.into_iter().map(|s| s.state).collect();
    assert!(matches!(
        asymptotic_report(&family, &p),
        Err(Error::InsufficientData(_))
    ));
}

#[test]
fn asymptotic_report_on_small_ladder() {
    let p = params(1.5, 3);
    let run = continuation(&geometric_ladder(0.2, 4), &p, &small()).unwrap();
    let family: Vec<VState> = run.states.into_iter().map(|s| s.state).collect();
    let r = asymptotic_report(&family, &p).unwrap();
    assert!(
        r.lambda_superlinear && r.ring_linear && r.central_subdominant,
        "{r:?}"
    );
    assert_eq!(r.leading_mode, [2, 2]);
    // the ε-tangent is what the measured slopes converge to
    for j in 0..2 {
        let rel = (r.linearized_slope[j] - r.measured_slope[j]).abs() / r.linearized_slope[j].abs();
        assert!(
            rel < 0.3,
            "ring {}: {} vs {}",
            j + 1,
            r.linearized_slope[j],
            r.measured_slope[j]
        );
    }
}

#[test]
fn convexity_of_trivial_and_solved_states() {
    let p = params(1.5, 3);
    let eq = solve_equilibrium(&p).unwrap();
    let rows = convexity_sweep(&[VState::circular(0.1, &p, 8, eq.lambda())], &p, 64).unwrap();
    assert_eq!(rows[0].min_kappa, [1.0; 3]);
    let run = continuation(&geometric_ladder(0.2, 3), &p, &small()).unwrap();
    let family: Vec<VState> = run.states.into_iter().map(|s| s.state).collect();
    let rows = convexity_sweep(&family, &p, 64).unwrap();
    assert!(rows.iter().all(|r| r.convex()), "{rows:?}");
}

#[test]
fn first_order_tangent_fixes_lambda_drift() {
    // λ(ε) = λ* + o(ε): the ε-derivative of λ vanishes at ε = 0.
    let p = params(1.5, 3);
    let t = first_order_tangent(&p, 8, 64).unwrap();
    assert!(
        t.lambda.omega.abs() < 1e-6 && t.lambda.gamma2.abs() < 1e-6,
        "{:?}",
        t.lambda
    );
    assert!(t.shapes[1].get(2).abs() > 1e-3);
}

proptest! {
    #[test]
    fn layout_round_trip(xs in proptest::collection::vec(-1.0f64..1.0, 20)) {
        let p = params(1.5, 2);
        let l = Layout::new(&p, 8);
        prop_assert_eq!(l.len(), 20);
        let s = l.unpack(&xs, 0.1, &p);
        prop_assert!(s.validate(&p).is_ok());
        prop_assert_eq!(l.pack(&s), xs);
    }
}
