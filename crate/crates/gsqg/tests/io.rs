use gsqg::contour::VState;
use gsqg::dynamics::{Curve, CurveEnsemble};
use gsqg::equilibria::{solve_equilibrium, ConfigParams};
use gsqg::io::*;
use gsqg::specfun::Alpha;
use gsqg::Error;
use proptest::prelude::*;

fn params() -> ConfigParams {
    ConfigParams {
        alpha: Alpha::new(1.5).unwrap(),
        m: 3,
        vartheta: 1,
        b: [0.4, 0.5, 0.6],
        d1: 1.0,
        d2: 1.3,
        gamma0: 1.0,
        gamma1: 1.0,
    }
}

fn state() -> VState {
    let p = params();
    let eq = solve_equilibrium(&p).unwrap();
    let mut s = VState::circular(0.1, &p, 6, eq.lambda());
    s.shapes[0].set(3, 1e-3 / 3.0);
    s.shapes[1].set(2, -0.1);
    s.shapes[2].set(5, std::f64::consts::PI);
    s
}

#[test]
fn reals_carry_seventeen_digits() {
    assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
    assert_eq!(fmt17(-2.0), "-2.0000000000000000e0");
    for x in [0.1, 1.0 / 3.0, -1e-300, 6.02e23] {
        assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
    }
}

#[test]
fn json_sorts_keys_and_keeps_integers() {
    let v = serde_json::json!({"zeta": 1, "alpha": [0.5, -3], "mid": {"b": null, "a": true}});
    let s = to_json(&v).unwrap();
    assert!(s.find("\"alpha\"").unwrap() < s.find("\"mid\"").unwrap());
    assert!(s.find("\"mid\"").unwrap() < s.find("\"zeta\"").unwrap());
    assert!(s.contains("5.0000000000000000e-1") && s.contains("-3,") || s.contains("-3\n"));
    assert!(s.contains("\"zeta\": 1\n"));
    assert!(s.ends_with("}\n"));
    assert_eq!(to_json(&f64::NAN).unwrap(), "null\n");
}

#[test]
fn vstate_round_trips_exactly() {
    let p = params();
    let s = state();
    let text = vstate_to_json(&s, &p).unwrap();
    let back = vstate_from_json(&text).unwrap();
    assert_eq!(back.state, s);
    assert_eq!(back.b, p.b);
}

#[test]
fn malformed_documents_are_rejected() {
    let good: serde_json::Value =
        serde_json::from_str(&vstate_to_json(&state(), &params()).unwrap()).unwrap();
    let edit = |f: &dyn Fn(&mut serde_json::Value)| {
        let mut v = good.clone();
        f(&mut v);
        vstate_from_json(&v.to_string())
    };
    assert!(matches!(vstate_from_json("{"), Err(Error::Json(_))));
    assert!(edit(&|v| v["extra"] = 1.into()).is_err());
    assert!(edit(&|v| {
        v["patches"].as_array_mut().unwrap().pop();
    })
    .is_err());
    assert!(edit(&|v| v["patches"][1]["j"] = 2.into()).is_err());
    assert!(edit(&|v| v["patches"][0]["fold"] = 1.into()).is_err());
    assert!(edit(&|v| v["patches"][2]["fold"] = 3.into()).is_err());
    assert!(edit(&|v| v["patches"][1]["b"] = (-0.5).into()).is_err());
    assert!(edit(&|v| {
        v["patches"][2]["coeffs"].as_array_mut().unwrap().pop();
    })
    .is_err());
    // mode 2 is forbidden on the 3-fold central patch
    assert!(matches!(
        edit(&|v| v["patches"][0]["coeffs"][0] = 0.1.into()),
        Err(Error::ShapeValidity(_))
    ));
    assert!(edit(&|v| v["lambda"]["omega"] = serde_json::Value::Null).is_err());
    assert!(edit(&|v| {
        for j in 0..3 {
            v["patches"][j]["coeffs"] = serde_json::json!([]);
        }
    })
    .is_err());
}

#[test]
fn boundary_csv_lists_every_replica() {
    let p = params();
    let csv = boundary_csv(&state(), &p, 8).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("patch,replica,x,px,py"));
    assert_eq!(lines.count(), 8 * (1 + 3 + 3));
    let first: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&first[..3], ["0", "0", "0.0000000000000000e0"]);
}

#[test]
fn trajectory_csv_lists_nodes() {
    let e = CurveEnsemble {
        curves: vec![Curve::circle(0, 0, [0.0, 0.0], 1.0, 1.0, 8)],
    };
    let csv = trajectory_csv(&[(0.0, &e), (0.5, &e)]);
    assert!(csv.starts_with("t,patch,replica,node,px,py\n"));
    assert_eq!(csv.lines().count(), 1 + 16);
    assert!(csv
        .lines()
        .last()
        .unwrap()
        .starts_with("5.0000000000000000e-1,0,0,7,"));
}

#[test]
fn epsilon_labels() {
    assert_eq!(eps_label(0.05), "0.05");
    assert_eq!(eps_label(0.4), "0.4");
}

proptest! {
    #[test]
    fn round_trip_any_coefficients(a in proptest::collection::vec(-1.0f64..1.0, 3), e in -0.3f64..0.3) {
        let p = params();
        let mut s = state();
        s.epsilon = e;
        s.shapes[0].set(6, a[0]);
        s.shapes[1].set(4, a[1]);
        s.shapes[2].set(6, a[2]);
        let back = vstate_from_json(&vstate_to_json(&s, &p).unwrap()).unwrap();
        prop_assert_eq!(back.state, s);
    }

    #[test]
    fn decoder_never_panics(text in "\\PC{0,120}") {
        let _ = vstate_from_json(&text);
    }
}
