use std::f64::consts::PI;

use gsqg::specfun::*;
use gsqg::Error;
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

#[test]
fn gamma_half_integers() {
    assert!(close(gamma_fn(0.5).unwrap(), PI.sqrt(), 1e-14));
    assert!(close(gamma_fn(2.5).unwrap(), 1.329_340_388_179_137, 1e-14));
    assert!(close(gamma_fn(-0.5).unwrap(), -2.0 * PI.sqrt(), 1e-13));
}

#[test]
fn gamma_rejects_poles_and_nan() {
    assert!(matches!(gamma_fn(0.0), Err(Error::Domain(_))));
    assert!(matches!(gamma_fn(-3.0), Err(Error::Domain(_))));
    assert!(matches!(gamma_fn(f64::NAN), Err(Error::Domain(_))));
}

#[test]
fn kernel_constant_values() {
    let (c, ch) = kernel_constants(1.0).unwrap();
    assert!(close(c, 1.0, 1e-14) && close(ch, 1.0, 1e-14));
    let (c, ch) = kernel_constants(1.5).unwrap();
    assert!(close(c, 0.477_988_797_486_125, 1e-13));
    assert!(close(ch, 0.716_983_196_229_187_5, 1e-13));
    assert!(close(
        kernel_constants(1.25).unwrap().0,
        0.719_673_464_305_749_5,
        1e-13
    ));
    assert!(close(
        kernel_constants(1.75).unwrap().0,
        0.243_241_800_912_263_2,
        1e-13
    ));
}

#[test]
fn kernel_constants_domain() {
    for a in [0.0, 2.0, -1.0, f64::NAN] {
        assert!(kernel_constants(a).is_err(), "alpha = {a}");
    }
}

#[test]
fn alpha_range() {
    assert!(Alpha::new(1.0).is_ok());
    assert!(Alpha::new(1.999).is_ok());
    for a in [0.99, 2.0, f64::INFINITY] {
        assert!(matches!(Alpha::new(a), Err(Error::Domain(_))));
    }
}

#[test]
fn sigma_values_at_three_halves() {
    let t = sigma_spectrum(Alpha::new(1.5).unwrap(), 256).unwrap();
    assert_eq!(t.sigma(1), 0.0);
    assert!(close(t.sigma(2), 0.154_682_700_757_828_2, 1e-12));
    assert!(close(t.sigma(3), 0.274_991_468_013_916_8, 1e-12));
    assert!(close(t.sigma(10), 0.819_510_491_965_203_4, 1e-12));
    assert!(close(t.sigma(256), 5.715_372_810_965_432, 1e-12));
    let t = sigma_spectrum(Alpha::new(1.25).unwrap(), 100).unwrap();
    assert!(close(t.sigma(2), 0.190_243_050_320_324_9, 1e-12));
    assert!(close(t.sigma(100), 2.234_201_987_134_546, 1e-12));
}

#[test]
fn sigma_at_one_is_shifted_odd_harmonic_sum() {
    assert!(close(odd_harmonic_sum(1), 2.0 / PI, 1e-15));
    assert!(close(odd_harmonic_sum(2), 8.0 / (3.0 * PI), 1e-15));
    let t = sigma_spectrum(Alpha::new(1.0).unwrap(), 64).unwrap();
    for n in 1..=64 {
        assert!(
            (t.sigma(n) + 2.0 / PI - odd_harmonic_sum(n)).abs() < 1e-14,
            "n = {n}"
        );
    }
}

#[test]
fn sigma_needs_two_modes() {
    assert!(sigma_spectrum(Alpha::new(1.5).unwrap(), 1).is_err());
}

#[test]
fn polygon_sum_values() {
    assert!(close(polygon_sum(2, 1.0).unwrap(), 0.5, 1e-15));
    assert!(close(
        polygon_sum(3, 1.0).unwrap(),
        2.0 / 3f64.sqrt(),
        1e-15
    ));
    assert!(close(polygon_sum(2, 1.5).unwrap(), 2f64.powf(-1.5), 1e-15));
    assert!(close(
        polygon_sum(3, 1.5).unwrap(),
        0.877_382_675_301_661_6,
        1e-14
    ));
    assert!(polygon_sum(1, 1.0).is_err());
}

#[test]
fn interaction_sum_staggered_unit_ratio() {
    let t = interaction_sum(1.0, 1, 2, 1.0, RingSign::Plus).unwrap();
    assert!(close(t, 2f64.powf(-0.5), 1e-14));
}

#[test]
fn interaction_sum_rejects_coincident_rings() {
    assert!(matches!(
        interaction_sum(1.0, 0, 3, 1.5, RingSign::Plus),
        Err(Error::Configuration(_))
    ));
    assert!(interaction_sum(0.0, 1, 3, 1.5, RingSign::Plus).is_err());
}

#[test]
fn xi_values() {
    assert!(close(xi_alpha(1.0).unwrap(), 9.0 * PI / 16.0, 1e-14));
    assert!(close(
        xi_alpha(1.5).unwrap(),
        2.027_894_178_298_375_5,
        1e-13
    ));
}

#[test]
fn kernel_mode_differences_start_at_zero() {
    for a in [1.0, 1.3, 1.7] {
        let c = kernel_mode_differences(a, 8).unwrap();
        assert_eq!(c[0], 0.0);
        // The kernel is positive and peaked, so higher modes sit below c_0.
        assert!(c[1..].iter().all(|&x| x < 0.0), "alpha = {a}: {c:?}");
        assert!(c.windows(2).all(|w| w[1] < w[0]));
    }
}

proptest! {
    #[test]
    fn gamma_recurrence(x in 0.05f64..20.0) {
        let lhs = gamma_fn(x + 1.0).unwrap();
        let rhs = x * gamma_fn(x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
    }

    #[test]
    fn gamma_reflection(x in 0.01f64..0.99) {
        let p = gamma_fn(x).unwrap() * gamma_fn(1.0 - x).unwrap();
        let r = PI / (PI * x).sin();
        prop_assert!((p - r).abs() <= 1e-12 * r);
    }

    #[test]
    fn c_hat_forms_agree(a in 0.05f64..1.95) {
        let (c, ch) = kernel_constants(a).unwrap();
        let closed = c_hat_closed_form(a).unwrap();
        prop_assert!((ch - a * c).abs() <= 1e-14 * ch.abs());
        prop_assert!((ch - closed).abs() <= 1e-12 * closed.abs());
    }

    #[test]
    fn sigma_increasing_with_power_law_growth(a in 1.0f64..1.99) {
        let t = sigma_spectrum(Alpha::new(a).unwrap(), 256).unwrap();
        prop_assert_eq!(t.sigma(1), 0.0);
        prop_assert!(t.values.windows(2).all(|w| w[1] > w[0]));
        if a > 1.2 {
            let r: Vec<f64> = (16..=256).map(|n| t.sigma(n) / (n as f64).powf(a - 1.0)).collect();
            let (lo, hi) = r.iter().fold((f64::MAX, 0f64), |(l, h), &x| (l.min(x), h.max(x)));
            prop_assert!(hi / lo < 2.0, "ratio band [{}, {}]", lo, hi);
        }
    }

    #[test]
    fn polygon_sum_positive_and_growing(m in 2usize..40, a in 1.0f64..2.0) {
        let s = polygon_sum(m, a).unwrap();
        prop_assert!(s > 0.0);
        prop_assert!(polygon_sum(m + 1, a).unwrap() > s);
    }

    #[test]
    fn interaction_sum_scales(d in 1.05f64..6.0, m in 2usize..8, th in 0u8..2, a in 1.0f64..1.99) {
        // Seen from a ring much further out, the inner ring looks like m
        // coincident vortices.
        let tp = interaction_sum(d, th, m, a, RingSign::Plus).unwrap();
        let tm = interaction_sum(d, th, m, a, RingSign::Minus).unwrap();
        prop_assert!(tp.is_finite() && tm.is_finite());
        let far = interaction_sum(1e6, th, m, a, RingSign::Minus).unwrap();
        prop_assert!((far - m as f64).abs() < 1e-4 * m as f64);
    }
}
