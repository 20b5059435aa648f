use proptest::prelude::*;
use spinhodo::elliptic::{
    complete_e, complete_k, incomplete_e, incomplete_e_quadrature, jacobi_sncndn, EllipticModulus,
};
use spinhodo::quadrature;

proptest! {
    #[test]
    fn pythagorean_identities(u in -50.0f64..50.0, k in 0.0f64..=1.0) {
        let m = EllipticModulus::new(k).unwrap();
        let j = jacobi_sncndn(u, m).unwrap();
        prop_assert!((j.sn * j.sn + j.cn * j.cn - 1.0).abs() < 1e-13);
        prop_assert!((j.dn * j.dn + k * k * j.sn * j.sn - 1.0).abs() < 1e-13);
    }

    #[test]
    fn sn_is_odd_and_quarter_period_is_k(u in 0.0f64..10.0, k in 0.0f64..0.999) {
        let m = EllipticModulus::new(k).unwrap();
        let a = jacobi_sncndn(u, m).unwrap();
        let b = jacobi_sncndn(-u, m).unwrap();
        prop_assert!((a.sn + b.sn).abs() < 1e-13);
        prop_assert!((a.cn - b.cn).abs() < 1e-13);
        let big_k = complete_k(m).unwrap();
        prop_assert!((jacobi_sncndn(big_k, m).unwrap().sn - 1.0).abs() < 1e-10);
    }

    #[test]
    fn incomplete_e_matches_quadrature(phi in -12.0f64..12.0, m in -30.0f64..1.0) {
        let a = incomplete_e(phi, m).unwrap();
        let b = incomplete_e_quadrature(phi, m).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn incomplete_e_reaches_complete_e(m in -30.0f64..1.0) {
        let half = incomplete_e(std::f64::consts::FRAC_PI_2, m).unwrap();
        prop_assert!((half - complete_e(m).unwrap()).abs() < 1e-12 * half.max(1.0));
    }
}

#[test]
fn complete_k_matches_defining_integral() {
    for k in [0.0, 0.3, 0.7, 0.95] {
        let m = EllipticModulus::new(k).unwrap();
        let direct = quadrature::integrate(
            |t: f64| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(),
            0.0,
            std::f64::consts::FRAC_PI_2,
            1e-13,
        )
        .unwrap();
        assert!((complete_k(m).unwrap() - direct).abs() < 1e-12, "k = {k}");
    }
}

#[test]
fn complete_k_diverges_at_unit_modulus() {
    assert!(complete_k(EllipticModulus::ONE).is_err());
}

#[test]
fn modulus_outside_unit_interval_is_rejected() {
    assert!(EllipticModulus::new(1.5).is_err());
    assert!(EllipticModulus::new(f64::NAN).is_err());
}
