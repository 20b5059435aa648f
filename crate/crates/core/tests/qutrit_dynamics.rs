use proptest::prelude::*;
use spinhodo::integrator::{IntegratorConfig, OutputMode};
use spinhodo::qubit::FieldParams;
use spinhodo::qutrit::{
    bloch8_from_density, density_from_bloch8, integrate_qutrit, populations, AnisotropyParams,
    DensityMatrix3,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn trace_and_purity_are_conserved(
        h in -1.0f64..1.0, big_h in -1.0f64..1.0, omega in -2.0f64..2.0,
        q in -2.0f64..2.0, d in -0.5f64..0.5, linear in any::<bool>(),
    ) {
        let fp = if linear {
            FieldParams::linear(h, big_h, omega)
        } else {
            FieldParams::circular(h, big_h, omega)
        };
        let sol = integrate_qutrit(
            &fp, &AnisotropyParams::new(q, d).unwrap(), &DensityMatrix3::north(),
            (0.0, 15.0), 151, OutputMode::Interpolate, &IntegratorConfig::default(),
        ).unwrap();
        for (t, rho) in sol.times.iter().zip(&sol.states) {
            prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-9);
            prop_assert!((rho.purity() - 1.0).abs() < 1e-9);
            let b = bloch8_from_density(rho, *t);
            prop_assert!((b.norm() - 2f64.sqrt()).abs() < 1e-9);
            prop_assert!((b.populations().unwrap().sum() - 1.0).abs() < 1e-12);
            let back = density_from_bloch8(&b).unwrap();
            prop_assert!((back.matrix() - rho.matrix()).norm() < 1e-12);
        }
    }
}

#[test]
fn maximally_mixed_state_is_stationary() {
    let rho = DensityMatrix3::maximally_mixed();
    let sol = integrate_qutrit(
        &FieldParams::linear(0.7, 0.3, 1.1),
        &AnisotropyParams::new(0.5, 0.2).unwrap(),
        &rho,
        (0.0, 5.0),
        11,
        OutputMode::Interpolate,
        &IntegratorConfig::default(),
    )
    .unwrap();
    for s in &sol.states {
        assert!((s.matrix() - rho.matrix()).norm() < 1e-12);
    }
}

#[test]
fn populations_reject_unphysical_components() {
    assert!(populations(5.0, 0.0).is_err());
    let p = populations(0.0, 0.0).unwrap();
    assert!((p.sum() - 1.0).abs() < 1e-15);
}
