use hybridswap::measures::{fidelity, linear_entropy, negativity, phi_plus, MeasureSet};
use hybridswap::mismatch::{averaged, MismatchSpec};
use hybridswap::protocol::{oracle_density, protocol_density, success_probability, ProtocolParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn analytic_state_is_a_valid_density_matrix(
        alpha in 0.0f64..3.5,
        t in 0.85f64..=1.0,
        frac in 0.0f64..0.5,
        x in -2.5f64..2.5,
    ) {
        let p = ProtocolParams::new(alpha, t, frac * t * 0.1).with_outcome(x);
        let rho = protocol_density(&p).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!(rho.hermiticity_deviation() < 1e-12);
        prop_assert!(rho.min_eigenvalue() > -1e-12);
        let m = MeasureSet::of(&rho, success_probability(&p).unwrap()).unwrap();
        prop_assert!(m.in_range(4, 1e-12), "{m:?}");
    }

    #[test]
    fn oracle_agrees_off_grid(
        alpha in 0.1f64..2.5,
        t in 0.9f64..=1.0,
        delta in 0.0f64..0.05,
        x in -1.5f64..1.5,
    ) {
        let p = ProtocolParams::new(alpha, t, delta.min(t * 0.5)).with_outcome(x);
        let d = protocol_density(&p).unwrap().trace_distance(&oracle_density(&p).unwrap()).unwrap();
        prop_assert!(d < 1e-8, "trace distance {d:e}");
    }

    #[test]
    fn no_loss_is_pure(alpha in 0.0f64..4.0, x in -2.0f64..2.0) {
        let rho = protocol_density(&ProtocolParams::new(alpha, 1.0, 0.0).with_outcome(x)).unwrap();
        prop_assert!(linear_entropy(&rho) < 1e-10);
    }

    #[test]
    fn corrected_measures_do_not_depend_on_outcome(
        alpha in 0.2f64..3.0,
        t in 0.9f64..=1.0,
        delta in 0.0f64..0.03,
        x in -2.0f64..2.0,
    ) {
        let base = ProtocolParams::new(alpha, t, delta);
        let eval = |p: ProtocolParams| {
            let rho = protocol_density(&p).unwrap();
            [
                negativity(&rho).unwrap(),
                fidelity(&rho, &phi_plus()).unwrap(),
                linear_entropy(&rho),
                success_probability(&p).unwrap(),
            ]
        };
        let a = eval(base);
        let b = eval(base.with_outcome(x));
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() < 1e-10, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn swapping_channels_preserves_entanglement_and_mixedness(
        alpha in 0.2f64..3.0,
        t in 0.9f64..=1.0,
        delta in 0.0f64..0.05,
        x in -1.0f64..1.0,
    ) {
        let p = ProtocolParams::new(alpha, t, delta).with_outcome(x);
        let mut q = p;
        q.swap_channels = true;
        let (a, b) = (protocol_density(&p).unwrap(), protocol_density(&q).unwrap());
        prop_assert!((negativity(&a).unwrap() - negativity(&b).unwrap()).abs() < 1e-10);
        prop_assert!((linear_entropy(&a) - linear_entropy(&b)).abs() < 1e-10);
    }

    #[test]
    fn success_probability_is_a_probability(alpha in 0.0f64..4.0, t in 0.5f64..=1.0, delta in 0.0f64..0.1) {
        let p = success_probability(&ProtocolParams::new(alpha, t, delta.min(t / 2.0))).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&p), "{p}");
    }
}

#[test]
fn cross_populations_damp_monotonically() {
    for t in [0.999, 0.99, 0.95, 0.8] {
        let mut prev = f64::INFINITY;
        for i in 0..=80 {
            let rho = protocol_density(&ProtocolParams::new(0.05 * i as f64, t, 0.0)).unwrap();
            let pop = rho.entry(1, 1).re + rho.entry(2, 2).re;
            assert!(pop <= prev + 1e-12, "T = {t}, step {i}: {pop} > {prev}");
            prev = pop;
        }
    }
}

#[test]
fn wider_mismatch_never_helps() {
    let widths = [0.0, 0.001, 0.01, 0.1];
    for t in [1.0, 0.99, 0.95] {
        for i in 1..=20 {
            let p = ProtocolParams::new(0.2 * i as f64, t, 0.0);
            let n: Vec<f64> = widths
                .iter()
                .map(|&w| {
                    negativity(&averaged(&p, &MismatchSpec::new(w)).unwrap().density).unwrap()
                })
                .collect();
            for pair in n.windows(2) {
                assert!(
                    pair[0] >= pair[1] - 1e-10,
                    "T = {t}, alpha = {}: {n:?}",
                    p.alpha
                );
            }
        }
    }
}

#[test]
fn averaged_success_matches_point_value_at_zero_width() {
    let p = ProtocolParams::new(1.1, 0.97, 0.0);
    let avg = averaged(&p, &MismatchSpec::new(0.0)).unwrap();
    assert_eq!(avg.success_prob, success_probability(&p).unwrap());
}

#[test]
fn invalid_parameters_are_rejected() {
    for p in [
        ProtocolParams::new(1.0, 1.2, 0.0),
        ProtocolParams::new(1.0, 0.0, 0.0),
        ProtocolParams::new(1.0, 0.9, 0.95),
        ProtocolParams::new(f64::NAN, 0.9, 0.0),
        ProtocolParams::new(1.0, 0.9, -0.01),
    ] {
        assert!(protocol_density(&p).is_err(), "{p:?}");
        assert!(oracle_density(&p).is_err(), "{p:?}");
    }
}
