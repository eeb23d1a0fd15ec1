//! Property tests for the operator catalog and the integration layer.

use fneig::ivp::{integrate, IvpConfig};
use fneig::operator::{EvalPoint, LinearCoeffs, OperatorSpec};
use proptest::prelude::*;

fn catalog_spec(idx: u8, lam: f64, spread: f64, gamma: f64, delta: f64) -> OperatorSpec<f64> {
    let lam_up = lam * (1.0 + spread);
    match idx % 5 {
        0 => OperatorSpec::pucci_plus(lam, lam_up).with_gamma(gamma).with_delta(delta),
        1 => OperatorSpec::pucci_minus(lam, lam_up).with_gamma(gamma).with_delta(delta),
        2 => OperatorSpec::linear(LinearCoeffs::constant(lam, gamma, -delta), 1),
        3 => OperatorSpec::bellman_max(
            vec![
                LinearCoeffs::constant(lam, 0.0, 0.0),
                LinearCoeffs::constant(lam_up, gamma, -delta),
            ],
            1,
        ),
        _ => OperatorSpec::bellman_min(
            vec![
                LinearCoeffs::constant(lam, 0.0, 0.0),
                LinearCoeffs::constant(lam_up, gamma, -delta),
            ],
            1,
        ),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn invert_after_evaluate_is_identity(
        idx in 0u8..5,
        lam in 0.4f64..3.0,
        spread in 0.0f64..2.0,
        gamma in 0.0f64..0.8,
        delta in 0.0f64..0.8,
        m in -5.0f64..5.0,
        ell in -5.0f64..5.0,
        p in -5.0f64..5.0,
        u in -5.0f64..5.0,
        dim in 1usize..4,
    ) {
        let spec = catalog_spec(idx, lam, spread, gamma, delta).with_dim(dim);
        let r = 0.5;
        let q = spec.evaluate(&EvalPoint::new(m, ell, p, u, r)).unwrap();
        let back = spec.invert_m(ell, p, u, q, r).unwrap();
        prop_assert!((back - m).abs() <= 1e-12 * (1.0 + m.abs()),
            "round trip {back} vs {m} for {:?}", spec.kind);
    }

    #[test]
    fn positive_homogeneity(
        idx in 0u8..5,
        lam in 0.4f64..3.0,
        spread in 0.0f64..2.0,
        gamma in 0.0f64..0.8,
        delta in 0.0f64..0.8,
        m in -5.0f64..5.0,
        ell in -5.0f64..5.0,
        p in -5.0f64..5.0,
        u in -5.0f64..5.0,
        s in prop::sample::select(vec![0.0, 0.5, 2.0, 10.0]),
    ) {
        let spec = catalog_spec(idx, lam, spread, gamma, delta).with_dim(2);
        let pt = EvalPoint::new(m, ell, p, u, 0.3);
        let scaled = EvalPoint::new(s * m, s * ell, s * p, s * u, 0.3);
        let f = spec.evaluate(&pt).unwrap();
        let fs = spec.evaluate(&scaled).unwrap();
        prop_assert!((fs - s * f).abs() <= 1e-12 * (1.0 + (s * f).abs()));
    }

    #[test]
    fn inversion_monotone_in_q(
        idx in 0u8..5,
        lam in 0.4f64..3.0,
        spread in 0.0f64..2.0,
        ell in -3.0f64..3.0,
        p in -3.0f64..3.0,
        u in -3.0f64..3.0,
        q0 in -10.0f64..10.0,
    ) {
        let spec = catalog_spec(idx, lam, spread, 0.3, 0.2).with_dim(2);
        let mut prev = spec.invert_m(ell, p, u, q0, 0.5).unwrap();
        for k in 1..=8 {
            let q = q0 + k as f64 * 0.7;
            let m = spec.invert_m(ell, p, u, q, 0.5).unwrap();
            prop_assert!(m >= prev - 1e-12, "inversion must be nondecreasing in q");
            prev = m;
        }
    }

    #[test]
    fn inversion_lipschitz_bounds(
        idx in 0u8..5,
        lam in 0.4f64..3.0,
        spread in 0.0f64..2.0,
        gamma in 0.0f64..0.8,
        delta in 0.0f64..0.8,
        p in -3.0f64..3.0,
        u in -3.0f64..3.0,
        q in -5.0f64..5.0,
        dp in -1.0f64..1.0,
        du in -1.0f64..1.0,
        dq in -1.0f64..1.0,
    ) {
        // |G(p,u,q) - G(p',u',q')| <= (gamma |dp| + delta |du| + |dq|)/lam.
        let spec = catalog_spec(idx, lam, spread, gamma, delta);
        let g0 = spec.invert_m(0.0, p, u, q, 0.5).unwrap();
        let g1 = spec.invert_m(0.0, p + dp, u + du, q + dq, 0.5).unwrap();
        let gamma_eff = spec.gamma;
        let delta_eff = spec.delta;
        let bound = (gamma_eff * dp.abs() + delta_eff * du.abs() + dq.abs()) / spec.lambda_min;
        prop_assert!((g1 - g0).abs() <= bound + 1e-10 * (1.0 + bound));
    }

    #[test]
    fn flip_is_involution_and_pointwise_reflection(
        idx in 0u8..5,
        lam in 0.4f64..3.0,
        spread in 0.0f64..2.0,
        gamma in 0.0f64..0.8,
        delta in 0.0f64..0.8,
        m in -4.0f64..4.0,
        ell in -4.0f64..4.0,
        p in -4.0f64..4.0,
        u in -4.0f64..4.0,
    ) {
        let spec = catalog_spec(idx, lam, spread, gamma, delta).with_dim(3);
        let double = spec.flip().flip();
        let pt = EvalPoint::new(m, ell, p, u, 0.4);
        prop_assert_eq!(double.evaluate(&pt).unwrap(), spec.evaluate(&pt).unwrap());
        let neg = EvalPoint::new(-m, -ell, -p, -u, 0.4);
        let lhs = spec.flip().evaluate(&pt).unwrap();
        let rhs = -spec.evaluate(&neg).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn trajectory_scales_with_data(
        idx in 0u8..5,
        lam in 0.6f64..2.0,
        u0 in -1.0f64..1.0,
        p0 in -1.0f64..1.0,
        s in 0.25f64..4.0,
    ) {
        // Positive homogeneity transports through the flow.
        let spec = catalog_spec(idx, lam, 0.8, 0.2, 0.1);
        let cfg = IvpConfig { max_step: 5e-3, ..IvpConfig::default() };
        let base = integrate(&spec, |_| 1.0, 1.0, 0.0, 1.0, u0, p0, &cfg).unwrap();
        let scaled = integrate(&spec, |_| s, 1.0, 0.0, 1.0, s * u0, s * p0, &cfg).unwrap();
        let tol = 1e-7 * (1.0 + s * base.sup_abs_u());
        for k in 1..=4 {
            let t = k as f64 / 4.0;
            prop_assert!((scaled.u_at(t) - s * base.u_at(t)).abs() <= tol);
        }
    }
}
