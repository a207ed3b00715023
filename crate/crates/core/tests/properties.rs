use proptest::prelude::*;

use emi_core::analytic::presets;
use emi_core::analytic::residual::{random_samples, SampleKind};
use emi_core::analytic::{ExactFields, MmsSolution};
use emi_core::model::{ion_current_membrane, validate, Annulus, GapPair, GeometrySpec, ModelParams};
use emi_core::radial::{l2_norm, nodes_with_intervals, Shell};
use emi_core::split::{rc_relax, RcChannel};
use emi_core::verify::{observed_order, CaseResult, ConvergenceReport};

fn finite_or_not() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => -1e3..1e3f64,
        1 => Just(f64::NAN),
        1 => Just(f64::INFINITY),
        1 => Just(0.0),
    ]
}

proptest! {
    #[test]
    fn ion_current_is_affine(v1 in -100.0..100.0f64, v2 in -100.0..100.0f64, a in 0.0..1.0f64, rm in 0.1..10.0f64, rest in -10.0..10.0f64) {
        let p = ModelParams::uniform(1, &[], 1.0, 1.0, 1.0, rm, 1.0, 1.0, rest, 0.0);
        let mix = ion_current_membrane(a * v1 + (1.0 - a) * v2, &p, 1);
        let lin = a * ion_current_membrane(v1, &p, 1) + (1.0 - a) * ion_current_membrane(v2, &p, 1);
        prop_assert!((mix - lin).abs() <= 1e-10 * (1.0 + lin.abs()));
        prop_assert_eq!(ion_current_membrane(rest, &p, 1), 0.0);
    }

    #[test]
    fn rc_relax_is_a_semigroup(x in -50.0..50.0f64, c in 0.1..5.0f64, r in 0.1..5.0f64, rest in -5.0..5.0f64, g in -5.0..5.0f64, d1 in 1e-4..1.0f64, d2 in 1e-4..1.0f64) {
        let ch = RcChannel::new(c, r, rest);
        let two = rc_relax(rc_relax(x, &ch, g, d1), &ch, g, d2);
        let one = rc_relax(x, &ch, g, d1 + d2);
        prop_assert!((two - one).abs() <= 1e-12 * (1.0 + one.abs()));
    }

    #[test]
    fn rc_relax_keeps_equilibrium(c in 0.1..5.0f64, r in 0.1..5.0f64, rest in -5.0..5.0f64, g in -5.0..5.0f64, dt in 1e-6..3.0f64) {
        let ch = RcChannel::new(c, r, rest);
        let eq = rest + g * r;
        prop_assert!((rc_relax(eq, &ch, g, dt) - eq).abs() <= 1e-12 * (1.0 + eq.abs()));
    }

    #[test]
    fn validate_accepts_exactly_valid_input(sigma_i in finite_or_not(), sigma_e in finite_or_not(), cm in finite_or_not(), rm in finite_or_not(), r0 in finite_or_not(), r1 in finite_or_not(), r2 in finite_or_not()) {
        let p = ModelParams::uniform(1, &[], sigma_i, sigma_e, cm, rm, 1.0, 1.0, 0.0, 0.0);
        let g = GeometrySpec::Annulus2D(Annulus { r_core: r0, r_membrane: r1, r_outer: r2 });
        let ok = [sigma_i, sigma_e, cm, rm].iter().all(|x| x.is_finite() && *x > 0.0)
            && [r0, r1, r2].iter().all(|x| x.is_finite()) && 0.0 < r0 && r0 < r1 && r1 < r2;
        match validate(&p, &g) {
            Ok(()) => prop_assert!(ok),
            Err(violations) => {
                prop_assert!(!violations.is_empty());
                prop_assert!(!ok, "valid input rejected: {:?}", violations);
            }
        }
    }

    #[test]
    fn gap_pair_is_unordered(k in 1usize..50, l in 1usize..50) {
        prop_assume!(k != l);
        let (a, b) = (GapPair::new(k, l), GapPair::new(l, k));
        prop_assert_eq!(a, b);
        prop_assert_eq!(a.low(), k.min(l));
        prop_assert_eq!(a.high(), k.max(l));
    }

    #[test]
    fn mms_is_mirror_symmetric(x in -1.8..1.8f64, y in -1.8..1.8f64, z in -0.8..0.8f64, t in 0.0..1.0f64) {
        let s = MmsSolution::new(presets::exp3_family()).unwrap();
        for q in [[-x, y, z], [x, -y, z], [x, y, -z]] {
            prop_assert!((s.u_e([x, y, z], t) - s.u_e(q, t)).abs() <= 1e-12);
            prop_assert!((s.f_e([x, y, z], t) - s.f_e(q, t)).abs() <= 1e-9);
        }
    }

    #[test]
    fn observed_order_inverts_power_law(c in 1e-6..1.0f64, p in 0.5..4.0f64, ratio in 1.5..4.0f64) {
        let o = observed_order(c * ratio.powf(p), c, ratio).unwrap();
        prop_assert!((o - p).abs() <= 1e-9);
    }

    #[test]
    fn l2_norm_of_constant(c in -10.0..10.0f64, a in 0.5..3.0f64, len in 0.5..3.0f64, n in 2usize..40) {
        let b = a + len;
        let nodes = nodes_with_intervals(a, b, n);
        let e = vec![c; nodes.len()];
        let exact = c.abs() * (std::f64::consts::PI * (b * b - a * a)).sqrt();
        prop_assert!((l2_norm(&nodes, &e, Shell::Circle, a, b) - exact).abs() <= 1e-10 * (1.0 + exact));
    }

    #[test]
    fn report_csv_round_trips(errors in prop::collection::vec(prop::collection::vec(1e-12..1e3f64, 3), 1..5)) {
        let mut report = ConvergenceReport::new("custom", "radial", 0.25, 7.0);
        let mut c_l = 0.5;
        for (i, row) in errors.iter().enumerate() {
            report.push(&CaseResult {
                c_l,
                n_f: 10 << i,
                errors: vec![("u_e".into(), row[0]), ("u_i1".into(), row[1]), ("v1".into(), row[2])],
                max_balance: 0.0,
            });
            c_l /= 2.0;
        }
        let back = ConvergenceReport::parse_csv(&report.to_csv()).unwrap();
        prop_assert_eq!(back, report);
    }
}

#[test]
fn mms_membrane_flux_vanishes() {
    let s = MmsSolution::new(presets::exp3_family()).unwrap();
    let samples = random_samples(&s.geometry(), 2000, 0.0, 1.0, 11);
    let mut seen = 0;
    for sample in samples {
        match sample.kind {
            SampleKind::Membrane { k, .. } => {
                seen += 1;
                assert!(s.i_m(k, sample.point, sample.t).abs() <= 1e-10);
            }
            SampleKind::Gap { pair, .. } => {
                seen += 1;
                assert!(s.i_gap(pair, sample.point, sample.t).abs() <= 1e-10);
            }
            _ => {}
        }
    }
    assert!(seen > 500);
}
