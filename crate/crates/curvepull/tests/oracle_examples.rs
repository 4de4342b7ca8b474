use curvepull::cover::{torus_build, PreimageTracker, SPoint, TorusClass};
use curvepull::exact_farey::{rational, Cusp};
use curvepull::oracle_topo::*;
use curvepull::pullback::{build_evaluator, CuspFate};
use curvepull::ratmap::*;
use num_complex::Complex64 as C;
use num_rational::BigRational;
use num_traits::Zero;

fn cusp(s: &str) -> Cusp {
    s.parse().unwrap()
}

fn z_squared() -> RationalMap {
    RationalMap::from_ratios(&[(0, 1), (0, 1), (1, 1)], &[(1, 1)]).unwrap()
}

fn circle(center: C, radius: f64, n: usize) -> GeometricCurve {
    let points = (0..=n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k % n) as f64 / n as f64;
            SPoint::finite(center + C::from_polar(radius, th))
        })
        .collect();
    GeometricCurve { points, clearance: f64::NAN, offset: 0.0 }
}

fn degrees(f: &RationalMap, g: &GeometricCurve) -> Vec<usize> {
    let mut d: Vec<usize> = pullback_components(&PreimageTracker::new(f), g).unwrap().iter().map(|c| c.degree).collect();
    d.sort();
    d
}

#[test]
fn z_squared_circle_around_zero_is_one_double_component() {
    assert_eq!(degrees(&z_squared(), &circle(C::new(0.0, 0.0), 4.0, 512)), vec![2]);
}

#[test]
fn z_squared_circle_missing_zero_splits() {
    assert_eq!(degrees(&z_squared(), &circle(C::new(3.0, 0.0), 2.0, 512)), vec![1, 1]);
    // radius 4 around 3 still winds around 0
    assert_eq!(degrees(&z_squared(), &circle(C::new(3.0, 0.0), 4.0, 512)), vec![2]);
}

#[test]
fn generator_curves_have_generator_classes() {
    let t = torus_build(curvepull::cover::basepoint_for(C::new(0.25, 0.0)).unwrap()).unwrap();
    for (r, want) in [("inf", TorusClass::Homology(1, 0)), ("0", TorusClass::Homology(0, 1))] {
        let g = slope_curve(&t, cusp(r), 256, CALIBRATED, 0.25).unwrap();
        assert_eq!(g.points.first(), g.points.last());
        assert!(g.clearance > 1e-3);
        assert_eq!(t.lift_curve(&g.points).unwrap(), want, "{r}");
    }
}

#[test]
fn slope_curve_round_trips_its_class() {
    let t = torus_build(curvepull::cover::basepoint_for(C::new(0.25, 0.0)).unwrap()).unwrap();
    for r in ["1", "1/2", "-1/2", "2/3", "-3", "3/5", "5/2"] {
        for conv in Convention::ALL {
            let g = slope_curve(&t, cusp(r), 512, conv, 0.25).unwrap();
            let TorusClass::Homology(m, n) = t.lift_curve(&g.points).unwrap() else { panic!("{r} peripheral") };
            assert_eq!(conv.cusp_of(m, n), Some(cusp(r)), "{r} {conv:?}");
        }
    }
}

#[test]
fn generator_curves_cross_twice() {
    let t = torus_build(curvepull::cover::basepoint_for(C::new(0.25, 0.0)).unwrap()).unwrap();
    let g0 = slope_curve(&t, cusp("0"), 1024, CALIBRATED, 0.25).unwrap();
    let gi = slope_curve(&t, cusp("inf"), 1024, CALIBRATED, 0.25).unwrap();
    assert_eq!(transverse_crossings(&g0, &gi), 2);
}

#[test]
fn too_few_samples_rejected() {
    let t = torus_build(C::new(0.0, 1.0)).unwrap();
    assert!(matches!(slope_curve(&t, cusp("0"), 100, CALIBRATED, 0.25), Err(OracleError::Precondition(_))));
}

#[test]
fn small_circle_around_marked_point_is_peripheral() {
    let t = torus_build(curvepull::cover::basepoint_for(C::new(0.25, 0.0)).unwrap()).unwrap();
    for c in [C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.25, 0.0)] {
        let pc = PullbackComponent { curve: circle(c, 0.05, 256), degree: 1 };
        assert_eq!(classify_component(&t, &pc, CALIBRATED).unwrap(), CuspFate::Peripheral);
    }
}

#[test]
fn calibration_needs_a_non_real_marking() {
    let (quad, cubic) = calibration_evaluators().unwrap();
    // real map, real marked point: conjugation swaps (p, q) and (p, -q)
    assert_eq!(agreeing_conventions(&quad, 7).unwrap(), vec![Convention::PQ, Convention::PNegQ]);
    assert!(matches!(calibrate(&quad, &[], 7), Err(OracleError::Calibration(2))));
    let cal = calibrate(&quad, &[&cubic], 7).unwrap();
    assert_eq!(cal.primary, vec![Convention::PQ, Convention::PNegQ]);
    assert_eq!(cal.rounds, vec![vec![Convention::PNegQ]]);
    assert_eq!(cal.chosen, CALIBRATED);
}

#[test]
fn quadratic_oracle_matches_known_values() {
    let o = Oracle::new(&quadratic_example(), &SpherePoint::rat(1, 4), CALIBRATED, 1).unwrap();
    let cases = [("0", Some("inf"), (1, 1)), ("1", Some("-1"), (1, 2)), ("-1", Some("1"), (1, 2)), ("2", Some("0"), (1, 1)), ("inf", None, (0, 1)), ("1/2", None, (0, 1))];
    for (r, img, (mn, md)) in cases {
        let res = o.analyze(cusp(r)).unwrap();
        let want = img.map(|s| CuspFate::Essential(cusp(s))).unwrap_or(CuspFate::Peripheral);
        assert_eq!(res.fate, want, "{r}");
        assert_eq!(res.multiplier, rational(mn, md), "{r}");
        assert_eq!(res.degree_sum(), 2);
        assert!(o.is_admissible(&res.multiplier));
    }
}

#[test]
fn peripheral_pullback_has_zero_multiplier() {
    let o = Oracle::new(&quadratic_example(), &SpherePoint::rat(1, 4), CALIBRATED, 1).unwrap();
    assert!(o.multiplier_oracle(cusp("inf")).unwrap().is_zero());
}

#[test]
fn oracle_stable_under_doubled_sampling() {
    let f = cubic_example();
    let a = SpherePoint::rat(1, 5);
    let o1 = Oracle::new(&f, &a, CALIBRATED, 3).unwrap();
    let o2 = Oracle::new(&f, &a, CALIBRATED, 3).unwrap().with_samples(512);
    for r in ["0", "inf", "1/2", "3/5", "-7/4", "2/3"] {
        let (x, y) = (o1.analyze(cusp(r)).unwrap(), o2.analyze(cusp(r)).unwrap());
        assert_eq!(x.fate, y.fate, "{r}");
        assert_eq!(x.multiplier, y.multiplier, "{r}");
        assert_eq!(x.components, y.components, "{r}");
    }
}

#[test]
fn oracle_deterministic_for_a_seed() {
    let o = Oracle::new(&quadratic_example(), &SpherePoint::rat(1, 4), CALIBRATED, 11).unwrap();
    let a = o.analyze(cusp("3/5")).unwrap();
    let b = o.analyze(cusp("3/5")).unwrap();
    assert_eq!((a.fate, a.multiplier, a.components, a.attempts), (b.fate, b.multiplier, b.components, b.attempts));
}

fn twenty_cusps() -> Vec<Cusp> {
    ["0", "1", "inf", "1/2", "-1/2", "2", "-2", "-1", "1/3", "2/3", "3/5", "-7/4", "3/2", "-3/2", "1/4", "5/3", "-2/3", "4/3", "-1/3", "3"]
        .iter()
        .map(|s| cusp(s))
        .collect()
}

#[test]
fn moebius_twist_keeps_fates() {
    let a = SpherePoint::rat(1, 4);
    let marking = standard_marking(a.clone());
    let g = quadratic_example();
    let m = moebius_transposition(&marking, &a, &SpherePoint::int(0)).unwrap();
    let f = m.compose(&g);
    let ev = build_evaluator(&g, &marking).unwrap();
    let o = Oracle::new(&f, &a, CALIBRATED, 5).unwrap();
    for r in twenty_cusps() {
        assert_eq!(o.cusp_pullback_oracle(r).unwrap(), ev.fate(r), "{r}");
    }
}

#[test]
fn lattes_composition_keeps_fates() {
    let a = SpherePoint::rat(1, 5);
    let g = cubic_example();
    let h = lattes_sq(&rational(5, 1)).unwrap();
    let f = h.compose(&g);
    assert_eq!(f.degree(), 12);
    let ev = build_evaluator(&g, &standard_marking(a.clone())).unwrap();
    let o = Oracle::new(&f, &a, CALIBRATED, 5).unwrap();
    for r in twenty_cusps() {
        let res = o.analyze(r).unwrap();
        assert_eq!(res.degree_sum(), 12);
        assert_eq!(res.fate, ev.fate(r), "{r}");
    }
}

#[test]
fn comparison_csv_header() {
    let rows = [ComparisonRow {
        cusp: "0".into(),
        analytic_fate: "inf".into(),
        oracle_fate: "inf".into(),
        analytic_multiplier: "1".into(),
        oracle_multiplier: "1".into(),
        agree: true,
    }];
    assert_eq!(
        comparison_csv(&rows),
        "cusp,analytic_fate,oracle_fate,analytic_multiplier,oracle_multiplier,agree\n0,inf,inf,1,1,true\n"
    );
}

#[test]
fn multiplier_type_is_exact() {
    let o = Oracle::new(&cubic_example(), &SpherePoint::rat(1, 5), CALIBRATED, 1).unwrap();
    let m: BigRational = o.multiplier_oracle(cusp("inf")).unwrap();
    assert_eq!(m, rational(1, 3));
}
