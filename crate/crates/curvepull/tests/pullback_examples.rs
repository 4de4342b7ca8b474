use curvepull::exact_farey::{rational, Cusp};
use curvepull::pullback::*;
use curvepull::ratmap::*;
use num_complex::Complex64 as C;
use num_traits::Zero;

fn cusp(s: &str) -> Cusp {
    s.parse().unwrap()
}

fn quad() -> SigmaEvaluator {
    build_evaluator(&quadratic_example(), &standard_marking(SpherePoint::rat(1, 4))).unwrap()
}

fn cubic() -> SigmaEvaluator {
    build_evaluator(&cubic_example(), &standard_marking(SpherePoint::rat(1, 5))).unwrap()
}

fn fate_of(s: Option<&str>) -> CuspFate {
    s.map(|x| CuspFate::Essential(cusp(x))).unwrap_or(CuspFate::Peripheral)
}

// Frozen after agreement with the brute-force curve-pullback oracle.
const QUAD_TABLE: &[(&str, Option<&str>, (i64, i64))] = &[
    ("0", Some("inf"), (1, 1)),
    ("1", Some("-1"), (1, 2)),
    ("-1", Some("1"), (1, 2)),
    ("2", Some("0"), (1, 1)),
    ("1/3", Some("-3"), (1, 2)),
    ("3/5", Some("-3"), (1, 2)),
    ("2/3", Some("-2"), (1, 1)),
    // the approach to 7/3 passes close to a puncture; a loose step once
    // wound the preimage around it and landed on 1
    ("7/3", Some("1/3"), (1, 2)),
    ("-7/3", Some("-1/3"), (1, 2)),
    ("inf", None, (0, 1)),
    ("1/2", None, (0, 1)),
    ("-1/2", None, (0, 1)),
    ("-7/4", None, (0, 1)),
];

const CUBIC_TABLE: &[(&str, Option<&str>, (i64, i64))] = &[
    ("inf", Some("0"), (1, 3)),
    ("0", Some("inf"), (1, 1)),
    ("1/2", Some("-2"), (1, 3)),
    ("-1/2", Some("2"), (1, 3)),
    ("3/5", Some("-1"), (1, 1)),
    ("1", None, (0, 1)),
    ("2", None, (0, 1)),
    ("-1", None, (0, 1)),
    ("1/3", None, (0, 1)),
];

#[test]
fn quadratic_fates_and_multipliers() {
    let ev = quad();
    for &(r, img, (n, d)) in QUAD_TABLE {
        assert_eq!(ev.fate(cusp(r)), fate_of(img), "{r}");
        assert_eq!(ev.multiplier_from_horoballs(cusp(r)).unwrap(), rational(n, d), "{r}");
    }
}

#[test]
fn cubic_fates_and_multipliers() {
    let ev = cubic();
    for &(r, img, (n, d)) in CUBIC_TABLE {
        assert_eq!(ev.fate(cusp(r)), fate_of(img), "{r}");
        assert_eq!(ev.multiplier_from_horoballs(cusp(r)).unwrap(), rational(n, d), "{r}");
    }
}

#[test]
fn raw_multiplier_estimate_is_sharp() {
    let an = quad().analyze_cusp(cusp("1"), 0.5, 12);
    assert!((an.estimate.unwrap() - 0.5).abs() < 1e-8);
}

#[test]
fn basepoint_is_fixed() {
    for ev in [quad(), cubic()] {
        let s = ev.sigma_eval(ev.tau0).unwrap();
        assert!((s - ev.tau0).norm() < 1e-8);
    }
}

#[test]
fn semiconjugacy_at_sample_points() {
    for ev in [quad(), cubic()] {
        for tau in [C::new(0.1, 0.9), C::new(-0.4, 1.7), C::new(0.45, 0.6), C::new(0.0, 3.0)] {
            assert!(ev.semiconjugacy_residual(tau).unwrap() < 1e-6, "{tau}");
        }
    }
}

#[test]
fn basepoints_for_examples() {
    // λ(τ₀) = a is checked at construction; pin the purely imaginary solutions
    assert!(quad().tau0.re.abs() < 1e-12);
    assert!((quad().tau0.im - 1.279_26).abs() < 1e-5);
    assert!((cubic().tau0.im - 1.360_07).abs() < 1e-5);
}

#[test]
fn constant_evaluator_sends_everything_to_peripheral() {
    let ev = build_evaluator(&quadratic_example(), &standard_marking(SpherePoint::rat(1, 2))).unwrap();
    assert!(ev.constant);
    for r in ["0", "1", "inf", "2/7"] {
        assert_eq!(ev.fate(cusp(r)), CuspFate::Peripheral);
        assert_eq!(ev.iterate_cusp_orbit(cusp(r), 10).terminal, Terminal::BecomesPeripheral(1));
        assert!(ev.multiplier_from_horoballs(cusp(r)).unwrap().is_zero());
    }
    let rep = ev.find_attractor(4, 10);
    assert!(rep.attractor.is_empty());
    assert!(rep.closure.passed);
    assert!(rep.orbits.iter().all(|o| o.terminal == Terminal::BecomesPeripheral(1)));
}

#[test]
fn rejects_postcritical_points_outside_the_standard_three() {
    let a = standard_marking(SpherePoint::rat(1, 4));
    let m = moebius_transposition(&a, &SpherePoint::rat(1, 4), &SpherePoint::int(0)).unwrap();
    let twisted = m.compose(&quadratic_example());
    assert!(matches!(build_evaluator(&twisted, &a), Err(PullbackError::Precondition(_))));
}

#[test]
fn two_postcritical_points_relabel_when_a_is_fixed() {
    // -z²: P = {0, ∞}, 1 ↦ -1 ↦ -1; after relabelling the free point is
    // the image of 1, which lands on a standard point, so σ is constant
    let f = RationalMap::from_ratios(&[(0, 1), (0, 1), (-1, 1)], &[(1, 1)]).unwrap();
    let ev = build_evaluator(&f, &standard_marking(SpherePoint::int(-1))).unwrap();
    assert_eq!(ev.substitution, Substitution::Relabel);
    assert!(ev.constant);
    assert!(matches!(ev.sigma_eval(ev.tau0), Err(PullbackError::Constant)));
    assert_eq!(ev.fate(cusp("1/3")), CuspFate::Peripheral);
}

#[test]
fn two_postcritical_points_iterate_when_a_is_not_fixed() {
    // ωz² with ω³ = 1: P = {0, ∞}, 1 ↦ ω ↦ 1
    let w = C::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let f = RationalMap::from_complex(vec![C::new(0.0, 0.0), C::new(0.0, 0.0), w], vec![C::new(1.0, 0.0)]).unwrap();
    let ev = build_evaluator(&f, &standard_marking(SpherePoint::Complex(w))).unwrap();
    assert_eq!(ev.substitution, Substitution::SecondIterate);
    assert_eq!(ev.degree(), 4);
}

#[test]
fn cusp_types() {
    // λ tends to 0 at ∞, to 1 at 0 and to ∞ at 1, so the odd/odd class lies over ∞
    let q = quad();
    for r in ["1", "-1", "3", "5/3"] {
        assert_eq!(q.classify_cusp(cusp(r)), PointKind::Fatou, "{r}");
    }
    for r in ["inf", "1/2", "0", "2", "2/3"] {
        assert_eq!(q.classify_cusp(cusp(r)), PointKind::Julia, "{r}");
    }
    let c = cubic();
    assert_eq!(c.classify_cusp(cusp("1")), PointKind::Julia);
    assert_eq!(c.classify_cusp(cusp("inf")), PointKind::Fatou);
    assert_eq!(c.classify_cusp(cusp("0")), PointKind::Fatou);
}

#[test]
fn quadratic_julia_cusps_die_quickly() {
    let ev = quad();
    for r in ["0", "1/3", "3/5", "2/5", "-4/3", "5/7"] {
        let o = ev.iterate_cusp_orbit(cusp(r), 50);
        if ev.classify_cusp(cusp(r)) == PointKind::Julia {
            assert!(matches!(o.terminal, Terminal::BecomesPeripheral(_)), "{r}: {:?}", o.terminal);
        }
    }
}

#[test]
fn cubic_fatou_orbit_enters_a_cycle() {
    let o = cubic().iterate_cusp_orbit(cusp("0"), 20);
    assert_eq!(o.terminal, Terminal::EntersAttractorCycle(vec![cusp("0"), cusp("inf")]));
}

#[test]
fn iterate_matches_second_iterate_map() {
    let ev = quad();
    let f2 = quadratic_example().compose(&quadratic_example());
    let ev2 = build_evaluator(&f2, &standard_marking(SpherePoint::rat(1, 4))).unwrap();
    for r in ["0", "1", "2", "-1", "1/3", "3/5", "2/3", "inf", "1/2", "5/3"] {
        let two = match ev.fate(cusp(r)) {
            CuspFate::Essential(c) => ev.fate(c),
            other => other,
        };
        assert_eq!(ev2.fate(cusp(r)), two, "{r}");
    }
}

#[test]
fn essential_fates_survive_doubled_depth() {
    for ev in [quad(), cubic()] {
        for r in ["0", "1", "2", "1/2", "-1/2", "3/5", "inf"] {
            if let f @ CuspFate::Essential(_) = ev.cusp_pullback(cusp(r), 0.5, 12) {
                assert_eq!(ev.cusp_pullback(cusp(r), 0.5, 24), f, "{r}");
            }
        }
    }
}

#[test]
fn admissible_multipliers_small_degrees() {
    // degree partitions {2}, {1}, {1, 1}
    let want: Vec<_> = [(1, 2), (1, 1), (2, 1)].iter().map(|&(n, d)| rational(n, d)).collect();
    assert_eq!(admissible_multipliers(2), want);
    assert_eq!(admissible_multipliers(1), vec![rational(1, 1)]);
    assert!(admissible_multipliers(3).contains(&rational(1, 3)));
    assert!(admissible_multipliers(3).contains(&rational(3, 2)));
    assert!(!admissible_multipliers(3).contains(&rational(5, 6)));
}

#[test]
fn snapping() {
    assert_eq!(snap_multiplier(0.51, 2).unwrap(), rational(1, 2));
    assert!(matches!(snap_multiplier(0.75, 2), Err(PullbackError::NoAdmissible { .. })));
}

#[test]
fn attractors() {
    let q = quad().find_attractor(6, 50);
    assert_eq!(q.attractor, vec![cusp("-1"), cusp("1")]);
    assert!(q.closure.passed);
    assert!(q.undecided.is_empty());
    let c = cubic().find_attractor(6, 50);
    assert_eq!(c.attractor, vec![cusp("0"), cusp("inf")]);
    assert!(c.closure.passed);
}

#[test]
fn fate_serialization() {
    let e = serde_json::to_string(&CuspFate::Essential(cusp("-1/2"))).unwrap();
    assert_eq!(e, r#"{"fate":"essential","target":"-1/2"}"#);
    assert_eq!(serde_json::to_string(&CuspFate::Peripheral).unwrap(), r#"{"fate":"peripheral"}"#);
}

#[test]
fn quadratic_fates_repeat_under_translation_by_four() {
    // the curve of infinity pulls back peripherally, so its twist lifts
    let ev = quad();
    for r in curvepull::exact_farey::cusps_up_to_height(7) {
        if r.is_infinity() {
            continue;
        }
        let s = curvepull::exact_farey::cusp_normalize(r.p() + 4 * r.q(), r.q()).unwrap();
        assert_eq!(ev.fate(r), ev.fate(s), "{r} vs {s}");
    }
}
