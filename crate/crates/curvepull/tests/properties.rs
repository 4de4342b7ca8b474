use curvepull::cover::{basepoint_for, hyperbolic_distance, torus_build, PreimageTracker};
use curvepull::exact_farey::*;
use curvepull::oracle_topo::*;
use curvepull::pullback::*;
use curvepull::ratmap::*;
use num_complex::Complex64 as C;
use num_rational::BigRational;
use proptest::prelude::*;
use std::sync::OnceLock;

fn quad() -> &'static SigmaEvaluator {
    static E: OnceLock<SigmaEvaluator> = OnceLock::new();
    E.get_or_init(|| build_evaluator(&quadratic_example(), &standard_marking(SpherePoint::rat(1, 4))).unwrap())
}

fn cubic() -> &'static SigmaEvaluator {
    static E: OnceLock<SigmaEvaluator> = OnceLock::new();
    E.get_or_init(|| build_evaluator(&cubic_example(), &standard_marking(SpherePoint::rat(1, 5))).unwrap())
}

fn evaluator(which: bool) -> &'static SigmaEvaluator {
    if which { quad() } else { cubic() }
}

fn cusp_strategy(h: i64) -> impl Strategy<Value = Cusp> {
    (-h..=h, 0..=h).prop_filter_map("coprime", |(p, q)| cusp_normalize(p, q).ok())
}

fn modular_strategy() -> impl Strategy<Value = ModularElement> {
    prop::collection::vec((any::<bool>(), -3i64..=3), 0..6).prop_map(|w| {
        w.into_iter().fold(ModularElement::IDENTITY, |m, (s, k)| {
            let g = if s { ModularElement::S } else { ModularElement::translation(k) };
            m.mul(&g).unwrap()
        })
    })
}

fn small_rational(lo: i64, hi: i64) -> impl Strategy<Value = BigRational> {
    (lo..=hi, 1i64..=64).prop_map(|(n, d)| rational(n, d))
}

/// Points of the region `|Re| ≤ 1`, `|τ ± 1/2| ≥ 1/2`, kept away from the cusps.
fn domain_point() -> impl Strategy<Value = C> {
    (-0.95f64..0.95, 0.15f64..2.5).prop_filter("outside the half-discs", |(x, y)| {
        let z = C::new(*x, *y);
        (z - 0.5).norm() > 0.55 && (z + 0.5).norm() > 0.55
    })
    .prop_map(|(x, y)| C::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn horoball_membership_is_equivariant(
        m in modular_strategy(), r in cusp_strategy(12), t in small_rational(1, 64),
        x in small_rational(-64, 64), y in small_rational(1, 64),
    ) {
        let b = Horoball::new(r, t);
        let tau = ExactPoint::new(x, y);
        let mb = horoball_map(&m, &b).unwrap();
        prop_assert_eq!(horoball_contains(&b, &tau), horoball_contains(&mb, &moebius_apply_point(&m, &tau)));
    }

    #[test]
    fn moebius_action_is_a_group_action(m1 in modular_strategy(), m2 in modular_strategy(), r in cusp_strategy(15)) {
        let lhs = moebius_apply(&m1.mul(&m2).unwrap(), r).unwrap();
        let rhs = moebius_apply(&m1, moebius_apply(&m2, r).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(moebius_apply(&m1.inverse(), moebius_apply(&m1, r).unwrap()).unwrap(), r);
    }

    #[test]
    fn frames_send_infinity_to_their_cusp(r in cusp_strategy(40)) {
        prop_assert_eq!(moebius_apply(&ModularElement::frame_of(r), Cusp::INFINITY).unwrap(), r);
    }

    #[test]
    fn gamma2_preserves_puncture_labels(m in modular_strategy(), r in cusp_strategy(15)) {
        if m.in_gamma2() {
            prop_assert_eq!(gamma2_class(moebius_apply(&m, r).unwrap()), gamma2_class(r));
        }
    }

    #[test]
    fn horoballs_up_to_unit_size_are_disjoint(r1 in cusp_strategy(30), r2 in cusp_strategy(30), t in small_rational(1, 64)) {
        prop_assume!(r1 != r2 && t <= rational(1, 1));
        prop_assert!(horoballs_disjoint(&Horoball::new(r1, t.clone()), &Horoball::new(r2, t)));
    }

    #[test]
    fn disjointness_matches_circle_geometry(r1 in cusp_strategy(30), r2 in cusp_strategy(30), t1 in small_rational(1, 64), t2 in small_rational(1, 64)) {
        let one = rational(1, 1);
        // the circles themselves, or the height line 1/t at infinity
        let geometric = match (r1.is_infinity(), r2.is_infinity()) {
            (true, true) => false,
            (true, false) | (false, true) => {
                let (ti, tf, q) = if r1.is_infinity() { (&t1, &t2, r2.q()) } else { (&t2, &t1, r1.q()) };
                tf / rational(q * q, 1) <= &one / ti
            }
            (false, false) => {
                let d1 = &t1 / rational(r1.q() * r1.q(), 1);
                let d2 = &t2 / rational(r2.q() * r2.q(), 1);
                let dx = rational(r1.p(), r1.q()) - rational(r2.p(), r2.q());
                let (a, b) = (&d1 / rational(2, 1), &d2 / rational(2, 1));
                r1 != r2 && &dx * &dx + (&a - &b) * (&a - &b) >= (&a + &b) * (&a + &b)
            }
        };
        prop_assert_eq!(horoballs_disjoint(&Horoball::new(r1, t1.clone()), &Horoball::new(r2, t2.clone())), geometric);
    }

    #[test]
    fn identified_cusp_contains_the_point(x in small_rational(-64, 64), y in small_rational(1, 64), t in small_rational(1, 64)) {
        prop_assume!(t <= rational(1, 1));
        let tau = ExactPoint::new(x, y);
        match cusp_identify(&tau, &t) {
            Some(r) => prop_assert!(horoball_contains(&Horoball::new(r, t), &tau)),
            None => for r in cusps_up_to_height(8) {
                prop_assert!(!horoball_contains(&Horoball::new(r, t.clone()), &tau));
            },
        }
    }

    #[test]
    fn leashed_sequences_settle_under_the_bound(
        c in 0.0f64..100.0, alpha in 0.0f64..0.95, x0 in 0.0f64..1e6,
        noise in prop::collection::vec(0.0f64..=1.0, 1000),
    ) {
        let bound = leash_bound(c, alpha).unwrap();
        let mut x = x0;
        for u in &noise {
            x = alpha * x + c * u;
        }
        prop_assert!(x <= bound + 1e-6);
    }

    #[test]
    fn composition_evaluates_as_composition(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let (g, h) = (quadratic_example(), cubic_example());
        let z = C::new(re, im);
        if let Some(ghz) = h.eval_c(z).and_then(|w| g.eval_c(w)) {
            let c = g.compose(&h).eval_c(z).unwrap();
            prop_assert!((c - ghz).norm() <= 1e-9 * (1.0 + ghz.norm()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, ..ProptestConfig::default() })]

    #[test]
    fn semiconjugacy(which in any::<bool>(), tau in domain_point()) {
        prop_assert!(evaluator(which).semiconjugacy_residual(tau).unwrap() < 1e-6);
    }

    #[test]
    fn sigma_contracts(which in any::<bool>(), z in domain_point(), w in domain_point()) {
        prop_assume!((z - w).norm() > 1e-3);
        let ev = evaluator(which);
        let (sz, sw) = (ev.sigma_eval(z).unwrap(), ev.sigma_eval(w).unwrap());
        prop_assert!(hyperbolic_distance(sz, sw) < hyperbolic_distance(z, w));
    }

    #[test]
    fn essential_pullbacks_keep_cusp_type(which in any::<bool>(), r in cusp_strategy(12)) {
        let ev = evaluator(which);
        if let CuspFate::Essential(r2) = ev.fate(r) {
            prop_assert_eq!(ev.classify_cusp(r2), ev.classify_cusp(r));
        }
    }

    #[test]
    fn essential_fates_stable_under_deeper_approach(which in any::<bool>(), r in cusp_strategy(8)) {
        let ev = evaluator(which);
        if let f @ CuspFate::Essential(_) = ev.cusp_pullback(r, 0.5, 12) {
            prop_assert_eq!(ev.cusp_pullback(r, 0.5, 20), f);
        }
    }

    #[test]
    fn snapped_multipliers_are_admissible(which in any::<bool>(), r in cusp_strategy(8)) {
        let ev = evaluator(which);
        if ev.fate(r).is_decided() {
            let m = ev.multiplier_from_horoballs(r).unwrap();
            prop_assert!(num_traits::Zero::is_zero(&m) || admissible_multipliers(ev.degree()).contains(&m));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn oracle_conserves_degree_and_agrees(which in any::<bool>(), r in cusp_strategy(5)) {
        let ev = evaluator(which);
        let o = Oracle::new(&ev.f, &ev.a, CALIBRATED, 9).unwrap();
        let res = o.analyze(r).unwrap();
        prop_assert_eq!(res.degree_sum(), ev.degree());
        prop_assert!(o.is_admissible(&res.multiplier));
        prop_assert_eq!(&res.fate, &ev.fate(r));
        prop_assert_eq!(res.multiplier, ev.multiplier_from_horoballs(r).unwrap());
    }

    #[test]
    fn moving_the_curve_keeps_its_pullback(which in any::<bool>(), r in cusp_strategy(4), offset in 0.1f64..0.4) {
        let ev = evaluator(which);
        let t = torus_build(basepoint_for(ev.a.to_c64().unwrap()).unwrap()).unwrap();
        let tracker = PreimageTracker::new(&ev.f);
        let classes = |off: f64| -> Vec<(usize, String)> {
            let g = slope_curve(&t, r, 512, CALIBRATED, off).unwrap();
            let mut v: Vec<_> = pullback_components(&tracker, &g)
                .unwrap()
                .iter()
                .map(|c| (c.degree, classify_component(&t, c, CALIBRATED).unwrap().label()))
                .collect();
            v.sort();
            v
        };
        prop_assert_eq!(classes(offset), classes(0.25));
    }
}
