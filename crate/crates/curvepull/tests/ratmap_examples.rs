use curvepull::exact_farey::rational;
use curvepull::ratmap::*;
use num_complex::Complex64;

fn edges(p: &Portrait) -> Vec<(String, String, u32)> {
    p.labeled_edges()
}

fn e(a: &str, b: &str, w: u32) -> (String, String, u32) {
    (a.to_string(), b.to_string(), w)
}

fn twisted() -> RationalMap {
    let a = standard_marking(SpherePoint::rat(1, 4));
    let m = moebius_transposition(&a, &SpherePoint::rat(1, 4), &SpherePoint::int(0)).unwrap();
    m.compose(&quadratic_example())
}

fn pset(f: &RationalMap) -> Vec<SpherePoint> {
    f.postcritical_set().unwrap().points
}

#[test]
fn transposition_matches_closed_form() {
    let a = standard_marking(SpherePoint::rat(1, 4));
    let m = moebius_transposition(&a, &SpherePoint::rat(1, 4), &SpherePoint::int(0)).unwrap();
    let want = RationalMap::from_ratios(&[(-1, 4), (1, 1)], &[(-1, 1), (1, 1)]).unwrap();
    assert_eq!(m, want);
    for z in &a {
        assert!(m.eval(&m.eval(z)).same(z));
    }
    assert!(moebius_transposition(&a, &SpherePoint::rat(1, 4), &SpherePoint::rat(1, 4)).is_err());
}

#[test]
fn twisted_map_coefficients() {
    // M o g = (16z^2 - 16z + 3) / (16z^2 - 16z)
    let want = RationalMap::from_ratios(&[(3, 1), (-16, 1), (16, 1)], &[(0, 1), (-16, 1), (16, 1)]).unwrap();
    assert_eq!(twisted(), want);
    assert_eq!(twisted().compose(&RationalMap::identity()), twisted());
}

#[test]
fn quadratic_portrait() {
    let g = quadratic_example();
    let p = g.dynamical_portrait(&pset(&g)).unwrap();
    assert_eq!(
        edges(&p),
        vec![e("0", "1", 1), e("1", "1", 1), e("1/2", "0", 2), e("inf", "inf", 2)]
    );
}

#[test]
fn cubic_portrait() {
    let g = cubic_example();
    let p = g.dynamical_portrait(&pset(&g)).unwrap();
    assert_eq!(
        edges(&p),
        vec![e("-1/3", "inf", 2), e("-3", "1", 2), e("0", "1", 1), e("1", "0", 3), e("inf", "inf", 1)]
    );
}

#[test]
fn twisted_portrait_and_static_component() {
    let f = twisted();
    let a = pset(&f);
    let p = f.dynamical_portrait(&a).unwrap();
    assert_eq!(
        edges(&p),
        vec![e("0", "inf", 1), e("1", "inf", 1), e("1/2", "1/4", 2), e("1/4", "0", 1), e("inf", "1", 2)]
    );
    let s = f.static_portrait(&a).unwrap();
    assert!(s.static_components().contains(&vec![e("1/4", "0", 1)]));
    assert!(p.to_dot().contains("2:1"));
}

#[test]
fn static_reducibility() {
    let f = twisted();
    assert!(f.is_statically_reducible(&pset(&f)).unwrap().unwrap().same(&SpherePoint::rat(1, 4)));
    let g = quadratic_example();
    let a = standard_marking(SpherePoint::rat(1, 4));
    assert!(g.is_statically_reducible(&a).unwrap().unwrap().same(&SpherePoint::rat(1, 4)));
    let sq = RationalMap::from_ratios(&[(0, 1), (0, 1), (1, 1)], &[(1, 1)]).unwrap();
    let a = standard_marking(SpherePoint::int(-1));
    assert!(sq.is_statically_reducible(&a).unwrap().is_none());
}

#[test]
fn decomposition_recovers_quadratic() {
    let f = twisted();
    let a = pset(&f);
    let (m, g) = f.decompose_statically_reducible(&a).unwrap();
    assert_eq!(g, quadratic_example());
    assert_eq!(m.compose(&g), f);
    assert_eq!(m.compose(&m), RationalMap::identity());
    let (m2, g2) = g.decompose_statically_reducible(&standard_marking(SpherePoint::rat(1, 4))).unwrap();
    assert_eq!(m2, RationalMap::identity());
    assert_eq!(g2, g);
    for k in 0..20 {
        let z = Complex64::new(0.37 * k as f64 - 2.9, 0.11 * k as f64 + 0.05);
        let u = m.eval_c(g.eval_c(z).unwrap()).unwrap();
        let v = f.eval_c(z).unwrap();
        assert!((u - v).norm() < 1e-10);
    }
}

#[test]
fn lattes_signature() {
    let h = lattes_sq(&rational(5, 1)).unwrap();
    let p = pset(&h);
    let labels: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    assert_eq!(labels, vec!["0", "1/5", "1", "inf"]);
    let crit = h.critical_points().unwrap();
    assert_eq!(crit.len(), 6);
    assert!(crit.iter().all(|c| c.degree == 2));
    let float = lattes(Complex64::new(5f64.sqrt(), 0.0)).unwrap();
    let fp = pset(&float);
    assert_eq!(fp.len(), 4);
    for (x, y) in fp.iter().zip(p.iter()) {
        assert!(x.same(y));
    }
    assert!(lattes(Complex64::new(1.0, 0.0)).is_err());
    assert!(h.has_lattes_signature().unwrap());
    assert!(!quadratic_example().has_lattes_signature().unwrap());
    assert!(!cubic_example().has_lattes_signature().unwrap());
}

#[test]
fn combinatorial_portrait_agrees_with_computed() {
    for g in [quadratic_example(), cubic_example()] {
        let p = g.dynamical_portrait(&pset(&g)).unwrap();
        let owned = edges(&p);
        let spec: Vec<(&str, &str, u32)> = owned.iter().map(|(a, b, w)| (a.as_str(), b.as_str(), *w)).collect();
        let c = Portrait::combinatorial(g.degree() as u32, &spec).unwrap();
        assert_eq!(edges(&c), owned);
        let mut want: Vec<String> = pset(&g).iter().map(|z| z.to_string()).collect();
        want.sort();
        assert_eq!(c.postcritical(), want);
    }
}

#[test]
fn pillow_map_portrait() {
    // Degree 3 with b, c, d fixed and postcritical and a a regular fixed point.
    // The tiling only pins down that much; this is one branching that fits.
    let p = Portrait::combinatorial(3, &[("a", "a", 1), ("b", "b", 3), ("c", "c", 1), ("d", "d", 1), ("x", "c", 2), ("y", "d", 2)])
        .unwrap();
    assert_eq!(p.postcritical(), ["b", "c", "d"]);
    assert!(p.labeled_edges().contains(&e("a", "a", 1)));
}

#[test]
fn combinatorial_portrait_rejects_bad_branching() {
    // too few critical points
    assert!(Portrait::combinatorial(3, &[("a", "a", 1), ("x", "b", 2), ("b", "b", 1)]).is_err());
    // fibre over b too large
    assert!(Portrait::combinatorial(2, &[("b", "b", 2), ("x", "b", 2)]).is_err());
    // node without an image
    assert!(Portrait::combinatorial(2, &[("x", "b", 2), ("y", "c", 2)]).is_err());
}
