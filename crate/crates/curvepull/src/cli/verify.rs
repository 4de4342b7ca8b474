//! Quick property suites behind `curvepull verify`.

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::CliError;
use crate::cover::hyperbolic_distance;
use crate::exact_farey::*;
use crate::oracle_topo::{calibrate, calibration_cusps, calibration_evaluators, Oracle, CALIBRATED};
use crate::pullback::{build_evaluator, CuspFate, CuspSettings, SigmaEvaluator};
use crate::ratmap::{cubic_example, quadratic_example, standard_marking, RationalMap, SpherePoint};

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRow {
    pub suite: &'static str,
    pub map: String,
    pub pass: bool,
    pub checks: usize,
    pub detail: String,
}

fn row(suite: &'static str, map: &str, checks: usize, failures: Vec<String>) -> SuiteRow {
    SuiteRow {
        suite,
        map: map.to_string(),
        pass: failures.is_empty(),
        checks,
        detail: failures.into_iter().take(3).collect::<Vec<_>>().join("; "),
    }
}

fn random_modular(rng: &mut ChaCha8Rng) -> ModularElement {
    let mut m = ModularElement::IDENTITY;
    for _ in 0..rng.random_range(0..6) {
        let g = if rng.random_bool(0.5) { ModularElement::S } else { ModularElement::translation(rng.random_range(-3..=3)) };
        m = m.mul(&g).expect("short words stay small");
    }
    m
}

fn random_cusp(rng: &mut ChaCha8Rng, h: i64) -> Cusp {
    loop {
        if let Ok(c) = cusp_normalize(rng.random_range(-h..=h), rng.random_range(0..=h)) {
            return c;
        }
    }
}

/// Random point of `|Re| ≤ 1`, `|τ ± 1/2| ≥ 1/2`, away from the cusps.
pub fn random_domain_point(rng: &mut ChaCha8Rng) -> C {
    loop {
        let z = C::new(rng.random_range(-0.95..0.95), rng.random_range(0.15..2.5));
        if (z - 0.5).norm() > 0.55 && (z + 0.5).norm() > 0.55 {
            return z;
        }
    }
}

fn farey_suites(seed: u64) -> Vec<SuiteRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    let n = 300;
    for _ in 0..n {
        let m = random_modular(&mut rng);
        let b = Horoball::new(random_cusp(&mut rng, 12), rational(rng.random_range(1..=64), rng.random_range(1..=64)));
        let tau = ExactPoint::new(rational(rng.random_range(-64..=64), rng.random_range(1..=64)), rational(rng.random_range(1..=64), rng.random_range(1..=64)));
        let mb = horoball_map(&m, &b).expect("small entries");
        if horoball_contains(&b, &tau) != horoball_contains(&mb, &moebius_apply_point(&m, &tau)) {
            bad.push(format!("{m} {}", b.base));
        }
    }
    let eq = row("horoball-equivariance", "-", n, bad);
    let t = rational(9, 10);
    let cusps: Vec<Cusp> = cusps_up_to_height(30).into_iter().filter(|c| c.is_infinity() || (c.p() >= 0 && c.p() <= c.q())).collect();
    let mut bad = Vec::new();
    let mut pairs = 0;
    for i in 0..cusps.len() {
        for j in 0..i {
            pairs += 1;
            if !horoballs_disjoint(&Horoball::new(cusps[i], t.clone()), &Horoball::new(cusps[j], t.clone())) {
                bad.push(format!("{} {}", cusps[i], cusps[j]));
            }
        }
    }
    vec![eq, row("horoball-disjointness", "-", pairs, bad)]
}

fn engine_suites(ev: &SigmaEvaluator, name: &str, seed: u64) -> Vec<SuiteRow> {
    let mut rows = Vec::new();
    if ev.constant {
        let bad = cusps_up_to_height(5)
            .into_iter()
            .filter(|&r| ev.fate(r) != CuspFate::Peripheral)
            .map(|r| r.to_string())
            .collect();
        rows.push(row("constant-peripheral", name, cusps_up_to_height(5).len(), bad));
        return rows;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let fixed = ev.sigma_eval(ev.tau0).map(|s| (s - ev.tau0).norm()).unwrap_or(f64::INFINITY);
    rows.push(row("fixed-point", name, 1, if fixed < 1e-8 { vec![] } else { vec![format!("{fixed:e}")] }));
    let mut bad = Vec::new();
    for _ in 0..25 {
        let tau = random_domain_point(&mut rng);
        match ev.semiconjugacy_residual(tau) {
            Ok(r) if r < 1e-6 => {}
            other => bad.push(format!("{tau}: {other:?}")),
        }
    }
    rows.push(row("semiconjugacy", name, 25, bad));
    let mut bad = Vec::new();
    for _ in 0..25 {
        let (z, w) = (random_domain_point(&mut rng), random_domain_point(&mut rng));
        match (ev.sigma_eval(z), ev.sigma_eval(w)) {
            (Ok(a), Ok(b)) if hyperbolic_distance(a, b) < hyperbolic_distance(z, w) => {}
            _ => bad.push(format!("{z} {w}")),
        }
    }
    rows.push(row("schwarz-pick", name, 25, bad));
    let mut bad = Vec::new();
    let mut events = 0;
    for r in cusps_up_to_height(10) {
        if let CuspFate::Essential(r2) = ev.fate(r) {
            events += 1;
            if ev.classify_cusp(r2) != ev.classify_cusp(r) {
                bad.push(format!("{r} -> {r2}"));
            }
        }
    }
    rows.push(row("cusp-sorting", name, events, bad));
    match Oracle::new(&ev.f, &ev.a, CALIBRATED, seed) {
        Ok(o) => {
            let mut bad = Vec::new();
            let cusps = calibration_cusps();
            for &r in &cusps {
                match o.analyze(r) {
                    Ok(res) => {
                        let m = ev.multiplier_from_horoballs(r).ok();
                        if res.fate != ev.fate(r) || Some(&res.multiplier) != m.as_ref() || res.degree_sum() != ev.degree() || !o.is_admissible(&res.multiplier) {
                            bad.push(format!("{r}: oracle {} analytic {}", res.fate.label(), ev.fate(r).label()));
                        }
                    }
                    Err(e) => bad.push(format!("{r}: {e}")),
                }
            }
            rows.push(row("oracle-agreement", name, cusps.len(), bad));
        }
        Err(e) => rows.push(row("oracle-agreement", name, 0, vec![e.to_string()])),
    }
    rows
}

pub fn run_builtin(settings: CuspSettings, seed: u64) -> Result<Vec<SuiteRow>, CliError> {
    let mut rows = farey_suites(seed);
    for (name, f, a) in [("quadratic", quadratic_example(), SpherePoint::rat(1, 4)), ("cubic", cubic_example(), SpherePoint::rat(1, 5))] {
        let ev = build_evaluator(&f, &standard_marking(a))?.with_settings(settings);
        rows.extend(engine_suites(&ev, name, seed));
    }
    let (q, c) = calibration_evaluators()?;
    let cal = calibrate(&q, &[&c], seed);
    let fail = match &cal {
        Ok(k) if k.chosen == CALIBRATED => vec![],
        Ok(k) => vec![format!("chose {:?}", k.chosen)],
        Err(e) => vec![e.to_string()],
    };
    rows.push(row("calibration", "quadratic+cubic", 1, fail));
    Ok(rows)
}

pub fn run_for(f: &RationalMap, marked: &[SpherePoint], settings: CuspSettings, seed: u64) -> Result<Vec<SuiteRow>, CliError> {
    let mut rows = farey_suites(seed);
    let ev = build_evaluator(f, marked)?.with_settings(settings);
    rows.extend(engine_suites(&ev, "spec", seed));
    Ok(rows)
}

pub fn matrix(rows: &[SuiteRow]) -> String {
    let mut s = String::new();
    for r in rows {
        s.push_str(&format!(
            "{:<4} {:<22} {:<16} {:>6}  {}\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.suite,
            r.map,
            r.checks,
            r.detail
        ));
    }
    s
}
