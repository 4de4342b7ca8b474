//! Report envelopes, orbit tables and half-plane plots.

use std::fmt::Write as _;

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::exact_farey::Cusp;
use crate::fmt17;
use crate::oracle_topo::Convention;
use crate::pullback::{CuspFate, OrbitRecord, Terminal};
use crate::ratmap::RationalMap;

#[derive(Clone, Debug, Serialize)]
pub struct ConventionInfo {
    pub name: Convention,
    pub rule: &'static str,
}

impl ConventionInfo {
    pub fn of(c: Convention) -> ConventionInfo {
        let rule = match c {
            Convention::PQ => "p/q -> (p, q)",
            Convention::PNegQ => "p/q -> (p, -q)",
            Convention::QP => "p/q -> (q, p)",
            Convention::QNegP => "p/q -> (q, -p)",
        };
        ConventionInfo { name: c, rule }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EffectiveSettings {
    pub precision: u32,
    pub t: String,
    pub depth: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub input_hash: String,
    /// `[re, im]`, absent when the marking makes σ constant or was not needed.
    pub tau0: Option<[String; 2]>,
    pub convention: ConventionInfo,
    pub settings: EffectiveSettings,
    pub result: T,
    /// Wall-clock milliseconds; only with `--timing`, since it breaks byte-identical reruns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

pub fn complex_pair(z: C) -> [String; 2] {
    [fmt17(z.re), fmt17(z.im)]
}

/// Coefficients, constant term first: exact strings when available, else `[re, im]`.
pub fn map_json(f: &RationalMap) -> serde_json::Value {
    match f.exact() {
        Some((n, d)) => {
            let s = |p: &crate::ratmap::QPoly| p.c.iter().map(|x| x.to_string()).collect::<Vec<_>>();
            serde_json::json!({ "num": s(n), "den": s(d) })
        }
        None => {
            let s = |p: &crate::ratmap::CPoly| p.c.iter().map(|z| complex_pair(*z)).collect::<Vec<_>>();
            serde_json::json!({ "num": s(f.num()), "den": s(f.den()) })
        }
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct OrbitRow<'a> {
    step: usize,
    cusp: String,
    fate: &'a str,
    target: String,
    multiplier: String,
    kind: String,
}

/// One row per pullback step of an orbit.
pub fn orbit_csv(o: &OrbitRecord, multipliers: &[String], kinds: &[String]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(["step", "cusp", "fate", "target", "multiplier", "kind"]).expect("in-memory csv");
    let cusps = o.cusps();
    for (i, f) in o.fates.iter().enumerate() {
        let (fate, target) = match f {
            CuspFate::Essential(c) => ("essential", c.to_string()),
            CuspFate::Peripheral => ("peripheral", String::new()),
            CuspFate::Undecided(_) => ("undecided", String::new()),
        };
        w.serialize(OrbitRow {
            step: i + 1,
            cusp: cusps[i].to_string(),
            fate,
            target,
            multiplier: multipliers.get(i).cloned().unwrap_or_default(),
            kind: kinds.get(i).cloned().unwrap_or_default(),
        })
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
}

#[derive(Serialize)]
struct TerminalRow {
    start: String,
    terminal: &'static str,
    steps: usize,
    cycle: String,
}

/// One row per starting cusp of an attractor search.
pub fn terminals_csv(orbits: &[OrbitRecord]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(["start", "terminal", "steps", "cycle"]).expect("in-memory csv");
    for o in orbits {
        let (terminal, cycle) = match &o.terminal {
            Terminal::EntersAttractorCycle(c) => ("cycle", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")),
            Terminal::BecomesPeripheral(_) => ("peripheral", String::new()),
            Terminal::Exhausted => ("exhausted", String::new()),
            Terminal::Undecided(_) => ("undecided", String::new()),
        };
        w.serialize(TerminalRow { start: o.start.to_string(), terminal, steps: o.fates.len(), cycle })
            .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
}

/// The window `[-3, 3] × [0, 2.5]` with the horoballs `B_t(r)` of `cusps`
/// shaded and `points` marked.
pub fn half_plane_svg(cusps: &[Cusp], t: f64, points: &[C]) -> String {
    let (x0, x1, ymax) = (-3.0, 3.0, 2.5);
    let (w, h) = (720.0, 300.0);
    let sx = |x: f64| (x - x0) / (x1 - x0) * w;
    let sy = |y: f64| h - y / ymax * h;
    let s = w / (x1 - x0);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    for r in cusps {
        if r.is_infinity() {
            let top = sy(ymax.min(1.0 / t));
            if 1.0 / t < ymax {
                let _ = writeln!(out, r##"<rect x="0" y="0" width="{w}" height="{top:.3}" fill="#c6dbef" stroke="#3182bd"/>"##);
            }
            continue;
        }
        let x = r.to_f64();
        let rad = t / (2.0 * (r.q() as f64).powi(2));
        if x + rad < x0 || x - rad > x1 {
            continue;
        }
        let _ = writeln!(
            out,
            r##"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="#c6dbef" stroke="#3182bd"><title>{r}</title></circle>"##,
            sx(x),
            sy(rad),
            rad * s
        );
    }
    for z in points {
        if z.re < x0 || z.re > x1 || z.im > ymax || !z.im.is_finite() {
            continue;
        }
        let _ = writeln!(out, r##"<circle cx="{:.3}" cy="{:.3}" r="3" fill="#e6550d"/>"##, sx(z.re), sy(z.im));
    }
    let _ = writeln!(out, r#"<line x1="0" y1="{h}" x2="{w}" y2="{h}" stroke="black"/>"#);
    out.push_str("</svg>\n");
    out
}
