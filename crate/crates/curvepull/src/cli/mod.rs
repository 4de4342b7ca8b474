//! The `curvepull` command line: `analyze`, `cusp-orbit`, `attractor`, `verify`.
//!
//! Exit codes: 2 parse error, 3 map not postcritically finite, 4 violated
//! precondition, 5 verification failure, 1 I/O trouble.

pub mod report;
pub mod spec;
mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::exact_farey::{parse_rational, Cusp};
use crate::oracle_topo::CALIBRATED;
use crate::pullback::{build_evaluator, CuspFate, CuspSettings, PullbackError, SigmaEvaluator};
use crate::ratmap::PointKind;
use report::{complex_pair, map_json, to_json, ConventionInfo, EffectiveSettings, RunReport};
pub use spec::{LoadedSpec, MapSpecFile, Settings};

pub const MAX_HEIGHT: i64 = 200;
pub const PRECISION_ENV: &str = "CURVEPULL_PRECISION";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("map is not postcritically finite: {0}")]
    NotPcf(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::NotPcf(_) => 3,
            CliError::Precondition(_) => 4,
            CliError::Verification(_) => 5,
            CliError::Io(_) => 1,
        }
    }
}

impl From<PullbackError> for CliError {
    fn from(e: PullbackError) -> CliError {
        match e {
            PullbackError::Map(m) => spec::classify_map_error(m),
            PullbackError::Precondition(s) => CliError::Precondition(s),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
    Dot,
    Svg,
}

#[derive(Debug, Parser)]
#[command(name = "curvepull", version, about = "Curve pullback for rational maps with four marked points")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Map spec file (JSON)
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Cusp as p/q or inf
    #[arg(long, global = true)]
    pub cusp: Option<String>,
    #[arg(long, global = true)]
    pub height: Option<i64>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// Horoball parameter as a rational, e.g. 1/2
    #[arg(long, global = true)]
    pub t: Option<String>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Working precision in bits; CURVEPULL_PRECISION overrides it
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output format; `text` for verify and `json` otherwise by default
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write every artifact into this directory instead of printing one
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Record wall-clock time in the report
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Portraits, postcritical classification and static reducibility
    Analyze,
    /// Iterate the pullback on one cusp
    CuspOrbit,
    /// Search for the finite cusp attractor
    Attractor,
    /// Run the property suites and print a pass/fail matrix
    Verify,
}

/// Named output files of one command.
pub struct Artifacts {
    pub files: Vec<(String, Format, String)>,
    /// Short human summary.
    pub summary: String,
    pub failed: Option<String>,
}

struct Ctx {
    spec: Option<LoadedSpec>,
    precision: u32,
    t: String,
    settings: CuspSettings,
    seed: u64,
    height: Option<i64>,
    max_iter: Option<usize>,
    cusp: Option<String>,
    timing: bool,
}

fn resolve(cli: &Cli) -> Result<Ctx, CliError> {
    let spec = match &cli.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?;
            Some(MapSpecFile::load(&text)?)
        }
        None => None,
    };
    let st = spec.as_ref().map(|s| s.file.settings.clone()).unwrap_or_default();
    let env = match std::env::var(PRECISION_ENV) {
        Ok(v) => Some(v.trim().parse::<u32>().map_err(|_| CliError::Parse(format!("{PRECISION_ENV}={v:?}")))?),
        Err(_) => None,
    };
    let precision = env.or(cli.precision).or(st.precision).unwrap_or(53);
    if precision != 53 {
        return Err(CliError::Precondition(format!(
            "precision {precision} requested; only 53-bit floating point is implemented"
        )));
    }
    let t = cli.t.clone().or(st.t.clone()).unwrap_or_else(|| "1/2".into());
    let tv = parse_rational(&t).ok_or_else(|| CliError::Parse(format!("bad t {t:?}")))?;
    let tf = tv.to_f64().unwrap_or(f64::NAN);
    if !(tf > 0.0 && tf <= 1.0) {
        return Err(CliError::Precondition(format!("t = {t} must lie in (0, 1]")));
    }
    let depth = cli.depth.or(st.depth).unwrap_or(12);
    if !(4..=40).contains(&depth) {
        return Err(CliError::Precondition(format!("depth {depth} must lie in 4..=40")));
    }
    Ok(Ctx {
        spec,
        precision,
        t,
        settings: CuspSettings { t: tf, depth },
        seed: cli.seed.or(st.seed).unwrap_or(0),
        height: cli.height.or(st.height),
        max_iter: cli.max_iter.or(st.max_iter),
        cusp: cli.cusp.clone(),
        timing: cli.timing,
    })
}

impl Ctx {
    fn require_spec(&self) -> Result<&LoadedSpec, CliError> {
        self.spec.as_ref().ok_or_else(|| CliError::Precondition("--spec is required".into()))
    }

    fn evaluator(&self) -> Result<SigmaEvaluator, CliError> {
        let s = self.require_spec()?;
        Ok(build_evaluator(&s.f, &s.marked)?.with_settings(self.settings))
    }

    fn report<T: Serialize>(&self, command: &'static str, tau0: Option<num_complex::Complex64>, result: T, start: Instant) -> String {
        to_json(&RunReport {
            tool: "curvepull",
            version: env!("CARGO_PKG_VERSION"),
            command,
            input_hash: self.spec.as_ref().map(|s| s.hash.clone()).unwrap_or_else(|| "builtin".into()),
            tau0: tau0.map(complex_pair),
            convention: ConventionInfo::of(CALIBRATED),
            settings: EffectiveSettings { precision: self.precision, t: self.t.clone(), depth: self.settings.depth, seed: self.seed },
            result,
            timing_ms: self.timing.then(|| start.elapsed().as_millis()),
        })
    }
}

fn tau0_of(ev: &SigmaEvaluator) -> Option<num_complex::Complex64> {
    (!ev.constant).then_some(ev.tau0)
}

fn kind_label(k: PointKind) -> String {
    k.to_string()
}

fn cmd_analyze(ctx: &Ctx) -> Result<Artifacts, CliError> {
    let start = Instant::now();
    let s = ctx.require_spec()?;
    let f = &s.f;
    let cls = f.classify_fatou_julia().map_err(spec::classify_map_error)?;
    let pcs = f.postcritical_set().map_err(spec::classify_map_error)?;
    let dynamical = f.dynamical_portrait(&s.marked).map_err(spec::classify_map_error)?;
    let stat = f.static_portrait(&s.marked).map_err(spec::classify_map_error)?;
    let reducible = f.is_statically_reducible(&s.marked).map_err(spec::classify_map_error)?;
    let decomposition = match &reducible {
        Some(_) => {
            let (m, g) = f.decompose_statically_reducible(&s.marked).map_err(spec::classify_map_error)?;
            Some(serde_json::json!({
                "moebius": map_json(&m),
                "g": map_json(&g),
                "note": "f = M o g with M a marked-set involution; the cusp attractor of f has the same kind as that of g",
            }))
        }
        None => None,
    };
    let lattes = f.has_lattes_signature().map_err(spec::classify_map_error)?;
    let tau0 = build_evaluator(f, &s.marked).ok().and_then(|ev| tau0_of(&ev));
    let result = serde_json::json!({
        "map": map_json(f),
        "degree": f.degree(),
        "marked": s.marked,
        "a": s.a,
        "postcritical": pcs,
        "classification": cls,
        "dynamical_portrait": dynamical,
        "static_portrait": stat,
        "statically_reducible": reducible,
        "decomposition": decomposition,
        "lattes_signature": lattes,
    });
    let json = ctx.report("analyze", tau0, result, start);
    let mut csv = String::from("portrait,from,to,weight\n");
    for (name, p) in [("dynamical", &dynamical), ("static", &stat)] {
        for (a, b, w) in p.labeled_edges() {
            csv.push_str(&format!("{name},{a},{b},{w}\n"));
        }
    }
    let summary = format!(
        "degree {}, fatou {:?}, julia {:?}, statically reducible: {}, (2,2,2,2) signature: {}",
        f.degree(),
        cls.fatou(),
        cls.julia(),
        reducible.map(|x| x.to_string()).unwrap_or_else(|| "no".into()),
        lattes
    );
    Ok(Artifacts {
        files: vec![
            ("analyze.json".into(), Format::Json, json),
            ("dynamical.dot".into(), Format::Dot, dynamical.to_dot()),
            ("static.dot".into(), Format::Dot, stat.to_dot()),
            ("portraits.csv".into(), Format::Csv, csv),
        ],
        summary,
        failed: None,
    })
}

fn parse_cusp(s: &str) -> Result<Cusp, CliError> {
    s.parse().map_err(|_| CliError::Parse(format!("bad cusp {s:?}")))
}

#[derive(Serialize)]
struct OrbitResult {
    cusp: Cusp,
    max_iter: usize,
    orbit: crate::pullback::OrbitRecord,
    multipliers: Vec<String>,
    kinds: Vec<String>,
}

fn cmd_cusp_orbit(ctx: &Ctx) -> Result<Artifacts, CliError> {
    let start = Instant::now();
    let r = parse_cusp(ctx.cusp.as_deref().ok_or_else(|| CliError::Precondition("--cusp is required".into()))?)?;
    let max_n = ctx.max_iter.unwrap_or(50);
    let ev = ctx.evaluator()?;
    let orbit = ev.iterate_cusp_orbit(r, max_n);
    let cusps = orbit.cusps();
    let mut multipliers = Vec::new();
    let mut kinds = Vec::new();
    let mut points = Vec::new();
    for (i, f) in orbit.fates.iter().enumerate() {
        let c = cusps[i];
        kinds.push(kind_label(ev.classify_cusp(c)));
        multipliers.push(match f {
            CuspFate::Undecided(_) => String::new(),
            _ => ev.multiplier_from_horoballs(c).map(|m| m.to_string()).unwrap_or_default(),
        });
        if let Some(tr) = ev.analyze_cusp(c, ctx.settings.t, ctx.settings.depth).trace {
            points.extend(tr.images.iter().map(|d| d.image.plain()));
        }
    }
    let csv = report::orbit_csv(&orbit, &multipliers, &kinds);
    let svg = report::half_plane_svg(&cusps, ctx.settings.t, &points);
    let summary = format!("{} -> {:?} after {} steps", r, orbit.terminal, orbit.fates.len());
    let json = ctx.report("cusp-orbit", tau0_of(&ev), OrbitResult { cusp: r, max_iter: max_n, orbit, multipliers, kinds }, start);
    Ok(Artifacts {
        files: vec![
            ("orbit.json".into(), Format::Json, json),
            ("orbit.csv".into(), Format::Csv, csv),
            ("orbit.svg".into(), Format::Svg, svg),
        ],
        summary,
        failed: None,
    })
}

fn cmd_attractor(ctx: &Ctx) -> Result<Artifacts, CliError> {
    let start = Instant::now();
    let height = ctx.height.unwrap_or(30);
    if !(0..=MAX_HEIGHT).contains(&height) {
        return Err(CliError::Precondition(format!("height {height} must lie in 0..={MAX_HEIGHT}")));
    }
    let max_n = ctx.max_iter.unwrap_or(100);
    let ev = ctx.evaluator()?;
    let rep = ev.find_attractor(height, max_n);
    let csv = report::terminals_csv(&rep.orbits);
    let svg = report::half_plane_svg(&rep.attractor, ctx.settings.t, &[]);
    let summary = format!(
        "height {height}: {} orbits, attractor {{{}}}, closure {}, undecided {}, julia peripheral {}/{}",
        rep.orbits.len(),
        rep.attractor.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "),
        if rep.closure.passed { "passed" } else { "FAILED" },
        rep.undecided.len(),
        rep.julia_peripheral,
        rep.julia_total
    );
    let json = ctx.report("attractor", tau0_of(&ev), &rep, start);
    Ok(Artifacts {
        files: vec![
            ("attractor.json".into(), Format::Json, json),
            ("orbits.csv".into(), Format::Csv, csv),
            ("attractor.svg".into(), Format::Svg, svg),
        ],
        summary,
        failed: None,
    })
}

fn cmd_verify(ctx: &Ctx) -> Result<Artifacts, CliError> {
    let start = Instant::now();
    let rows = match &ctx.spec {
        Some(s) => verify::run_for(&s.f, &s.marked, ctx.settings, ctx.seed)?,
        None => verify::run_builtin(ctx.settings, ctx.seed)?,
    };
    let table = verify::matrix(&rows);
    let failed: Vec<String> = rows.iter().filter(|r| !r.pass).map(|r| format!("{} on {}", r.suite, r.map)).collect();
    let json = ctx.report("verify", None, &rows, start);
    let mut csv = String::from("suite,map,pass,checks,detail\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{},\"{}\"\n", r.suite, r.map, r.pass, r.checks, r.detail.replace('"', "'")));
    }
    Ok(Artifacts {
        files: vec![("verify.json".into(), Format::Json, json), ("verify.csv".into(), Format::Csv, csv)],
        summary: table,
        failed: (!failed.is_empty()).then(|| failed.join("; ")),
    })
}

/// Parse `args`, run, and write the selected artifact (or a summary when
/// `--out` is given) to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            write!(stdout, "{e}")?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Parse(e.to_string())),
    };
    let ctx = resolve(&cli)?;
    let go = || match cli.command {
        Command::Analyze => cmd_analyze(&ctx),
        Command::CuspOrbit => cmd_cusp_orbit(&ctx),
        Command::Attractor => cmd_attractor(&ctx),
        Command::Verify => cmd_verify(&ctx),
    };
    let arts = match cli.jobs {
        Some(0) => return Err(CliError::Precondition("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Precondition(e.to_string()))?
            .install(go)?,
        None => go()?,
    };
    let mut summary = arts.summary.trim_end().to_string();
    summary.push('\n');
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for (name, _, body) in &arts.files {
                std::fs::write(dir.join(name), body)?;
            }
            std::fs::write(dir.join("summary.txt"), &summary)?;
            write!(stdout, "{summary}")?;
        }
        None => {
            let format = cli.format.unwrap_or(match cli.command {
                Command::Verify => Format::Text,
                _ => Format::Json,
            });
            if format == Format::Text {
                write!(stdout, "{summary}")?;
            } else {
                let picked: Vec<&str> = arts.files.iter().filter(|f| f.1 == format).map(|f| f.2.as_str()).collect();
                if picked.is_empty() {
                    return Err(CliError::Precondition(format!("{format:?} output is not available for this command")));
                }
                write!(stdout, "{}", picked.concat())?;
            }
        }
    }
    match arts.failed {
        Some(msg) => Err(CliError::Verification(msg)),
        None => Ok(()),
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(args, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("curvepull: {e}");
            e.exit_code()
        }
    }
}
