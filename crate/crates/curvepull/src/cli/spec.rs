//! Map spec files.
//!
//! ```json
//! {
//!   "num": ["1", "-4", "4"],
//!   "den": ["1"],
//!   "marked": ["0", "1", "inf", "1/4"],
//!   "settings": { "t": "1/2", "depth": 12, "height": 30, "max_iter": 100, "seed": 0 }
//! }
//! ```
//!
//! Coefficients run from the constant term up; each is an exact rational
//! string, an integer, or an `[re, im]` pair. A spec with any complex
//! coefficient is evaluated in floating point throughout.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::exact_farey::parse_rational;
use crate::ratmap::point::parse_point_value;
use crate::ratmap::{MarkedMap, QPoly, RatMapError, RationalMap, SpherePoint};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpecFile {
    pub num: Vec<serde_json::Value>,
    pub den: Vec<serde_json::Value>,
    pub marked: Vec<SpherePoint>,
    /// The free marked point; taken from `marked` when absent.
    #[serde(default)]
    pub a: Option<SpherePoint>,
    #[serde(default)]
    pub settings: Settings,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub precision: Option<u32>,
    pub t: Option<String>,
    pub depth: Option<usize>,
    pub height: Option<i64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
}

/// A parsed and validated spec.
#[derive(Clone, Debug)]
pub struct LoadedSpec {
    pub file: MapSpecFile,
    pub f: RationalMap,
    pub marked: Vec<SpherePoint>,
    pub a: SpherePoint,
    /// SHA-256 of the raw spec bytes, hex.
    pub hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Exit-code class of a map error: orbits that never repeat mean the map is
/// not postcritically finite, everything else is a violated precondition.
pub fn classify_map_error(e: RatMapError) -> CliError {
    match e {
        RatMapError::NotEventuallyPeriodic { .. } => CliError::NotPcf(e.to_string()),
        RatMapError::ZeroDenominator | RatMapError::Degenerate(_) => CliError::Parse(e.to_string()),
        _ => CliError::Precondition(e.to_string()),
    }
}

fn coefficient(v: &serde_json::Value) -> Result<SpherePoint, CliError> {
    match parse_point_value(v) {
        Ok(SpherePoint::Infinity) | Err(_) => Err(CliError::Parse(format!("bad coefficient {v}"))),
        Ok(p) => Ok(p),
    }
}

fn build_map(num: &[serde_json::Value], den: &[serde_json::Value]) -> Result<RationalMap, CliError> {
    let n = num.iter().map(coefficient).collect::<Result<Vec<_>, _>>()?;
    let d = den.iter().map(coefficient).collect::<Result<Vec<_>, _>>()?;
    let exact = |v: &[SpherePoint]| -> Option<Vec<BigRational>> {
        v.iter()
            .map(|p| match p {
                SpherePoint::Rational(r) => Some(r.clone()),
                _ => None,
            })
            .collect()
    };
    let made = match (exact(&n), exact(&d)) {
        (Some(n), Some(d)) => RationalMap::from_exact(QPoly::new(n), QPoly::new(d)),
        _ => {
            let c = |v: &[SpherePoint]| v.iter().map(|p| p.to_c64().unwrap()).collect();
            RationalMap::from_complex(c(&n), c(&d))
        }
    };
    made.map_err(classify_map_error)
}

impl MapSpecFile {
    pub fn parse(text: &str) -> Result<MapSpecFile, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn t_value(&self) -> Result<Option<BigRational>, CliError> {
        self.settings
            .t
            .as_deref()
            .map(|s| parse_rational(s).ok_or_else(|| CliError::Parse(format!("bad t {s:?}"))))
            .transpose()
    }

    pub fn load(text: &str) -> Result<LoadedSpec, CliError> {
        let file = MapSpecFile::parse(text)?;
        let f = build_map(&file.num, &file.den)?;
        if file.marked.len() != 4 {
            return Err(CliError::Precondition(format!("need 4 marked points, got {}", file.marked.len())));
        }
        let mm = MarkedMap::new(f.clone(), file.marked.clone()).map_err(classify_map_error)?;
        let a = match (&file.a, &mm.free_point) {
            (Some(a), _) if !file.marked.iter().any(|m| m.same(a)) => {
                return Err(CliError::Precondition(format!("a = {a} is not a marked point")))
            }
            (Some(a), _) => a.clone(),
            (None, Some(a)) => a.clone(),
            (None, None) => return Err(CliError::Precondition("marked set must be {0, 1, inf, a}".into())),
        };
        file.t_value()?;
        Ok(LoadedSpec { f, marked: file.marked.clone(), a, hash: sha256_hex(text.as_bytes()), file })
    }
}
