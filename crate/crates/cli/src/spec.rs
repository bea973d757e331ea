//! Textual model and density descriptors.

use std::path::Path;

use lpocv::bases::Family;
use lpocv::selection::CollectionKind;
use lpocv::{DensitySpec, Model};

use crate::error::{CliError, CliResult};

fn bad(what: &str, s: &str, hint: &str) -> CliError {
    CliError::Usage(format!("invalid {what} {s:?}; expected {hint}"))
}

const MODEL_HINT: &str = "hist:D, trig:K, haar-scaling:J, haar-wavelet:J or poly:DEPTH:R";

/// `hist:20`, `trig:3`, `haar-scaling:4`, `haar-wavelet:2`, `poly:3:2`.
pub fn parse_model(s: &str) -> CliResult<Model> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let int = |i: usize| -> CliResult<usize> {
        parts
            .get(i)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("model", s, MODEL_HINT))
    };
    let family = match (parts[0], parts.len()) {
        ("hist" | "histogram", 2) => Family::Histogram { bins: int(1)? },
        ("trig" | "trigonometric", 2) => Family::Trigonometric { cutoff: int(1)? },
        ("haar-scaling", 2) => Family::HaarScaling {
            level: int(1)? as u32,
        },
        ("haar-wavelet", 2) => Family::HaarWavelet {
            max_level: int(1)? as u32,
        },
        ("poly" | "piecewise-poly", 3) => Family::PiecewisePoly {
            depth: int(1)? as u32,
            degree_bound: int(2)?,
        },
        _ => return Err(bad("model", s, MODEL_HINT)),
    };
    Ok(Model::new(family)?)
}

pub fn parse_collection(s: &str) -> CliResult<CollectionKind> {
    match s.to_ascii_lowercase().as_str() {
        "pc" => Ok(CollectionKind::Pc),
        "pp" => Ok(CollectionKind::Pp),
        "tp" => Ok(CollectionKind::Tp),
        _ => Err(bad("collection", s, "pc, pp or tp")),
    }
}

const DENSITY_HINT: &str = "uniform, cusp:L:ALPHA, inline JSON or a JSON file path";

/// `uniform`, `cusp:L:ALPHA`, an inline JSON object, or a path to one.
pub fn parse_density(s: &str) -> CliResult<DensitySpec> {
    let t = s.trim();
    if t == "uniform" {
        return Ok(DensitySpec::uniform());
    }
    if let Some(rest) = t.strip_prefix("cusp:") {
        let v: Vec<f64> = rest
            .split(':')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("density", s, DENSITY_HINT))?;
        if v.len() != 2 {
            return Err(bad("density", s, DENSITY_HINT));
        }
        return Ok(DensitySpec::holder_cusp(v[0], v[1])?);
    }
    if t.starts_with('{') {
        return Ok(serde_json::from_str(t)?);
    }
    let path = Path::new(t);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: t.into(),
            message: e.to_string(),
        })?;
        return Ok(serde_json::from_str(&text)?);
    }
    Err(bad("density", s, DENSITY_HINT))
}
