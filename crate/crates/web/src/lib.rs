//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Each export is a thin wrapper over a plain function so the logic can be
//! tested natively.

use serde_json::json;
use wasm_bindgen::prelude::*;

use lpocv::bases::{Family, Model};
use lpocv::estimator::{density_grid, fit_projection};
use lpocv::penalty::{overpen_factor, p_for_log_factor, penalty_sweep};
use lpocv::selection::{auto_p, build_collection, select_model, CollectionKind, CollectionOptions};
use lpocv::{DensitySpec, Sample};

fn model_of(kind: &str, size: usize) -> Result<Model, String> {
    let family = match kind {
        "hist" => Family::Histogram { bins: size },
        "trig" => Family::Trigonometric { cutoff: size },
        "haar" => Family::HaarWavelet {
            max_level: size as u32,
        },
        "poly" => Family::PiecewisePoly {
            depth: size as u32,
            degree_bound: 2,
        },
        _ => return Err(format!("unknown model kind {kind:?}")),
    };
    Model::new(family).map_err(|e| e.to_string())
}

fn sample_of(values: &[f64]) -> Result<Sample, String> {
    Sample::new(values.to_vec()).map_err(|e| e.to_string())
}

/// Draws `n` points from `density` ("uniform", "cusp", "steps" or "smooth").
pub fn draw(density: &str, n: usize, seed: u64) -> Result<Vec<f64>, String> {
    let spec = match density {
        "uniform" => Ok(DensitySpec::uniform()),
        "cusp" => DensitySpec::holder_cusp(10.0, 1.0),
        "steps" => DensitySpec::piecewise_constant(vec![0.0, 0.2, 0.5, 1.0], vec![0.5, 2.0, 0.6]),
        "smooth" => DensitySpec::trig_smooth(vec![0.3, 0.1], vec![0.2, 0.05]),
        _ => return Err(format!("unknown density {density:?}")),
    }
    .map_err(|e| e.to_string())?;
    spec.sample_stream(n, seed, 0)
        .map(|s| s.values().to_vec())
        .map_err(|e| e.to_string())
}

/// Fitted projection estimator on `points` grid points, interleaved as x, y.
pub fn fit(values: &[f64], kind: &str, size: usize, points: usize) -> Result<Vec<f64>, String> {
    if points < 2 {
        return Err("need at least two grid points".into());
    }
    let est = fit_projection(&model_of(kind, size)?, &sample_of(values)?);
    Ok(density_grid(&est, points)
        .into_iter()
        .flat_map(|(x, y)| [x, y])
        .collect())
}

/// Lpo risk curve over a collection as JSON; `p = 0` means the automatic choice.
pub fn risk_curve_json(
    values: &[f64],
    collection: &str,
    phi: f64,
    p: usize,
) -> Result<String, String> {
    let sample = sample_of(values)?;
    let n = sample.len();
    let kind = match collection {
        "pc" => CollectionKind::Pc,
        "pp" => CollectionKind::Pp,
        "tp" => CollectionKind::Tp,
        _ => return Err(format!("unknown collection {collection:?}")),
    };
    let p = if p == 0 {
        auto_p(n).map_err(|e| e.to_string())?
    } else {
        p
    };
    let col =
        build_collection(kind, n, phi, CollectionOptions::default()).map_err(|e| e.to_string())?;
    let r = select_model(&col, &sample, p).map_err(|e| e.to_string())?;
    Ok(json!({
        "p": p,
        "chosen": r.chosen,
        "chosen_model": r.chosen_model,
        "dims": r.curve.iter().map(|c| c.dim).collect::<Vec<_>>(),
        "risks": r.curve.iter().map(|c| c.risk).collect::<Vec<_>>(),
    })
    .to_string())
}

/// Penalty sweep for one model as JSON: pen_p and C_over for p = 1..n-1.
pub fn penalty_json(values: &[f64], kind: &str, size: usize) -> Result<String, String> {
    let sample = sample_of(values)?;
    let n = sample.len();
    let rows = penalty_sweep(&model_of(kind, size)?, &sample).map_err(|e| e.to_string())?;
    let c_over = (1..n)
        .map(|p| overpen_factor(n, p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let log = p_for_log_factor(n).ok();
    Ok(json!({
        "n": n,
        "penalty": rows.iter().map(|d| d.lpo_penalty).collect::<Vec<_>>(),
        "empirical_risk": rows.first().map(|d| d.empirical_risk),
        "c_over": c_over,
        "log_factor_p": log.map(|l| l.p),
    })
    .to_string())
}

#[wasm_bindgen(js_name = drawSample)]
pub fn draw_sample(density: &str, n: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    draw(density, n, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = fitDensity)]
pub fn fit_density(
    values: &[f64],
    kind: &str,
    size: usize,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    fit(values, kind, size, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = riskCurve)]
pub fn risk_curve(values: &[f64], collection: &str, phi: f64, p: usize) -> Result<String, JsError> {
    risk_curve_json(values, collection, phi, p).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = penaltySweep)]
pub fn penalty(values: &[f64], kind: &str, size: usize) -> Result<String, JsError> {
    penalty_json(values, kind, size).map_err(|e| JsError::new(&e))
}
