//! Samples and projection estimators ŝ_m = Σ_λ (P_n φ_λ) φ_λ.

use serde::{Deserialize, Serialize};

use crate::bases::Model;
use crate::error::{Error, Result};
use crate::numeric::KahanSum;

/// Observations on [0,1], validated at construction and immutable afterwards.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::SampleOutOfRange { index, value });
        }
        Ok(Sample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sub-sample at the given positions (order preserved).
    pub fn subset(&self, indices: &[usize]) -> Result<Sample> {
        let values = indices
            .iter()
            .map(|&i| {
                self.values
                    .get(i)
                    .copied()
                    .ok_or_else(|| Error::InvalidSplit(format!("index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Sample::new(values)
    }
}

impl<'de> Deserialize<'de> for Sample {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(d)?;
        Sample::new(values).map_err(serde::de::Error::custom)
    }
}

/// Fitted coefficients a_λ = P_n φ_λ in Λ(m) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionEstimate {
    pub model: Model,
    pub coeffs: Vec<f64>,
}

impl ProjectionEstimate {
    /// ‖ŝ_m‖² = Σ_λ a_λ².
    pub fn sq_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|a| a * a)
            .collect::<KahanSum>()
            .value()
    }

    /// ŝ_m(x) without domain checks.
    pub fn value_at(&self, x: f64) -> f64 {
        let mut acc = KahanSum::new();
        self.model
            .for_each_nonzero(x, |i, v| acc.add(self.coeffs[i] * v));
        acc.value()
    }
}

pub fn fit_projection(model: &Model, sample: &Sample) -> ProjectionEstimate {
    let values = sample.values();
    let mut sums = vec![KahanSum::new(); model.dim()];
    for &x in values {
        model.for_each_nonzero(x, |i, v| sums[i].add(v));
    }
    let n = values.len() as f64;
    ProjectionEstimate {
        model: *model,
        coeffs: sums.iter().map(|s| s.value() / n).collect(),
    }
}

pub fn eval_density(estimate: &ProjectionEstimate, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfDomain { x });
    }
    Ok(estimate.value_at(x))
}

/// P_n γ(ŝ_m) = ‖ŝ_m‖² − (2/n) Σ_i ŝ_m(X_i), evaluated directly from the contrast.
pub fn empirical_contrast(estimate: &ProjectionEstimate, sample: &Sample) -> f64 {
    let values = sample.values();
    let fitted: KahanSum = values.iter().map(|&x| estimate.value_at(x)).collect();
    estimate.sq_norm() - 2.0 * fitted.value() / values.len() as f64
}

/// Uniform grid of (x, ŝ(x)) with `points` ≥ 2 points including both ends.
pub fn density_grid(estimate: &ProjectionEstimate, points: usize) -> Vec<(f64, f64)> {
    let points = points.max(2);
    (0..points)
        .map(|i| {
            let x = i as f64 / (points - 1) as f64;
            (x, estimate.value_at(x))
        })
        .collect()
}
