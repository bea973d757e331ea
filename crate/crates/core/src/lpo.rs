//! Leave-p-out risk estimation.
//!
//! The closed form needs only the per-basis sums S_λ = Σ_j φ_λ(X_j) and
//! Q_λ = Σ_j φ_λ²(X_j):
//!
//! ```text
//! R_p(m) = 1/(n(n-p)) Σ_λ [ Q_λ - (n-p+1)/(n-1) (S_λ² - Q_λ) ]
//! ```
//!
//! which replaces the C(n, p) refits of the definition by one O(n·D_m) pass.
//! [`lpo_risk_brute`] enumerates the splits and is kept as the oracle.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::bases::{make_haar_model, make_histogram_model, HaarKind, Model};
use crate::error::{Error, Result};
use crate::estimator::{fit_projection, Sample};
use crate::numeric::{binomial, KahanSum};

/// Default cap on C(n, p) for brute-force enumeration.
pub const DEFAULT_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    /// S_λ = Σ_j φ_λ(X_j)
    pub sums: Vec<f64>,
    /// Q_λ = Σ_j φ_λ²(X_j)
    pub sq_sums: Vec<f64>,
    pub n: usize,
}

impl SufficientStats {
    pub fn compute(model: &Model, sample: &Sample) -> Self {
        let d = model.dim();
        let mut s = vec![KahanSum::new(); d];
        let mut q = vec![KahanSum::new(); d];
        for &x in sample.values() {
            model.for_each_nonzero(x, |i, v| {
                s[i].add(v);
                q[i].add(v * v);
            });
        }
        SufficientStats {
            sums: s.iter().map(KahanSum::value).collect(),
            sq_sums: q.iter().map(KahanSum::value).collect(),
            n: sample.len(),
        }
    }

    /// Statistics of the first `d` basis functions (nested collections).
    pub fn prefix(&self, d: usize) -> Self {
        let d = d.min(self.sums.len());
        SufficientStats {
            sums: self.sums[..d].to_vec(),
            sq_sums: self.sq_sums[..d].to_vec(),
            n: self.n,
        }
    }

    /// Σ_{j≠k} φ_λ(X_j) φ_λ(X_k) = S_λ² − Q_λ.
    pub fn cross_term(&self, i: usize) -> f64 {
        self.sums[i] * self.sums[i] - self.sq_sums[i]
    }

    /// P_n γ(ŝ_m) = −Σ_λ (S_λ / n)².
    pub fn empirical_risk(&self) -> f64 {
        let n = self.n as f64;
        -self
            .sums
            .iter()
            .map(|s| (s / n) * (s / n))
            .collect::<KahanSum>()
            .value()
    }

    /// Closed-form Lpo risk from the statistics.
    pub fn lpo_risk(&self, p: usize) -> Result<f64> {
        check_p(self.n, p)?;
        let n = self.n as f64;
        let pf = p as f64;
        let ratio = (n - pf + 1.0) / (n - 1.0);
        let total: KahanSum = (0..self.sums.len())
            .map(|i| self.sq_sums[i] - ratio * self.cross_term(i))
            .collect();
        Ok(total.value() / (n * (n - pf)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpoRisk {
    pub value: f64,
    pub n: usize,
    pub p: usize,
    pub model: String,
}

pub(crate) fn check_p(n: usize, p: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    if p == 0 || p >= n {
        return Err(Error::InvalidP { n, p });
    }
    Ok(())
}

pub fn lpo_risk_closed(model: &Model, sample: &Sample, p: usize) -> Result<LpoRisk> {
    check_p(sample.len(), p)?;
    let value = SufficientStats::compute(model, sample).lpo_risk(p)?;
    Ok(LpoRisk {
        value,
        n: sample.len(),
        p,
        model: model.id(),
    })
}

/// Histogram corollary evaluated from the bin counts of `cells` equal bins.
fn lpo_from_counts(cells: usize, sample: &Sample, p: usize) -> Result<f64> {
    let n = sample.len();
    check_p(n, p)?;
    let mut counts = vec![0usize; cells];
    for &x in sample.values() {
        counts[((x * cells as f64) as usize).min(cells - 1)] += 1;
    }
    let (nf, pf) = (n as f64, p as f64);
    let inv_width = cells as f64;
    let total: KahanSum = counts
        .iter()
        .map(|&c| {
            let f = c as f64 / nf;
            inv_width * ((2.0 * nf - pf) * f - nf * (nf - pf + 1.0) * f * f)
        })
        .collect();
    Ok(total.value() / ((nf - 1.0) * (nf - pf)))
}

/// Lpo risk of the regular `bins`-bin histogram from bin counts only.
pub fn lpo_risk_hist_fast(bins: usize, sample: &Sample, p: usize) -> Result<LpoRisk> {
    let model = make_histogram_model(bins)?;
    let value = lpo_from_counts(bins, sample, p)?;
    Ok(LpoRisk {
        value,
        n: sample.len(),
        p,
        model: model.id(),
    })
}

/// Lpo risk of the single-level Haar scaling model at `level`.
pub fn lpo_risk_haar_fast(level: u32, sample: &Sample, p: usize) -> Result<LpoRisk> {
    let model = make_haar_model(HaarKind::ScalingLevel(level))?;
    let value = lpo_from_counts(model.dim(), sample, p)?;
    Ok(LpoRisk {
        value,
        n: sample.len(),
        p,
        model: model.id(),
    })
}

/// Exhaustive leave-p-out: averages the test contrast of the estimator refit
/// on every training set of size n − p.
pub fn lpo_risk_brute(model: &Model, sample: &Sample, p: usize, cap: u128) -> Result<LpoRisk> {
    let n = sample.len();
    check_p(n, p)?;
    let splits = binomial(n as u64, p as u64)?;
    if splits > cap {
        return Err(Error::EnumerationCap { n, p, cap });
    }
    let d = model.dim();
    let values: Vec<Vec<f64>> = sample.values().iter().map(|&x| model.eval_all(x)).collect();
    let mut total = KahanSum::new();
    let mut in_test = vec![false; n];
    for test in (0..n).combinations(p) {
        in_test.iter_mut().for_each(|b| *b = false);
        for &i in &test {
            in_test[i] = true;
        }
        let mut coeffs = vec![KahanSum::new(); d];
        for (j, row) in values.iter().enumerate() {
            if !in_test[j] {
                for (c, v) in coeffs.iter_mut().zip(row) {
                    c.add(*v);
                }
            }
        }
        let a: Vec<f64> = coeffs.iter().map(|c| c.value() / (n - p) as f64).collect();
        let sq_norm: f64 = a.iter().map(|v| v * v).collect::<KahanSum>().value();
        let fitted: KahanSum = test
            .iter()
            .map(|&i| a.iter().zip(&values[i]).map(|(u, v)| u * v).sum::<f64>())
            .collect();
        total.add(sq_norm - 2.0 * fitted.value() / p as f64);
    }
    Ok(LpoRisk {
        value: total.value() / splits as f64,
        n,
        p,
        model: model.id(),
    })
}

fn split_training(n: usize, test: &[usize]) -> Result<Vec<usize>> {
    if test.is_empty() {
        return Err(Error::InvalidSplit("test set is empty".into()));
    }
    let mut seen = vec![false; n];
    for &i in test {
        if i >= n {
            return Err(Error::InvalidSplit(format!(
                "index {i} out of range for n = {n}"
            )));
        }
        if seen[i] {
            return Err(Error::InvalidSplit(format!("index {i} repeated")));
        }
        seen[i] = true;
    }
    if test.len() == n {
        return Err(Error::InvalidSplit(
            "test set contains every observation".into(),
        ));
    }
    Ok((0..n).filter(|&j| !seen[j]).collect())
}

/// Hold-out risk: contrast on `test` of the estimator fitted on the complement.
pub fn holdout_risk(model: &Model, sample: &Sample, test: &[usize]) -> Result<f64> {
    let train = split_training(sample.len(), test)?;
    let est = fit_projection(model, &sample.subset(&train)?);
    let x = sample.values();
    let fitted: KahanSum = test.iter().map(|&i| est.value_at(x[i])).collect();
    Ok(est.sq_norm() - 2.0 * fitted.value() / test.len() as f64)
}

/// V-fold risk for the given block partition of the sample indices.
pub fn vfold_risk(model: &Model, sample: &Sample, blocks: &[Vec<usize>]) -> Result<f64> {
    let n = sample.len();
    if blocks.len() < 2 {
        return Err(Error::InvalidSplit("need at least two blocks".into()));
    }
    let mut owner = vec![false; n];
    for block in blocks {
        for &i in block {
            if i >= n || owner[i] {
                return Err(Error::InvalidSplit(format!(
                    "index {i} missing from range or repeated"
                )));
            }
            owner[i] = true;
        }
    }
    if owner.iter().any(|b| !b) {
        return Err(Error::InvalidSplit(
            "blocks do not cover every observation".into(),
        ));
    }
    let v = blocks.len() as f64;
    let mut total = KahanSum::new();
    for block in blocks {
        let train = split_training(n, block)?;
        let est = fit_projection(model, &sample.subset(&train)?);
        let sq = est.sq_norm();
        let x = sample.values();
        let block_sum: KahanSum = block
            .iter()
            .map(|&i| sq - 2.0 * est.value_at(x[i]))
            .collect();
        total.add(v / n as f64 * block_sum.value());
    }
    Ok(total.value() / v)
}

/// Number of resamples e (|e| = p) meeting the four index patterns of the
/// combinatorial lemma, for fixed distinct i, j, k:
/// `j ∉ e`, `j, k ∉ e`, `i ∈ e, j, k ∉ e`, `i ∈ e, j ∉ e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SubsetCounts {
    pub excludes_one: u128,
    pub excludes_two: u128,
    pub includes_one_excludes_two: u128,
    pub includes_one_excludes_one: u128,
}

pub fn subset_counts(n: usize, p: usize) -> Result<SubsetCounts> {
    check_p(n, p)?;
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    let (n, p) = (n as u64, p as u64);
    Ok(SubsetCounts {
        excludes_one: binomial(n - 1, p)?,
        excludes_two: binomial(n - 2, p)?,
        includes_one_excludes_two: binomial(n - 3, p - 1)?,
        includes_one_excludes_one: binomial(n - 2, p - 1)?,
    })
}
