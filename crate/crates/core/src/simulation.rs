//! Exact risks under a known density and Monte Carlo experiments.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bases::{Family, Model};
use crate::density::DensitySpec;
use crate::error::{Error, Result};
use crate::estimator::{fit_projection, ProjectionEstimate, Sample};
use crate::lpo::SufficientStats;
use crate::moments::BasisMoments;
use crate::numeric::{
    merge_breaks, midpoint_nodes, piecewise_gauss_nodes, KahanSum, REFERENCE_CELLS,
};
use crate::penalty::p_for_log_factor;
use crate::selection::{
    auto_p, build_collection, select_model, Collection, CollectionKind, CollectionOptions,
};

pub use crate::density::{sample_density, DensityKind};

/// Nodes (x, w) with Σ w f(x) ≈ ∫ f s.
fn weighted_nodes(spec: &DensitySpec, model: &Model) -> Vec<(f64, f64)> {
    if let Some(cells) = model.constant_cells() {
        // Every basis function is constant on the cells: exact cell masses.
        return (0..cells)
            .map(|k| {
                let (a, b) = (k as f64 / cells as f64, (k + 1) as f64 / cells as f64);
                (0.5 * (a + b), spec.mass(a, b))
            })
            .collect();
    }
    match (model.breakpoints(), model.piece_degree()) {
        (Some(model_breaks), Some(deg)) => {
            let breaks = merge_breaks(&[&model_breaks, &spec.breakpoints()]);
            let (sub, order) = if spec.is_piecewise_constant() {
                (1, 2 * deg + 2)
            } else {
                (64, 8)
            };
            piecewise_gauss_nodes(&breaks, sub, order)
                .into_iter()
                .map(|(x, w)| (x, w * spec.pdf(x)))
                .collect()
        }
        _ => midpoint_nodes(REFERENCE_CELLS)
            .map(|(x, w)| (x, w * spec.pdf(x)))
            .collect(),
    }
}

/// Moments of the basis functions of `model` under the density `spec`.
pub fn density_moments(spec: &DensitySpec, model: &Model) -> BasisMoments {
    let d = model.dim();
    let mut mean = vec![KahanSum::new(); d];
    let mut second = vec![vec![KahanSum::new(); d]; d];
    let mut third = vec![vec![KahanSum::new(); d]; d];
    let mut phi_m_sq = KahanSum::new();
    for (x, w) in weighted_nodes(spec, model) {
        if w == 0.0 {
            continue;
        }
        let v = model.eval_all(x);
        let nz: Vec<usize> = (0..d).filter(|&i| v[i] != 0.0).collect();
        let mut phi_m = 0.0;
        for &i in &nz {
            mean[i].add(w * v[i]);
            phi_m += v[i] * v[i];
            for &j in &nz {
                second[i][j].add(w * v[i] * v[j]);
                third[i][j].add(w * v[i] * v[i] * v[j]);
            }
        }
        phi_m_sq.add(w * phi_m * phi_m);
    }
    let finish = |m: Vec<Vec<KahanSum>>| -> Vec<Vec<f64>> {
        m.into_iter()
            .map(|r| r.iter().map(KahanSum::value).collect())
            .collect()
    };
    let mean: Vec<f64> = mean.iter().map(KahanSum::value).collect();
    let second = finish(second);
    let kernel_sq = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| mean[i] * mean[j] * second[i][j])
        .collect::<KahanSum>()
        .value();
    BasisMoments {
        mean,
        second,
        third: finish(third),
        phi_m_sq: phi_m_sq.value(),
        kernel_sq,
    }
}

/// Pφ_λ and Pφ_λ² only; enough for risks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionMoments {
    pub mean: Vec<f64>,
    pub sq_mean: Vec<f64>,
}

impl ProjectionMoments {
    /// ‖s_m‖²
    pub fn theta(&self) -> f64 {
        self.mean
            .iter()
            .map(|m| m * m)
            .collect::<KahanSum>()
            .value()
    }

    /// V_m = Σ Pφ_λ²
    pub fn v_m(&self) -> f64 {
        self.sq_mean.iter().copied().collect::<KahanSum>().value()
    }
}

pub fn projection_moments(spec: &DensitySpec, model: &Model) -> ProjectionMoments {
    let d = model.dim();
    let mut mean = vec![KahanSum::new(); d];
    let mut sq = vec![KahanSum::new(); d];
    for (x, w) in weighted_nodes(spec, model) {
        if w == 0.0 {
            continue;
        }
        model.for_each_nonzero(x, |i, v| {
            mean[i].add(w * v);
            sq[i].add(w * v * v);
        });
    }
    ProjectionMoments {
        mean: mean.iter().map(KahanSum::value).collect(),
        sq_mean: sq.iter().map(KahanSum::value).collect(),
    }
}

/// ‖s − s_m‖² = ‖s‖² − ‖s_m‖², clamped at 0.
pub fn approximation_error(spec: &DensitySpec, pm: &ProjectionMoments) -> f64 {
    (spec.sq_norm() - pm.theta()).max(0.0)
}

fn risk_from_moments(spec: &DensitySpec, pm: &ProjectionMoments, n: usize) -> f64 {
    approximation_error(spec, pm) + (pm.v_m() - pm.theta()).max(0.0) / n as f64
}

/// E‖s − ŝ_m‖² = ‖s − s_m‖² + (V_m − ‖s_m‖²)/n.
pub fn true_risk(spec: &DensitySpec, model: &Model, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    Ok(risk_from_moments(spec, &projection_moments(spec, model), n))
}

/// ‖s − ŝ‖² = ‖s‖² − 2 Σ a_λ Pφ_λ + Σ a_λ².
pub fn estimate_risk(spec: &DensitySpec, pm: &ProjectionMoments, est: &ProjectionEstimate) -> f64 {
    let cross: f64 = est
        .coeffs
        .iter()
        .zip(&pm.mean)
        .map(|(a, m)| a * m)
        .collect::<KahanSum>()
        .value();
    (spec.sq_norm() - 2.0 * cross + est.sq_norm()).max(0.0)
}

/// C_α = 4(α+2)/((1+α)²(2α+3)).
pub fn holder_bias_constant(alpha: f64) -> f64 {
    4.0 * (alpha + 2.0) / ((1.0 + alpha).powi(2) * (2.0 * alpha + 3.0))
}

/// Upper bound C_α L² D^−2α on ‖s − s_m‖² for the D-bin histogram and
/// s ∈ H(L, α).
pub fn holder_bias_bound(l: f64, alpha: f64, bins: usize) -> f64 {
    holder_bias_constant(alpha) * l * l * (bins as f64).powf(-2.0 * alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "kebab-case")]
pub enum PRule {
    Fixed(usize),
    /// p = round(f·n) clamped to [1, n − 1].
    Fraction(f64),
    /// Midpoint of the admissible range.
    Auto,
    /// C_over(p) ≈ ln n.
    LogFactor,
    Loo,
}

impl PRule {
    pub fn resolve(&self, n: usize) -> Result<usize> {
        if n < 2 {
            return Err(Error::TooFewObservations { needed: 2, got: n });
        }
        match *self {
            PRule::Fixed(p) => {
                if p == 0 || p >= n {
                    Err(Error::InvalidP { n, p })
                } else {
                    Ok(p)
                }
            }
            PRule::Fraction(f) => {
                if !(f > 0.0 && f < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "fraction must lie in (0, 1), got {f}"
                    )));
                }
                Ok(((f * n as f64).round_ties_even() as usize).clamp(1, n - 1))
            }
            PRule::Auto => auto_p(n),
            PRule::LogFactor => Ok(p_for_log_factor(n)?.p),
            PRule::Loo => Ok(1),
        }
    }
}

fn default_phi() -> f64 {
    1.0
}
fn default_degree() -> usize {
    1
}
fn default_reps() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub density: DensitySpec,
    pub collection: CollectionKind,
    #[serde(default = "default_phi")]
    pub phi: f64,
    #[serde(default = "default_degree")]
    pub degree_bound: usize,
    #[serde(default)]
    pub max_dim: Option<usize>,
    pub p_rule: PRule,
    pub n_grid: Vec<usize>,
    #[serde(default = "default_reps")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(
        density: DensitySpec,
        collection: CollectionKind,
        p_rule: PRule,
        n_grid: Vec<usize>,
    ) -> Self {
        Self {
            density,
            collection,
            phi: 1.0,
            degree_bound: 1,
            max_dim: None,
            p_rule,
            n_grid,
            replications: default_reps(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::InvalidParameter("empty n grid".into()));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "n grid must be strictly increasing".into(),
            ));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter(
                "replications must be at least 1".into(),
            ));
        }
        if self.collection == CollectionKind::Custom {
            return Err(Error::InvalidCollection(
                "experiments need a built collection".into(),
            ));
        }
        Ok(())
    }

    fn collection(&self, n: usize) -> Result<Collection> {
        let opts = CollectionOptions {
            degree_bound: self.degree_bound,
            max_dim: self.max_dim,
        };
        build_collection(self.collection, n, self.phi, opts)
    }
}

/// Stream id of replication `rep` at sample size `n`.
pub fn stream_id(n: usize, rep: usize) -> u64 {
    ((n as u64) << 32) | rep as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub p: usize,
    pub mean_risk: f64,
    pub stderr: f64,
    pub oracle_risk: f64,
    pub oracle_model: String,
    /// mean_risk / oracle_risk; 1 when both vanish, infinite (serialized as
    /// null) when only the oracle risk does.
    pub ratio: f64,
    pub ratio_ci: (f64, f64),
    pub mean_selected_dim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ExperimentRow>,
}

/// a/b with 0/0 = 1 and a/0 = ∞.
pub fn risk_ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else if a > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

struct RepOutcome {
    risk: f64,
    dim: usize,
}

fn run_replication(
    config: &ExperimentConfig,
    collection: &Collection,
    moments: &[ProjectionMoments],
    n: usize,
    p: usize,
    rep: usize,
) -> Result<RepOutcome> {
    let sample = config
        .density
        .sample_stream(n, config.seed, stream_id(n, rep))?;
    let sel = select_model(collection, &sample, p)?;
    let model = &collection.models[sel.chosen];
    let est = fit_projection(model, &sample);
    Ok(RepOutcome {
        risk: estimate_risk(&config.density, &moments[sel.chosen], &est),
        dim: model.dim(),
    })
}

fn run_row(
    config: &ExperimentConfig,
    cache: &mut HashMap<String, ProjectionMoments>,
    n: usize,
) -> Result<ExperimentRow> {
    let collection = config.collection(n)?;
    let p = config.p_rule.resolve(n)?;
    let all_trig = collection
        .models
        .iter()
        .all(|m| matches!(m.family(), Family::Trigonometric { .. }));
    let moments: Vec<ProjectionMoments> = if all_trig {
        // Trigonometric bases share their ordering: smaller models are prefixes.
        let top = collection
            .models
            .iter()
            .max_by_key(|m| m.dim())
            .expect("non-empty collection");
        let full = cache
            .entry(top.id())
            .or_insert_with(|| projection_moments(&config.density, top))
            .clone();
        collection
            .models
            .iter()
            .map(|m| ProjectionMoments {
                mean: full.mean[..m.dim()].to_vec(),
                sq_mean: full.sq_mean[..m.dim()].to_vec(),
            })
            .collect()
    } else {
        collection
            .models
            .iter()
            .map(|m| {
                cache
                    .entry(m.id())
                    .or_insert_with(|| projection_moments(&config.density, m))
                    .clone()
            })
            .collect()
    };
    let (oracle_idx, oracle_risk) = moments
        .iter()
        .map(|pm| risk_from_moments(&config.density, pm, n))
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |best, (i, r)| if r < best.1 { (i, r) } else { best },
        );

    let reps = config.replications;
    #[cfg(feature = "parallel")]
    let outcomes: Vec<Result<RepOutcome>> = {
        use rayon::prelude::*;
        (0..reps)
            .into_par_iter()
            .map(|r| run_replication(config, &collection, &moments, n, p, r))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<Result<RepOutcome>> = (0..reps)
        .map(|r| run_replication(config, &collection, &moments, n, p, r))
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let r = reps as f64;
    let mean = outcomes
        .iter()
        .map(|o| o.risk)
        .collect::<KahanSum>()
        .value()
        / r;
    let var = if reps > 1 {
        outcomes
            .iter()
            .map(|o| (o.risk - mean).powi(2))
            .collect::<KahanSum>()
            .value()
            / (r - 1.0)
    } else {
        0.0
    };
    let stderr = (var / r).sqrt();
    let mean_dim = outcomes.iter().map(|o| o.dim as f64).sum::<f64>() / r;
    let lo = (mean - 1.96 * stderr).max(0.0);
    let hi = mean + 1.96 * stderr;
    Ok(ExperimentRow {
        n,
        p,
        mean_risk: mean,
        stderr,
        oracle_risk,
        oracle_model: collection.models[oracle_idx].id(),
        ratio: risk_ratio(mean, oracle_risk),
        ratio_ci: (risk_ratio(lo, oracle_risk), risk_ratio(hi, oracle_risk)),
        mean_selected_dim: mean_dim,
    })
}

/// Mean risk of the selected estimator over the oracle risk, per n.
pub fn oracle_ratio_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut cache = HashMap::new();
    let rows = config
        .n_grid
        .iter()
        .map(|&n| run_row(config, &mut cache, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        config: config.clone(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub report: ExperimentReport,
}

/// Least-squares slope and its standard error for y on x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter(
            "slope needs at least two points".into(),
        ));
    }
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("degenerate x values".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if x.len() > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        (rss / (k - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok((slope, stderr, intercept))
}

/// Slope of log mean risk of the selected estimator against log n.
pub fn adaptivity_slope_experiment(config: &ExperimentConfig) -> Result<SlopeReport> {
    config.validate()?;
    let (first, last) = (config.n_grid[0], *config.n_grid.last().unwrap());
    if config.n_grid.len() < 2 || (last as f64) < 10.0 * first as f64 {
        return Err(Error::InvalidParameter(
            "n grid must span at least one decade".into(),
        ));
    }
    let report = oracle_ratio_experiment(config)?;
    if report.rows.iter().any(|r| r.mean_risk <= 0.0) {
        return Err(Error::InvalidParameter(
            "mean risk vanished; slope undefined".into(),
        ));
    }
    let x: Vec<f64> = report.rows.iter().map(|r| (r.n as f64).ln()).collect();
    let y: Vec<f64> = report.rows.iter().map(|r| r.mean_risk.ln()).collect();
    let (slope, stderr, intercept) = fit_slope(&x, &y)?;
    Ok(SlopeReport {
        slope,
        stderr,
        intercept,
        report,
    })
}

/// Monte Carlo mean of ‖s_m − ŝ_m‖² = Σ_λ (a_λ − Pφ_λ)² with its standard error.
pub fn monte_carlo_variance_term(
    spec: &DensitySpec,
    model: &Model,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if reps < 2 {
        return Err(Error::InvalidParameter(
            "need at least two replications".into(),
        ));
    }
    let pm = projection_moments(spec, model);
    let vals = (0..reps)
        .map(|r| {
            let s = spec.sample_stream(n, seed, stream_id(n, r))?;
            let st = SufficientStats::compute(model, &s);
            Ok(st
                .sums
                .iter()
                .zip(&pm.mean)
                .map(|(sum, m)| (sum / n as f64 - m).powi(2))
                .collect::<KahanSum>()
                .value())
        })
        .collect::<Result<Vec<f64>>>()?;
    let r = reps as f64;
    let mean = vals.iter().sum::<f64>() / r;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    Ok((mean, (var / r).sqrt()))
}

/// Draws a sample from `spec` using replication stream `rep` (exposed for
/// reproducing a single experiment replication).
pub fn replication_sample(spec: &DensitySpec, n: usize, seed: u64, rep: usize) -> Result<Sample> {
    spec.sample_stream(n, seed, stream_id(n, rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{
        make_haar_model, make_histogram_model, make_piecewise_poly_model, make_trig_model, HaarKind,
    };

    #[test]
    fn uniform_moments() {
        let u = DensitySpec::uniform();
        let h2 = density_moments(&u, &make_histogram_model(2).unwrap());
        for i in 0..2 {
            assert!((h2.mean[i] - 0.5f64.sqrt()).abs() < 1e-15);
            assert!((h2.second[i][i] - 1.0).abs() < 1e-15);
        }
        assert_eq!(h2.second[0][1], 0.0);
        let t = density_moments(&u, &make_trig_model(2).unwrap());
        assert!((t.mean[0] - 1.0).abs() < 1e-12);
        for i in 1..5 {
            assert!(t.mean[i].abs() < 1e-10);
            assert!((t.second[i][i] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_basis_any_density() {
        let c = make_histogram_model(1).unwrap();
        for spec in [
            DensitySpec::uniform(),
            DensitySpec::holder_cusp(10.0, 0.5).unwrap(),
            DensitySpec::trig_smooth(vec![0.3, 0.1], vec![0.2, 0.05]).unwrap(),
        ] {
            let m = density_moments(&spec, &c);
            assert!((m.mean[0] - 1.0).abs() < 1e-10);
            assert!(m.variance_sum().abs() < 1e-10);
        }
    }

    #[test]
    fn second_moments_are_gram_under_uniform() {
        let u = DensitySpec::uniform();
        for m in [
            make_haar_model(HaarKind::Wavelet(2)).unwrap(),
            make_piecewise_poly_model(2, 3).unwrap(),
            make_trig_model(3).unwrap(),
        ] {
            let bm = density_moments(&u, &m);
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((bm.second[i][j] - want).abs() < 1e-9, "{} {i} {j}", m.id());
                }
            }
        }
    }

    #[test]
    fn true_risk_examples() {
        let u = DensitySpec::uniform();
        for n in [1usize, 10, 1000] {
            assert_eq!(
                true_risk(&u, &make_histogram_model(1).unwrap(), n).unwrap(),
                0.0
            );
            let r = true_risk(&u, &make_histogram_model(2).unwrap(), n).unwrap();
            assert!((r - 1.0 / n as f64).abs() < 1e-14);
        }
        assert!(true_risk(&u, &make_histogram_model(2).unwrap(), 0).is_err());
    }

    #[test]
    fn holder_bias_is_bounded() {
        for alpha in [0.5, 1.0] {
            let s = DensitySpec::holder_cusp(10.0, alpha).unwrap();
            let (l, a) = s.holder_constant().unwrap();
            for d in [1usize, 2, 3, 5, 8, 16, 33, 64] {
                let pm = projection_moments(&s, &make_histogram_model(d).unwrap());
                let bias = approximation_error(&s, &pm);
                assert!(bias <= holder_bias_bound(l, a, d), "α={alpha} D={d}");
            }
        }
        assert!((holder_bias_constant(1.0) - 12.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn variance_term_matches_monte_carlo() {
        let s = DensitySpec::holder_cusp(10.0, 1.0).unwrap();
        let m = make_histogram_model(6).unwrap();
        let n = 50;
        let pm = projection_moments(&s, &m);
        let exact = (pm.v_m() - pm.theta()) / n as f64;
        let (mc, se) = monte_carlo_variance_term(&s, &m, n, 4000, 7).unwrap();
        assert!(
            (mc - exact).abs() < 4.0 * se,
            "mc={mc} exact={exact} se={se}"
        );
    }

    #[test]
    fn p_rules() {
        assert_eq!(PRule::Fixed(3).resolve(10).unwrap(), 3);
        assert!(PRule::Fixed(10).resolve(10).is_err());
        assert_eq!(PRule::Fraction(0.5).resolve(11).unwrap(), 6);
        assert_eq!(PRule::Loo.resolve(10).unwrap(), 1);
        assert!(PRule::Auto.resolve(10).is_err());
        let json = serde_json::to_string(&PRule::Fraction(0.5)).unwrap();
        assert_eq!(json, r#"{"rule":"fraction","value":0.5}"#);
        assert_eq!(
            serde_json::from_str::<PRule>(r#"{"rule":"auto"}"#).unwrap(),
            PRule::Auto
        );
    }

    #[test]
    fn singleton_ratio_near_one() {
        let mut cfg = ExperimentConfig::new(
            DensitySpec::holder_cusp(10.0, 1.0).unwrap(),
            CollectionKind::Pc,
            PRule::Fraction(0.5),
            vec![200],
        );
        cfg.max_dim = Some(1);
        cfg.replications = 300;
        let rep = oracle_ratio_experiment(&cfg).unwrap();
        let row = &rep.rows[0];
        assert_eq!(row.mean_selected_dim, 1.0);
        let se_ratio = row.stderr / row.oracle_risk;
        assert!((row.ratio - 1.0).abs() <= 4.0 * se_ratio + 1e-12, "{row:?}");
    }

    #[test]
    fn experiments_are_reproducible() {
        let mut cfg = ExperimentConfig::new(
            DensitySpec::uniform(),
            CollectionKind::Pc,
            PRule::Fraction(0.5),
            vec![64, 128],
        );
        cfg.replications = 20;
        let a = oracle_ratio_experiment(&cfg).unwrap();
        let b = oracle_ratio_experiment(&cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        cfg.seed = 1;
        let c = oracle_ratio_experiment(&cfg).unwrap();
        assert_ne!(a.rows[0].mean_risk, c.rows[0].mean_risk);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::new(
            DensitySpec::uniform(),
            CollectionKind::Pc,
            PRule::Loo,
            vec![100, 50],
        );
        assert!(oracle_ratio_experiment(&cfg).is_err());
        cfg.n_grid = vec![100, 200];
        assert!(adaptivity_slope_experiment(&cfg).is_err());
        cfg.replications = 0;
        assert!(oracle_ratio_experiment(&cfg).is_err());
    }

    #[test]
    fn slope_fit() {
        let x: Vec<f64> = (1..6).map(|v| v as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let (s, se, b) = fit_slope(&x, &y).unwrap();
        assert!((s + 0.5).abs() < 1e-12 && se < 1e-12 && (b - 3.0).abs() < 1e-12);
        assert!(fit_slope(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn ratio_convention() {
        assert_eq!(risk_ratio(0.0, 0.0), 1.0);
        assert_eq!(risk_ratio(1.0, 0.0), f64::INFINITY);
        assert_eq!(risk_ratio(1.0, 2.0), 0.5);
    }
}
