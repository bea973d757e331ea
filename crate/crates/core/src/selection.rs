//! Model collections, assumption checks, the admissible range for p and
//! argmin selection of the Lpo risk.

use serde::{Deserialize, Serialize};

use crate::bases::{
    make_histogram_model, make_piecewise_poly_model, make_trig_model, Family, Model,
};
use crate::density::DensitySpec;
use crate::error::{Error, Result};
use crate::estimator::Sample;
use crate::lpo::{check_p, SufficientStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollectionKind {
    /// Regular histograms, D = 1..N_n.
    Pc,
    /// Dyadic piecewise polynomials of degree < r, D = r 2^J.
    Pp,
    /// Trigonometric polynomials, D = 2K + 1.
    Tp,
    /// Caller-supplied list of models.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collection {
    pub kind: CollectionKind,
    pub models: Vec<Model>,
    /// Largest model dimension.
    pub max_dim: usize,
    pub phi: f64,
    pub n: usize,
    /// Largest depth (Pp) or cutoff (Tp).
    pub max_level: Option<usize>,
    pub degree_bound: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectionOptions {
    /// Degree bound r for (Pp).
    pub degree_bound: usize,
    /// Replaces N_n for (Pc); ignores the dimension budget.
    pub max_dim: Option<usize>,
}

impl Default for CollectionOptions {
    fn default() -> Self {
        Self {
            degree_bound: 1,
            max_dim: None,
        }
    }
}

/// Φ n/(ln n)².
pub fn dimension_budget(n: usize, phi: f64) -> f64 {
    let l = (n as f64).ln();
    phi * n as f64 / (l * l)
}

pub fn build_collection(
    kind: CollectionKind,
    n: usize,
    phi: f64,
    opts: CollectionOptions,
) -> Result<Collection> {
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    if !(phi.is_finite() && phi > 0.0) {
        return Err(Error::InvalidCollection(format!(
            "Φ must be positive, got {phi}"
        )));
    }
    let budget = dimension_budget(n, phi);
    let too_small =
        || Error::InvalidCollection(format!("Φ n/(ln n)² = {budget:.4} admits no model"));
    let (models, max_level, degree_bound) = match kind {
        CollectionKind::Pc => {
            let top = match opts.max_dim {
                Some(d) => d,
                None => budget.floor() as usize,
            };
            if top < 1 {
                return Err(too_small());
            }
            (
                (1..=top)
                    .map(make_histogram_model)
                    .collect::<Result<Vec<_>>>()?,
                None,
                None,
            )
        }
        CollectionKind::Pp => {
            let r = opts.degree_bound;
            if r < 1 {
                return Err(Error::InvalidCollection(
                    "degree bound must be at least 1".into(),
                ));
            }
            if (r as f64) > budget {
                return Err(too_small());
            }
            let mut depth = 0u32;
            while depth < 40 && ((r as u64) << (depth + 1)) as f64 <= budget {
                depth += 1;
            }
            let models = (0..=depth)
                .map(|j| make_piecewise_poly_model(j, r))
                .collect::<Result<Vec<_>>>()?;
            (models, Some(depth as usize), Some(r))
        }
        CollectionKind::Tp => {
            if budget < 1.0 {
                return Err(too_small());
            }
            let top = ((budget - 1.0) / 2.0).floor() as usize;
            (
                (0..=top).map(make_trig_model).collect::<Result<Vec<_>>>()?,
                Some(top),
                None,
            )
        }
        CollectionKind::Custom => {
            return Err(Error::InvalidCollection(
                "use Collection::custom for explicit model lists".into(),
            ))
        }
    };
    let max_dim = models.iter().map(Model::dim).max().unwrap_or(0);
    Ok(Collection {
        kind,
        models,
        max_dim,
        phi,
        n,
        max_level,
        degree_bound,
    })
}

impl Collection {
    pub fn custom(models: Vec<Model>, n: usize) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::InvalidCollection("empty collection".into()));
        }
        let max_dim = models.iter().map(Model::dim).max().unwrap_or(0);
        Ok(Collection {
            kind: CollectionKind::Custom,
            models,
            max_dim,
            phi: 1.0,
            n,
            max_level: None,
            degree_bound: None,
        })
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.models.iter().map(Model::dim).collect()
    }

    /// Trigonometric models share a basis ordering, so each model's statistics
    /// are a prefix of the largest model's.
    fn nested_trig(&self) -> Option<&Model> {
        let all_trig = self
            .models
            .iter()
            .all(|m| matches!(m.family(), Family::Trigonometric { .. }));
        if all_trig {
            self.models.iter().max_by_key(|m| m.dim())
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdStatus {
    VerifiedSufficientCondition,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub n: usize,
    pub phi: f64,
    /// Φ n/(ln n)²
    pub budget: f64,
    pub reg_ok: bool,
    /// Smallest Φ for which (Reg) holds.
    pub reg_phi: f64,
    pub reg2_ok: bool,
    /// Smallest Φ for which the analytic (Reg2) bound holds.
    pub reg2_phi: f64,
    pub reg3_ok: bool,
    /// Smallest Φ for which (Reg3) holds.
    pub reg3_phi: f64,
    pub pol_ok: bool,
    pub pol_delta: f64,
    pub ad_status: AdStatus,
    /// Lower bound ρ on s, when the density is known and the condition applies.
    pub ad_rho: Option<f64>,
}

/// Checks the regularity and complexity assumptions from analytic sup-norm
/// bounds. `density` enables the (Ad) sufficient condition s ≥ ρ > 0.
pub fn check_assumptions(
    collection: &Collection,
    n: usize,
    density: Option<&DensitySpec>,
) -> AssumptionReport {
    let scale = {
        let l = (n as f64).ln();
        l * l / n as f64
    };
    let budget = dimension_budget(n, collection.phi);
    let fold_max = |f: &dyn Fn(&Model) -> f64| collection.models.iter().map(f).fold(0.0, f64::max);
    let reg_phi = fold_max(&|m| m.phi_m_sup()) * scale;
    let reg2_phi = fold_max(&|m| m.coefficient_sup_bound().powi(2)) * scale;
    let reg3_phi = fold_max(&|m| m.phi_m_sup() / m.dim() as f64);

    let mut dims = collection.dims();
    dims.sort_unstable();
    let mut max_per_dim = 0usize;
    let mut i = 0;
    while i < dims.len() {
        let j = dims[i..].iter().take_while(|&&d| d == dims[i]).count();
        max_per_dim = max_per_dim.max(j);
        i += j;
    }
    // At most D^δ models of dimension D; δ = 0 when every dimension is used once.
    let pol_delta = collection
        .models
        .iter()
        .map(|m| {
            let count = dims.iter().filter(|&&d| d == m.dim()).count() as f64;
            if count <= 1.0 {
                0.0
            } else if m.dim() == 1 {
                f64::INFINITY
            } else {
                count.ln() / (m.dim() as f64).ln()
            }
        })
        .fold(0.0, f64::max);

    let tol = 1e-12;
    let phi = collection.phi;
    let (ad_status, ad_rho) = match density {
        Some(s) if collection.kind == CollectionKind::Pc && s.lower_bound() > 0.0 => {
            (AdStatus::VerifiedSufficientCondition, Some(s.lower_bound()))
        }
        _ => (AdStatus::Unknown, None),
    };
    AssumptionReport {
        n,
        phi,
        budget,
        reg_ok: reg_phi <= phi * (1.0 + tol),
        reg_phi,
        reg2_ok: reg2_phi <= phi * (1.0 + tol),
        reg2_phi,
        reg3_ok: reg3_phi <= phi * (1.0 + tol),
        reg3_phi,
        pol_ok: pol_delta.is_finite(),
        pol_delta,
        ad_status,
        ad_rho,
    }
}

/// ζ(ε) = 1 − (1+ε)^−8.
pub fn zeta(epsilon: f64) -> f64 {
    1.0 - (1.0 + epsilon).powi(-8)
}

/// Inverse of [`zeta`].
pub fn epsilon_from_zeta(z: f64) -> f64 {
    (1.0 - z).powf(-1.0 / 8.0) - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSolution {
    pub epsilon: f64,
    pub zeta: f64,
    pub delta: f64,
    /// Feasible δ interval the midpoint was taken from.
    pub delta_lo: f64,
    pub delta_hi: f64,
}

/// 4ζ/(1+3ζ) + 2/n < 1 − 2/(ζ(n−1) − 2), with ζ(n−1) > 2.
pub fn epsilon_inequality_holds(n: usize, z: f64) -> bool {
    let nf = n as f64;
    let gap = z * (nf - 1.0) - 2.0;
    gap > 0.0 && 4.0 * z / (1.0 + 3.0 * z) + 2.0 / nf < 1.0 - 2.0 / gap
}

/// Finds ε ∈ (0, 1) whose ζ(ε) satisfies [`epsilon_inequality_holds`].
///
/// With ζ = δ + 2/(n−1) the inequality is equivalent to
/// δ²(n+6)/n − δ(n²−11n−10)/(n(n−1)) + 2(n+5)/(n−1)² < 0 for δ > 0. The
/// midpoint of the root interval, intersected with the δ values that keep
/// ε below 1, is returned.
pub fn solve_epsilon(n: usize) -> Option<EpsilonSolution> {
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let m = nf - 1.0;
    let a = (nf + 6.0) / nf;
    let b = -(nf * nf - 11.0 * nf - 10.0) / (nf * m);
    let c = 2.0 * (nf + 5.0) / (m * m);
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Stable root pair.
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = (q / a, c / q);
    let (lo, hi) = (r1.min(r2), r1.max(r2));
    let zeta_max = 1.0 - 2f64.powi(-8);
    let lo = lo.max(0.0);
    let hi = hi.min(zeta_max - 2.0 / m);
    if lo >= hi {
        return None;
    }
    let delta = 0.5 * (lo + hi);
    let z = delta + 2.0 / m;
    if !epsilon_inequality_holds(n, z) {
        return None;
    }
    Some(EpsilonSolution {
        epsilon: epsilon_from_zeta(z),
        zeta: z,
        delta,
        delta_lo: lo,
        delta_hi: hi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PRange {
    pub n: usize,
    pub epsilon: f64,
    pub zeta: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Lower bound on p/n, margin included.
    pub lower: f64,
    /// Upper bound on p/n, margin included.
    pub upper: f64,
    pub p_lo: usize,
    pub p_hi: usize,
}

impl PRange {
    pub fn is_empty(&self) -> bool {
        self.p_lo > self.p_hi
    }

    pub fn midpoint(&self) -> Option<usize> {
        (!self.is_empty()).then(|| (self.p_lo + self.p_hi) / 2)
    }
}

pub fn admissible_p_range(n: usize, epsilon: f64, alpha: f64, beta: f64) -> Result<PRange> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "ε must lie in (0, 1), got {epsilon}"
        )));
    }
    for (name, v) in [("α", alpha), ("β", beta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must lie in (0, 1), got {v}"
            )));
        }
    }
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    let nf = n as f64;
    let z = zeta(epsilon);
    let gap = z * (nf - 1.0) - 2.0;
    if gap <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "ζ(ε)(n−1) = {} must exceed 2",
            z * (nf - 1.0)
        )));
    }
    let lower = 4.0 * z / (1.0 + 3.0 * z) + (2.0 / nf) * (1.0 + z) / (1.0 + 3.0 * z) + alpha;
    let upper = 1.0 - 2.0 / gap - beta;
    let p_lo = ((nf * lower).ceil().max(1.0) as usize).min(n - 1);
    let p_hi = ((nf * upper).floor().max(0.0) as usize).min(n - 1);
    // An upper bound below 1 leaves nothing; p_lo ≥ 1 keeps the range empty.
    let p_hi = if nf * upper < 1.0 { 0 } else { p_hi };
    Ok(PRange {
        n,
        epsilon,
        zeta: z,
        alpha,
        beta,
        lower,
        upper,
        p_lo,
        p_hi,
    })
}

/// Default margins for automatic p.
pub const DEFAULT_MARGIN: f64 = 0.01;

/// Midpoint of the admissible range with ε from [`solve_epsilon`] and
/// α = β = 0.01.
pub fn auto_p(n: usize) -> Result<usize> {
    let sol = solve_epsilon(n)
        .ok_or_else(|| Error::InvalidParameter(format!("no admissible ε for n = {n}")))?;
    let range = admissible_p_range(n, sol.epsilon, DEFAULT_MARGIN, DEFAULT_MARGIN)?;
    range
        .midpoint()
        .ok_or_else(|| Error::InvalidParameter(format!("admissible p range is empty for n = {n}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub model: String,
    pub dim: usize,
    pub risk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Position of the chosen model in the collection.
    pub chosen: usize,
    pub chosen_model: String,
    pub chosen_dim: usize,
    pub chosen_risk: f64,
    pub p: usize,
    pub curve: Vec<CurvePoint>,
    /// Positions of every model attaining the minimum.
    pub ties: Vec<usize>,
}

fn model_stats(collection: &Collection, sample: &Sample) -> Vec<SufficientStats> {
    if let Some(top) = collection.nested_trig() {
        let full = SufficientStats::compute(top, sample);
        return collection
            .models
            .iter()
            .map(|m| full.prefix(m.dim()))
            .collect();
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        collection
            .models
            .par_iter()
            .map(|m| SufficientStats::compute(m, sample))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        collection
            .models
            .iter()
            .map(|m| SufficientStats::compute(m, sample))
            .collect()
    }
}

/// Closed-form Lpo risk of every model, in collection order.
pub fn risk_curve(collection: &Collection, sample: &Sample, p: usize) -> Result<Vec<CurvePoint>> {
    check_p(sample.len(), p)?;
    if collection.is_empty() {
        return Err(Error::InvalidCollection("empty collection".into()));
    }
    model_stats(collection, sample)
        .iter()
        .zip(&collection.models)
        .map(|(st, m)| {
            Ok(CurvePoint {
                model: m.id(),
                dim: m.dim(),
                risk: st.lpo_risk(p)?,
            })
        })
        .collect()
}

/// Argmin of the risk curve; ties go to the smallest dimension, then to the
/// earliest model.
pub fn select_from_curve(curve: Vec<CurvePoint>, p: usize) -> Result<SelectionResult> {
    let min = curve.iter().map(|c| c.risk).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::InvalidCollection("no finite risk in curve".into()));
    }
    let ties: Vec<usize> = (0..curve.len()).filter(|&i| curve[i].risk == min).collect();
    let chosen = *ties
        .iter()
        .min_by_key(|&&i| (curve[i].dim, i))
        .expect("minimum is attained");
    Ok(SelectionResult {
        chosen,
        chosen_model: curve[chosen].model.clone(),
        chosen_dim: curve[chosen].dim,
        chosen_risk: curve[chosen].risk,
        p,
        curve,
        ties,
    })
}

pub fn select_model(collection: &Collection, sample: &Sample, p: usize) -> Result<SelectionResult> {
    select_from_curve(risk_curve(collection, sample, p)?, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{make_haar_model, HaarKind};
    use crate::lpo::lpo_risk_closed;

    fn opts() -> CollectionOptions {
        CollectionOptions::default()
    }

    #[test]
    fn collection_sizes() {
        let pc = build_collection(CollectionKind::Pc, 1000, 1.0, opts()).unwrap();
        assert_eq!(pc.dims(), (1..=20).collect::<Vec<_>>());
        let pp = build_collection(CollectionKind::Pp, 1000, 1.0, opts()).unwrap();
        assert_eq!(pp.dims(), vec![1, 2, 4, 8, 16]);
        let tp = build_collection(CollectionKind::Tp, 1000, 1.0, opts()).unwrap();
        assert_eq!(tp.dims(), (0..=9).map(|k| 2 * k + 1).collect::<Vec<_>>());
        let pp3 = build_collection(
            CollectionKind::Pp,
            1000,
            1.0,
            CollectionOptions {
                degree_bound: 3,
                max_dim: None,
            },
        )
        .unwrap();
        assert_eq!(pp3.dims(), vec![3, 6, 12]);
    }

    #[test]
    fn collection_errors() {
        assert!(build_collection(CollectionKind::Pc, 1, 1.0, opts()).is_err());
        assert!(build_collection(CollectionKind::Pc, 100, 0.0, opts()).is_err());
        // 3/(ln 3)² ≈ 2.49 admits D ≤ 2, but a tiny Φ admits nothing.
        assert!(matches!(
            build_collection(CollectionKind::Pc, 3, 0.1, opts()),
            Err(Error::InvalidCollection(_))
        ));
        assert!(Collection::custom(vec![], 5).is_err());
    }

    #[test]
    fn assumptions_pc() {
        let pc = build_collection(CollectionKind::Pc, 1000, 1.0, opts()).unwrap();
        let r = check_assumptions(&pc, 1000, None);
        assert!(r.reg_ok && r.reg2_ok && r.reg3_ok && r.pol_ok);
        assert_eq!(r.pol_delta, 0.0);
        assert_eq!(r.ad_status, AdStatus::Unknown);
        let r = check_assumptions(&pc, 1000, Some(&DensitySpec::uniform()));
        assert_eq!(r.ad_status, AdStatus::VerifiedSufficientCondition);
        let forced = build_collection(
            CollectionKind::Pc,
            50,
            1.0,
            CollectionOptions {
                degree_bound: 1,
                max_dim: Some(50),
            },
        )
        .unwrap();
        assert!(!check_assumptions(&forced, 50, None).reg_ok);
    }

    #[test]
    fn assumptions_tp_reg3() {
        let tp = build_collection(CollectionKind::Tp, 1000, 1.0, opts()).unwrap();
        let r = check_assumptions(&tp, 1000, None);
        assert!(r.reg3_ok);
        assert!((r.reg3_phi - 1.0).abs() < 1e-15);
        assert!(r.reg_ok);
    }

    #[test]
    fn reg_implies_reg2_for_partitions() {
        for n in [50usize, 200, 1000, 5000] {
            for phi in [0.5, 1.0, 2.0] {
                for kind in [CollectionKind::Pc, CollectionKind::Pp] {
                    let Ok(c) = build_collection(kind, n, phi, opts()) else {
                        continue;
                    };
                    let r = check_assumptions(&c, n, None);
                    assert!(!r.reg_ok || r.reg2_ok, "{kind:?} n={n} Φ={phi}");
                }
            }
        }
    }

    #[test]
    fn pol_detects_duplicates() {
        let h = make_histogram_model(4).unwrap();
        let c = Collection::custom(vec![h, h, make_histogram_model(2).unwrap()], 100).unwrap();
        let r = check_assumptions(&c, 100, None);
        assert!((r.pol_delta - 0.5).abs() < 1e-12);
    }

    #[test]
    fn epsilon_solver() {
        assert!(solve_epsilon(10).is_none());
        for n in [31usize, 50, 100, 1000, 100_000] {
            let s = solve_epsilon(n).unwrap();
            assert!(s.epsilon > 0.0 && s.epsilon < 1.0);
            assert!((zeta(s.epsilon) - s.zeta).abs() < 1e-12);
            assert!(epsilon_inequality_holds(n, zeta(s.epsilon)));
        }
    }

    #[test]
    fn p_range() {
        let s = solve_epsilon(100).unwrap();
        let r = admissible_p_range(100, s.epsilon, 0.01, 0.01).unwrap();
        assert!(!r.is_empty());
        assert!(r.lower < r.upper);
        let wide = admissible_p_range(100, s.epsilon, 0.49, 0.49).unwrap();
        assert!(wide.is_empty());
        assert!(wide.midpoint().is_none());
        assert!(admissible_p_range(100, 0.0, 0.01, 0.01).is_err());
        assert!(admissible_p_range(100, 0.5, 0.0, 0.01).is_err());
        // ζ(0.01)·9 < 2
        assert!(admissible_p_range(10, 0.01, 0.01, 0.01).is_err());
    }

    #[test]
    fn selection_fixture() {
        let s = Sample::new(vec![0.1, 0.2, 0.7]).unwrap();
        let c = build_collection(
            CollectionKind::Pc,
            3,
            1.0,
            CollectionOptions {
                degree_bound: 1,
                max_dim: Some(2),
            },
        )
        .unwrap();
        let r = select_model(&c, &s, 2).unwrap();
        assert_eq!(r.chosen_dim, 1);
        assert!((r.curve[0].risk + 1.0).abs() < 1e-15);
        assert!((r.curve[1].risk - 2.0 / 3.0).abs() < 1e-14);
        let single = Collection::custom(vec![make_histogram_model(2).unwrap()], 3).unwrap();
        assert_eq!(select_model(&single, &s, 1).unwrap().chosen, 0);
        assert!(select_model(&c, &s, 3).is_err());
    }

    #[test]
    fn tie_break_smallest_dim() {
        // Histogram 1 and Haar scaling level 0 are the same model.
        let s = Sample::new(vec![0.3, 0.6, 0.9, 0.1]).unwrap();
        let c = Collection::custom(
            vec![
                make_histogram_model(2).unwrap(),
                make_haar_model(HaarKind::ScalingLevel(0)).unwrap(),
                make_histogram_model(1).unwrap(),
            ],
            4,
        )
        .unwrap();
        let r = select_model(&c, &s, 1).unwrap();
        assert_eq!(r.ties, vec![1, 2]);
        assert_eq!(r.chosen, 1);
    }

    #[test]
    fn duplication_and_permutation_invariance() {
        let vals: Vec<f64> = (0..60)
            .map(|i| ((i * 7919) % 1000) as f64 / 1000.0)
            .collect();
        let s = Sample::new(vals.clone()).unwrap();
        let c = build_collection(CollectionKind::Pc, 60, 2.0, opts()).unwrap();
        let base = select_model(&c, &s, 30).unwrap();
        let mut dup = c.models.clone();
        dup.extend(c.models.iter().cloned());
        let dup = Collection::custom(dup, 60).unwrap();
        assert_eq!(
            select_model(&dup, &s, 30).unwrap().chosen_risk,
            base.chosen_risk
        );
        let mut rev = vals;
        rev.reverse();
        let r = select_model(&c, &Sample::new(rev).unwrap(), 30).unwrap();
        assert_eq!(r.chosen, base.chosen);
        assert!((r.chosen_risk - base.chosen_risk).abs() < 1e-12);
    }

    #[test]
    fn nested_trig_matches_direct() {
        let vals: Vec<f64> = (0..200).map(|i| ((i * 611) % 997) as f64 / 997.0).collect();
        let s = Sample::new(vals).unwrap();
        let tp = build_collection(CollectionKind::Tp, 1000, 1.0, opts()).unwrap();
        let curve = risk_curve(&tp, &s, 50).unwrap();
        for (pt, m) in curve.iter().zip(&tp.models) {
            let direct = lpo_risk_closed(m, &s, 50).unwrap().value;
            assert!((pt.risk - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }
}
