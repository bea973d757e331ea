//! Exact mean, variance and bias of the Lpo risk estimator under a known
//! density, plus an enumeration oracle for small piecewise-constant cases.
//!
//! Writing n(n−1)(n−p) R_p = α Σ_j φ_m(X_j) − β Σ_{j≠k} K(X_j, X_k) with
//! α = n−1, β = n−p+1 and K(x, y) = Σ_λ φ_λ(x) φ_λ(y), the variance follows
//! from the Hoeffding decomposition of the degree-2 U-statistic.

use serde::{Deserialize, Serialize};

use crate::bases::Model;
use crate::density::DensitySpec;
use crate::error::{Error, Result};
use crate::estimator::Sample;
use crate::lpo::{check_p, lpo_risk_brute};
use crate::numeric::{binomial, merge_breaks, KahanSum};

/// Moments of the basis functions under a known density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisMoments {
    /// Pφ_λ
    pub mean: Vec<f64>,
    /// P(φ_λ φ_μ); the diagonal holds Pφ_λ².
    pub second: Vec<Vec<f64>>,
    /// P(φ_λ² φ_μ); the diagonal holds Pφ_λ³.
    pub third: Vec<Vec<f64>>,
    /// E[(Σ_λ φ_λ²(X))²]
    pub phi_m_sq: f64,
    /// E[(Σ_λ φ_λ(X) Pφ_λ)²]
    pub kernel_sq: f64,
}

impl BasisMoments {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn validate(&self) -> Result<()> {
        let d = self.mean.len();
        if d == 0 {
            return Err(Error::MissingMoments("no basis functions".into()));
        }
        let square = |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|r| r.len() == d);
        if !square(&self.second) {
            return Err(Error::MissingMoments(
                "second-order table must be D x D".into(),
            ));
        }
        if !square(&self.third) {
            return Err(Error::MissingMoments(
                "third-order table must be D x D".into(),
            ));
        }
        Ok(())
    }

    /// V_m = E φ_m(X) = Σ_λ Pφ_λ².
    pub fn v_m(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.second[i][i])
            .collect::<KahanSum>()
            .value()
    }

    /// ‖s_m‖² = Σ_λ (Pφ_λ)².
    pub fn proj_sq_norm(&self) -> f64 {
        self.mean
            .iter()
            .map(|m| m * m)
            .collect::<KahanSum>()
            .value()
    }

    /// Σ_λ Var φ_λ(X).
    pub fn variance_sum(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.second[i][i] - self.mean[i] * self.mean[i])
            .collect::<KahanSum>()
            .value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mean: f64,
    pub variance: f64,
    pub bias: f64,
    pub n: usize,
    pub p: usize,
}

pub fn lpo_expectation(bm: &BasisMoments, n: usize, p: usize) -> Result<f64> {
    check_p(n, p)?;
    bm.validate()?;
    let theta = bm.proj_sq_norm();
    Ok(bm.variance_sum() / (n - p) as f64 - theta)
}

pub fn lpo_bias(bm: &BasisMoments, n: usize, p: usize) -> Result<f64> {
    check_p(n, p)?;
    bm.validate()?;
    let (nf, pf) = (n as f64, p as f64);
    Ok((pf / (nf * (nf - pf)) * bm.variance_sum()).max(0.0))
}

/// r_n(m) = E[‖ŝ_m‖² − 2∫ s ŝ_m] = (1/n) Σ Var φ_λ − ‖s_m‖².
pub fn expected_ideal_criterion(bm: &BasisMoments, n: usize) -> f64 {
    bm.variance_sum() / n as f64 - bm.proj_sq_norm()
}

/// Relative cancellation threshold below which a negative variance is zeroed.
const CLAMP_REL: f64 = 1e-12;

fn clamp_variance(value: f64, scale: f64) -> f64 {
    if value < 0.0 && -value <= CLAMP_REL * scale.max(f64::MIN_POSITIVE) {
        0.0
    } else {
        value
    }
}

pub fn lpo_variance(bm: &BasisMoments, n: usize, p: usize) -> Result<f64> {
    check_p(n, p)?;
    bm.validate()?;
    let d = bm.dim();
    let (nf, pf) = (n as f64, p as f64);
    let alpha = nf - 1.0;
    let beta = nf - pf + 1.0;
    let t1 = nf * (nf - 1.0);
    let t2 = t1 * (nf - 2.0);

    let v_m = bm.v_m();
    let theta = bm.proj_sq_norm();
    let var_phi_m = bm.phi_m_sq - v_m * v_m;
    let kernel_sq: f64 = bm
        .second
        .iter()
        .flat_map(|row| row.iter().map(|v| v * v))
        .collect::<KahanSum>()
        .value();
    let var_kernel = kernel_sq - theta * theta;
    let var_projection = bm.kernel_sq - theta * theta;
    // E[φ_m(X) Σ_μ φ_μ(X) Pφ_μ]
    let phi_m_kernel: f64 = (0..d)
        .flat_map(|mu| (0..d).map(move |lam| (lam, mu)))
        .map(|(lam, mu)| bm.third[lam][mu] * bm.mean[mu])
        .collect::<KahanSum>()
        .value();
    let cov = phi_m_kernel - v_m * theta;

    let terms = [
        alpha * alpha * nf * var_phi_m,
        beta * beta * 2.0 * t1 * var_kernel,
        beta * beta * 4.0 * t2 * var_projection,
        -4.0 * alpha * beta * t1 * cov,
    ];
    let scale = terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
    let total = clamp_variance(terms.iter().copied().collect::<KahanSum>().value(), scale);
    let denom = nf * (nf - 1.0) * (nf - pf);
    Ok(total / (denom * denom))
}

pub fn moment_report(bm: &BasisMoments, n: usize, p: usize) -> Result<MomentReport> {
    Ok(MomentReport {
        mean: lpo_expectation(bm, n, p)?,
        variance: lpo_variance(bm, n, p)?,
        bias: lpo_bias(bm, n, p)?,
        n,
        p,
    })
}

/// Coefficients (q₂, q₁, q₀) of the histogram variance polynomial in p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistVariancePoly {
    pub q2: f64,
    pub q1: f64,
    pub q0: f64,
    pub n: usize,
}

impl HistVariancePoly {
    pub fn variance(&self, p: usize) -> Result<f64> {
        check_p(self.n, p)?;
        let (nf, pf) = (self.n as f64, p as f64);
        let num = pf * pf * self.q2 + pf * self.q1 + self.q0;
        let scale = (pf * pf * self.q2)
            .abs()
            .max((pf * self.q1).abs())
            .max(self.q0.abs());
        let denom = nf * (nf - 1.0) * (nf - pf);
        Ok(clamp_variance(num, scale) / (denom * denom))
    }
}

/// Builds q₂, q₁, q₀ from bin probabilities α_λ and widths ω_λ using
/// s_{i,j} = Σ_k α_k^i / ω_k^j.
pub fn hist_variance_coeffs(alphas: &[f64], widths: &[f64], n: usize) -> Result<HistVariancePoly> {
    if alphas.is_empty() || alphas.len() != widths.len() {
        return Err(Error::InvalidParameter(
            "need one width per bin probability".into(),
        ));
    }
    if alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::InvalidParameter(
            "bin probabilities must be nonnegative".into(),
        ));
    }
    if alphas.iter().sum::<f64>() > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(
            "bin probabilities sum above 1".into(),
        ));
    }
    if widths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidParameter("widths must be positive".into()));
    }
    let s = |i: i32, j: i32| -> f64 {
        alphas
            .iter()
            .zip(widths)
            .map(|(a, w)| a.powi(i) / w.powi(j))
            .collect::<KahanSum>()
            .value()
    };
    let (s11, s12, s21, s22, s32) = (s(1, 1), s(1, 2), s(2, 1), s(2, 2), s(3, 2));
    let nf = n as f64;
    let t1 = nf * (nf - 1.0);
    let q2 = t1 * (2.0 * s22 + 4.0 * s32 * (nf - 2.0) + s21 * s21 * (-4.0 * nf + 6.0));
    let q1 = t1
        * (-8.0 * s22
            - 8.0 * s32 * (nf - 2.0) * (nf + 1.0)
            - 4.0 * s11 * s21 * (nf - 1.0)
            - 2.0 * s21 * s21 * (-4.0 * nf * nf + 2.0 * nf + 6.0));
    let q0 = t1
        * (s12 * (nf - 1.0) - 2.0 * s22 * (nf * nf - 2.0 * nf - 3.0)
            + 4.0 * s32 * (nf - 2.0) * (nf + 1.0) * (nf + 1.0)
            - s11 * s11 * (nf - 1.0)
            + 4.0 * s11 * s21 * (nf * nf - 1.0)
            + s21 * s21 * (-4.0 * nf + 6.0) * (nf + 1.0) * (nf + 1.0));
    Ok(HistVariancePoly { q2, q1, q0, n })
}

/// Histogram variance of the Lpo estimator through the q-polynomial form.
pub fn hist_variance_poly(alphas: &[f64], widths: &[f64], n: usize, p: usize) -> Result<f64> {
    hist_variance_coeffs(alphas, widths, n)?.variance(p)
}

/// Maximum number of observations the enumeration oracle accepts.
pub const ORACLE_MAX_N: usize = 8;
/// Maximum number of density pieces the enumeration oracle accepts.
pub const ORACLE_MAX_PIECES: usize = 4;
/// Maximum number of cells in the common refinement.
pub const ORACLE_MAX_CELLS: usize = 8;

/// Exact (mean, variance) of R_p by enumerating every assignment of the n
/// observations to the cells on which both the density and the basis are
/// constant, with multinomial weights. Each outcome's R_p comes from
/// brute-force leave-p-out on one representative point per cell.
pub fn exact_moments_oracle(
    model: &Model,
    density: &DensitySpec,
    n: usize,
    p: usize,
) -> Result<(f64, f64)> {
    check_p(n, p)?;
    if n > ORACLE_MAX_N {
        return Err(Error::TooLarge(format!(
            "oracle supports n <= {ORACLE_MAX_N}, got {n}"
        )));
    }
    if !density.is_piecewise_constant() {
        return Err(Error::TooLarge(
            "oracle needs a piecewise-constant density".into(),
        ));
    }
    let pieces = density.breakpoints().len() + 1;
    if pieces > ORACLE_MAX_PIECES {
        return Err(Error::TooLarge(format!(
            "density has {pieces} pieces (max {ORACLE_MAX_PIECES})"
        )));
    }
    let cells = model
        .constant_cells()
        .ok_or_else(|| Error::TooLarge(format!("{} is not piecewise constant", model.id())))?;
    let model_breaks: Vec<f64> = (1..cells).map(|k| k as f64 / cells as f64).collect();
    let breaks = merge_breaks(&[&model_breaks, &density.breakpoints()]);
    let k = breaks.len() - 1;
    if k > ORACLE_MAX_CELLS {
        return Err(Error::TooLarge(format!(
            "refinement has {k} cells (max {ORACLE_MAX_CELLS})"
        )));
    }
    let probs: Vec<f64> = breaks
        .windows(2)
        .map(|w| density.mass(w[0], w[1]))
        .collect();
    let reps: Vec<f64> = breaks.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();

    let mut outcomes: Vec<(f64, f64)> = Vec::new();
    let mut counts = vec![0usize; k];
    let n_fact = factorial(n)?;
    compositions(n, 0, &mut counts, &mut |c| {
        let mut weight = n_fact as f64;
        for (ci, pi) in c.iter().zip(&probs) {
            if *ci > 0 {
                if *pi == 0.0 {
                    return Ok(());
                }
                weight *= pi.powi(*ci as i32) / factorial(*ci)? as f64;
            }
        }
        let values: Vec<f64> = c
            .iter()
            .zip(&reps)
            .flat_map(|(&ci, &x)| std::iter::repeat_n(x, ci))
            .collect();
        let risk = lpo_risk_brute(model, &Sample::new(values)?, p, u128::MAX)?.value;
        outcomes.push((weight, risk));
        Ok(())
    })?;
    let mean: f64 = outcomes
        .iter()
        .map(|(w, r)| w * r)
        .collect::<KahanSum>()
        .value();
    let var: f64 = outcomes
        .iter()
        .map(|(w, r)| w * (r - mean) * (r - mean))
        .collect::<KahanSum>()
        .value();
    Ok((mean, var))
}

fn factorial(n: usize) -> Result<u128> {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k).ok_or(Error::Overflow))
}

fn compositions<F>(remaining: usize, pos: usize, counts: &mut [usize], f: &mut F) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<()>,
{
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        return f(counts);
    }
    for c in 0..=remaining {
        counts[pos] = c;
        compositions(remaining - c, pos + 1, counts, f)?;
    }
    Ok(())
}

/// Number of count vectors the oracle visits.
pub fn oracle_outcome_count(n: usize, cells: usize) -> Result<u128> {
    binomial((n + cells - 1) as u64, (cells - 1) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{make_haar_model, make_histogram_model, HaarKind};
    use crate::simulation::density_moments;

    fn uniform_hist2() -> BasisMoments {
        density_moments(&DensitySpec::uniform(), &make_histogram_model(2).unwrap())
    }

    #[test]
    fn constant_basis() {
        let bm = density_moments(&DensitySpec::uniform(), &make_histogram_model(1).unwrap());
        for (n, p) in [(2, 1), (5, 3), (10, 9)] {
            assert!((lpo_expectation(&bm, n, p).unwrap() + 1.0).abs() < 1e-15);
            assert_eq!(lpo_variance(&bm, n, p).unwrap(), 0.0);
            assert_eq!(lpo_bias(&bm, n, p).unwrap(), 0.0);
        }
        let d =
            DensitySpec::piecewise_constant(vec![0.0, 0.25, 1.0], vec![2.0, 2.0 / 3.0]).unwrap();
        let bm = density_moments(&d, &make_histogram_model(1).unwrap());
        assert!(lpo_variance(&bm, 6, 2).unwrap().abs() < 1e-15);
    }

    #[test]
    fn uniform_hist2_examples() {
        let bm = uniform_hist2();
        assert!((bm.mean[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((bm.second[0][0] - 1.0).abs() < 1e-15);
        assert!((lpo_expectation(&bm, 4, 2).unwrap() + 0.5).abs() < 1e-15);
        assert!((lpo_bias(&bm, 4, 2).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn invalid_p() {
        let bm = uniform_hist2();
        assert!(lpo_expectation(&bm, 4, 4).is_err());
        assert!(lpo_variance(&bm, 4, 0).is_err());
        assert!(lpo_bias(&bm, 1, 1).is_err());
    }

    #[test]
    fn missing_moments_rejected() {
        let mut bm = uniform_hist2();
        bm.third.pop();
        assert!(matches!(
            lpo_variance(&bm, 4, 1),
            Err(Error::MissingMoments(_))
        ));
    }

    #[test]
    fn single_bin_mass_has_zero_variance() {
        let v = hist_variance_poly(&[1.0], &[1.0], 5, 2).unwrap();
        assert!(v.abs() < 1e-15);
        let c = hist_variance_coeffs(&[1.0], &[1.0], 7).unwrap();
        assert!(c.q2.abs() < 1e-9 && c.q1.abs() < 1e-9 && c.q0.abs() < 1e-9);
        // all mass in one of two bins
        let v = hist_variance_poly(&[1.0, 0.0], &[0.5, 0.5], 6, 3).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn hist_poly_rejects_bad_inputs() {
        assert!(hist_variance_poly(&[0.7, 0.7], &[0.5, 0.5], 4, 1).is_err());
        assert!(hist_variance_poly(&[0.5, 0.5], &[0.5, 0.0], 4, 1).is_err());
        assert!(hist_variance_poly(&[0.5], &[0.5, 0.5], 4, 1).is_err());
    }

    #[test]
    fn oracle_constant_basis() {
        let (m, v) = exact_moments_oracle(
            &make_histogram_model(1).unwrap(),
            &DensitySpec::uniform(),
            5,
            2,
        )
        .unwrap();
        assert!((m + 1.0).abs() < 1e-14);
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn oracle_uniform_hist2_mean() {
        let (m, _) = exact_moments_oracle(
            &make_histogram_model(2).unwrap(),
            &DensitySpec::uniform(),
            4,
            2,
        )
        .unwrap();
        assert!((m + 0.5).abs() < 1e-12);
    }

    #[test]
    fn oracle_matches_formulas_and_poly() {
        let bm = uniform_hist2();
        for p in 1..4 {
            let (m, v) = exact_moments_oracle(
                &make_histogram_model(2).unwrap(),
                &DensitySpec::uniform(),
                4,
                p,
            )
            .unwrap();
            assert!((lpo_expectation(&bm, 4, p).unwrap() - m).abs() < 1e-10);
            assert!(
                (lpo_variance(&bm, 4, p).unwrap() - v).abs() < 1e-10,
                "p={p}"
            );
            assert!(
                (hist_variance_poly(&[0.5, 0.5], &[0.5, 0.5], 4, p).unwrap() - v).abs() < 1e-10
            );
        }
    }

    #[test]
    fn poly_is_quadratic_in_p() {
        // Three exact points determine the quadratic; a fourth must lie on it.
        let c = hist_variance_coeffs(&[0.2, 0.5, 0.3], &[0.25, 0.5, 0.25], 8).unwrap();
        let scaled = |p: usize| {
            let d = 8.0 * 7.0 * (8.0 - p as f64);
            c.variance(p).unwrap() * d * d
        };
        let (y1, y2, y3, y4) = (scaled(1), scaled(2), scaled(3), scaled(4));
        let second_diff = y3 - 2.0 * y2 + y1;
        assert!((y4 - (3.0 * y3 - 3.0 * y2 + y1)).abs() < 1e-9 * y4.abs().max(1.0));
        assert!((second_diff - 2.0 * c.q2).abs() < 1e-9 * c.q2.abs().max(1.0));
    }

    #[test]
    fn oracle_rejects_large_configs() {
        let h = make_histogram_model(2).unwrap();
        let u = DensitySpec::uniform();
        assert!(matches!(
            exact_moments_oracle(&h, &u, 9, 2),
            Err(Error::TooLarge(_))
        ));
        let t = crate::bases::make_trig_model(1).unwrap();
        assert!(matches!(
            exact_moments_oracle(&t, &u, 4, 2),
            Err(Error::TooLarge(_))
        ));
        let five =
            DensitySpec::piecewise_constant(vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0], vec![1.0; 5])
                .unwrap();
        assert!(matches!(
            exact_moments_oracle(&h, &five, 4, 2),
            Err(Error::TooLarge(_))
        ));
        let w = make_haar_model(HaarKind::Wavelet(3)).unwrap();
        assert!(matches!(
            exact_moments_oracle(&w, &u, 4, 2),
            Err(Error::TooLarge(_))
        ));
    }

    /// Variance with the cross term carrying the opposite sign.
    fn flipped_cross_variance(bm: &BasisMoments, n: usize, p: usize) -> f64 {
        let d = bm.dim();
        let (nf, pf) = (n as f64, p as f64);
        let (alpha, beta, t1) = (nf - 1.0, nf - pf + 1.0, nf * (nf - 1.0));
        let theta = bm.proj_sq_norm();
        let cross: f64 = (0..d)
            .flat_map(|mu| (0..d).map(move |lam| (lam, mu)))
            .map(|(lam, mu)| bm.third[lam][mu] * bm.mean[mu])
            .sum::<f64>()
            - bm.v_m() * theta;
        let correct = lpo_variance(bm, n, p).unwrap();
        let denom = (nf * (nf - 1.0) * (nf - pf)).powi(2);
        correct + 8.0 * alpha * beta * t1 * cross / denom
    }

    fn mc_moments(
        m: &Model,
        s: &DensitySpec,
        n: usize,
        p: usize,
        reps: usize,
        seed: u64,
    ) -> (f64, f64, f64, f64) {
        use crate::lpo::lpo_risk_closed;
        let vals: Vec<f64> = (0..reps)
            .map(|r| {
                lpo_risk_closed(m, &s.sample_stream(n, seed, r as u64).unwrap(), p)
                    .unwrap()
                    .value
            })
            .collect();
        let r = reps as f64;
        let mean = vals.iter().sum::<f64>() / r;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
        let m4 = vals.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / r;
        (mean, (var / r).sqrt(), var, ((m4 - var * var) / r).sqrt())
    }

    #[test]
    fn cross_term_sign_matters() {
        // φ_m is constant for regular histograms, so the cross term only
        // shows up with a non-constant φ_m such as piecewise linear pieces.
        let s = DensitySpec::holder_cusp(10.0, 1.0).unwrap();
        let m = crate::bases::make_piecewise_poly_model(1, 2).unwrap();
        let bm = density_moments(&s, &m);
        let (n, p) = (10, 4);
        let (_, _, var, se) = mc_moments(&m, &s, n, p, 100_000, 5);
        let right = lpo_variance(&bm, n, p).unwrap();
        let flipped = flipped_cross_variance(&bm, n, p);
        assert!((var - right).abs() < 4.0 * se, "{var} vs {right} (se {se})");
        assert!(
            (var - flipped).abs() > 10.0 * se,
            "{var} vs {flipped} (se {se})"
        );
    }

    #[test]
    fn monte_carlo_agrees() {
        let s = DensitySpec::holder_cusp(10.0, 1.0).unwrap();
        let m = make_histogram_model(3).unwrap();
        let (n, p, reps) = (20usize, 7usize, 100_000usize);
        let bm = density_moments(&s, &m);
        let (mean, se_mean, var, se_var) = mc_moments(&m, &s, n, p, reps, 11);
        let want_mean = lpo_expectation(&bm, n, p).unwrap();
        let want_var = lpo_variance(&bm, n, p).unwrap();
        assert!(
            (mean - want_mean).abs() < 4.0 * se_mean,
            "{mean} vs {want_mean}"
        );
        assert!((var - want_var).abs() < 4.0 * se_var, "{var} vs {want_var}");
    }
}
