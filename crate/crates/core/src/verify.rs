//! Self-check suite: closed forms against brute-force and enumeration oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bases::{
    make_haar_model, make_histogram_model, make_piecewise_poly_model, make_trig_model, HaarKind,
    Model,
};
use crate::density::DensitySpec;
use crate::error::Result;
use crate::estimator::Sample;
use crate::lpo::{
    lpo_risk_brute, lpo_risk_closed, lpo_risk_haar_fast, lpo_risk_hist_fast, SufficientStats,
};
use crate::moments::{exact_moments_oracle, hist_variance_poly, lpo_expectation, lpo_variance};
use crate::numeric::binomial;
use crate::penalty::{expected_ideal_penalty, expected_lpo_penalty, lpo_penalty, overpen_factor};
use crate::simulation::density_moments;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub check: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl VerifyRow {
    fn new(check: &str, cases: usize, max_error: f64, tolerance: f64) -> Self {
        VerifyRow {
            check: check.into(),
            cases,
            max_error,
            tolerance,
            pass: max_error <= tolerance,
        }
    }
}

/// One random model from each of the four basis families, cycling on `k`.
pub fn random_model(rng: &mut impl Rng, k: usize) -> Model {
    match k % 4 {
        0 => make_histogram_model(rng.gen_range(1..=6)).unwrap(),
        1 => make_trig_model(rng.gen_range(0..=3)).unwrap(),
        2 => {
            if rng.gen_bool(0.5) {
                make_haar_model(HaarKind::ScalingLevel(rng.gen_range(0..=3))).unwrap()
            } else {
                make_haar_model(HaarKind::Wavelet(rng.gen_range(0..=2))).unwrap()
            }
        }
        _ => make_piecewise_poly_model(rng.gen_range(0..=2), rng.gen_range(1..=3)).unwrap(),
    }
}

pub fn random_sample(rng: &mut impl Rng, n: usize) -> Sample {
    Sample::new((0..n).map(|_| rng.gen::<f64>()).collect()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Closed form against brute-force enumeration over random cases.
pub fn check_closed_vs_brute(cases: usize, seed: u64) -> Result<VerifyRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut done = 0;
    let mut k = 0;
    while done < cases {
        let model = random_model(&mut rng, k);
        k += 1;
        let n = rng.gen_range(2..=12);
        let sample = random_sample(&mut rng, n);
        for p in 1..n {
            if binomial(n as u64, p as u64)? > 10_000 {
                continue;
            }
            let closed = lpo_risk_closed(&model, &sample, p)?.value;
            let brute = lpo_risk_brute(&model, &sample, p, 10_000)?.value;
            worst = worst.max(rel(closed, brute));
            done += 1;
        }
    }
    Ok(VerifyRow::new(
        "closed form vs brute force",
        done,
        worst,
        1e-10,
    ))
}

/// Histogram and Haar count formulas against the general closed form.
pub fn check_fast_paths(cases: usize, seed: u64) -> Result<VerifyRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(2..=2000);
        let sample = random_sample(&mut rng, n);
        let p = rng.gen_range(1..n);
        let bins = rng.gen_range(1..=64);
        let general = lpo_risk_closed(&make_histogram_model(bins)?, &sample, p)?.value;
        worst = worst.max(rel(lpo_risk_hist_fast(bins, &sample, p)?.value, general));
        let level = rng.gen_range(0..=6);
        let general =
            lpo_risk_closed(&make_haar_model(HaarKind::ScalingLevel(level))?, &sample, p)?.value;
        worst = worst.max(rel(lpo_risk_haar_fast(level, &sample, p)?.value, general));
    }
    Ok(VerifyRow::new(
        "histogram/Haar count formulas vs general",
        2 * cases,
        worst,
        1e-12,
    ))
}

/// Small piecewise-constant densities for the enumeration oracle.
pub fn oracle_densities() -> Vec<DensitySpec> {
    vec![
        DensitySpec::uniform(),
        DensitySpec::piecewise_constant(vec![0.0, 0.5, 1.0], vec![1.5, 0.5]).unwrap(),
        DensitySpec::piecewise_constant(vec![0.0, 0.25, 1.0], vec![2.0, 2.0 / 3.0]).unwrap(),
        DensitySpec::piecewise_constant(vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0], vec![0.6, 1.5, 0.9])
            .unwrap(),
    ]
}

/// Models with at most three cell-constant basis functions.
pub fn oracle_models() -> Vec<Model> {
    vec![
        make_histogram_model(1).unwrap(),
        make_histogram_model(2).unwrap(),
        make_histogram_model(3).unwrap(),
        make_haar_model(HaarKind::ScalingLevel(1)).unwrap(),
        make_haar_model(HaarKind::Wavelet(0)).unwrap(),
        make_piecewise_poly_model(1, 1).unwrap(),
    ]
}

/// Mean and variance formulas against exact enumeration, n ≤ `max_n`.
pub fn check_moments_vs_oracle(max_n: usize) -> Result<(VerifyRow, VerifyRow)> {
    let (mut wm, mut wv, mut cases) = (0.0f64, 0.0f64, 0);
    for s in oracle_densities() {
        for m in oracle_models() {
            let bm = density_moments(&s, &m);
            for n in 2..=max_n {
                for p in 1..n {
                    let (mean, var) = exact_moments_oracle(&m, &s, n, p)?;
                    wm = wm.max((lpo_expectation(&bm, n, p)? - mean).abs());
                    wv = wv.max((lpo_variance(&bm, n, p)? - var).abs());
                    cases += 1;
                }
            }
        }
    }
    Ok((
        VerifyRow::new("expectation vs enumeration", cases, wm, 1e-10),
        VerifyRow::new("variance vs enumeration", cases, wv, 1e-10),
    ))
}

/// Histogram variance polynomial against the general variance.
pub fn check_hist_poly(max_n: usize) -> Result<VerifyRow> {
    let (mut worst, mut cases) = (0.0f64, 0);
    for s in oracle_densities() {
        for bins in 1..=4usize {
            let m = make_histogram_model(bins)?;
            let bm = density_moments(&s, &m);
            let alphas: Vec<f64> = (0..bins)
                .map(|k| s.mass(k as f64 / bins as f64, (k + 1) as f64 / bins as f64))
                .collect();
            let widths = vec![1.0 / bins as f64; bins];
            for n in 2..=max_n {
                for p in 1..n {
                    let general = lpo_variance(&bm, n, p)?;
                    worst =
                        worst.max((hist_variance_poly(&alphas, &widths, n, p)? - general).abs());
                    cases += 1;
                }
            }
        }
    }
    Ok(VerifyRow::new(
        "histogram variance polynomial vs general",
        cases,
        worst,
        1e-10,
    ))
}

/// Decomposition R_p = P_nγ + pen_p and the expected-penalty ratio.
pub fn check_penalty(seed: u64) -> Result<(VerifyRow, VerifyRow)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0.0f64;
    let mut cases = 0;
    for k in 0..200 {
        let model = random_model(&mut rng, k);
        let n = rng.gen_range(2..=200);
        let sample = random_sample(&mut rng, n);
        let p = rng.gen_range(1..n);
        let d = lpo_penalty(&model, &sample, p)?;
        bad = bad.max((d.lpo_risk - (d.empirical_risk + d.lpo_penalty)).abs());
        let st = SufficientStats::compute(&model, &sample);
        bad = bad
            .max(rel(d.lpo_risk, st.lpo_risk(p)?) - 2.0 * f64::EPSILON)
            .max(0.0);
        cases += 1;
    }
    let decomposition = VerifyRow::new("risk = empirical risk + penalty", cases, bad, 0.0);

    let mut worst = 0.0f64;
    let mut cases = 0;
    let s = DensitySpec::holder_cusp(10.0, 1.0)?;
    for bins in [2usize, 5, 11] {
        let bm = density_moments(&s, &make_histogram_model(bins)?);
        for n in [5usize, 20, 100, 1000] {
            for p in [1, n / 2, n - 1] {
                let ratio = expected_lpo_penalty(&bm, n, p)? / expected_ideal_penalty(&bm, n)?;
                let c = overpen_factor(n, p)?;
                worst = worst.max((ratio - c).abs() / c);
                cases += 1;
            }
        }
    }
    Ok((
        decomposition,
        VerifyRow::new("expected penalty ratio / C_over - 1", cases, worst, 1e-14),
    ))
}

/// Every check at its default size.
pub fn run_suite(seed: u64) -> Result<Vec<VerifyRow>> {
    let mut rows = vec![
        check_closed_vs_brute(500, seed)?,
        check_fast_paths(200, seed.wrapping_add(1))?,
    ];
    let (m, v) = check_moments_vs_oracle(6)?;
    rows.push(m);
    rows.push(v);
    rows.push(check_hist_poly(12)?);
    let (d, r) = check_penalty(seed.wrapping_add(2))?;
    rows.push(d);
    rows.push(r);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        assert!(check_closed_vs_brute(40, 3).unwrap().pass);
        assert!(check_fast_paths(10, 3).unwrap().pass);
        let (m, v) = check_moments_vs_oracle(4).unwrap();
        assert!(m.pass && v.pass, "{m:?} {v:?}");
        assert!(check_hist_poly(6).unwrap().pass);
    }
}
