//! Known densities on [0,1] used by simulations and moment oracles.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::Sample;

/// Density descriptor as it appears in JSON: `{"kind": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum DensityKind {
    /// `heights[i]` on `[edges[i], edges[i+1])`; edges run from 0 to 1.
    PiecewiseConstant { edges: Vec<f64>, heights: Vec<f64> },
    /// c (1 + L |x - 1/2|^alpha), normalized.
    HolderCusp { l: f64, alpha: f64 },
    /// 1 + Σ_k sqrt2 (cos[k-1] cos(2πkx) + sin[k-1] sin(2πkx)).
    TrigSmooth { cos: Vec<f64>, sin: Vec<f64> },
}

/// A validated density with its normalizing constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityKind", into = "DensityKind")]
pub struct DensitySpec {
    kind: DensityKind,
    norm: f64,
}

impl TryFrom<DensityKind> for DensitySpec {
    type Error = Error;

    fn try_from(kind: DensityKind) -> Result<Self> {
        DensitySpec::new(kind)
    }
}

impl From<DensitySpec> for DensityKind {
    fn from(d: DensitySpec) -> DensityKind {
        d.kind
    }
}

impl DensitySpec {
    pub fn new(kind: DensityKind) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidDensity(m));
        let norm = match &kind {
            DensityKind::PiecewiseConstant { edges, heights } => {
                if heights.is_empty() || edges.len() != heights.len() + 1 {
                    return bad("need one more edge than heights".into());
                }
                if edges[0] != 0.0 || *edges.last().unwrap() != 1.0 {
                    return bad("edges must start at 0 and end at 1".into());
                }
                if edges
                    .windows(2)
                    .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
                {
                    return bad("edges must be strictly increasing".into());
                }
                if heights.iter().any(|h| !(h.is_finite() && *h >= 0.0)) {
                    return bad("heights must be finite and nonnegative".into());
                }
                let mass: f64 = edges
                    .windows(2)
                    .zip(heights)
                    .map(|(w, h)| (w[1] - w[0]) * h)
                    .sum();
                if (mass - 1.0).abs() > 1e-10 {
                    return bad(format!("total mass {mass} differs from 1"));
                }
                1.0
            }
            DensityKind::HolderCusp { l, alpha } => {
                if !(l.is_finite() && *l >= 0.0) {
                    return bad("L must be finite and nonnegative".into());
                }
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return bad("alpha must lie in (0, 1]".into());
                }
                1.0 / (1.0 + l * 0.5f64.powf(*alpha) / (alpha + 1.0))
            }
            DensityKind::TrigSmooth { cos, sin } => {
                let amp: f64 = cos.iter().chain(sin).map(|c| c.abs()).sum::<f64>() * SQRT_2;
                if cos.iter().chain(sin).any(|c| !c.is_finite()) {
                    return bad("coefficients must be finite".into());
                }
                if amp > 1.0 {
                    return bad(format!(
                        "sqrt2 * Σ|coefficients| = {amp} exceeds 1; positivity is not guaranteed"
                    ));
                }
                1.0
            }
        };
        Ok(DensitySpec { kind, norm })
    }

    pub fn uniform() -> Self {
        DensitySpec::new(DensityKind::PiecewiseConstant {
            edges: vec![0.0, 1.0],
            heights: vec![1.0],
        })
        .expect("uniform density is valid")
    }

    pub fn piecewise_constant(edges: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        DensitySpec::new(DensityKind::PiecewiseConstant { edges, heights })
    }

    pub fn holder_cusp(l: f64, alpha: f64) -> Result<Self> {
        DensitySpec::new(DensityKind::HolderCusp { l, alpha })
    }

    pub fn trig_smooth(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        DensitySpec::new(DensityKind::TrigSmooth { cos, sin })
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match &self.kind {
            DensityKind::PiecewiseConstant { edges, heights } => {
                let i = edges[1..]
                    .partition_point(|&e| e <= x)
                    .min(heights.len() - 1);
                heights[i]
            }
            DensityKind::HolderCusp { l, alpha } => {
                self.norm * (1.0 + l * (x - 0.5).abs().powf(*alpha))
            }
            DensityKind::TrigSmooth { cos, sin } => {
                let mut v = 1.0;
                for (k, c) in cos.iter().enumerate() {
                    v += SQRT_2 * c * (2.0 * PI * (k + 1) as f64 * x).cos();
                }
                for (k, s) in sin.iter().enumerate() {
                    v += SQRT_2 * s * (2.0 * PI * (k + 1) as f64 * x).sin();
                }
                v
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match &self.kind {
            DensityKind::PiecewiseConstant { edges, heights } => {
                let mut acc = 0.0;
                for (w, h) in edges.windows(2).zip(heights) {
                    if x <= w[0] {
                        break;
                    }
                    acc += (x.min(w[1]) - w[0]) * h;
                }
                acc
            }
            DensityKind::HolderCusp { l, alpha } => {
                let u = x - 0.5;
                let a1 = alpha + 1.0;
                self.norm * (x + l * u.signum() * u.abs().powf(a1) / a1 + l * 0.5f64.powf(a1) / a1)
            }
            DensityKind::TrigSmooth { cos, sin } => {
                let mut v = x;
                for (k, c) in cos.iter().enumerate() {
                    let w = 2.0 * PI * (k + 1) as f64;
                    v += SQRT_2 * c * (w * x).sin() / w;
                }
                for (k, s) in sin.iter().enumerate() {
                    let w = 2.0 * PI * (k + 1) as f64;
                    v += SQRT_2 * s * (1.0 - (w * x).cos()) / w;
                }
                v
            }
        }
    }

    /// P([a, b)).
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        match &self.kind {
            // summing only the overlapping pieces keeps this exact for cells
            DensityKind::PiecewiseConstant { edges, heights } => edges
                .windows(2)
                .zip(heights)
                .map(|(w, h)| {
                    let lo = a.max(w[0]);
                    let hi = b.min(w[1]);
                    if hi > lo {
                        (hi - lo) * h
                    } else {
                        0.0
                    }
                })
                .sum(),
            _ => self.cdf(b) - self.cdf(a),
        }
    }

    /// ‖s‖² in closed form.
    pub fn sq_norm(&self) -> f64 {
        match &self.kind {
            DensityKind::PiecewiseConstant { edges, heights } => edges
                .windows(2)
                .zip(heights)
                .map(|(w, h)| (w[1] - w[0]) * h * h)
                .sum(),
            DensityKind::HolderCusp { l, alpha } => {
                let c = self.norm;
                c * c
                    * (1.0
                        + 2.0 * l * 0.5f64.powf(*alpha) / (alpha + 1.0)
                        + l * l * 0.5f64.powf(2.0 * alpha) / (2.0 * alpha + 1.0))
            }
            DensityKind::TrigSmooth { cos, sin } => {
                1.0 + cos.iter().chain(sin).map(|c| c * c).sum::<f64>()
            }
        }
    }

    /// Points where the density is not smooth (excluding 0 and 1).
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            DensityKind::PiecewiseConstant { edges, .. } => edges[1..edges.len() - 1].to_vec(),
            DensityKind::HolderCusp { .. } => vec![0.5],
            DensityKind::TrigSmooth { .. } => Vec::new(),
        }
    }

    /// A lower bound ρ on the density over [0,1].
    pub fn lower_bound(&self) -> f64 {
        match &self.kind {
            DensityKind::PiecewiseConstant { heights, .. } => {
                heights.iter().copied().fold(f64::INFINITY, f64::min)
            }
            DensityKind::HolderCusp { .. } => self.norm,
            DensityKind::TrigSmooth { cos, sin } => {
                1.0 - SQRT_2 * cos.iter().chain(sin).map(|c| c.abs()).sum::<f64>()
            }
        }
    }

    /// Hölder constant L′ of the normalized cusp density (s ∈ H(L′, α)).
    pub fn holder_constant(&self) -> Option<(f64, f64)> {
        match &self.kind {
            DensityKind::HolderCusp { l, alpha } => Some((self.norm * l, *alpha)),
            _ => None,
        }
    }

    pub fn is_piecewise_constant(&self) -> bool {
        matches!(self.kind, DensityKind::PiecewiseConstant { .. })
    }

    /// Inverse CDF at `u` ∈ [0,1).
    pub fn quantile(&self, u: f64) -> f64 {
        match &self.kind {
            DensityKind::PiecewiseConstant { edges, heights } => {
                let mut acc = 0.0;
                for (w, &h) in edges.windows(2).zip(heights) {
                    let m = (w[1] - w[0]) * h;
                    if h > 0.0 && u < acc + m {
                        return (w[0] + (u - acc) / h).clamp(w[0], w[1]);
                    }
                    acc += m;
                }
                // u rounding past the total mass: last piece with positive height
                let last = heights
                    .iter()
                    .rposition(|&h| h > 0.0)
                    .unwrap_or(heights.len() - 1);
                edges[last + 1]
            }
            _ => self.invert_cdf(u),
        }
    }

    /// Safeguarded Newton on the monotone CDF, terminating once the bracket
    /// is narrower than 1e-12.
    fn invert_cdf(&self, u: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut x = u;
        for _ in 0..200 {
            let f = self.cdf(x) - u;
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if hi - lo < 1e-12 || f == 0.0 {
                break;
            }
            let d = self.pdf(x);
            let newton = x - f / d;
            x = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (f / d).abs() < 1e-13 {
                break;
            }
        }
        x.clamp(0.0, 1.0)
    }

    /// n draws from stream `stream` of the generator seeded with `seed`.
    pub fn sample_stream(&self, n: usize, seed: u64, stream: u64) -> Result<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let values: Vec<f64> = (0..n).map(|_| self.quantile(rng.gen::<f64>())).collect();
        Sample::new(values)
    }
}

/// n draws by inverse-CDF sampling; identical for identical seeds.
pub fn sample_density(spec: &DensitySpec, n: usize, seed: u64) -> Result<Sample> {
    spec.sample_stream(n, seed, 0)
}
