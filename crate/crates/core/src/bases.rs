//! Orthonormal projection bases on [0,1].
//!
//! Every partition-based family uses right-open cells with the last cell
//! closed at 1, so each point of [0,1] belongs to exactly one cell.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_LEVEL: u32 = 30;
const MAX_DIM: usize = 1 << 30;

/// Model descriptor as it appears in JSON: `{"family": ..., "params": {...}}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
pub enum Family {
    /// Regular partition into `bins` cells.
    Histogram { bins: usize },
    /// Constant plus sin/cos pairs up to frequency `cutoff`.
    Trigonometric { cutoff: usize },
    /// Haar scaling functions of a single `level` (equivalent to `2^level` bins).
    HaarScaling { level: u32 },
    /// Father function plus Haar wavelets of levels `0..=max_level`.
    HaarWavelet { max_level: u32 },
    /// Polynomials of degree `< degree_bound` on each of `2^depth` dyadic cells.
    PiecewisePoly { depth: u32, degree_bound: usize },
}

/// Label of a basis function within its model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BasisIndex {
    Bin {
        cell: usize,
    },
    /// 0 is the constant, `2k-1` is `sqrt2 sin(2 pi k x)`, `2k` is `sqrt2 cos(2 pi k x)`.
    Trig {
        index: usize,
    },
    Scaling {
        level: u32,
        shift: usize,
    },
    Father,
    Wavelet {
        level: u32,
        shift: usize,
    },
    Poly {
        cell: usize,
        degree: usize,
    },
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisIndex::Bin { cell } => write!(f, "bin {cell}"),
            BasisIndex::Trig { index } => write!(f, "trig {index}"),
            BasisIndex::Scaling { level, shift } => write!(f, "scaling ({level},{shift})"),
            BasisIndex::Father => write!(f, "father"),
            BasisIndex::Wavelet { level, shift } => write!(f, "wavelet ({level},{shift})"),
            BasisIndex::Poly { cell, degree } => write!(f, "poly cell {cell} degree {degree}"),
        }
    }
}

/// A validated model S_m: an orthonormal family with a fixed index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct Model {
    family: Family,
    dim: usize,
}

impl TryFrom<Family> for Model {
    type Error = Error;

    fn try_from(family: Family) -> Result<Self> {
        Model::new(family)
    }
}

impl From<Model> for Family {
    fn from(m: Model) -> Family {
        m.family
    }
}

pub fn make_histogram_model(bins: usize) -> Result<Model> {
    Model::new(Family::Histogram { bins })
}

pub fn make_trig_model(cutoff: usize) -> Result<Model> {
    Model::new(Family::Trigonometric { cutoff })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaarKind {
    ScalingLevel(u32),
    Wavelet(u32),
}

pub fn make_haar_model(kind: HaarKind) -> Result<Model> {
    match kind {
        HaarKind::ScalingLevel(level) => Model::new(Family::HaarScaling { level }),
        HaarKind::Wavelet(max_level) => Model::new(Family::HaarWavelet { max_level }),
    }
}

pub fn make_piecewise_poly_model(depth: u32, degree_bound: usize) -> Result<Model> {
    Model::new(Family::PiecewisePoly {
        depth,
        degree_bound,
    })
}

#[inline]
fn cell_of(x: f64, cells: usize) -> usize {
    ((x * cells as f64) as usize).min(cells - 1)
}

/// Orthonormal shifted Legendre polynomial of `degree` at local coordinate
/// `t` in [0,1]; unit norm on [0,1].
#[inline]
fn shifted_legendre(degree: usize, t: f64) -> f64 {
    let u = 2.0 * t - 1.0;
    let p = match degree {
        0 => 1.0,
        1 => u,
        _ => {
            let (mut p0, mut p1) = (1.0, u);
            for k in 2..=degree {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * u * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    };
    ((2 * degree + 1) as f64).sqrt() * p
}

impl Model {
    pub fn new(family: Family) -> Result<Self> {
        let dim = match family {
            Family::Histogram { bins } => {
                if bins == 0 {
                    return Err(Error::InvalidModel(
                        "histogram needs at least one bin".into(),
                    ));
                }
                bins
            }
            Family::Trigonometric { cutoff } => cutoff
                .checked_mul(2)
                .and_then(|d| d.checked_add(1))
                .ok_or_else(|| Error::InvalidModel("trigonometric cutoff too large".into()))?,
            Family::HaarScaling { level } => {
                if level > MAX_LEVEL {
                    return Err(Error::InvalidModel(format!(
                        "Haar level {level} exceeds {MAX_LEVEL}"
                    )));
                }
                1usize << level
            }
            Family::HaarWavelet { max_level } => {
                if max_level >= MAX_LEVEL {
                    return Err(Error::InvalidModel(format!(
                        "Haar max level {max_level} exceeds {}",
                        MAX_LEVEL - 1
                    )));
                }
                1usize << (max_level + 1)
            }
            Family::PiecewisePoly {
                depth,
                degree_bound,
            } => {
                if degree_bound == 0 {
                    return Err(Error::InvalidModel(
                        "degree bound r must be at least 1".into(),
                    ));
                }
                if depth > MAX_LEVEL {
                    return Err(Error::InvalidModel(format!(
                        "depth {depth} exceeds {MAX_LEVEL}"
                    )));
                }
                degree_bound
                    .checked_mul(1usize << depth)
                    .ok_or_else(|| Error::InvalidModel("dimension overflow".into()))?
            }
        };
        if dim > MAX_DIM {
            return Err(Error::InvalidModel(format!("dimension {dim} too large")));
        }
        Ok(Model { family, dim })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// D_m.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Short human-readable id, e.g. `hist(20)`.
    pub fn id(&self) -> String {
        match self.family {
            Family::Histogram { bins } => format!("hist({bins})"),
            Family::Trigonometric { cutoff } => format!("trig({cutoff})"),
            Family::HaarScaling { level } => format!("haar-scaling({level})"),
            Family::HaarWavelet { max_level } => format!("haar-wavelet({max_level})"),
            Family::PiecewisePoly {
                depth,
                degree_bound,
            } => format!("poly({depth},{degree_bound})"),
        }
    }

    /// Label of the basis function at position `i` of Λ(m).
    pub fn label(&self, i: usize) -> Option<BasisIndex> {
        if i >= self.dim {
            return None;
        }
        Some(match self.family {
            Family::Histogram { .. } => BasisIndex::Bin { cell: i },
            Family::Trigonometric { .. } => BasisIndex::Trig { index: i },
            Family::HaarScaling { level } => BasisIndex::Scaling { level, shift: i },
            Family::HaarWavelet { .. } => {
                if i == 0 {
                    BasisIndex::Father
                } else {
                    let level = usize::BITS - 1 - i.leading_zeros();
                    BasisIndex::Wavelet {
                        level,
                        shift: i - (1usize << level),
                    }
                }
            }
            Family::PiecewisePoly { degree_bound, .. } => BasisIndex::Poly {
                cell: i / degree_bound,
                degree: i % degree_bound,
            },
        })
    }

    /// Λ(m) in its canonical order.
    pub fn index_set(&self) -> Vec<BasisIndex> {
        (0..self.dim).filter_map(|i| self.label(i)).collect()
    }

    /// Position of `label` within Λ(m).
    pub fn position(&self, label: &BasisIndex) -> Result<usize> {
        let unknown = || Error::UnknownIndex(label.to_string());
        let pos = match (self.family, *label) {
            (Family::Histogram { .. }, BasisIndex::Bin { cell }) => cell,
            (Family::Trigonometric { .. }, BasisIndex::Trig { index }) => index,
            (Family::HaarScaling { level }, BasisIndex::Scaling { level: l, shift })
                if l == level =>
            {
                shift
            }
            (Family::HaarWavelet { .. }, BasisIndex::Father) => 0,
            (Family::HaarWavelet { max_level }, BasisIndex::Wavelet { level, shift }) => {
                if level > max_level || shift >= (1usize << level) {
                    return Err(unknown());
                }
                (1usize << level) + shift
            }
            (Family::PiecewisePoly { degree_bound, .. }, BasisIndex::Poly { cell, degree }) => {
                if degree >= degree_bound {
                    return Err(unknown());
                }
                cell.checked_mul(degree_bound).ok_or_else(unknown)? + degree
            }
            _ => return Err(unknown()),
        };
        if pos >= self.dim {
            return Err(unknown());
        }
        Ok(pos)
    }

    /// φ_λ(x) for the basis function at position `i`. No domain checks.
    #[inline]
    pub fn eval_at(&self, i: usize, x: f64) -> f64 {
        match self.family {
            Family::Histogram { bins } => {
                if cell_of(x, bins) == i {
                    (bins as f64).sqrt()
                } else {
                    0.0
                }
            }
            Family::Trigonometric { .. } => {
                if i == 0 {
                    1.0
                } else {
                    let k = i.div_ceil(2) as f64;
                    let arg = 2.0 * PI * k * x;
                    if i % 2 == 1 {
                        SQRT_2 * arg.sin()
                    } else {
                        SQRT_2 * arg.cos()
                    }
                }
            }
            Family::HaarScaling { level } => {
                let cells = 1usize << level;
                if cell_of(x, cells) == i {
                    (cells as f64).sqrt()
                } else {
                    0.0
                }
            }
            Family::HaarWavelet { .. } => {
                if i == 0 {
                    return 1.0;
                }
                let level = usize::BITS - 1 - i.leading_zeros();
                let shift = i - (1usize << level);
                let half_cells = 1usize << (level + 1);
                let c = cell_of(x, half_cells);
                if c / 2 != shift {
                    0.0
                } else {
                    let amp = ((1usize << level) as f64).sqrt();
                    if c.is_multiple_of(2) {
                        amp
                    } else {
                        -amp
                    }
                }
            }
            Family::PiecewisePoly {
                depth,
                degree_bound,
            } => {
                let cells = 1usize << depth;
                let c = cell_of(x, cells);
                if c != i / degree_bound {
                    return 0.0;
                }
                let t = x * cells as f64 - c as f64;
                (cells as f64).sqrt() * shifted_legendre(i % degree_bound, t)
            }
        }
    }

    /// Visits every (position, φ_λ(x)) whose basis function may be nonzero at `x`.
    #[inline]
    pub fn for_each_nonzero<F: FnMut(usize, f64)>(&self, x: f64, mut f: F) {
        match self.family {
            Family::Histogram { bins } => f(cell_of(x, bins), (bins as f64).sqrt()),
            Family::HaarScaling { level } => {
                let cells = 1usize << level;
                f(cell_of(x, cells), (cells as f64).sqrt())
            }
            Family::Trigonometric { cutoff } => {
                f(0, 1.0);
                let (s1, c1) = (2.0 * PI * x).sin_cos();
                let (mut s, mut c) = (s1, c1);
                for k in 1..=cutoff {
                    if k > 1 && k % 16 == 0 {
                        // resync the rotation recurrence to bound drift
                        let (sk, ck) = (2.0 * PI * k as f64 * x).sin_cos();
                        s = sk;
                        c = ck;
                    }
                    f(2 * k - 1, SQRT_2 * s);
                    f(2 * k, SQRT_2 * c);
                    let ns = s * c1 + c * s1;
                    let nc = c * c1 - s * s1;
                    s = ns;
                    c = nc;
                }
            }
            Family::HaarWavelet { max_level } => {
                f(0, 1.0);
                let finest = 1usize << (max_level + 1);
                let cf = cell_of(x, finest);
                for level in 0..=max_level {
                    // cell index at resolution 2^(level+1)
                    let c = cf >> (max_level - level);
                    let amp = ((1usize << level) as f64).sqrt();
                    let v = if c.is_multiple_of(2) { amp } else { -amp };
                    f((1usize << level) + c / 2, v);
                }
            }
            Family::PiecewisePoly {
                depth,
                degree_bound,
            } => {
                let cells = 1usize << depth;
                let c = cell_of(x, cells);
                let t = x * cells as f64 - c as f64;
                let scale = (cells as f64).sqrt();
                for d in 0..degree_bound {
                    f(c * degree_bound + d, scale * shifted_legendre(d, t));
                }
            }
        }
    }

    /// All basis values at `x` as a dense vector.
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.for_each_nonzero(x, |i, v| out[i] = v);
        out
    }

    /// φ_m(x) = Σ_λ φ_λ(x)².
    pub fn phi_m(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        self.for_each_nonzero(x, |_, v| acc += v * v);
        acc
    }

    /// Analytic ‖φ_m‖∞.
    pub fn phi_m_sup(&self) -> f64 {
        match self.family {
            Family::Histogram { bins } => bins as f64,
            Family::Trigonometric { .. } => self.dim as f64,
            Family::HaarScaling { level } => (1usize << level) as f64,
            Family::HaarWavelet { .. } => self.dim as f64,
            // Σ_d (2d+1) 2^m at a cell endpoint = r² 2^m = r D_m.
            Family::PiecewisePoly { degree_bound, .. } => (degree_bound * self.dim) as f64,
        }
    }

    /// Analytic sup over |a|∞ = 1 of ‖Σ a_λ φ_λ‖∞ (exact for partition-based
    /// families, the conservative bound √2·D_m for trigonometric models).
    pub fn coefficient_sup_bound(&self) -> f64 {
        match self.family {
            Family::Histogram { bins } => (bins as f64).sqrt(),
            Family::Trigonometric { .. } => SQRT_2 * self.dim as f64,
            Family::HaarScaling { level } => ((1usize << level) as f64).sqrt(),
            Family::HaarWavelet { max_level } => {
                1.0 + (0..=max_level)
                    .map(|j| ((1usize << j) as f64).sqrt())
                    .sum::<f64>()
            }
            Family::PiecewisePoly {
                depth,
                degree_bound,
            } => {
                ((1usize << depth) as f64).sqrt()
                    * (0..degree_bound)
                        .map(|d| ((2 * d + 1) as f64).sqrt())
                        .sum::<f64>()
            }
        }
    }

    /// Number of equal cells on which every basis function is constant, if any.
    pub fn constant_cells(&self) -> Option<usize> {
        match self.family {
            Family::Histogram { bins } => Some(bins),
            Family::HaarScaling { level } => Some(1usize << level),
            Family::HaarWavelet { max_level } => Some(1usize << (max_level + 1)),
            Family::PiecewisePoly {
                depth,
                degree_bound: 1,
            } => Some(1usize << depth),
            _ => None,
        }
    }

    /// Breakpoints (including 0 and 1) between which every basis function is a polynomial.
    pub fn breakpoints(&self) -> Option<Vec<f64>> {
        let cells = match self.family {
            Family::Trigonometric { .. } => return None,
            Family::PiecewisePoly { depth, .. } => 1usize << depth,
            _ => self.constant_cells()?,
        };
        Some((0..=cells).map(|k| k as f64 / cells as f64).collect())
    }

    /// Maximum polynomial degree of a basis function between breakpoints.
    pub fn piece_degree(&self) -> Option<usize> {
        match self.family {
            Family::Trigonometric { .. } => None,
            Family::PiecewisePoly { degree_bound, .. } => Some(degree_bound - 1),
            _ => Some(0),
        }
    }

    /// Whether `self` and `other` span the same space (up to basis choice).
    pub fn same_span(&self, other: &Model) -> bool {
        let as_cells = |m: &Model| match m.family {
            Family::Histogram { bins } => Some(bins),
            Family::HaarScaling { level } => Some(1usize << level),
            Family::HaarWavelet { max_level } => Some(1usize << (max_level + 1)),
            Family::PiecewisePoly {
                depth,
                degree_bound: 1,
            } => Some(1usize << depth),
            _ => None,
        };
        match (as_cells(self), as_cells(other)) {
            (Some(a), Some(b)) => a == b,
            _ => self.family == other.family,
        }
    }
}

fn check_domain(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain { x })
    }
}

/// φ_λ(x) with domain and index validation.
pub fn eval_basis(model: &Model, label: &BasisIndex, x: f64) -> Result<f64> {
    check_domain(x)?;
    let i = model.position(label)?;
    Ok(model.eval_at(i, x))
}

pub fn phi_m_sup(model: &Model) -> f64 {
    model.phi_m_sup()
}

/// Gram matrix ∫ φ_λ φ_μ under the given quadrature nodes.
pub fn gram_matrix<I: IntoIterator<Item = (f64, f64)>>(model: &Model, nodes: I) -> Vec<Vec<f64>> {
    let d = model.dim();
    let mut acc = vec![vec![crate::numeric::KahanSum::new(); d]; d];
    let mut vals: Vec<(usize, f64)> = Vec::new();
    for (x, w) in nodes {
        vals.clear();
        model.for_each_nonzero(x, |i, v| vals.push((i, v)));
        for &(i, vi) in &vals {
            for &(j, vj) in &vals {
                acc[i][j].add(w * vi * vj);
            }
        }
    }
    acc.into_iter()
        .map(|row| row.into_iter().map(|k| k.value()).collect())
        .collect()
}

/// Gram matrix under the reference midpoint quadrature.
/// Gram matrix by Gauss–Legendre on each polynomial piece, or by the
/// 2^17-cell midpoint rule for trigonometric models.
pub fn reference_gram(model: &Model) -> Vec<Vec<f64>> {
    match (model.breakpoints(), model.piece_degree()) {
        (Some(breaks), Some(deg)) => gram_matrix(
            model,
            crate::numeric::piecewise_gauss_nodes(&breaks, 1, deg + 1),
        ),
        _ => gram_matrix(
            model,
            crate::numeric::midpoint_nodes(crate::numeric::REFERENCE_CELLS),
        ),
    }
}
