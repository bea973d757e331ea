//! Small numerical helpers: compensated summation, exact binomials and the
//! quadrature rules used for basis moments and Gram checks.

use crate::error::{Error, Result};

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn kahan_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// Exact binomial coefficient C(n, k) in 128-bit arithmetic.
///
/// Uses the running product C(n, i) = C(n, i-1) (n - i + 1) / i, which stays
/// integral at every step. Returns [`Error::Overflow`] instead of wrapping.
pub fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        let factor = n as u128 - k as u128 + i;
        // acc * factor is divisible by i; split through the gcd to delay overflow.
        let g = gcd(acc, i);
        let (a, d) = (acc / g, i / g);
        let f = factor / d;
        acc = a.checked_mul(f).ok_or(Error::Overflow)?;
    }
    Ok(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Number of cells in the reference midpoint quadrature.
pub const REFERENCE_CELLS: usize = 1 << 17;

/// Composite midpoint rule on `cells` equal subintervals of [0,1].
pub fn midpoint_nodes(cells: usize) -> impl Iterator<Item = (f64, f64)> {
    let h = 1.0 / cells as f64;
    (0..cells).map(move |i| ((i as f64 + 0.5) * h, h))
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    assert!(order >= 1);
    let mut out = Vec::with_capacity(order);
    let nf = order as f64;
    for i in 0..order {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        if d != 0.0 {
            dp = d;
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre over the pieces delimited by sorted `breaks`
/// (which must start at 0 and end at 1), each piece split into `sub` equal parts.
pub fn piecewise_gauss_nodes(breaks: &[f64], sub: usize, order: usize) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(order);
    let mut nodes = Vec::with_capacity((breaks.len().saturating_sub(1)) * sub * order);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let h = (b - a) / sub as f64;
        for s in 0..sub {
            let lo = a + s as f64 * h;
            let mid = lo + 0.5 * h;
            for &(t, wt) in &rule {
                nodes.push((mid + 0.5 * h * t, 0.5 * h * wt));
            }
        }
    }
    nodes
}

/// Sorted union of break lists with near-duplicates (within 1e-15) merged.
pub fn merge_breaks(lists: &[&[f64]]) -> Vec<f64> {
    let mut all: Vec<f64> = lists.iter().flat_map(|l| l.iter().copied()).collect();
    all.push(0.0);
    all.push(1.0);
    all.retain(|x| (0.0..=1.0).contains(x));
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    all
}
