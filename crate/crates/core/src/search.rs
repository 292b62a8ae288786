//! One-dimensional search primitives shared by the norm solvers.
//!
//! Every sup/inf in this crate is a scalar problem over an interval: the
//! GLS norm maximizes over `p`, the associate bound minimizes over `q`, the
//! Young-Fenchel transform maximizes over `z`. They all go through
//! [`scan_maximize`]: evaluate a grid, then golden-section refine the best
//! local maxima of the grid inside their neighbouring cells.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Placement of scan points between two endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    /// Log-spaced; requires `lo > 0`.
    Geometric,
    /// `lo + (hi - lo) * t` with `t` log-spaced on `[1e-9, 1]` plus `t = 0`.
    /// Dense near `lo` without requiring `lo > 0`.
    OffsetGeometric,
}

/// Grid resolution, computational cap and refinement tolerance for a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub points: usize,
    /// Upper cap substituted for an infinite (or larger) interval end.
    pub cap: f64,
    /// Relative tolerance of the golden-section refinement in the argument.
    pub rel_tol: f64,
    /// How many grid local maxima are refined.
    pub refine: usize,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            points: 256,
            cap: 200.0,
            rel_tol: 1e-10,
            refine: 3,
        }
    }
}

impl ScanSpec {
    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points;
        self
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = cap;
        self
    }

    /// Checks the documented override ranges.
    pub fn validate(&self) -> Result<()> {
        if !(16..=65536).contains(&self.points) {
            return Err(Error::param(
                "grid_points",
                self.points as f64,
                "must lie in [16, 65536]",
            ));
        }
        if !(10.0..=1e4).contains(&self.cap) {
            return Err(Error::param("cap", self.cap, "must lie in [10, 1e4]"));
        }
        if !(1e-14..=1e-2).contains(&self.rel_tol) {
            return Err(Error::param(
                "tolerance",
                self.rel_tol,
                "must lie in [1e-14, 1e-2]",
            ));
        }
        Ok(())
    }
}

/// Outcome of a scalar maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanResult {
    pub x: f64,
    pub value: f64,
    /// Index of the best grid point before refinement.
    pub grid_index: usize,
}

/// `n` points from `lo` to `hi`; both endpoints are reproduced exactly.
pub fn grid(lo: f64, hi: f64, n: usize, spacing: Spacing) -> Vec<f64> {
    assert!(n >= 2, "a grid needs at least two points");
    assert!(lo <= hi, "grid endpoints out of order");
    let last = (n - 1) as f64;
    let mut pts: Vec<f64> = match spacing {
        Spacing::Linear => (0..n)
            .map(|k| lo + (hi - lo) * (k as f64 / last))
            .collect(),
        Spacing::Geometric => {
            assert!(lo > 0.0, "geometric grid needs a positive lower end");
            let (l0, l1) = (lo.ln(), hi.ln());
            (0..n)
                .map(|k| (l0 + (l1 - l0) * (k as f64 / last)).exp())
                .collect()
        }
        Spacing::OffsetGeometric => {
            let width = hi - lo;
            let t0 = (1e-9f64).ln();
            let inner = (n - 2) as f64;
            std::iter::once(lo)
                .chain((0..n - 1).map(|k| {
                    let t = if n == 2 {
                        1.0
                    } else {
                        (t0 * (1.0 - k as f64 / inner)).exp()
                    };
                    lo + width * t
                }))
                .collect()
        }
    };
    pts[0] = lo;
    pts[n - 1] = hi;
    pts
}

#[inline]
fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Golden-section maximization on `[lo, hi]`.
///
/// Returns the best point evaluated, which for a unimodal objective is
/// within `rel_tol * |x|` of the maximizer.
pub fn golden_max<F>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let floor = 1e-15 * (hi - lo).abs();
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = sanitize(f(c));
    let mut fd = sanitize(f(d));
    let (mut best_x, mut best_v) = if fc >= fd { (c, fc) } else { (d, fd) };
    for _ in 0..300 {
        if (b - a) <= rel_tol * a.abs().max(b.abs()) + floor {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = sanitize(f(c));
            if fc > best_v {
                best_x = c;
                best_v = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = sanitize(f(d));
            if fd > best_v {
                best_x = d;
                best_v = fd;
            }
        }
    }
    (best_x, best_v)
}

/// Grid scan followed by golden-section refinement of the best
/// `refine` local maxima of the grid.
pub fn scan_maximize<F>(mut f: F, points: &[f64], rel_tol: f64, refine: usize) -> ScanResult
where
    F: FnMut(f64) -> f64,
{
    assert!(!points.is_empty());
    let vals: Vec<f64> = points.iter().map(|&x| sanitize(f(x))).collect();
    let n = vals.len();

    let mut best = 0;
    for i in 1..n {
        if vals[i] > vals[best] {
            best = i;
        }
    }
    let mut result = ScanResult {
        x: points[best],
        value: vals[best],
        grid_index: best,
    };
    if n < 2 || refine == 0 {
        return result;
    }

    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| {
            (i == 0 || vals[i] >= vals[i - 1]) && (i + 1 == n || vals[i] >= vals[i + 1])
        })
        .collect();
    peaks.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));

    for &i in peaks.iter().take(refine) {
        if vals[i] == f64::NEG_INFINITY {
            continue;
        }
        let lo = points[i.saturating_sub(1)];
        let hi = points[(i + 1).min(n - 1)];
        if hi <= lo {
            continue;
        }
        let (x, v) = golden_max(&mut f, lo, hi, rel_tol);
        if v > result.value {
            result.x = x;
            result.value = v;
        }
    }
    result
}

/// Smallest `x` in `[lo, hi]` satisfying a monotone predicate, to relative
/// tolerance `rel_tol`. `pred(hi)` must hold; the returned point always
/// satisfies the predicate.
pub fn bisect_threshold<P>(mut pred: P, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64
where
    P: FnMut(f64) -> bool,
{
    for _ in 0..2000 {
        if hi - lo <= rel_tol * hi.abs() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Numerically stable `ln Σ exp(x_i)`; empty input gives `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}
