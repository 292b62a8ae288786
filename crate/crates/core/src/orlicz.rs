//! Exponential Young-Orlicz functions, their conjugates and Luxemburg norms.
//!
//! For a generating function `ψ` the Young-Orlicz function is
//!
//! ```text
//! N[ψ](u) = exp(V[ψ](u))   for |u| ≥ e,
//! N[ψ](u) = C u²           for |u| < e,
//! ```
//!
//! with `C = exp(V(e)) / e²` so the two branches meet at `|u| = e`.
//! Conjugates are computed with the Young-Fenchel maximizer of
//! [`crate::convex`]. Batch checks that need thousands of norm evaluations
//! use [`OrliczPair`], which tabulates `N` and `N*` once.

use std::f64::consts::E;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::convex::{
    midpoint_convex, require_growth, young_fenchel, ConjugateOptions, ConjugateValue, ExponentV,
    RealFunction1D, Z_MAX,
};
use crate::glnorm::gls_norm;
use crate::measure::{integrate_product, DiscreteMeasureSpace, MeasurableFunction};
use crate::psi::{PsiFunction, RealMap};
use crate::search::{bisect_threshold, grid, ScanSpec, Spacing};
use crate::{Error, Result};

/// Orlicz-Hölder checks pass when `lhs/rhs ≤ 1 + HOLDER_SLACK`.
pub const HOLDER_SLACK: f64 = 1e-6;

/// An even function `N` with `N(0) = 0`, given by its values on `[0, ∞)`.
#[derive(Clone)]
pub struct YoungFunction {
    eval: RealMap,
    branch_point: Option<f64>,
    label: String,
    convex: Option<bool>,
}

impl fmt::Debug for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("YoungFunction")
            .field("label", &self.label)
            .field("branch_point", &self.branch_point)
            .field("convex", &self.convex)
            .finish()
    }
}

impl YoungFunction {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        YoungFunction {
            eval: Arc::new(f),
            branch_point: None,
            label: label.into(),
            convex: None,
        }
    }

    /// `|u|^p`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::param("p", p, "power Young function needs p >= 1"));
        }
        Ok(Self::new(format!("|u|^{p}"), move |u| u.powf(p)).with_convexity(true))
    }

    /// `|u|^p / p`, whose conjugate is `|v|^{p'} / p'`.
    pub fn scaled_power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::param("p", p, "scaled power needs p > 1"));
        }
        Ok(Self::new(format!("|u|^{p}/{p}"), move |u| u.powf(p) / p).with_convexity(true))
    }

    fn with_convexity(mut self, convex: bool) -> Self {
        self.convex = Some(convex);
        self
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.eval)(u.abs())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Where a piecewise definition switches branches (`e` for `N[ψ]`).
    pub fn branch_point(&self) -> Option<f64> {
        self.branch_point
    }

    /// Result of the builder's convexity grid test, when one was run.
    pub fn is_convex(&self) -> Option<bool> {
        self.convex
    }

    /// Piecewise-linear interpolant through `nodes` (ascending, starting at
    /// 0); exact evaluation beyond the last node. For convex `N` the
    /// interpolant lies above `N`.
    pub fn tabulated(&self, nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid(
                "table nodes must start at 0 and increase strictly".into(),
            ));
        }
        let values: Vec<f64> = nodes.iter().map(|&u| self.eval(u)).collect();
        let exact = self.eval.clone();
        let last = nodes[nodes.len() - 1];
        Ok(YoungFunction {
            eval: Arc::new(move |u| {
                if u > last {
                    return exact(u);
                }
                let k = nodes.partition_point(|&x| x < u);
                if nodes[k] == u {
                    return values[k];
                }
                let (y0, y1) = (values[k - 1], values[k]);
                if y0 == f64::INFINITY || y1 == f64::INFINITY {
                    return f64::INFINITY;
                }
                let t = (u - nodes[k - 1]) / (nodes[k] - nodes[k - 1]);
                y0 + t * (y1 - y0)
            }),
            branch_point: self.branch_point,
            label: format!("table({})", self.label),
            convex: self.convex,
        })
    }

    /// `N*` evaluated pointwise by [`conjugate_young`].
    pub fn conjugate(&self, opts: YoungConjugateOptions) -> YoungFunction {
        let this = self.clone();
        YoungFunction {
            eval: Arc::new(move |v| conjugate_young(&this, v, &opts).value),
            branch_point: None,
            label: format!("conj({})", self.label),
            convex: Some(true),
        }
    }

    /// Grid check of the Young-function invariants on `[0, u_max]`.
    pub fn check(&self, u_max: f64, points: usize) -> YoungReport {
        let pts = grid(0.0, u_max, points.max(3), Spacing::Linear);
        let vals: Vec<f64> = pts.iter().map(|&u| self.eval(u)).collect();
        YoungReport {
            zero_at_origin: self.eval(0.0) == 0.0,
            even: pts.iter().all(|&u| self.eval(-u) == self.eval(u)),
            nondecreasing: vals.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs()),
            convex: midpoint_convex(|u| self.eval(u), &pts, 1e-9),
            continuity_gap: self.branch_point.map(|b| {
                let h = 1e-12 * b;
                (self.eval(b - h) - self.eval(b)).abs() / self.eval(b).abs().max(1.0)
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YoungReport {
    pub zero_at_origin: bool,
    pub even: bool,
    pub nondecreasing: bool,
    pub convex: bool,
    /// Relative jump across the branch point.
    pub continuity_gap: Option<f64>,
}

impl YoungReport {
    pub fn valid(&self) -> bool {
        self.zero_at_origin && self.even && self.nondecreasing && self.convex
    }
}

/// `N[ψ]` with its quadratic branch on `|u| < e`.
///
/// Convexity is tested on a grid over `[0, 64]` and recorded in
/// [`YoungFunction::is_convex`]; some generators (e.g. `ψ(p) = p`) produce
/// a concave kink at `e`.
pub fn build_n(psi: &PsiFunction) -> Result<YoungFunction> {
    let v = ExponentV::new(psi, Z_MAX, ConjugateOptions::default())?;
    let ve = v.at(E);
    if !ve.value.is_finite() {
        return Err(Error::Invalid(format!(
            "V(e) is not finite for {}",
            psi.label()
        )));
    }
    let c = ve.value.exp() / (E * E);
    let f = move |u: f64| {
        if u < E {
            c * u * u
        } else {
            let t = v.at(u);
            if t.unbounded {
                f64::INFINITY
            } else {
                t.value.exp()
            }
        }
    };
    let convex = midpoint_convex(f.clone(), &grid(0.0, 64.0, 257, Spacing::Linear), 1e-9);
    Ok(YoungFunction {
        eval: Arc::new(f),
        branch_point: Some(E),
        label: format!("N[{}]", psi.label()),
        convex: Some(convex),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoungConjugateOptions {
    /// Cap on `u` in `sup_u (v u - N(u))`.
    pub u_max: f64,
    pub conj: ConjugateOptions,
}

impl Default for YoungConjugateOptions {
    fn default() -> Self {
        YoungConjugateOptions {
            u_max: 1e4,
            conj: ConjugateOptions {
                spacing: Spacing::OffsetGeometric,
                ..ConjugateOptions::default()
            },
        }
    }
}

/// `N*(v) = sup_{0 ≤ u ≤ u_max} (|v| u - N(u))`; `+∞` with `unbounded`
/// when the objective still rises at `u_max`.
pub fn conjugate_young(n: &YoungFunction, v: f64, opts: &YoungConjugateOptions) -> ConjugateValue {
    let this = n.clone();
    let h = RealFunction1D::with_caps(0.0, opts.u_max, false, true, move |u| this.eval(u))
        .expect("u_max is positive");
    young_fenchel(&h, v.abs(), &opts.conj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LuxemburgResult {
    pub norm: f64,
    /// `∫ N(f/norm) dμ`.
    pub modular: f64,
}

/// Default relative tolerance on the Luxemburg bisection.
pub const LUXEMBURG_TOL: f64 = 1e-12;

/// `inf {k > 0 : ∫ N(f/k) dμ ≤ 1}`.
pub fn luxemburg_norm(
    f: &MeasurableFunction,
    n: &YoungFunction,
    s: &DiscreteMeasureSpace,
) -> Result<f64> {
    luxemburg(f, n, s, LUXEMBURG_TOL).map(|r| r.norm)
}

/// Bisection on `k` from a bracket grown by doubling or halving from
/// `k₀ = ess sup |f|`.
pub fn luxemburg(
    f: &MeasurableFunction,
    n: &YoungFunction,
    s: &DiscreteMeasureSpace,
    rel_tol: f64,
) -> Result<LuxemburgResult> {
    s.check_bound(f)?;
    let atoms: Vec<(f64, f64)> = f
        .values()
        .iter()
        .zip(s.weights())
        .filter(|(v, _)| **v != 0.0)
        .map(|(v, w)| (v.abs(), *w))
        .collect();
    let k0 = atoms.iter().fold(0.0, |m: f64, a| m.max(a.0));
    if k0 == 0.0 {
        return Ok(LuxemburgResult {
            norm: 0.0,
            modular: 0.0,
        });
    }
    let modular = |k: f64| -> f64 {
        let mut total = 0.0;
        for &(a, w) in &atoms {
            total += w * n.eval(a / k);
            if total > 1.0 {
                break;
            }
        }
        total
    };
    let feasible = |k: f64| modular(k) <= 1.0;

    let (mut lo, mut hi) = (k0, k0);
    let mut steps = 0;
    if feasible(k0) {
        lo = k0 / 2.0;
        while feasible(lo) {
            hi = lo;
            lo /= 2.0;
            steps += 1;
            if steps > 200 {
                return Err(Error::NonConvergent(format!(
                    "Luxemburg bracket: {} stays below 1 as k -> 0",
                    n.label()
                )));
            }
        }
    } else {
        hi = 2.0 * k0;
        while !feasible(hi) {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > 200 {
                return Err(Error::NonConvergent(format!(
                    "Luxemburg bracket: {} stays above 1 as k grows",
                    n.label()
                )));
            }
        }
    }
    let norm = bisect_threshold(feasible, lo, hi, rel_tol);
    Ok(LuxemburgResult {
        norm,
        modular: modular(norm),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderReport {
    pub lhs: f64,
    pub norm_f: f64,
    pub norm_g: f64,
    /// `2 ||f||_{L(N)} ||g||_{L(N*)}`.
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// `|∫ f g dμ| ≤ 2 ||f||_{L(N)} ||g||_{L(N*)}` with `N*` evaluated
/// pointwise (slow; see [`orlicz_holder_check_with`]).
pub fn orlicz_holder_check(
    f: &MeasurableFunction,
    g: &MeasurableFunction,
    n: &YoungFunction,
    s: &DiscreteMeasureSpace,
) -> Result<HolderReport> {
    let n_star = n.conjugate(YoungConjugateOptions::default());
    orlicz_holder_check_with(f, g, n, &n_star, s)
}

pub fn orlicz_holder_check_with(
    f: &MeasurableFunction,
    g: &MeasurableFunction,
    n: &YoungFunction,
    n_star: &YoungFunction,
    s: &DiscreteMeasureSpace,
) -> Result<HolderReport> {
    let lhs = integrate_product(f, g, s)?.abs();
    let norm_f = luxemburg_norm(f, n, s)?;
    let norm_g = luxemburg_norm(g, n_star, s)?;
    let rhs = 2.0 * norm_f * norm_g;
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(HolderReport {
        lhs,
        norm_f,
        norm_g,
        rhs,
        ratio,
        pass: ratio <= 1.0 + HOLDER_SLACK,
    })
}

/// Resolution of the tables held by an [`OrliczPair`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub u_nodes: usize,
    pub v_nodes: usize,
    pub v_max: f64,
}

impl Default for TableSpec {
    fn default() -> Self {
        TableSpec {
            u_nodes: 8192,
            v_nodes: 4096,
            v_max: 1e4,
        }
    }
}

/// Tabulated `N` and `N*` for batch computations.
///
/// `N` is interpolated piecewise linearly on geometric nodes; `N*` is the
/// exact conjugate of that interpolant, itself interpolated piecewise
/// linearly. Piecewise-linear interpolation of a convex function only
/// overestimates, so Young's inequality `u v ≤ N(u) + N*(v)` holds for the
/// tabulated pair.
#[derive(Debug, Clone)]
pub struct OrliczPair {
    pub n: YoungFunction,
    pub n_star: YoungFunction,
    pub u_max: f64,
}

impl OrliczPair {
    pub fn build(psi: &PsiFunction, spec: &TableSpec) -> Result<Self> {
        Self::from_young(&build_n(psi)?, spec)
    }

    pub fn from_young(n: &YoungFunction, spec: &TableSpec) -> Result<Self> {
        let u_max = conjugate_domain(n, spec.v_max);
        let mut u_nodes = vec![0.0];
        u_nodes.extend(grid(u_max * 1e-9, u_max, spec.u_nodes.max(2) - 1, Spacing::Geometric));
        let n_tab = n.tabulated(u_nodes)?;
        let opts = YoungConjugateOptions {
            u_max,
            ..YoungConjugateOptions::default()
        };
        let mut v_nodes = vec![0.0];
        v_nodes.extend(grid(
            spec.v_max * 1e-10,
            spec.v_max,
            spec.v_nodes.max(2) - 1,
            Spacing::Geometric,
        ));
        let n_star = n_tab.conjugate(opts).tabulated(v_nodes)?;
        Ok(OrliczPair {
            n: n_tab,
            n_star,
            u_max,
        })
    }
}

/// A `u` beyond which `N` grows faster than slope `v_max` (or is infinite),
/// so conjugate maximizers for `|v| ≤ v_max` lie below it.
fn conjugate_domain(n: &YoungFunction, v_max: f64) -> f64 {
    let mut u = 1.0;
    while u < 1e6 {
        let (a, b) = (n.eval(u / 2.0), n.eval(u));
        if b == f64::INFINITY || (b - a) / (u / 2.0) > v_max {
            break;
        }
        u *= 2.0;
    }
    2.0 * u
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub luxemburg: f64,
    pub gls: f64,
    /// `||f||_{L(N[ψ])} / ||f||Gψ`; `NaN` for `f ≡ 0`.
    pub ratio: f64,
    pub gls_hit_cap: bool,
}

/// Ratio of the Orlicz and GLS norms of one function. Requires `ψ` to
/// satisfy the growth hypothesis checked by [`require_growth`].
pub fn embedding_check(
    f: &MeasurableFunction,
    psi: &PsiFunction,
    s: &DiscreteMeasureSpace,
) -> Result<EmbeddingReport> {
    require_growth(psi)?;
    let n = build_n(psi)?;
    embedding_check_with(f, psi, &n, s, &ScanSpec::default())
}

pub fn embedding_check_with(
    f: &MeasurableFunction,
    psi: &PsiFunction,
    n: &YoungFunction,
    s: &DiscreteMeasureSpace,
    spec: &ScanSpec,
) -> Result<EmbeddingReport> {
    let luxemburg = luxemburg_norm(f, n, s)?;
    let g = gls_norm(f, psi, s, spec)?;
    Ok(EmbeddingReport {
        luxemburg,
        gls: g.value,
        ratio: luxemburg / g.value,
        gls_hit_cap: g.hit_cap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingBatch {
    pub c_low: f64,
    pub c_high: f64,
    /// `c_high / c_low`.
    pub spread: f64,
    pub count: usize,
}

/// Empirical two-sided equivalence constants over a batch; zero functions
/// are skipped.
pub fn embedding_batch(
    samples: &[(MeasurableFunction, DiscreteMeasureSpace)],
    psi: &PsiFunction,
    n: &YoungFunction,
    spec: &ScanSpec,
) -> Result<EmbeddingBatch> {
    let mut c_low = f64::INFINITY;
    let mut c_high = 0.0f64;
    let mut count = 0;
    for (f, s) in samples {
        if f.is_zero() {
            continue;
        }
        let r = embedding_check_with(f, psi, n, s, spec)?;
        c_low = c_low.min(r.ratio);
        c_high = c_high.max(r.ratio);
        count += 1;
    }
    if count == 0 {
        return Err(Error::Invalid("embedding batch has no nonzero sample".into()));
    }
    Ok(EmbeddingBatch {
        c_low,
        c_high,
        spread: c_high / c_low,
        count,
    })
}
