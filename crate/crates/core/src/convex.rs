//! Young-Fenchel transforms and the exponent machinery built on them.
//!
//! `h*(v) = sup_z (v z - h(z))` is computed by direct maximization over the
//! (capped) domain of `h`, so `h` need not be convex. For a generating
//! function `ψ` the relevant pair is
//!
//! ```text
//! h[ψ](p) = p ln ψ(p),        V[ψ](u) = h*[ψ](ln |u|)
//! ```
//!
//! and the growth conditions `V(x/K) ≤ α V(x)` and
//! `L(x/K) ≤ α K^m L(x)` are checked on grids.

use std::f64::consts::E;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::psi::{PsiFunction, RealMap};
use crate::search::{grid, scan_maximize, Spacing};
use crate::{Error, Result};

/// Default cap for half-infinite domains; matches the exponent cap.
pub const Z_MAX: f64 = 200.0;

/// A real function on an interval, `+∞` outside it. Either end may be a
/// computational cap standing in for an infinite end.
#[derive(Clone)]
pub struct RealFunction1D {
    lo: f64,
    hi: f64,
    lo_capped: bool,
    hi_capped: bool,
    eval: RealMap,
}

impl fmt::Debug for RealFunction1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealFunction1D")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("lo_capped", &self.lo_capped)
            .field("hi_capped", &self.hi_capped)
            .finish()
    }
}

impl RealFunction1D {
    pub fn new(lo: f64, hi: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::with_caps(lo, hi, false, false, f)
    }

    pub fn with_caps(
        lo: f64,
        hi: f64,
        lo_capped: bool,
        hi_capped: bool,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::EmptyInterval { lo, hi });
        }
        Ok(RealFunction1D {
            lo,
            hi,
            lo_capped,
            hi_capped,
            eval: Arc::new(f),
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn is_capped(&self) -> (bool, bool) {
        (self.lo_capped, self.hi_capped)
    }

    pub fn eval(&self, z: f64) -> f64 {
        if z < self.lo || z > self.hi {
            f64::INFINITY
        } else {
            (self.eval)(z)
        }
    }

    /// `z ↦ h(z) + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        RealFunction1D {
            eval: Arc::new(move |z| inner(z) + c),
            ..self.clone()
        }
    }
}

/// `h(p) = p ln ψ(p)` on the support of `ψ` capped at `cap`.
pub fn h_of(psi: &PsiFunction, cap: f64) -> Result<RealFunction1D> {
    let iv = psi.scan_interval(cap)?;
    let psi = psi.clone();
    RealFunction1D::with_caps(iv.lo, iv.hi, false, iv.capped, move |p| {
        p * psi.eval(psi.snap(p)).ln()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateOptions {
    pub grid_points: usize,
    pub spacing: Spacing,
    pub rel_tol: f64,
    pub refine: usize,
}

impl Default for ConjugateOptions {
    fn default() -> Self {
        ConjugateOptions {
            grid_points: 512,
            spacing: Spacing::Linear,
            rel_tol: 1e-12,
            refine: 3,
        }
    }
}

/// One evaluation of a conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugateValue {
    pub value: f64,
    pub argmax: f64,
    /// The maximizer abuts a capped end of the domain.
    pub hit_cap: bool,
    /// The objective still increases into a capped end; `value` is `+∞`.
    pub unbounded: bool,
}

/// `h*(v) = sup_{z ∈ dom h} (v z - h(z))`.
pub fn young_fenchel(h: &RealFunction1D, v: f64, opts: &ConjugateOptions) -> ConjugateValue {
    let pts = grid(h.lo, h.hi, opts.grid_points.max(3), opts.spacing);
    let objective = |z: f64| v * z - h.eval(z);
    let best = scan_maximize(objective, &pts, opts.rel_tol, opts.refine);
    let n = pts.len();

    let at_hi = h.hi_capped && best.x >= pts[n - 2];
    let at_lo = h.lo_capped && best.x <= pts[1];
    let rising_hi = at_hi && objective(pts[n - 1]) > objective(pts[n - 2]);
    let rising_lo = at_lo && objective(pts[0]) > objective(pts[1]);
    let unbounded = rising_hi || rising_lo;
    ConjugateValue {
        value: if unbounded { f64::INFINITY } else { best.value },
        argmax: best.x,
        hit_cap: at_hi || at_lo,
        unbounded,
    }
}

/// The transform `v ↦ h*(v)` of a fixed `h`, with per-query traces.
#[derive(Debug, Clone)]
pub struct ConjugateResult {
    h: RealFunction1D,
    opts: ConjugateOptions,
}

impl ConjugateResult {
    pub fn eval(&self, v: f64) -> f64 {
        self.trace(v).value
    }

    pub fn trace(&self, v: f64) -> ConjugateValue {
        young_fenchel(&self.h, v, &self.opts)
    }

    /// `h*` restricted to `[v_lo, v_hi]`, e.g. for biconjugation.
    pub fn as_function(&self, v_lo: f64, v_hi: f64) -> Result<RealFunction1D> {
        let this = self.clone();
        RealFunction1D::new(v_lo, v_hi, move |v| this.eval(v))
    }
}

pub fn conjugate(h: &RealFunction1D, opts: ConjugateOptions) -> ConjugateResult {
    ConjugateResult {
        h: h.clone(),
        opts,
    }
}

/// `V[ψ](u) = h*[ψ](ln |u|)` prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct ExponentV {
    h: RealFunction1D,
    opts: ConjugateOptions,
}

impl ExponentV {
    pub fn new(psi: &PsiFunction, cap: f64, opts: ConjugateOptions) -> Result<Self> {
        Ok(ExponentV {
            h: h_of(psi, cap)?,
            opts,
        })
    }

    /// `h*(ln |u|)` for any `u ≠ 0`, without the `|u| ≥ e` restriction.
    pub fn at(&self, u: f64) -> ConjugateValue {
        young_fenchel(&self.h, u.abs().ln(), &self.opts)
    }
}

/// `V[ψ](u)` for `|u| ≥ e`; below `e` the Young-Orlicz builder switches to
/// its quadratic branch.
pub fn exponent_v(psi: &PsiFunction, u: f64) -> Result<ConjugateValue> {
    if !(u.abs() >= E * (1.0 - 1e-15)) {
        return Err(Error::param("u", u, "exponent V needs |u| >= e"));
    }
    Ok(ExponentV::new(psi, Z_MAX, ConjugateOptions::default())?.at(u))
}

/// Midpoint convexity on consecutive grid triples, with `+∞` allowed.
pub fn midpoint_convex(f: impl Fn(f64) -> f64, pts: &[f64], tol: f64) -> bool {
    let vals: Vec<f64> = pts.iter().map(|&x| f(x)).collect();
    pts.windows(3).zip(vals.windows(3)).all(|(x, y)| {
        if y[0] == f64::INFINITY || y[2] == f64::INFINITY {
            return true;
        }
        let t = (x[1] - x[0]) / (x[2] - x[0]);
        let chord = y[0] + t * (y[2] - y[0]);
        y[1] <= chord + tol * (1.0 + chord.abs())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub pass: bool,
    pub worst_ratio: f64,
    pub worst_x: f64,
    /// Grid points skipped because a value was nonpositive or not finite.
    pub flagged: Vec<f64>,
    pub evaluated: usize,
}

/// Slack on the `ratio ≤ α` comparison; absorbs rounding of the ratio.
pub const GROWTH_SLACK: f64 = 1e-12;

fn check_k_alpha(k: f64, alpha: f64) -> Result<()> {
    if !(k.is_finite() && k > 1.0) {
        return Err(Error::param("K", k, "must exceed 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", alpha, "must lie in (0, 1)"));
    }
    Ok(())
}

fn ratio_report(
    ratio: impl Fn(f64) -> Option<f64>,
    alpha: f64,
    x_grid: &[f64],
) -> Result<GrowthReport> {
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut worst_x = f64::NAN;
    let mut flagged = Vec::new();
    let mut evaluated = 0;
    for &x in x_grid {
        match ratio(x) {
            Some(r) => {
                evaluated += 1;
                if r > worst_ratio {
                    worst_ratio = r;
                    worst_x = x;
                }
            }
            None => flagged.push(x),
        }
    }
    if evaluated == 0 {
        return Err(Error::Invalid(
            "growth check has no grid point with positive finite values".into(),
        ));
    }
    Ok(GrowthReport {
        pass: worst_ratio <= alpha + GROWTH_SLACK,
        worst_ratio,
        worst_x,
        flagged,
        evaluated,
    })
}

/// `V(x/K) ≤ α V(x)` on every grid point where `V` is positive and finite.
pub fn check_growth_condition(
    v: impl Fn(f64) -> f64,
    k: f64,
    alpha: f64,
    x_grid: &[f64],
) -> Result<GrowthReport> {
    check_k_alpha(k, alpha)?;
    ratio_report(
        |x| {
            let (num, den) = (v(x / k), v(x));
            let ok = |y: f64| y.is_finite() && y > 0.0;
            (ok(num) && ok(den)).then(|| num / den)
        },
        alpha,
        x_grid,
    )
}

/// `L(x/K) ≤ α K^m L(x)`; the reported ratio is `L(x/K) / (K^m L(x))`.
pub fn check_sv_condition(
    l: impl Fn(f64) -> f64,
    k: f64,
    alpha: f64,
    m: f64,
    x_grid: &[f64],
) -> Result<GrowthReport> {
    check_k_alpha(k, alpha)?;
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::param("m", m, "must be positive"));
    }
    let km = k.powf(m);
    ratio_report(
        |x| {
            let (num, den) = (l(x / k), l(x));
            let ok = |y: f64| y.is_finite() && y > 0.0;
            (ok(num) && ok(den)).then(|| num / (km * den))
        },
        alpha,
        x_grid,
    )
}

/// Growth check of `V[ψ]` on `x ∈ [e, 10⁶]`; points whose conjugate touches
/// the exponent cap are flagged rather than used.
pub fn psi_growth_report(psi: &PsiFunction, k: f64, alpha: f64) -> Result<GrowthReport> {
    let v = ExponentV::new(psi, Z_MAX, ConjugateOptions::default())?;
    let x_grid = grid(E, 1e6, 256, Spacing::Geometric);
    let eval = |x: f64| {
        let c = v.at(x);
        if c.hit_cap {
            f64::NAN
        } else {
            c.value
        }
    };
    check_growth_condition(eval, k, alpha, &x_grid)
}

/// `K` and `α` used when a routine requires condition (3.3)-style growth
/// as a hypothesis.
pub const DEFAULT_GROWTH_K: f64 = 2.0;
pub const DEFAULT_GROWTH_ALPHA: f64 = 0.9;

/// Errors unless `V[ψ]` passes the growth check with the default `K`, `α`
/// on at least eight grid points.
pub fn require_growth(psi: &PsiFunction) -> Result<GrowthReport> {
    let rep = psi_growth_report(psi, DEFAULT_GROWTH_K, DEFAULT_GROWTH_ALPHA)?;
    if rep.evaluated < 8 {
        return Err(Error::Invalid(format!(
            "growth check for {} has only {} usable grid points",
            psi.label(),
            rep.evaluated
        )));
    }
    if !rep.pass {
        return Err(Error::GrowthCondition {
            worst_ratio: rep.worst_ratio,
            alpha: DEFAULT_GROWTH_ALPHA,
        });
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_closed_forms() {
        let h = h_of(&PsiFunction::power(3.0).unwrap(), Z_MAX).unwrap();
        for p in [1.0, 2.0, 50.0] {
            assert!((h.eval(p) - p * p.ln() / 3.0).abs() < 1e-12);
        }
        let h = h_of(&PsiFunction::extremal(4.0).unwrap(), Z_MAX).unwrap();
        assert_eq!(h.domain(), (1.0, 4.0));
        assert_eq!(h.eval(2.5), 0.0);
        let (c, beta) = (0.7, 1.3);
        let h = h_of(&PsiFunction::exponential(c, beta).unwrap(), Z_MAX).unwrap();
        for p in [1.0, 3.0, 20.0] {
            let want = c * p * (p.powf(beta) - 1.0);
            assert!((h.eval(p) - want).abs() < 1e-10 * want.max(1.0));
        }
    }

    #[test]
    fn quadratic_is_self_conjugate() {
        let h = RealFunction1D::with_caps(-100.0, 100.0, true, true, |z| 0.5 * z * z).unwrap();
        let o = ConjugateOptions::default();
        for v in [-50.0, -3.3, 0.0, 1.0, 17.5, 50.0] {
            let c = young_fenchel(&h, v, &o);
            assert!((c.value - 0.5 * v * v).abs() < 1e-8, "v={v}");
            assert!(!c.hit_cap);
        }
    }

    #[test]
    fn zero_on_unit_interval() {
        let h = RealFunction1D::new(0.0, 1.0, |_| 0.0).unwrap();
        for v in [-2.0, -0.1, 0.0, 0.4, 3.0] {
            let c = young_fenchel(&h, v, &ConjugateOptions::default());
            assert!((c.value - v.max(0.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn extremal_h_has_linear_conjugate() {
        let r = 3.0;
        let h = h_of(&PsiFunction::extremal(r).unwrap(), Z_MAX).unwrap();
        for v in [0.1, 1.0, 2.0, 7.0] {
            let c = young_fenchel(&h, v, &ConjugateOptions::default());
            assert!((c.value - r * v).abs() < 1e-12);
            assert_eq!(c.argmax, r);
        }
    }

    #[test]
    fn unbounded_objective_reported_as_infinite() {
        let h = RealFunction1D::with_caps(0.0, 100.0, false, true, |z| z).unwrap();
        let c = young_fenchel(&h, 2.0, &ConjugateOptions::default());
        assert!(c.unbounded && c.hit_cap && c.value == f64::INFINITY);
        // Same geometry without a cap: the endpoint is genuine.
        let h = RealFunction1D::new(0.0, 100.0, |z| z).unwrap();
        let c = young_fenchel(&h, 2.0, &ConjugateOptions::default());
        assert_eq!(c.value, 100.0);
    }

    #[test]
    fn exponent_v_cases() {
        // ψ_2 at u = e: stationary point p = e, V = e/2.
        let v = exponent_v(&PsiFunction::power(2.0).unwrap(), E).unwrap();
        let brute = (0..400_000)
            .map(|k| 1.0 + 199.0 * k as f64 / 399_999.0)
            .map(|p| p - 0.5 * p * p.ln())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((v.value - brute).abs() < 1e-9);
        assert!((v.value - E / 2.0).abs() < 1e-12);
        assert!((v.argmax - E).abs() < 1e-5);

        let r = 2.5;
        let v = exponent_v(&PsiFunction::extremal(r).unwrap(), E * E).unwrap();
        assert!((v.value - 2.0 * r).abs() < 1e-12);

        assert!(exponent_v(&PsiFunction::power(2.0).unwrap(), 2.0).is_err());

        let psi = PsiFunction::power(1.5).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for u in [E, 3.0, 5.0, 9.0, 20.0] {
            let val = exponent_v(&psi, u).unwrap().value;
            assert!(val >= prev);
            prev = val;
        }
    }

    #[test]
    fn growth_condition_cases() {
        let xs = grid(1e-3, 1e6, 400, Spacing::Geometric);
        for m in [0.5, 1.0, 2.0, 3.0] {
            let a = 2f64.powf(-m);
            let rep = check_growth_condition(|x| 1.7 * x.powf(m), 2.0, a, &xs).unwrap();
            assert!(rep.pass);
            assert!((rep.worst_ratio - a).abs() < 1e-12);
        }
        let rep = check_growth_condition(|x| x, 2.0, 0.5, &xs).unwrap();
        assert!(rep.pass && (rep.worst_ratio - 0.5).abs() < 1e-15);

        // ln(1+x/2)/ln(1+x) climbs towards 1.
        let rep = check_growth_condition(|x| x.ln_1p(), 2.0, 0.9, &xs).unwrap();
        assert!(!rep.pass);
        let brute = (0.5 * 1e6f64).ln_1p() / 1e6f64.ln_1p();
        assert!((rep.worst_ratio - brute).abs() < 1e-12);
        assert_eq!(rep.worst_x, 1e6);

        let rep = check_growth_condition(|x| x.ln(), 2.0, 0.9, &xs).unwrap();
        assert!(!rep.flagged.is_empty());
        assert!(check_growth_condition(|x| x, 1.0, 0.5, &xs).is_err());
    }

    #[test]
    fn sv_condition_cases() {
        let xs = grid(1e-3, 1e6, 300, Spacing::Geometric);
        let rep = check_sv_condition(|_| 1.0, 2.0, 0.25, 2.0, &xs).unwrap();
        assert!(rep.pass && (rep.worst_ratio - 0.25).abs() < 1e-15);
        // Increasing L: L(x/K) ≤ L(x), so α = K^{-m} suffices.
        let rep = check_sv_condition(|x| (E + x).ln(), 2.0, 0.5, 1.0, &xs).unwrap();
        assert!(rep.pass && rep.worst_ratio <= 0.5);
        // Decreasing L violates α = K^{-m}.
        let l = |x: f64| 1.0 / (E + x).ln();
        let rep = check_sv_condition(l, 2.0, 0.5, 1.0, &xs).unwrap();
        let brute = xs
            .iter()
            .map(|&x| l(x / 2.0) / (2.0 * l(x)))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(!rep.pass);
        assert!((rep.worst_ratio - brute).abs() < 1e-15);
    }

    #[test]
    fn psi_growth_hypothesis() {
        assert!(require_growth(&PsiFunction::power(2.0).unwrap()).is_ok());
        assert!(require_growth(&PsiFunction::power(1.0).unwrap()).is_ok());
        assert!(matches!(
            require_growth(&PsiFunction::extremal(3.0).unwrap()),
            Err(Error::GrowthCondition { .. })
        ));
    }
}
