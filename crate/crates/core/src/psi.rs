//! Generating functions `ψ ∈ Ψ(a,b)` and the objects derived from them.
//!
//! A [`PsiFunction`] is a positive function of the Lebesgue exponent `p`,
//! finite on its support (one of `[a,b]`, `[a,b)`, `(a,b]`, `(a,b)`) and
//! `+∞` outside of it. The named families are normalized to `inf ψ = 1`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::measure::{DiscreteMeasureSpace, LpProfile, MeasurableFunction};
use crate::search::{grid, scan_maximize, Spacing};
use crate::{Error, Result};

pub type RealMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Relative offset used to step inside an excluded endpoint.
pub const ENDPOINT_OFFSET: f64 = 1e-9;

/// `p' = p/(p-1)`, with `1' = ∞` and `∞' = 1`.
pub fn conjugate_exponent(p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::param("p", p, "conjugate exponent needs p >= 1"));
    }
    Ok(if p == 1.0 {
        f64::INFINITY
    } else if p == f64::INFINITY {
        1.0
    } else {
        p / (p - 1.0)
    })
}

fn conj(p: f64) -> f64 {
    conjugate_exponent(p).unwrap_or(f64::NAN)
}

/// JSON-selectable generating-function families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum PsiDescriptor {
    /// `ψ ≡ 1` on `[1, r]`; the GLS is `L_r`.
    Extremal { r: f64 },
    /// `ψ(p) = p^{1/m}` on `[1, ∞)`.
    Power { m: f64 },
    /// `ψ(p) ∝ p^{1/m} ln(e - 1 + p)^log_power` on `[1, ∞)`.
    SlowlyVarying {
        m: f64,
        #[serde(default = "one")]
        log_power: f64,
    },
    /// `ψ(p) = exp(C (p^β - 1))` on `[1, ∞)`.
    Exponential {
        #[serde(rename = "C", alias = "c")]
        c: f64,
        beta: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl PsiDescriptor {
    pub fn build(&self) -> Result<PsiFunction> {
        match *self {
            PsiDescriptor::Extremal { r } => PsiFunction::extremal(r),
            PsiDescriptor::Power { m } => PsiFunction::power(m),
            PsiDescriptor::SlowlyVarying { m, log_power } => {
                PsiFunction::slowly_varying_log(m, log_power)
            }
            PsiDescriptor::Exponential { c, beta } => PsiFunction::exponential(c, beta),
        }
    }
}

/// Interval actually scanned for a sup/inf over the support of `ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanInterval {
    pub lo: f64,
    pub hi: f64,
    /// The upper end was replaced by the computational cap.
    pub capped: bool,
}

/// Builds the scan interval for support `(lo, hi)` with inclusion flags.
pub(crate) fn scan_interval(
    lo: f64,
    hi: f64,
    include_lo: bool,
    include_hi: bool,
    cap: f64,
) -> Result<ScanInterval> {
    let capped = hi > cap;
    let hi_eff = if capped { cap } else { hi };
    let width = hi_eff - lo;
    if !(width > 0.0) {
        return Err(Error::EmptyInterval { lo, hi: hi_eff });
    }
    let lo_s = if include_lo {
        lo
    } else {
        lo + ENDPOINT_OFFSET * width
    };
    let hi_s = if capped || include_hi {
        hi_eff
    } else {
        hi_eff - ENDPOINT_OFFSET * width
    };
    if lo_s >= hi_s {
        return Err(Error::EmptyInterval { lo: lo_s, hi: hi_s });
    }
    Ok(ScanInterval {
        lo: lo_s,
        hi: hi_s,
        capped,
    })
}

/// A generating function on its support.
#[derive(Clone)]
pub struct PsiFunction {
    a: f64,
    b: f64,
    include_a: bool,
    include_b: bool,
    eval: RealMap,
    label: String,
}

impl fmt::Debug for PsiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PsiFunction")
            .field("label", &self.label)
            .field("support", &self.support_string())
            .finish()
    }
}

impl PsiFunction {
    /// A generating function with an arbitrary evaluator. `b = ∞` is never
    /// included in the support.
    pub fn new(
        a: f64,
        b: f64,
        include_a: bool,
        include_b: bool,
        label: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(a.is_finite() && a >= 1.0) {
            return Err(Error::param("a", a, "support must start at a >= 1"));
        }
        if b.is_nan() || b <= a {
            return Err(Error::param("b", b, "support needs b > a"));
        }
        Ok(PsiFunction {
            a,
            b,
            include_a,
            include_b: include_b && b.is_finite(),
            eval: Arc::new(eval),
            label: label.into(),
        })
    }

    /// `ψ_(r) ≡ 1` on `[1, r]`.
    pub fn extremal(r: f64) -> Result<Self> {
        if r.is_nan() || r < 1.0 {
            return Err(Error::param("r", r, "extremal exponent must be >= 1"));
        }
        if r == 1.0 || !r.is_finite() {
            return Err(Error::param("r", r, "support [1, r] needs 1 < r < ∞"));
        }
        Self::new(1.0, r, true, true, format!("extremal(r={r})"), |_| 1.0)
    }

    /// `ψ_m(p) = p^{1/m}` on `[1, ∞)`.
    pub fn power(m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::param("m", m, "power index must be positive"));
        }
        let inv = 1.0 / m;
        Self::new(1.0, f64::INFINITY, true, false, format!("power(m={m})"), move |p| {
            p.powf(inv)
        })
    }

    /// `ψ(p) = p^{1/m} L(p) / inf_q (q^{1/m} L(q))` on `[1, ∞)`.
    ///
    /// The normalizer is located by a log-grid search on `[1, 10⁶]`; `L` must
    /// be positive and finite at every probed point.
    pub fn slowly_varying(
        m: f64,
        l: impl Fn(f64) -> f64 + Send + Sync + 'static,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::param("m", m, "power index must be positive"));
        }
        let inv = 1.0 / m;
        let probe = grid(1.0, 1e6, 512, Spacing::Geometric);
        for &p in &probe {
            let v = l(p);
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(
                    "L",
                    v,
                    "slowly varying factor must be positive and finite",
                ));
            }
        }
        let raw = |p: f64| p.powf(inv) * l(p);
        let best = scan_maximize(|p| -raw(p), &probe, 1e-12, 3);
        let norm = -best.value;
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::param("L", norm, "normalizer must be positive"));
        }
        Self::new(1.0, f64::INFINITY, true, false, label, move |p| {
            p.powf(inv) * l(p) / norm
        })
    }

    /// Slowly varying family with `L(p) = ln(e - 1 + p)^k`.
    pub fn slowly_varying_log(m: f64, k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::param("log_power", k, "must be finite"));
        }
        let shift = std::f64::consts::E - 1.0;
        Self::slowly_varying(
            m,
            move |p| (shift + p).ln().powf(k),
            format!("slowly_varying(m={m},log_power={k})"),
        )
    }

    /// `ψ(p) = exp(C p^β) / exp(C)` on `[1, ∞)`.
    pub fn exponential(c: f64, beta: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::param("C", c, "must be positive"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::param("beta", beta, "must be positive"));
        }
        Self::new(
            1.0,
            f64::INFINITY,
            true,
            false,
            format!("exponential(C={c},beta={beta})"),
            move |p| (c * (p.powf(beta) - 1.0)).exp(),
        )
    }

    /// Piecewise log-log linear interpolation of `(p, ψ(p))` nodes; the
    /// support is the closed node range. Values need only be positive.
    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Invalid("a ψ table needs at least two rows".into()));
        }
        for (i, &(p, v)) in points.iter().enumerate() {
            if !(p.is_finite() && p >= 1.0) {
                return Err(Error::NonFinite { index: i, value: p });
            }
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::NonFinite { index: i, value: v });
            }
            if i > 0 && p <= points[i - 1].0 {
                return Err(Error::Invalid(format!(
                    "ψ table exponents must increase strictly (row {i})"
                )));
            }
        }
        let (a, b) = (points[0].0, points[points.len() - 1].0);
        let logs: Vec<(f64, f64)> = points.iter().map(|&(p, v)| (p.ln(), v.ln())).collect();
        let exact = points.clone();
        Self::new(a, b, true, true, "tabulated", move |p| {
            let k = exact.partition_point(|&(x, _)| x < p);
            if k < exact.len() && exact[k].0 == p {
                return exact[k].1;
            }
            let k = k.clamp(1, logs.len() - 1);
            let (x0, y0) = logs[k - 1];
            let (x1, y1) = logs[k];
            let t = (p.ln() - x0) / (x1 - x0);
            (y0 + t * (y1 - y0)).exp()
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn includes_a(&self) -> bool {
        self.include_a
    }

    pub fn includes_b(&self) -> bool {
        self.include_b
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support_string(&self) -> String {
        format!(
            "{}{}, {}{}",
            if self.include_a { '[' } else { '(' },
            self.a,
            self.b,
            if self.include_b { ']' } else { ')' }
        )
    }

    pub fn in_support(&self, p: f64) -> bool {
        let lower = if self.include_a { p >= self.a } else { p > self.a };
        let upper = if self.include_b { p <= self.b } else { p < self.b };
        lower && upper
    }

    /// `ψ(p)`, or `+∞` off the support.
    pub fn eval(&self, p: f64) -> f64 {
        if self.in_support(p) {
            (self.eval)(p)
        } else {
            f64::INFINITY
        }
    }

    /// Support intersected with `[a, cap]`, stepping inside excluded ends.
    pub fn scan_interval(&self, cap: f64) -> Result<ScanInterval> {
        scan_interval(self.a, self.b, self.include_a, self.include_b, cap)
    }

    /// Maps an exponent produced by floating-point arithmetic back onto a
    /// support endpoint when it lies within rounding distance of it.
    pub(crate) fn snap(&self, p: f64) -> f64 {
        let close = |x: f64| x.is_finite() && (p - x).abs() <= 1e-12 * x;
        if close(self.a) {
            self.a
        } else if close(self.b) {
            self.b
        } else {
            p
        }
    }
}

/// `ν[ψ](q) = 1/ψ(q/(q-1))` on `(b', a')`.
#[derive(Debug, Clone)]
pub struct AdjacentFunction {
    psi: PsiFunction,
    lo: f64,
    hi: f64,
    include_lo: bool,
    include_hi: bool,
}

impl AdjacentFunction {
    /// `(b', a')` as `(lo, hi)`; `hi` is `∞` when `a = 1`.
    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn includes_lo(&self) -> bool {
        self.include_lo
    }

    pub fn includes_hi(&self) -> bool {
        self.include_hi
    }

    pub fn psi(&self) -> &PsiFunction {
        &self.psi
    }

    pub fn contains(&self, q: f64) -> bool {
        let lower = if self.include_lo { q >= self.lo } else { q > self.lo };
        let upper = if self.include_hi { q <= self.hi } else { q < self.hi };
        lower && upper
    }

    /// `ν(q)`, and `0` (that is `C/∞`) off the domain.
    pub fn eval(&self, q: f64) -> f64 {
        if !self.contains(q) {
            return 0.0;
        }
        1.0 / self.psi.eval(self.psi.snap(conj(q)))
    }

    pub fn scan_interval(&self, cap: f64) -> Result<ScanInterval> {
        scan_interval(self.lo, self.hi, self.include_lo, self.include_hi, cap)
    }
}

pub fn adjacent(psi: &PsiFunction) -> AdjacentFunction {
    AdjacentFunction {
        psi: psi.clone(),
        lo: conj(psi.b()),
        hi: conj(psi.a()),
        // q = b' corresponds to p = b, q = a' to p = a.
        include_lo: psi.includes_b(),
        include_hi: psi.includes_a(),
    }
}

/// Exponent grid for natural functions and ψ tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentGrid {
    pub points: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Default for ExponentGrid {
    fn default() -> Self {
        ExponentGrid {
            points: 128,
            lo: 1.0,
            hi: 200.0,
        }
    }
}

impl ExponentGrid {
    pub fn points(&self) -> Vec<f64> {
        grid(self.lo, self.hi, self.points.max(2), Spacing::Geometric)
    }
}

/// Natural function `ψ_S(p) = sup_z |η_z|_p` of a family on `[lo, hi]` of
/// the grid.
///
/// The result evaluates the supremum exactly at any `p` in the grid range;
/// use [`tabulate`] to export it. It is not rescaled: every member of the
/// family has GLS norm at most one under it, and the maximal members
/// exactly one.
pub fn natural_function(
    family: &[MeasurableFunction],
    s: &DiscreteMeasureSpace,
    grid_spec: &ExponentGrid,
) -> Result<PsiFunction> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    for f in family {
        s.check_bound(f)?;
    }
    if family.iter().all(|f| f.is_zero()) {
        return Err(Error::ZeroFamily);
    }
    let profiles: Vec<LpProfile> = family.iter().map(|f| LpProfile::new(f, s)).collect();
    PsiFunction::new(
        grid_spec.lo,
        grid_spec.hi,
        true,
        true,
        format!("natural(|S|={})", family.len()),
        move |p| profiles.iter().map(|pr| pr.norm(p)).fold(0.0, f64::max),
    )
}

/// `(p, ψ(p))` rows on the grid, restricted to the support of `ψ`.
pub fn tabulate(psi: &PsiFunction, grid_spec: &ExponentGrid) -> Vec<(f64, f64)> {
    grid_spec
        .points()
        .into_iter()
        .filter(|&p| psi.in_support(p))
        .map(|p| (p, psi.eval(p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn conjugate_exponent_values() {
        assert_eq!(conjugate_exponent(2.0).unwrap(), 2.0);
        assert_eq!(conjugate_exponent(f64::INFINITY).unwrap(), 1.0);
        assert_eq!(conjugate_exponent(1.0).unwrap(), f64::INFINITY);
        assert!((conjugate_exponent(3.0).unwrap() - 1.5).abs() < 1e-15);
        assert!(conjugate_exponent(0.9).is_err());
    }

    #[test]
    fn extremal_family() {
        let psi = PsiFunction::extremal(3.0).unwrap();
        assert_eq!(psi.eval(2.0), 1.0);
        assert_eq!(psi.eval(3.0), 1.0);
        assert_eq!(psi.eval(3.5), f64::INFINITY);
        assert!(PsiFunction::extremal(1.0).is_err());
        assert!(PsiFunction::extremal(0.5).is_err());
    }

    #[test]
    fn power_family() {
        let psi2 = PsiFunction::power(2.0).unwrap();
        assert!((psi2.eval(4.0) - 2.0).abs() < 1e-15);
        assert_eq!(psi2.eval(1.0), 1.0);
        assert!((PsiFunction::power(1.0).unwrap().eval(10.0) - 10.0).abs() < 1e-14);
        assert!(PsiFunction::power(0.0).is_err());
        assert!(PsiFunction::power(-1.0).is_err());
        assert_eq!(psi2.eval(0.5), f64::INFINITY);
    }

    #[test]
    fn slowly_varying_with_unit_factor_is_power() {
        let sv = PsiFunction::slowly_varying(3.0, |_| 1.0, "L=1").unwrap();
        let pw = PsiFunction::power(3.0).unwrap();
        for p in [1.0, 2.5, 17.0, 150.0] {
            assert!((sv.eval(p) - pw.eval(p)).abs() < 1e-13);
        }
    }

    #[test]
    fn slowly_varying_log_normalizer() {
        let psi = PsiFunction::slowly_varying_log(2.0, 1.0).unwrap();
        // Brute-force minimum of the raw function on a dense grid.
        let raw = |p: f64| p.sqrt() * (E - 1.0 + p).ln();
        let brute = (0..=200_000)
            .map(|k| 1.0 + 999.0 * k as f64 / 200_000.0)
            .map(raw)
            .fold(f64::INFINITY, f64::min);
        assert!((brute - 1.0).abs() < 1e-15, "raw minimum sits at p = 1");
        assert!((psi.eval(1.0) - 1.0).abs() < 1e-12);
        for p in grid(1.0, 1e6, 200, Spacing::Geometric) {
            let v = psi.eval(p);
            assert!(v.is_finite() && v >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn slowly_varying_rejects_nonpositive_factor() {
        assert!(PsiFunction::slowly_varying(2.0, |p| 5.0 - p, "bad").is_err());
    }

    #[test]
    fn exponential_family() {
        let psi = PsiFunction::exponential(1.0, 1.0).unwrap();
        assert_eq!(psi.eval(1.0), 1.0);
        assert!((psi.eval(2.0) - E).abs() < 1e-14);
        assert!(PsiFunction::exponential(1.0, 0.0).is_err());
        assert!(PsiFunction::exponential(0.0, 1.0).is_err());
    }

    #[test]
    fn support_shapes_and_offsets() {
        let psi = PsiFunction::new(2.0, 5.0, false, false, "open", |_| 1.0).unwrap();
        assert_eq!(psi.eval(2.0), f64::INFINITY);
        assert_eq!(psi.eval(5.0), f64::INFINITY);
        assert_eq!(psi.eval(3.0), 1.0);
        let iv = psi.scan_interval(200.0).unwrap();
        assert!(iv.lo > 2.0 && iv.hi < 5.0 && !iv.capped);
        let iv = PsiFunction::power(2.0).unwrap().scan_interval(200.0).unwrap();
        assert_eq!((iv.lo, iv.hi, iv.capped), (1.0, 200.0, true));
        assert!(PsiFunction::new(1.0, 1.0, true, true, "x", |_| 1.0).is_err());
        assert!(PsiFunction::new(0.5, 2.0, true, true, "x", |_| 1.0).is_err());
    }

    #[test]
    fn adjacent_power_formula() {
        for m in [1.0f64, 2.0, 4.0] {
            let nu = adjacent(&PsiFunction::power(m).unwrap());
            assert_eq!(nu.domain(), (1.0, f64::INFINITY));
            for q in [1.1f64, 2.0, 3.7, 40.0] {
                let want = ((q - 1.0) / q).powf(1.0 / m);
                assert!((nu.eval(q) - want).abs() < 1e-14);
            }
        }
        let nu2 = adjacent(&PsiFunction::power(2.0).unwrap());
        assert!((nu2.eval(2.0) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn adjacent_extremal_is_one_from_conjugate_exponent() {
        let nu = adjacent(&PsiFunction::extremal(3.0).unwrap());
        assert_eq!(nu.domain(), (1.5, f64::INFINITY));
        assert!(nu.includes_lo() && nu.includes_hi());
        for q in [1.5, 2.0, 10.0, f64::INFINITY] {
            assert_eq!(nu.eval(q), 1.0, "q={q}");
        }
        assert_eq!(nu.eval(1.4), 0.0);
    }

    #[test]
    fn adjacent_round_trip_recovers_psi() {
        let psi = PsiFunction::exponential(0.5, 0.7).unwrap();
        let nu = adjacent(&psi);
        for p in [1.2, 2.0, 9.0, 33.0] {
            let back = 1.0 / nu.eval(conj(p));
            assert!((back - psi.eval(p)).abs() <= 1e-12 * psi.eval(p));
        }
    }

    #[test]
    fn natural_function_cases() {
        let s = DiscreteMeasureSpace::uniform(4).unwrap();
        let g = ExponentGrid::default();
        let one = MeasurableFunction::constant(4, 1.0).unwrap();
        let psi = natural_function(&[one], &s, &g).unwrap();
        for p in [1.0, 3.0, 200.0] {
            assert!((psi.eval(p) - 1.0).abs() < 1e-14);
        }

        let rademacher = vec![
            MeasurableFunction::new(vec![1.0, -1.0, 1.0, -1.0]).unwrap(),
            MeasurableFunction::new(vec![1.0, 1.0, -1.0, -1.0]).unwrap(),
        ];
        let psi = natural_function(&rademacher, &s, &g).unwrap();
        assert!((psi.eval(7.0) - 1.0).abs() < 1e-14);

        let delta = MeasurableFunction::new(vec![0.0, 1.0, 2.0, -3.0]).unwrap();
        let psi = natural_function(std::slice::from_ref(&delta), &s, &g).unwrap();
        for p in [1.0, 2.0, 11.0] {
            let want = crate::measure::lp_norm(&delta, p, &s).unwrap();
            assert_eq!(psi.eval(p), want);
        }

        assert!(matches!(
            natural_function(&[], &s, &g),
            Err(Error::EmptyFamily)
        ));
        assert!(matches!(
            natural_function(&[MeasurableFunction::zeros(4)], &s, &g),
            Err(Error::ZeroFamily)
        ));
    }

    #[test]
    fn tabulated_round_trip() {
        let psi = PsiFunction::power(2.0).unwrap();
        let rows = tabulate(&psi, &ExponentGrid::default());
        let table = PsiFunction::tabulated(rows.clone()).unwrap();
        for &(p, v) in &rows {
            assert!((table.eval(p) - v).abs() < 1e-9);
        }
        // Power laws are linear in log-log coordinates.
        assert!((table.eval(7.3) - 7.3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn descriptor_json() {
        let d: PsiDescriptor =
            serde_json::from_str(r#"{"family":"exponential","params":{"C":1,"beta":2}}"#)
                .unwrap();
        assert_eq!(d, PsiDescriptor::Exponential { c: 1.0, beta: 2.0 });
        let d: PsiDescriptor =
            serde_json::from_str(r#"{"family":"slowly_varying","params":{"m":2}}"#).unwrap();
        assert_eq!(
            d,
            PsiDescriptor::SlowlyVarying {
                m: 2.0,
                log_power: 1.0
            }
        );
        assert!(d.build().is_ok());
    }
}
