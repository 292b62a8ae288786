//! `B(φ)` spaces of centered random variables.
//!
//! `||ξ||B(φ) = inf { τ > 0 : E exp(λ ξ) ≤ exp(φ(λ τ)) for |λ| < λ₀ }`.
//!
//! For each `λ` the smallest admissible `τ` is `φ⁻¹(ln E exp(λξ)) / |λ|`;
//! the norm is the supremum of that over a log-spaced symmetric `λ`-grid,
//! refined by golden-section search in `ln |λ|`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::convex::midpoint_convex;
use crate::glnorm::gls_norm;
use crate::measure::{integrate, DiscreteMeasureSpace, MeasurableFunction};
use crate::psi::{PsiFunction, RealMap};
use crate::search::{bisect_threshold, grid, log_sum_exp, scan_maximize, ScanSpec, Spacing};
use crate::{Error, Result};

/// Norms above this are reported as `+∞`.
pub const TAU_MAX: f64 = 1e6;

/// An even convex function on `(-λ₀, λ₀)`, `+∞` outside.
#[derive(Clone)]
pub struct PhiFunction {
    lambda0: f64,
    eval: RealMap,
    label: String,
}

impl fmt::Debug for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiFunction")
            .field("label", &self.label)
            .field("lambda0", &self.lambda0)
            .finish()
    }
}

impl PhiFunction {
    /// `f` is evaluated at `|λ|` only.
    pub fn new(
        lambda0: f64,
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(lambda0 > 0.0) {
            return Err(Error::param("lambda0", lambda0, "must be positive"));
        }
        Ok(PhiFunction {
            lambda0,
            eval: Arc::new(f),
            label: label.into(),
        })
    }

    /// `φ₂(λ) = λ²/2`, the subgaussian case.
    pub fn quadratic() -> Self {
        Self::new(f64::INFINITY, "lambda^2/2", |l| 0.5 * l * l).expect("valid")
    }

    /// `|λ|^m / m`.
    pub fn power(m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 1.0) {
            return Err(Error::param("m", m, "power phi needs m > 1"));
        }
        Self::new(f64::INFINITY, format!("|lambda|^{m}/{m}"), move |l| l.powf(m) / m)
    }

    /// The same function restricted to `(-λ₀, λ₀)`.
    pub fn restricted(mut self, lambda0: f64) -> Result<Self> {
        if !(lambda0 > 0.0) {
            return Err(Error::param("lambda0", lambda0, "must be positive"));
        }
        self.lambda0 = lambda0;
        Ok(self)
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        let l = lambda.abs();
        if l >= self.lambda0 {
            f64::INFINITY
        } else {
            (self.eval)(l)
        }
    }

    /// Probe-grid check of evenness, normalization and convexity.
    pub fn check_invariants(&self) -> PhiReport {
        let top = if self.lambda0.is_finite() {
            0.99 * self.lambda0
        } else {
            10.0
        };
        let probes = grid(0.0, top, 201, Spacing::Linear);
        let d2 = |h: f64| (self.eval(h) + self.eval(-h) - 2.0 * self.eval(0.0)) / (h * h);
        let second_difference = d2(1e-5 * top);
        let coarse = d2(1e-3 * top);
        PhiReport {
            even: probes
                .iter()
                .all(|&l| (self.eval(l) - self.eval(-l)).abs() <= 1e-12 * self.eval(l).abs().max(1.0)),
            zero_at_origin: self.eval(0.0) == 0.0,
            second_difference,
            curvature_settled: (coarse / second_difference - 1.0).abs() < 0.5,
            convex: midpoint_convex(|l| self.eval(l), &probes, 1e-9),
            positive: probes[1..].iter().all(|&l| self.eval(l) > 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiReport {
    pub even: bool,
    pub zero_at_origin: bool,
    /// Central second difference at 0; a proxy for `φ''(0)`.
    pub second_difference: f64,
    /// The second difference barely changes between step `1e-3` and `1e-5`
    /// (relative to the probe range), so the limit is finite and nonzero.
    pub curvature_settled: bool,
    pub convex: bool,
    pub positive: bool,
}

impl PhiReport {
    pub fn valid(&self) -> bool {
        self.even
            && self.zero_at_origin
            && self.convex
            && self.positive
            && self.second_difference > 0.0
            && self.second_difference.is_finite()
            && self.curvature_settled
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Lambda0 {
    Finite(f64),
    Named(InfLiteral),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InfLiteral {
    #[serde(rename = "inf")]
    Inf,
}

impl Default for Lambda0 {
    fn default() -> Self {
        Lambda0::Named(InfLiteral::Inf)
    }
}

impl Lambda0 {
    pub fn value(self) -> f64 {
        match self {
            Lambda0::Finite(v) => v,
            Lambda0::Named(InfLiteral::Inf) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum PhiFamily {
    Quadratic {},
    Power { m: f64 },
}

/// `{"family": "quadratic" | "power", "params": {...}, "lambda0": number | "inf"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiDescriptor {
    #[serde(flatten)]
    pub family: PhiFamily,
    #[serde(default)]
    pub lambda0: Lambda0,
}

impl PhiDescriptor {
    pub fn build(&self) -> Result<PhiFunction> {
        let phi = match self.family {
            PhiFamily::Quadratic {} => PhiFunction::quadratic(),
            PhiFamily::Power { m } => PhiFunction::power(m)?,
        };
        phi.restricted(self.lambda0.value())
    }
}

/// A finite distribution with mean zero.
#[derive(Debug, Clone)]
pub struct RandomVariableSample {
    values: MeasurableFunction,
    space: DiscreteMeasureSpace,
}

/// Mean tolerance, relative to `max(1, max |x|)`.
pub const CENTERING_TOL: f64 = 1e-10;

impl RandomVariableSample {
    pub fn new(values: MeasurableFunction, space: DiscreteMeasureSpace) -> Result<Self> {
        space.check_bound(&values)?;
        if !space.is_probability() {
            return Err(Error::NotProbability {
                total: space.total_mass(),
            });
        }
        let mean = integrate(&values, &space)?;
        let scale = values.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if mean.abs() > CENTERING_TOL * scale {
            return Err(Error::NotCentered { mean });
        }
        Ok(RandomVariableSample { values, space })
    }

    /// Subtracts the mean before validating.
    pub fn centered(values: MeasurableFunction, space: DiscreteMeasureSpace) -> Result<Self> {
        space.check_bound(&values)?;
        let mean = integrate(&values, &space)?;
        let shifted = values.map(|v| v - mean)?;
        Self::new(shifted, space)
    }

    /// `±1` with probability 1/2.
    pub fn rademacher() -> Self {
        Self::new(
            MeasurableFunction::new(vec![-1.0, 1.0]).expect("finite"),
            DiscreteMeasureSpace::uniform(2).expect("nonempty"),
        )
        .expect("centered")
    }

    /// Standard normal on `n` equally spaced points of `[-range, range]`.
    pub fn discretized_normal(n: usize, range: f64) -> Result<Self> {
        if n < 3 || !(range > 0.0) {
            return Err(Error::Invalid("need n >= 3 points and a positive range".into()));
        }
        let xs = grid(-range, range, n, Spacing::Linear);
        let ws: Vec<f64> = xs.iter().map(|x| (-0.5 * x * x).exp()).collect();
        Self::centered(MeasurableFunction::new(xs)?, DiscreteMeasureSpace::normalized(ws)?)
    }

    pub fn values(&self) -> &MeasurableFunction {
        &self.values
    }

    pub fn space(&self) -> &DiscreteMeasureSpace {
        &self.space
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.values.scaled(c)?, self.space.clone())
    }
}

/// Below this `|λ| max |ξ|` the cumulant series is used.
const SERIES_REACH: f64 = 1e-2;

/// `ln E exp(λξ)`.
///
/// The sample mean, zero up to rounding for a valid sample, is removed
/// first: at small `λ` the term `λ E ξ` is pure rounding noise yet can
/// rival `λ² Var ξ / 2`. For `|λ ξ| ≤ 1e-2` the value is the cumulant
/// series through order six, built from central moments, since the direct
/// sum loses about `ε / |λ ξ|` relative accuracy there. Otherwise it is
/// `ln(1 + E expm1(λξ))` for `|λ ξ| ≤ 1` and log-sum-exp beyond.
pub fn log_mgf(xi: &RandomVariableSample, lambda: f64) -> f64 {
    let ws = xi.space.weights();
    let mean: f64 = xi.values.values().iter().zip(ws).map(|(x, w)| w * x).sum();
    let devs: Vec<f64> = xi.values.values().iter().map(|x| x - mean).collect();
    let reach = devs.iter().fold(0.0f64, |m, d| m.max((lambda * d).abs()));
    if reach <= SERIES_REACH {
        let moment = |k: i32| devs.iter().zip(ws).map(|(d, w)| w * d.powi(k)).sum::<f64>();
        let (m2, m3, m4, m5, m6) = (moment(2), moment(3), moment(4), moment(5), moment(6));
        let cumulants = [
            m2,
            m3,
            m4 - 3.0 * m2 * m2,
            m5 - 10.0 * m3 * m2,
            m6 - 15.0 * m4 * m2 - 10.0 * m3 * m3 + 30.0 * m2 * m2 * m2,
        ];
        let mut term = lambda;
        let mut total = 0.0;
        for (j, k) in cumulants.iter().enumerate() {
            let order = (j + 2) as f64;
            term *= lambda / order;
            total += k * term;
        }
        total
    } else if reach <= 1.0 {
        let s: f64 = devs.iter().zip(ws).map(|(d, w)| w * (lambda * d).exp_m1()).sum();
        s.ln_1p()
    } else {
        let terms: Vec<f64> = devs.iter().zip(ws).map(|(d, w)| lambda * d + w.ln()).collect();
        log_sum_exp(&terms)
    }
}

/// `E exp(λξ)`; fails when the value overflows.
pub fn mgf(xi: &RandomVariableSample, lambda: f64) -> Result<f64> {
    let l = log_mgf(xi, lambda);
    let m = l.exp();
    if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::Invalid(format!("mgf overflows at lambda = {lambda} (log mgf = {l})")))
    }
}

/// `min { z ≥ 0 : φ(z) ≥ y }`, by bisection; `λ₀` when `φ` stays below `y`.
pub fn phi_inverse(phi: &PhiFunction, y: f64) -> f64 {
    if !(y > 0.0) {
        return 0.0;
    }
    let mut hi = if phi.lambda0.is_finite() {
        phi.lambda0
    } else {
        1.0
    };
    while phi.eval(hi) < y {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    bisect_threshold(|z| phi.eval(z) >= y, 0.0, hi, 1e-15)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    /// Total symmetric points including `λ = 0`.
    pub points: usize,
    pub lo: f64,
    /// Cap on `|λ|` when `λ₀ = ∞`.
    pub cap: f64,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid {
            points: 401,
            lo: 1e-4,
            cap: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BphiNormResult {
    /// `+∞` when the norm exceeds [`TAU_MAX`].
    pub value: f64,
    /// `λ` where the constraint binds.
    pub binding_lambda: f64,
    /// `|λ|` was limited by `grid.cap` rather than `λ₀`.
    pub lambda_capped: bool,
}

pub fn bphi_norm(
    xi: &RandomVariableSample,
    phi: &PhiFunction,
    lambda_grid: &LambdaGrid,
) -> Result<BphiNormResult> {
    if !(lambda_grid.points >= 5 && lambda_grid.lo > 0.0 && lambda_grid.cap > lambda_grid.lo) {
        return Err(Error::Invalid("lambda grid needs >= 5 points and 0 < lo < cap".into()));
    }
    let lambda_capped = phi.lambda0 > lambda_grid.cap;
    let top = if lambda_capped {
        lambda_grid.cap
    } else {
        phi.lambda0 * (1.0 - 1e-9)
    };
    if xi.values.is_zero() {
        return Ok(BphiNormResult {
            value: 0.0,
            binding_lambda: 0.0,
            lambda_capped,
        });
    }
    if !(top > lambda_grid.lo) {
        return Err(Error::EmptyInterval {
            lo: lambda_grid.lo,
            hi: top,
        });
    }
    let required = |lambda: f64| {
        let l = log_mgf(xi, lambda);
        phi_inverse(phi, l) / lambda.abs()
    };
    let half = (lambda_grid.points - 1) / 2;
    let logs = grid(lambda_grid.lo.ln(), top.ln(), half.max(2), Spacing::Linear);
    let mut best = (0.0f64, 0.0f64);
    for sign in [1.0, -1.0] {
        let r = scan_maximize(|t| required(sign * t.exp()), &logs, 1e-12, 3);
        if r.value > best.0 {
            best = (r.value, sign * r.x.exp());
        }
    }
    let value = if best.0 > TAU_MAX { f64::INFINITY } else { best.0 };
    Ok(BphiNormResult {
        value,
        binding_lambda: best.1,
        lambda_capped,
    })
}

/// `p / φ⁻¹(p)` on the range of `φ`, without normalization.
pub fn psi_from_phi_raw(phi: &PhiFunction) -> Result<PsiFunction> {
    let b = phi_range(phi);
    let inner = phi.clone();
    PsiFunction::new(1.0, b, true, false, format!("p/phi^-1(p) [{}]", phi.label), move |p| {
        p / phi_inverse(&inner, p)
    })
}

/// `ψ_φ(p) = p / φ⁻¹(p)` divided by its minimum over a log grid on
/// `[1, min(b, 1e6)]`.
pub fn psi_from_phi(phi: &PhiFunction) -> Result<PsiFunction> {
    let raw = psi_from_phi_raw(phi)?;
    let top = raw.b().min(1e6);
    let c = grid(1.0, top, 512, Spacing::Geometric)
        .into_iter()
        .map(|p| raw.eval(p))
        .fold(f64::INFINITY, f64::min);
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Invalid(format!("cannot normalize psi for {}", phi.label)));
    }
    let inner = phi.clone();
    PsiFunction::new(1.0, raw.b(), true, false, format!("psi_phi[{}]", phi.label), move |p| {
        p / phi_inverse(&inner, p) / c
    })
}

/// `sup φ` on `[0, λ₀)`: the largest `p` with `φ⁻¹(p)` defined.
fn phi_range(phi: &PhiFunction) -> f64 {
    if phi.lambda0.is_finite() {
        let m = phi.eval(phi.lambda0 * (1.0 - 1e-12));
        if m.is_finite() && m > 1.0 {
            return m;
        }
    }
    f64::INFINITY
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MembershipReport {
    pub bphi_norm: f64,
    pub gls_norm: f64,
    /// `bphi_norm / gls_norm`; `None` when `gls_norm = 0`.
    pub ratio: Option<f64>,
    pub gls_hit_cap: bool,
    pub lambda_capped: bool,
}

pub fn membership_check(
    xi: &RandomVariableSample,
    phi: &PhiFunction,
    lambda_grid: &LambdaGrid,
    spec: &ScanSpec,
) -> Result<MembershipReport> {
    let b = bphi_norm(xi, phi, lambda_grid)?;
    let psi = psi_from_phi(phi)?;
    let g = gls_norm(&xi.values, &psi, &xi.space, spec)?;
    Ok(MembershipReport {
        bphi_norm: b.value,
        gls_norm: g.value,
        ratio: (g.value > 0.0).then(|| b.value / g.value),
        gls_hit_cap: g.hit_cap,
        lambda_capped: b.lambda_capped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mgf_examples() {
        let r = RandomVariableSample::rademacher();
        for l in [0.0, 1e-6, 0.3, 2.0, 40.0] {
            let want = f64::cosh(l);
            assert!((mgf(&r, l).unwrap() - want).abs() <= 1e-14 * want);
            assert!((mgf(&r, -l).unwrap() - want).abs() <= 1e-14 * want);
        }
        let z = RandomVariableSample::new(
            MeasurableFunction::zeros(3),
            DiscreteMeasureSpace::uniform(3).unwrap(),
        )
        .unwrap();
        assert_eq!(mgf(&z, 7.0).unwrap(), 1.0);
        let big = RandomVariableSample::rademacher().scaled(1e3).unwrap();
        assert!(mgf(&big, 1e3).is_err());
        assert!(log_mgf(&big, 1e3).is_finite());
    }

    #[test]
    fn centering_and_probability_enforced() {
        let s = DiscreteMeasureSpace::uniform(2).unwrap();
        let f = MeasurableFunction::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            RandomVariableSample::new(f.clone(), s.clone()),
            Err(Error::NotCentered { .. })
        ));
        assert!(RandomVariableSample::centered(f.clone(), s).is_ok());
        let s2 = DiscreteMeasureSpace::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            RandomVariableSample::new(MeasurableFunction::new(vec![-1.0, 1.0]).unwrap(), s2),
            Err(Error::NotProbability { .. })
        ));
    }

    #[test]
    fn rademacher_is_unit_subgaussian() {
        let r = RandomVariableSample::rademacher();
        let n = bphi_norm(&r, &PhiFunction::quadratic(), &LambdaGrid::default()).unwrap();
        assert!((n.value - 1.0).abs() < 1e-6);
        assert!(n.lambda_capped);
        // Dense feasibility oracle: τ = 1 satisfies cosh λ ≤ exp(λ²/2) everywhere.
        for k in 1..20_000 {
            let l = k as f64 * 0.0025;
            assert!(f64::cosh(l).ln() <= 0.5 * l * l + 1e-15);
        }
        let s = bphi_norm(&r.scaled(-3.0).unwrap(), &PhiFunction::quadratic(), &LambdaGrid::default())
            .unwrap();
        assert!((s.value - 3.0 * n.value).abs() < 1e-6);
    }

    #[test]
    fn zero_and_infeasible() {
        let z = RandomVariableSample::new(
            MeasurableFunction::zeros(2),
            DiscreteMeasureSpace::uniform(2).unwrap(),
        )
        .unwrap();
        assert_eq!(bphi_norm(&z, &PhiFunction::quadratic(), &LambdaGrid::default()).unwrap().value, 0.0);
        // At λ = 1e-4 alone ±1e9 already needs τ ≈ 4.5e6 > TAU_MAX.
        let big = RandomVariableSample::rademacher().scaled(1e9).unwrap();
        let r = bphi_norm(&big, &PhiFunction::quadratic(), &LambdaGrid::default()).unwrap();
        assert_eq!(r.value, f64::INFINITY);
    }

    #[test]
    fn induced_generating_functions() {
        let phi = PhiFunction::quadratic();
        let raw = psi_from_phi_raw(&phi).unwrap();
        for p in [1.0f64, 2.5, 10.0, 150.0] {
            assert!((raw.eval(p) - (p / 2.0).sqrt()).abs() < 1e-12 * p);
        }
        let psi = psi_from_phi(&phi).unwrap();
        for p in [1.0f64, 3.0, 40.0] {
            assert!((psi.eval(p) - p.sqrt()).abs() < 1e-12 * p);
        }
        let m = 3.0f64;
        let psi_m = psi_from_phi(&PhiFunction::power(m).unwrap()).unwrap();
        for p in [1.0f64, 7.0, 90.0] {
            assert!((psi_m.eval(p) - p.powf(1.0 - 1.0 / m)).abs() < 1e-11 * p);
        }
    }

    #[test]
    fn descriptor_json() {
        let d: PhiDescriptor =
            serde_json::from_str(r#"{"family":"power","params":{"m":3},"lambda0":"inf"}"#).unwrap();
        assert_eq!(d.build().unwrap().lambda0(), f64::INFINITY);
        let d: PhiDescriptor =
            serde_json::from_str(r#"{"family":"quadratic","params":{},"lambda0":2.5}"#).unwrap();
        let phi = d.build().unwrap();
        assert_eq!(phi.lambda0(), 2.5);
        assert_eq!(phi.eval(3.0), f64::INFINITY);
        assert!(serde_json::from_str::<PhiDescriptor>(r#"{"family":"quadratic","params":{},"lambda0":"big"}"#).is_err());
    }

    #[test]
    fn phi_invariants() {
        assert!(PhiFunction::quadratic().check_invariants().valid());
        let r = PhiFunction::power(3.0).unwrap().check_invariants();
        assert!(r.even && r.convex && r.zero_at_origin);
        assert!(!r.valid());
    }

    #[test]
    fn membership_reports_both_norms() {
        let r = RandomVariableSample::rademacher();
        let m = membership_check(&r, &PhiFunction::quadratic(), &LambdaGrid::default(), &ScanSpec::default())
            .unwrap();
        assert!(m.bphi_norm.is_finite() && m.gls_norm.is_finite());
        let ratio = m.ratio.unwrap();
        assert!(ratio > 0.1 && ratio < 10.0);
    }
}
