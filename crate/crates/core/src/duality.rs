//! Associate and dual spaces of a GLS on a finite measure space.
//!
//! [`associate_bound`] is the upper bound `inf_q |g|_q / ν[ψ](q)` on the
//! norm of the functional `f ↦ ∫ f g dμ`. [`associate_norm_oracle`] and
//! [`setfunction_norm`] compute lower bounds on the same kind of quantity
//! by maximizing a linear form over the GLS unit ball. On a finite space a
//! set function is a signed measure given by its atom values, and both
//! oracles reduce to one optimization over coefficients `c_i`.

use serde::Serialize;

use crate::convex::require_growth;
use crate::glnorm::gls_norm_profile;
use crate::measure::{integrate_product, lp_norm, DiscreteMeasureSpace, LpProfile, MeasurableFunction};
use crate::orlicz::{luxemburg_norm, OrliczPair, TableSpec};
use crate::psi::{adjacent, PsiFunction};
use crate::search::{golden_max, grid, scan_maximize, ScanSpec, Spacing};
use crate::{Error, Result};

/// Largest atom count accepted by the unit-ball optimizations.
pub const ATOM_BUDGET: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssociateBoundResult {
    pub value: f64,
    pub arginf_q: f64,
    pub hit_cap: bool,
}

/// `inf_{q ∈ (b', a')} |g|_q / ν[ψ](q)`, with `q` capped at `spec.cap`.
pub fn associate_bound(
    g: &MeasurableFunction,
    psi: &PsiFunction,
    s: &DiscreteMeasureSpace,
    spec: &ScanSpec,
) -> Result<AssociateBoundResult> {
    let iv = adjacent(psi).scan_interval(spec.cap)?;
    bound_on(g, psi, s, iv.lo, iv.hi, iv.capped, spec)
}

/// [`associate_bound`] with the infimum restricted to `[q_lo, q_hi]`
/// intersected with the adjacent domain.
pub fn associate_bound_on(
    g: &MeasurableFunction,
    psi: &PsiFunction,
    s: &DiscreteMeasureSpace,
    q_lo: f64,
    q_hi: f64,
    spec: &ScanSpec,
) -> Result<AssociateBoundResult> {
    let iv = adjacent(psi).scan_interval(spec.cap)?;
    let lo = iv.lo.max(q_lo);
    let hi = iv.hi.min(q_hi);
    if !(lo < hi) {
        return Err(Error::EmptyInterval { lo, hi });
    }
    bound_on(g, psi, s, lo, hi, iv.capped && hi == iv.hi, spec)
}

fn bound_on(
    g: &MeasurableFunction,
    psi: &PsiFunction,
    s: &DiscreteMeasureSpace,
    lo: f64,
    hi: f64,
    capped: bool,
    spec: &ScanSpec,
) -> Result<AssociateBoundResult> {
    s.check_bound(g)?;
    let profile = LpProfile::new(g, s);
    if profile.ess_sup() == 0.0 {
        return Ok(AssociateBoundResult {
            value: 0.0,
            arginf_q: lo,
            hit_cap: false,
        });
    }
    let nu = adjacent(psi);
    let pts = grid(lo, hi, spec.points.max(2), Spacing::Geometric);
    let neg_ratio = |q: f64| {
        let v = nu.eval(q);
        if v > 0.0 {
            -profile.norm(q) / v
        } else {
            f64::NEG_INFINITY
        }
    };
    let best = scan_maximize(neg_ratio, &pts, spec.rel_tol, spec.refine);
    if best.value == f64::NEG_INFINITY {
        return Err(Error::Invalid(format!(
            "adjacent function of {} vanishes on the q-interval",
            psi.label()
        )));
    }
    Ok(AssociateBoundResult {
        value: -best.value,
        arginf_q: best.x,
        hit_cap: capped && best.x >= pts[pts.len() - 2],
    })
}

/// Effort settings for the unit-ball maximization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleOptions {
    /// Hölder-extremal seeds `sign(d)|d|^{q-1}` for log-spaced `q`.
    pub seed_exponents: usize,
    /// Best seeds polished by projected ascent.
    pub starts: usize,
    /// Ascent steps per start, before the barrier refinement.
    pub iterations: usize,
    pub scan: ScanSpec,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            seed_exponents: 24,
            starts: 3,
            iterations: 60,
            scan: ScanSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    /// Best value of `Σ f_i c_i` found with `||f||Gψ = 1`; a lower bound.
    pub value: f64,
    /// The maximizing `f`, normalized.
    pub maximizer: Vec<f64>,
}

/// `sup { |∫ f g dμ| : ||f||Gψ ≤ 1 }`, bracketed above by
/// [`associate_bound`].
pub fn associate_norm_oracle(
    g: &MeasurableFunction,
    psi: &PsiFunction,
    s: &DiscreteMeasureSpace,
    opts: &OracleOptions,
) -> Result<OracleResult> {
    s.check_bound(g)?;
    let c: Vec<f64> = g.values().iter().zip(s.weights()).map(|(v, w)| v * w).collect();
    unit_ball_sup(&c, psi, s, opts)
}

struct UnitBall<'a> {
    psi: &'a PsiFunction,
    weights: &'a [f64],
    c: &'a [f64],
    scan: &'a ScanSpec,
}

struct Point {
    f: Vec<f64>,
    value: f64,
    active_p: f64,
}

impl UnitBall<'_> {
    /// Rescales `f` to the unit sphere; `None` for `f = 0`.
    fn project(&self, mut f: Vec<f64>) -> Result<Option<Point>> {
        let profile = LpProfile::from_slices(&f, self.weights);
        if profile.ess_sup() == 0.0 {
            return Ok(None);
        }
        let g = gls_norm_profile(&profile, self.psi, self.scan)?;
        if !(g.value > 0.0 && g.value.is_finite()) {
            return Ok(None);
        }
        f.iter_mut().for_each(|x| *x /= g.value);
        let value = f.iter().zip(self.c).map(|(a, b)| a * b).sum();
        Ok(Some(Point {
            f,
            value,
            active_p: g.argmax_p,
        }))
    }

    /// Gradient of `f ↦ |f|_p / ψ(p)` at a point of the unit sphere.
    fn gradient(&self, f: &[f64], p: f64) -> Vec<f64> {
        let norm = LpProfile::from_slices(f, self.weights).norm(p);
        let scale = self.psi.eval(self.psi.snap(p));
        f.iter()
            .zip(self.weights)
            .map(|(&x, &w)| w * x.signum() * (x.abs() / norm).powf(p - 1.0) / scale)
            .collect()
    }

    /// `c - <f, c> ∇||f||` with the gradient taken at the active exponent.
    fn ascent_direction(&self, pt: &Point) -> Vec<f64> {
        self.gradient(&pt.f, pt.active_p)
            .iter()
            .zip(self.c)
            .map(|(dg, ci)| ci - pt.value * dg)
            .collect()
    }

    /// `(p, |f|_p / ψ(p))` for the local maxima of the ratio within
    /// `ACTIVE_TOL` of the norm, best first and at most `MAX_ACTIVE`.
    fn active_exponents(&self, f: &[f64]) -> Result<Vec<(f64, f64)>> {
        const ACTIVE_TOL: f64 = 1e-3;
        const MAX_ACTIVE: usize = 4;
        let profile = LpProfile::from_slices(f, self.weights);
        let iv = self.psi.scan_interval(self.scan.cap)?;
        let pts = grid(iv.lo, iv.hi, self.scan.points.max(3), Spacing::Geometric);
        let ratio = |p: f64| {
            let w = self.psi.eval(self.psi.snap(p));
            if w == f64::INFINITY {
                0.0
            } else {
                profile.norm(p) / w
            }
        };
        let vals: Vec<f64> = pts.iter().map(|&p| ratio(p)).collect();
        let n = vals.len();
        let mut peaks = Vec::new();
        for i in 0..n {
            let left = i == 0 || vals[i] >= vals[i - 1];
            let right = i + 1 == n || vals[i] > vals[i + 1];
            if left && right {
                let lo = pts[i.saturating_sub(1)];
                let hi = pts[(i + 1).min(n - 1)];
                let refined = golden_max(ratio, lo, hi, self.scan.rel_tol);
                peaks.push(if refined.1 >= vals[i] { refined } else { (pts[i], vals[i]) });
            }
        }
        peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
        let top = peaks.first().map_or(0.0, |&(_, v)| v);
        Ok(peaks
            .into_iter()
            .take_while(|&(_, v)| v >= top * (1.0 - ACTIVE_TOL))
            .take(MAX_ACTIVE)
            .collect())
    }

    /// Backtracking line search along `d` followed by projection; `None`
    /// when no trial step improves the value.
    fn line_search(&self, pt: &Point, d: &[f64], step: &mut f64) -> Result<Option<Point>> {
        let dn = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(dn > 0.0 && dn.is_finite()) {
            return Ok(None);
        }
        let base = pt.f.iter().map(|x| x * x).sum::<f64>().sqrt() / dn;
        for _ in 0..30 {
            let trial: Vec<f64> = pt.f.iter().zip(d).map(|(x, di)| x + *step * base * di).collect();
            if let Some(next) = self.project(trial)? {
                if next.value > pt.value {
                    return Ok(Some(next));
                }
            }
            *step *= 0.5;
        }
        Ok(None)
    }

    fn polish(&self, mut pt: Point, iterations: usize) -> Result<Point> {
        let mut step = 0.5;
        for _ in 0..iterations {
            match self.line_search(&pt, &self.ascent_direction(&pt), &mut step)? {
                Some(next) => {
                    let gain = next.value - pt.value;
                    pt = next;
                    step = (2.0 * step).min(1.0);
                    if gain <= 1e-15 * pt.value.abs() {
                        break;
                    }
                }
                None => break,
            }
        }
        Ok(pt)
    }

    /// Log-barrier Newton method for `max <c, f>` subject to
    /// `|f|_p ≤ ψ(p)` on a coarse exponent grid plus clusters of exponents
    /// around the ratio peaks of each round's solution, started strictly
    /// inside the ball. Each round's solution is rescaled onto the exact
    /// unit sphere, so the result remains a lower bound.
    fn barrier_polish(&self, start: &Point) -> Result<Option<Point>> {
        const BASE_POINTS: usize = 24;
        const ROUNDS: usize = 8;
        if !(start.value > 0.0) {
            return Ok(None);
        }
        let iv = self.psi.scan_interval(self.scan.cap)?;
        let mut exps = grid(iv.lo, iv.hi, BASE_POINTS.min(self.scan.points).max(3), Spacing::Geometric);
        let mut current = start.f.clone();
        let mut best: Option<Point> = None;
        for _ in 0..ROUNDS {
            for (p, _) in self.active_exponents(&current)? {
                for k in 1..=4 {
                    let offset = 10f64.powi(-(k + 1));
                    exps.push(p * (1.0 - offset));
                    exps.push(p * (1.0 + offset));
                }
                exps.push(p);
            }
            exps.retain(|&p| p >= iv.lo && p <= iv.hi);
            exps.sort_by(f64::total_cmp);
            exps.dedup();
            let constraints: Vec<(f64, f64)> = exps
                .iter()
                .map(|&p| (p, self.psi.eval(self.psi.snap(p))))
                .filter(|&(_, psi)| psi.is_finite())
                .collect();
            if constraints.is_empty() {
                break;
            }
            // The first round starts deep inside the ball; later ones warm
            // start just inside the previous solution with a matching
            // barrier weight.
            let shrink = if best.is_none() { 0.5 } else { 1e-3 };
            let x0 = self.lifted_start(&constraints, &current, shrink);
            let terms = (constraints.len() + 2 * current.len()) as f64;
            let t0 = terms / (shrink * start.value);
            let Some(x) = self.barrier_solve(&constraints, x0, t0, start.value)? else {
                break;
            };
            let Some(pt) = self.project(x)? else {
                break;
            };
            current = pt.f.clone();
            let previous = best.as_ref().map_or(f64::NEG_INFINITY, |b| b.value);
            let gain = pt.value - previous;
            if pt.value > previous {
                best = Some(pt);
            }
            if previous.is_finite() && gain.abs() <= 1e-12 * previous.abs() {
                break;
            }
        }
        Ok(best)
    }

    /// Interior point `(f, s)` of the lifted problem near `(1 - shrink) f`.
    fn lifted_start(&self, cons: &[(f64, f64)], f: &[f64], shrink: f64) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        let floor = cons
            .iter()
            .map(|&(p, psi)| psi / total.powf(1.0 / p))
            .fold(f64::INFINITY, f64::min);
        let lift = 0.25 * shrink * floor;
        let mut x: Vec<f64> = f.iter().map(|v| (1.0 - shrink) * v).collect();
        x.extend(f.iter().map(|v| (1.0 - 0.5 * shrink) * v.abs() + lift));
        x
    }

    /// Path-following on the lifted problem in `x = (f, s)`:
    /// `t <c, f> + Σ_p ln(1 - |s|_p/ψ(p)) + Σ_i ln(s_i² - f_i²)`, which is
    /// smooth where `|f|_p` has a kink at `f_i = 0`. Returns `f` once the
    /// duality gap is below `1e-13` of the objective scale.
    fn barrier_solve(
        &self,
        cons: &[(f64, f64)],
        mut x: Vec<f64>,
        t0: f64,
        scale: f64,
    ) -> Result<Option<Vec<f64>>> {
        let dim = x.len();
        let m = (cons.len() + dim) as f64;
        if self.barrier_value(cons, &x, t0).is_none() {
            return Ok(None);
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut t = t0;
        for _ in 0..60 {
            for _ in 0..80 {
                let (grad, mut hess) = self.barrier_derivatives(cons, &x, t);
                let ridge = 1e-14 * (0..dim).map(|i| hess[i][i]).fold(0.0, f64::max);
                (0..dim).for_each(|i| hess[i][i] += ridge.max(f64::MIN_POSITIVE));
                let mut rhs = grad.clone();
                let Some(step) = solve(&mut hess, &mut rhs) else {
                    break;
                };
                let decrement = dot(&grad, &step);
                if !(decrement > 2e-10) {
                    break;
                }
                let phi0 = self.barrier_value(cons, &x, t).unwrap_or(f64::NEG_INFINITY);
                let mut alpha = 1.0;
                let mut moved = false;
                let mut gain = 0.0;
                for _ in 0..60 {
                    let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + alpha * d).collect();
                    if let Some(phi) = self.barrier_value(cons, &trial, t) {
                        if phi >= phi0 + 0.25 * alpha * decrement {
                            gain = phi - phi0;
                            x = trial;
                            moved = true;
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                // At large t the gradient carries rounding noise of order
                // eps·t; stop once steps no longer change the objective.
                if !moved || gain <= 16.0 * f64::EPSILON * phi0.abs() {
                    break;
                }
            }
            if m / t <= 1e-13 * scale {
                break;
            }
            t *= 16.0;
        }
        x.truncate(dim / 2);
        Ok(Some(x))
    }

    /// Barrier objective at `x = (f, s)`; `None` outside the interior.
    fn barrier_value(&self, cons: &[(f64, f64)], x: &[f64], t: f64) -> Option<f64> {
        let (f, s) = x.split_at(x.len() / 2);
        let profile = LpProfile::from_slices(s, self.weights);
        let mut total: f64 = t * f.iter().zip(self.c).map(|(a, b)| a * b).sum::<f64>();
        for &(p, psi) in cons {
            let slack = 1.0 - profile.norm(p) / psi;
            if !(slack > 0.0) {
                return None;
            }
            total += slack.ln();
        }
        for (a, b) in f.iter().zip(s) {
            let (lo, hi) = (b - a, b + a);
            if !(lo > 0.0 && hi > 0.0) {
                return None;
            }
            total += lo.ln() + hi.ln();
        }
        Some(total)
    }

    /// Gradient and negated Hessian of the barrier objective.
    fn barrier_derivatives(&self, cons: &[(f64, f64)], x: &[f64], t: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
        let dim = x.len();
        let n = dim / 2;
        let (f, s) = x.split_at(n);
        let profile = LpProfile::from_slices(s, self.weights);
        let mut grad = vec![0.0; dim];
        grad[..n].iter_mut().zip(self.c).for_each(|(g, c)| *g = t * c);
        let mut neg_hess = vec![vec![0.0; dim]; dim];
        for &(p, psi) in cons {
            let norm = profile.norm(p);
            let slack = 1.0 - norm / psi;
            // For s > 0: ∇|s|_p = w u^{p-1}, ∇²|s|_p = (p-1)/|s|_p (diag(w u^{p-2}) - ∇∇ᵀ)
            // with u = s/|s|_p.
            let u: Vec<f64> = s.iter().map(|v| v / norm).collect();
            let g: Vec<f64> = (0..n).map(|i| self.weights[i] * u[i].powf(p - 1.0) / psi).collect();
            let curv = (p - 1.0) / (norm * psi);
            for i in 0..n {
                grad[n + i] -= g[i] / slack;
                if curv > 0.0 {
                    neg_hess[n + i][n + i] += curv * self.weights[i] * u[i].powf(p - 2.0) / slack;
                }
                for k in 0..n {
                    // ∇r∇rᵀ has ψ folded in: ∇²r = curv (diag - ψ² g gᵀ).
                    neg_hess[n + i][n + k] += g[i] * g[k] * (1.0 / (slack * slack) - curv * psi * psi / slack);
                }
            }
        }
        // ln(s - f) + ln(s + f) per atom.
        for i in 0..n {
            let (lo, hi) = (s[i] - f[i], s[i] + f[i]);
            grad[i] += 1.0 / hi - 1.0 / lo;
            grad[n + i] += 1.0 / hi + 1.0 / lo;
            let (a, b) = (1.0 / (lo * lo), 1.0 / (hi * hi));
            neg_hess[i][i] += a + b;
            neg_hess[n + i][n + i] += a + b;
            neg_hess[i][n + i] += b - a;
            neg_hess[n + i][i] += b - a;
        }
        (grad, neg_hess)
    }
}

/// Solves `A x = b` for a small dense `A` by Gaussian elimination with
/// partial pivoting; `None` when numerically singular.
fn solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if !(a[piv][col].abs() > 1e-12 * scale) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot = &upper[col];
        for (offset, row) in lower.iter_mut().enumerate() {
            let factor = row[col] / pivot[col];
            row[col..].iter_mut().zip(&pivot[col..]).for_each(|(x, p)| *x -= factor * p);
            b[col + 1 + offset] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

/// `sup { Σ f_i c_i : ||f||Gψ ≤ 1 }` by multi-start projected ascent
/// followed by a barrier refinement of the best point.
///
/// Seeds are `sign(d)|d|^{q-1}` with density `d_i = c_i / w_i`, including
/// `q` at the arginf of the associate bound of `d`. The ascent stalls at
/// kinks where several exponents are active; the barrier stage solves the
/// convex problem on a finite exponent set refined around those kinks.
fn unit_ball_sup(
    c: &[f64],
    psi: &PsiFunction,
    s: &DiscreteMeasureSpace,
    opts: &OracleOptions,
) -> Result<OracleResult> {
    if c.len() != s.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            found: c.len(),
        });
    }
    if c.len() > ATOM_BUDGET {
        return Err(Error::BudgetExceeded {
            atoms: c.len(),
            max: ATOM_BUDGET,
        });
    }
    if c.iter().all(|&x| x == 0.0) {
        return Ok(OracleResult {
            value: 0.0,
            maximizer: vec![0.0; c.len()],
        });
    }
    // The ascent runs on c / max|c| so that the result is homogeneous in c
    // regardless of where the line search stops.
    let magnitude = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let c: Vec<f64> = c.iter().map(|x| x / magnitude).collect();
    let ball = UnitBall {
        psi,
        weights: s.weights(),
        c: &c,
        scan: &opts.scan,
    };
    let density = MeasurableFunction::new(c.iter().zip(s.weights()).map(|(a, w)| a / w).collect())?;

    let mut exponents = grid(1.0, 64.0, opts.seed_exponents.max(2), Spacing::Geometric);
    if let Ok(b) = associate_bound(&density, psi, s, &opts.scan) {
        exponents.push(b.arginf_q);
    }
    let mut seeds = Vec::new();
    for &q in &exponents {
        let f: Vec<f64> = density
            .values()
            .iter()
            .map(|&d| d.signum() * d.abs().powf(q - 1.0))
            .collect();
        if let Some(pt) = ball.project(f)? {
            seeds.push(pt);
        }
    }
    seeds.sort_by(|a, b| b.value.total_cmp(&a.value));

    let mut best: Option<Point> = None;
    for seed in seeds.into_iter().take(opts.starts.max(1)) {
        let pt = ball.polish(seed, opts.iterations)?;
        if best.as_ref().is_none_or(|b| pt.value > b.value) {
            best = Some(pt);
        }
    }
    let mut best = best.ok_or_else(|| Error::NonConvergent("no feasible seed".into()))?;
    if let Some(pt) = ball.barrier_polish(&best)? {
        if pt.value > best.value {
            best = pt;
        }
    }
    Ok(OracleResult {
        value: best.value.max(0.0) * magnitude,
        maximizer: best.f,
    })
}

/// A finitely additive function on the algebra generated by the atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetFunction {
    atom_values: Vec<f64>,
}

impl SetFunction {
    pub fn new(atom_values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = atom_values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(SetFunction { atom_values })
    }

    /// `γ(D) = ∫_D g dμ`.
    pub fn from_density(g: &MeasurableFunction, s: &DiscreteMeasureSpace) -> Result<Self> {
        s.check_bound(g)?;
        Self::new(g.values().iter().zip(s.weights()).map(|(v, w)| v * w).collect())
    }

    pub fn atom_values(&self) -> &[f64] {
        &self.atom_values
    }

    pub fn len(&self) -> usize {
        self.atom_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atom_values.is_empty()
    }

    /// `γ(D)` for a set of distinct atom indices.
    pub fn measure_of(&self, set: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for &atom in set {
            total += self.atom_values.get(atom).ok_or(Error::AtomOutOfRange {
                atom,
                atoms: self.len(),
            })?;
        }
        Ok(total)
    }
}

/// `Σ c_i χ_{D(i)}` with pairwise disjoint `D(i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    coefficients: Vec<f64>,
    sets: Vec<Vec<usize>>,
}

impl StepFunction {
    pub fn new(coefficients: Vec<f64>, sets: Vec<Vec<usize>>) -> Result<Self> {
        if coefficients.len() != sets.len() {
            return Err(Error::DimensionMismatch {
                expected: sets.len(),
                found: coefficients.len(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for &atom in sets.iter().flatten() {
            if !seen.insert(atom) {
                return Err(Error::Overlap { atom });
            }
        }
        Ok(StepFunction { coefficients, sets })
    }

    pub fn empty() -> Self {
        StepFunction {
            coefficients: Vec::new(),
            sets: Vec::new(),
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }
}

/// `∫ φ dγ = Σ c_i γ(D(i))`.
pub fn step_integral(phi: &StepFunction, gamma: &SetFunction) -> Result<f64> {
    let mut total = 0.0;
    for (c, set) in phi.coefficients.iter().zip(&phi.sets) {
        total += c * gamma.measure_of(set)?;
    }
    Ok(total)
}

/// `|||γ|||_ψ = sup { ∫ f dγ : ||f||Gψ ≤ 1 }`; a lower bound from the same
/// ascent as [`associate_norm_oracle`].
pub fn setfunction_norm(
    gamma: &SetFunction,
    psi: &PsiFunction,
    s: &DiscreteMeasureSpace,
    opts: &OracleOptions,
) -> Result<OracleResult> {
    unit_ball_sup(&gamma.atom_values, psi, s, opts)
}

/// Tolerance of [`verify_representation`]: `1e-5 (1 + magnitude)`.
pub const REPRESENTATION_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepresentationReport {
    pub functional_norm: f64,
    pub setfunction_norm: f64,
    pub difference: f64,
    pub pass: bool,
}

/// Compares the functional norm of `f ↦ ∫ f g dμ` with `|||γ|||_ψ` for
/// `γ` with density `g`. Requires the growth condition on `ψ`.
pub fn verify_representation(
    g: &MeasurableFunction,
    psi: &PsiFunction,
    s: &DiscreteMeasureSpace,
    opts: &OracleOptions,
) -> Result<RepresentationReport> {
    require_growth(psi)?;
    let functional_norm = associate_norm_oracle(g, psi, s, opts)?.value;
    let gamma = SetFunction::from_density(g, s)?;
    let setfunction_norm = setfunction_norm(&gamma, psi, s, opts)?.value;
    let difference = (functional_norm - setfunction_norm).abs();
    let magnitude = functional_norm.abs().max(setfunction_norm.abs());
    Ok(RepresentationReport {
        functional_norm,
        setfunction_norm,
        difference,
        pass: difference <= REPRESENTATION_TOL * (1.0 + magnitude),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem41Report {
    pub functional_norm: f64,
    pub conjugate_luxemburg: f64,
    pub c_psi: f64,
    /// `2 c_psi ||g||_{L(N*)}`.
    pub bound: f64,
    pub pass: bool,
}

/// `||l_g|| ≤ 2 c_psi ||g||_{L(N*[ψ])} + 1e-6`, building the Orlicz pair.
pub fn theorem41_bound_check(
    g: &MeasurableFunction,
    psi: &PsiFunction,
    s: &DiscreteMeasureSpace,
    c_psi: f64,
) -> Result<Theorem41Report> {
    require_growth(psi)?;
    let pair = OrliczPair::build(psi, &TableSpec::default())?;
    theorem41_bound_check_with(g, psi, &pair, s, c_psi, &OracleOptions::default())
}

pub fn theorem41_bound_check_with(
    g: &MeasurableFunction,
    psi: &PsiFunction,
    pair: &OrliczPair,
    s: &DiscreteMeasureSpace,
    c_psi: f64,
    opts: &OracleOptions,
) -> Result<Theorem41Report> {
    if !(c_psi.is_finite() && c_psi > 0.0) {
        return Err(Error::param("c_psi", c_psi, "embedding constant must be positive"));
    }
    let functional_norm = associate_norm_oracle(g, psi, s, opts)?.value;
    let conjugate_luxemburg = luxemburg_norm(g, &pair.n_star, s)?;
    let bound = 2.0 * c_psi * conjugate_luxemburg;
    Ok(Theorem41Report {
        functional_norm,
        conjugate_luxemburg,
        c_psi,
        bound,
        pass: functional_norm <= bound + 1e-6,
    })
}

/// `|∫ f g dμ| ≤ |f|_p |g|_{p'}`: returns `(lhs, rhs)`.
pub fn holder_pair(
    f: &MeasurableFunction,
    g: &MeasurableFunction,
    p: f64,
    s: &DiscreteMeasureSpace,
) -> Result<(f64, f64)> {
    let q = crate::psi::conjugate_exponent(p)?;
    let lhs = integrate_product(f, g, s)?.abs();
    Ok((lhs, lp_norm(f, p, s)? * lp_norm(g, q, s)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::ess_sup;

    fn instance() -> (DiscreteMeasureSpace, MeasurableFunction) {
        (
            DiscreteMeasureSpace::normalized(vec![1.0, 2.0, 0.5, 3.0, 1.5]).unwrap(),
            MeasurableFunction::new(vec![0.4, -1.3, 2.0, 0.1, -0.7]).unwrap(),
        )
    }

    #[test]
    fn extremal_bound_and_oracle_equal_conjugate_norm() {
        let (s, g) = instance();
        for r in [2.0, 3.0, 5.0] {
            let psi = PsiFunction::extremal(r).unwrap();
            let want = lp_norm(&g, r / (r - 1.0), &s).unwrap();
            let b = associate_bound(&g, &psi, &s, &ScanSpec::default()).unwrap();
            assert!((b.value - want).abs() < 1e-9, "r={r}");
            let o = associate_norm_oracle(&g, &psi, &s, &OracleOptions::default()).unwrap();
            assert!((o.value - want).abs() < 1e-4, "r={r}");
            assert!(o.value <= b.value + 1e-8);
        }
    }

    #[test]
    fn power_bound_matches_direct_infimum() {
        let (s, g) = instance();
        let m = 2.0;
        let psi = PsiFunction::power(m).unwrap();
        let b = associate_bound(&g, &psi, &s, &ScanSpec::default()).unwrap();
        // Dense-grid oracle of inf_q (q/(q-1))^{1/m} |g|_q.
        let brute = (1..200_000)
            .map(|k| 1.0 + 199.0 * k as f64 / 200_000.0)
            .map(|q| (q / (q - 1.0)).powf(1.0 / m) * lp_norm(&g, q, &s).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(b.value <= brute + 1e-12);
        assert!(brute - b.value < 1e-7);
        let o = associate_norm_oracle(&g, &psi, &s, &OracleOptions::default()).unwrap();
        assert!(o.value <= b.value + 1e-8);
        assert!(o.value > 0.5 * b.value);
    }

    #[test]
    fn zero_inputs() {
        let (s, _) = instance();
        let psi = PsiFunction::power(2.0).unwrap();
        let z = MeasurableFunction::zeros(5);
        assert_eq!(associate_bound(&z, &psi, &s, &ScanSpec::default()).unwrap().value, 0.0);
        assert_eq!(
            associate_norm_oracle(&z, &psi, &s, &OracleOptions::default()).unwrap().value,
            0.0
        );
        let gamma = SetFunction::new(vec![0.0; 5]).unwrap();
        assert_eq!(setfunction_norm(&gamma, &psi, &s, &OracleOptions::default()).unwrap().value, 0.0);
    }

    #[test]
    fn density_representation_is_identical() {
        let (s, g) = instance();
        let psi = PsiFunction::power(2.0).unwrap();
        let o = associate_norm_oracle(&g, &psi, &s, &OracleOptions::default()).unwrap();
        let gamma = SetFunction::from_density(&g, &s).unwrap();
        let n = setfunction_norm(&gamma, &psi, &s, &OracleOptions::default()).unwrap();
        assert_eq!(o.value, n.value);
        let rep = verify_representation(&g, &psi, &s, &OracleOptions::default()).unwrap();
        assert!(rep.pass && rep.difference == 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let s = DiscreteMeasureSpace::uniform(33).unwrap();
        let g = MeasurableFunction::constant(33, 1.0).unwrap();
        let psi = PsiFunction::power(2.0).unwrap();
        assert!(matches!(
            associate_norm_oracle(&g, &psi, &s, &OracleOptions::default()),
            Err(Error::BudgetExceeded { atoms: 33, max: 32 })
        ));
    }

    #[test]
    fn step_integrals() {
        let gamma = SetFunction::new(vec![0.3, 0.7]).unwrap();
        let whole = StepFunction::new(vec![1.0], vec![vec![0, 1]]).unwrap();
        assert_eq!(step_integral(&whole, &gamma).unwrap(), 1.0);
        let split = StepFunction::new(vec![1.0, -1.0], vec![vec![0], vec![1]]).unwrap();
        assert!((step_integral(&split, &gamma).unwrap() + 0.4).abs() < 1e-15);
        assert_eq!(step_integral(&StepFunction::empty(), &gamma).unwrap(), 0.0);
        assert!(matches!(
            StepFunction::new(vec![1.0, 2.0], vec![vec![0, 1], vec![1]]),
            Err(Error::Overlap { atom: 1 })
        ));
        let far = StepFunction::new(vec![1.0], vec![vec![5]]).unwrap();
        assert!(step_integral(&far, &gamma).is_err());
    }

    #[test]
    fn truncated_q_range_gives_weaker_bound() {
        let s = DiscreteMeasureSpace::normalized(vec![1.0; 8]).unwrap();
        let g = MeasurableFunction::new(vec![8.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]).unwrap();
        for m in [1.0f64, 2.0] {
            let psi = PsiFunction::power(m).unwrap();
            let spec = ScanSpec::default();
            let truncated = associate_bound_on(&g, &psi, &s, 2.0, f64::INFINITY, &spec).unwrap();
            let full = associate_bound(&g, &psi, &s, &spec).unwrap();
            assert!(truncated.value <= 2f64.powf(1.0 / m) * ess_sup(&g, &s).unwrap());
            assert!(full.value < truncated.value);
            assert!(full.arginf_q < 2.0);
        }
    }

    #[test]
    fn theorem41_zero_passes() {
        let (s, _) = instance();
        let psi = PsiFunction::power(2.0).unwrap();
        let rep = theorem41_bound_check(&MeasurableFunction::zeros(5), &psi, &s, 1.0).unwrap();
        assert_eq!(rep.functional_norm, 0.0);
        assert!(rep.pass);
    }
}

