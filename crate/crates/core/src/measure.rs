//! Finite discrete measure spaces and Lebesgue-Riesz norms on them.
//!
//! GLS and Orlicz norms depend only on the distribution of `|f|`, so a
//! finite set of weighted atoms is a faithful stand-in for a diffuse
//! measure space carrying discretely distributed functions.

use serde::{Deserialize, Serialize};

use crate::search::log_sum_exp;
use crate::{Error, Result};

/// Above this exponent `lp_norm` accumulates in the log domain.
const LOG_DOMAIN_P: f64 = 50.0;

/// Finitely many atoms with strictly positive, finite weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasureSpace {
    weights: Vec<f64>,
    is_probability: bool,
}

impl DiscreteMeasureSpace {
    /// A general finite measure; `is_probability` is false.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::validate(&weights)?;
        Ok(DiscreteMeasureSpace {
            weights,
            is_probability: false,
        })
    }

    /// A probability space; weights must already sum to one within 1e-12.
    pub fn probability(weights: Vec<f64>) -> Result<Self> {
        Self::validate(&weights)?;
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::NotProbability { total });
        }
        Ok(DiscreteMeasureSpace {
            weights,
            is_probability: true,
        })
    }

    /// Rescales positive weights into a probability space.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        Self::validate(&weights)?;
        let total: f64 = weights.iter().sum();
        let weights = weights.into_iter().map(|w| w / total).collect();
        Self::probability(weights)
    }

    pub fn uniform(atoms: usize) -> Result<Self> {
        if atoms == 0 {
            return Err(Error::EmptySpace);
        }
        Self::normalized(vec![1.0; atoms])
    }

    fn validate(weights: &[f64]) -> Result<()> {
        if weights.is_empty() {
            return Err(Error::EmptySpace);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_probability(&self) -> bool {
        self.is_probability
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Errors unless `f` has exactly one value per atom.
    pub fn check_bound(&self, f: &MeasurableFunction) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: f.len(),
            });
        }
        Ok(())
    }
}

/// One finite real value per atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurableFunction {
    values: Vec<f64>,
}

impl MeasurableFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
        }
        Ok(MeasurableFunction { values })
    }

    pub fn constant(atoms: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; atoms])
    }

    pub fn zeros(atoms: usize) -> Self {
        MeasurableFunction {
            values: vec![0.0; atoms],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &MeasurableFunction) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| op(v)).collect())
    }
}

/// `∫ f dμ = Σ f(i) w_i`.
pub fn integrate(f: &MeasurableFunction, s: &DiscreteMeasureSpace) -> Result<f64> {
    s.check_bound(f)?;
    Ok(f.values().iter().zip(s.weights()).map(|(v, w)| v * w).sum())
}

/// `∫ f g dμ`, the pairing `l_g(f)` of the associate space.
pub fn integrate_product(
    f: &MeasurableFunction,
    g: &MeasurableFunction,
    s: &DiscreteMeasureSpace,
) -> Result<f64> {
    s.check_bound(f)?;
    s.check_bound(g)?;
    Ok(f.values()
        .iter()
        .zip(g.values())
        .zip(s.weights())
        .map(|((a, b), w)| a * b * w)
        .sum())
}

/// Lebesgue-Riesz norm `(Σ |f(i)|^p w_i)^{1/p}`.
///
/// `p = ∞` is accepted and returns [`ess_sup`].
pub fn lp_norm(f: &MeasurableFunction, p: f64, s: &DiscreteMeasureSpace) -> Result<f64> {
    s.check_bound(f)?;
    check_exponent(p)?;
    Ok(LpProfile::new(f, s).norm(p))
}

/// `max_i |f(i)|`; every atom has positive mass, so this is the essential sup.
pub fn ess_sup(f: &MeasurableFunction, s: &DiscreteMeasureSpace) -> Result<f64> {
    s.check_bound(f)?;
    Ok(max_abs(f.values()))
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::param("p", p, "Lebesgue exponent must be >= 1"));
    }
    Ok(())
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Precomputed `|f|`/weight data for evaluating `|f|_p` at many exponents.
///
/// Zero atoms are dropped: they contribute exactly 0 for every `p ≥ 1`.
#[derive(Debug, Clone)]
pub struct LpProfile {
    max: f64,
    /// `(|f_i| / max, w_i)` for nonzero atoms.
    scaled: Vec<(f64, f64)>,
    /// `(ln |f_i|, ln w_i)` for nonzero atoms.
    logs: Vec<(f64, f64)>,
}

impl LpProfile {
    /// Caller guarantees `f` is bound to `s`.
    pub fn new(f: &MeasurableFunction, s: &DiscreteMeasureSpace) -> Self {
        Self::from_slices(f.values(), s.weights())
    }

    pub(crate) fn from_slices(values: &[f64], weights: &[f64]) -> Self {
        let max = max_abs(values);
        let mut scaled = Vec::with_capacity(values.len());
        let mut logs = Vec::with_capacity(values.len());
        for (&v, &w) in values.iter().zip(weights) {
            if v != 0.0 {
                scaled.push((v.abs() / max, w));
                logs.push((v.abs().ln(), w.ln()));
            }
        }
        LpProfile { max, scaled, logs }
    }

    pub fn ess_sup(&self) -> f64 {
        self.max
    }

    pub fn norm(&self, p: f64) -> f64 {
        if self.max == 0.0 {
            return 0.0;
        }
        if p == f64::INFINITY {
            return self.max;
        }
        if p <= LOG_DOMAIN_P {
            let sum: f64 = self.scaled.iter().map(|&(a, w)| w * a.powf(p)).sum();
            self.max * sum.powf(1.0 / p)
        } else {
            let terms: Vec<f64> = self.logs.iter().map(|&(la, lw)| p * la + lw).collect();
            (log_sum_exp(&terms) / p).exp()
        }
    }
}
