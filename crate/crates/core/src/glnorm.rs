//! The Grand Lebesgue norm `||f||Gψ = sup_p |f|_p / ψ(p)`.

use serde::Serialize;

use crate::measure::{DiscreteMeasureSpace, LpProfile, MeasurableFunction};
use crate::psi::{natural_function, ExponentGrid, PsiFunction};
use crate::search::{grid, scan_maximize, ScanSpec, Spacing};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlsNormResult {
    pub value: f64,
    pub argmax_p: f64,
    /// The support extends past `spec.cap` and the maximizer sits within one
    /// grid step of the cap.
    pub hit_cap: bool,
}

/// Log-spaced scan of `|f|_p/ψ(p)` over the (capped) support followed by
/// golden-section refinement.
pub fn gls_norm(
    f: &MeasurableFunction,
    psi: &PsiFunction,
    s: &DiscreteMeasureSpace,
    spec: &ScanSpec,
) -> Result<GlsNormResult> {
    s.check_bound(f)?;
    let profile = LpProfile::new(f, s);
    gls_norm_profile(&profile, psi, spec)
}

pub(crate) fn gls_norm_profile(
    profile: &LpProfile,
    psi: &PsiFunction,
    spec: &ScanSpec,
) -> Result<GlsNormResult> {
    let iv = psi.scan_interval(spec.cap)?;
    if profile.ess_sup() == 0.0 {
        return Ok(GlsNormResult {
            value: 0.0,
            argmax_p: iv.lo,
            hit_cap: false,
        });
    }
    let pts = grid(iv.lo, iv.hi, spec.points.max(2), Spacing::Geometric);
    let ratio = |p: f64| {
        let w = psi.eval(psi.snap(p));
        if w == f64::INFINITY {
            0.0
        } else {
            profile.norm(p) / w
        }
    };
    let best = scan_maximize(ratio, &pts, spec.rel_tol, spec.refine);
    let n = pts.len();
    Ok(GlsNormResult {
        value: best.value,
        argmax_p: best.x,
        hit_cap: iv.capped && best.x >= pts[n - 2],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyNormReport {
    pub norms: Vec<f64>,
    pub sup_norm: f64,
    /// `|sup_norm - 1|`.
    pub deviation: f64,
}

/// Every member's GLS norm under the family's own natural function; the
/// largest of them should be exactly one.
pub fn family_unit_norm_check(
    family: &[MeasurableFunction],
    s: &DiscreteMeasureSpace,
    grid_spec: &ExponentGrid,
    spec: &ScanSpec,
) -> Result<FamilyNormReport> {
    let psi = natural_function(family, s, grid_spec)?;
    let norms = family
        .iter()
        .map(|f| gls_norm(f, &psi, s, spec).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    let sup_norm = norms.iter().copied().fold(0.0, f64::max);
    Ok(FamilyNormReport {
        norms,
        sup_norm,
        deviation: (sup_norm - 1.0).abs(),
    })
}
