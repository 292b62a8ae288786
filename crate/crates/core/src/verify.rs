//! Seeded randomized property suite behind `gls verify`.
//!
//! Every check draws its instances from one ChaCha stream, so a seed fixes
//! the report byte for byte.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bphi::{bphi_norm, LambdaGrid, PhiFunction, RandomVariableSample};
use crate::convex::{h_of, young_fenchel, ConjugateOptions, Z_MAX};
use crate::duality::{
    associate_bound, associate_norm_oracle, holder_pair, step_integral, OracleOptions, SetFunction,
    StepFunction,
};
use crate::glnorm::gls_norm;
use crate::measure::{lp_norm, DiscreteMeasureSpace, MeasurableFunction};
use crate::orlicz::{luxemburg_norm, orlicz_holder_check_with, OrliczPair, TableSpec, YoungFunction};
use crate::psi::PsiFunction;
use crate::search::ScanSpec;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteOptions {
    /// Instances per cheap check; the optimization-heavy checks use a
    /// fifth of this.
    pub trials: usize,
    pub scan: ScanSpec,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            trials: 100,
            scan: ScanSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub trials: usize,
    /// Largest violation measure seen; the check passes when it is at most
    /// `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub options: SuiteOptions,
    pub checks: Vec<Check>,
    pub pass: bool,
}

struct Tracker {
    name: &'static str,
    trials: usize,
    worst: f64,
    tolerance: f64,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tracker {
            name,
            trials: 0,
            worst: f64::NEG_INFINITY,
            tolerance,
        }
    }

    fn record(&mut self, violation: f64) {
        self.trials += 1;
        // NaN counts as a failure.
        self.worst = if violation.is_nan() {
            f64::INFINITY
        } else {
            self.worst.max(violation)
        };
    }

    fn finish(self) -> Check {
        Check {
            name: self.name,
            trials: self.trials,
            worst: self.worst,
            tolerance: self.tolerance,
            pass: self.trials > 0 && self.worst <= self.tolerance,
        }
    }
}

pub fn random_space(rng: &mut impl Rng, max_atoms: usize, probability: bool) -> DiscreteMeasureSpace {
    let n = rng.gen_range(1..=max_atoms);
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    if probability {
        DiscreteMeasureSpace::normalized(weights).expect("positive weights")
    } else {
        DiscreteMeasureSpace::new(weights).expect("positive weights")
    }
}

pub fn random_function(rng: &mut impl Rng, atoms: usize) -> MeasurableFunction {
    let scale = 10f64.powf(rng.gen_range(-1.0..1.0));
    let values = (0..atoms)
        .map(|_| {
            if rng.gen_bool(0.1) {
                0.0
            } else {
                scale * rng.gen_range(-3.0..3.0)
            }
        })
        .collect();
    MeasurableFunction::new(values).expect("finite")
}

/// One member of each generating-function family, with random parameters.
pub fn random_psi(rng: &mut impl Rng) -> PsiFunction {
    match rng.gen_range(0..4) {
        0 => PsiFunction::extremal(*[2.0, 3.0, 5.0].choose(rng).expect("nonempty")),
        1 => PsiFunction::power(*[1.0, 2.0, 4.0].choose(rng).expect("nonempty")),
        2 => PsiFunction::slowly_varying_log(rng.gen_range(1.0..4.0), 1.0),
        _ => PsiFunction::exponential(rng.gen_range(0.1..1.0), rng.gen_range(0.3..1.0)),
    }
    .expect("valid parameters")
}

pub fn run_suite(seed: u64, opts: &SuiteOptions) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = &opts.scan;
    let n = opts.trials.max(1);
    let heavy = (n / 5).max(1);
    let mut checks = Vec::new();

    let mut t = Tracker::new("holder_per_exponent", 1e-10);
    for _ in 0..n {
        let probability = rng.gen_bool(0.5);
        let s = random_space(&mut rng, 16, probability);
        let f = random_function(&mut rng, s.len());
        let g = random_function(&mut rng, s.len());
        let p = rng.gen_range(0.0f64..5.0).exp() + 1e-3;
        let (lhs, rhs) = holder_pair(&f, &g, p, &s)?;
        t.record(lhs - rhs);
    }
    checks.push(t.finish());

    let mut homog = Tracker::new("gls_homogeneity", 1e-9);
    let mut tri = Tracker::new("gls_triangle", 1e-9);
    for _ in 0..n {
        let s = random_space(&mut rng, 12, true);
        let psi = random_psi(&mut rng);
        let f = random_function(&mut rng, s.len());
        let g = random_function(&mut rng, s.len());
        let c = rng.gen_range(-5.0..5.0);
        let nf = gls_norm(&f, &psi, &s, spec)?.value;
        let ng = gls_norm(&g, &psi, &s, spec)?.value;
        let ncf = gls_norm(&f.scaled(c)?, &psi, &s, spec)?.value;
        let nfg = gls_norm(&f.add(&g)?, &psi, &s, spec)?.value;
        homog.record((ncf - c.abs() * nf).abs() / (1.0 + c.abs() * nf));
        tri.record((nfg - nf - ng) / (1.0 + nf + ng));
    }
    checks.push(homog.finish());
    checks.push(tri.finish());

    let mut ext = Tracker::new("extremal_identity", 1e-9);
    let mut assoc = Tracker::new("extremal_associate_bound", 1e-6);
    for _ in 0..n {
        let s = random_space(&mut rng, 16, true);
        let r = *[2.0, 3.0, 5.0].choose(&mut rng).expect("nonempty");
        let psi = PsiFunction::extremal(r)?;
        let f = random_function(&mut rng, s.len());
        ext.record((gls_norm(&f, &psi, &s, spec)?.value - lp_norm(&f, r, &s)?).abs());
        let b = associate_bound(&f, &psi, &s, spec)?.value;
        assoc.record((b - lp_norm(&f, r / (r - 1.0), &s)?).abs());
    }
    checks.push(ext.finish());
    checks.push(assoc.finish());

    let mut lux = Tracker::new("luxemburg_power", 1e-9);
    for _ in 0..n {
        let probability = rng.gen_bool(0.5);
        let s = random_space(&mut rng, 16, probability);
        let f = random_function(&mut rng, s.len());
        let p = rng.gen_range(1.0..6.0);
        let want = lp_norm(&f, p, &s)?;
        let got = luxemburg_norm(&f, &YoungFunction::power(p)?, &s)?;
        lux.record((got - want).abs() / want.max(1.0));
    }
    checks.push(lux.finish());

    let mut fy = Tracker::new("fenchel_young", 1e-9);
    let conj = ConjugateOptions::default();
    for _ in 0..heavy {
        let psi = random_psi(&mut rng);
        let h = h_of(&psi, Z_MAX)?;
        let (lo, hi) = h.domain();
        for _ in 0..5 {
            let z = rng.gen_range(lo..hi);
            let v = rng.gen_range(-2.0..6.0);
            let hv = young_fenchel(&h, v, &conj);
            if hv.unbounded {
                continue;
            }
            fy.record((v * z - h.eval(z) - hv.value) / (1.0 + hv.value.abs()));
        }
    }
    checks.push(fy.finish());

    let mut bracket = Tracker::new("associate_bracket", 1e-8);
    let oracle = OracleOptions::default();
    for _ in 0..heavy {
        let s = random_space(&mut rng, 8, true);
        let psi = if rng.gen_bool(0.5) {
            PsiFunction::extremal(*[2.0, 3.0, 5.0].choose(&mut rng).expect("nonempty"))?
        } else {
            PsiFunction::power(*[1.0, 2.0, 4.0].choose(&mut rng).expect("nonempty"))?
        };
        let g = random_function(&mut rng, s.len());
        let o = associate_norm_oracle(&g, &psi, &s, &oracle)?.value;
        let b = associate_bound(&g, &psi, &s, spec)?.value;
        bracket.record(o - b);
    }
    checks.push(bracket.finish());

    let mut add = Tracker::new("setfunction_additivity", 0.0);
    for _ in 0..n {
        let s = random_space(&mut rng, 16, false);
        let gamma = SetFunction::new(random_function(&mut rng, s.len()).values().to_vec())?;
        let mut atoms: Vec<usize> = (0..s.len()).collect();
        atoms.shuffle(&mut rng);
        let cut = rng.gen_range(0..=atoms.len());
        let (d1, d2) = atoms.split_at(cut);
        let c1 = rng.gen_range(-2.0..2.0);
        let c2 = rng.gen_range(-2.0..2.0);
        let phi = StepFunction::new(vec![c1, c2], vec![d1.to_vec(), d2.to_vec()])?;
        let direct: f64 = d1.iter().map(|&i| c1 * gamma.atom_values()[i]).sum::<f64>()
            + d2.iter().map(|&i| c2 * gamma.atom_values()[i]).sum::<f64>();
        let union = gamma.measure_of(&atoms)?;
        let parts = gamma.measure_of(d1)? + gamma.measure_of(d2)?;
        let split = (union - parts).abs() / (1.0 + union.abs());
        let step = (step_integral(&phi, &gamma)? - direct).abs() / (1.0 + direct.abs());
        // Summation order differs, so allow rounding only.
        add.record((split.max(step) - 4.0 * f64::EPSILON).max(0.0));
    }
    checks.push(add.finish());

    let mut bh = Tracker::new("bphi_homogeneity", 1e-6);
    let lambda_grid = LambdaGrid::default();
    for _ in 0..heavy {
        let s = random_space(&mut rng, 8, true);
        let xi = RandomVariableSample::centered(random_function(&mut rng, s.len()), s)?;
        let c = rng.gen_range(0.2..5.0);
        let a = bphi_norm(&xi, &PhiFunction::quadratic(), &lambda_grid)?.value;
        let b = bphi_norm(&xi.scaled(c)?, &PhiFunction::quadratic(), &lambda_grid)?.value;
        bh.record((b - c * a).abs() / (1.0 + c * a));
    }
    checks.push(bh.finish());

    let mut oh = Tracker::new("orlicz_holder", 1e-6);
    let pair = OrliczPair::build(&PsiFunction::power(2.0)?, &TableSpec::default())?;
    for _ in 0..n {
        let s = random_space(&mut rng, 12, true);
        let f = random_function(&mut rng, s.len());
        let g = random_function(&mut rng, s.len());
        let rep = orlicz_holder_check_with(&f, &g, &pair.n, &pair.n_star, &s)?;
        oh.record(rep.lhs - rep.rhs);
    }
    checks.push(oh.finish());

    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        seed,
        options: *opts,
        checks,
        pass,
    })
}
