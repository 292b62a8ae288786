//! The `gls` command-line front end.
//!
//! Every subcommand writes one JSON report (keys sorted) to `--out` or
//! stdout. Exit codes: 0 success, 1 invalid input or configuration,
//! 2 a verification that ran but failed.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bphi::{membership_check, LambdaGrid, RandomVariableSample};
use crate::convex::{h_of, young_fenchel, ConjugateOptions};
use crate::duality::{
    associate_bound, associate_norm_oracle, setfunction_norm, OracleOptions, SetFunction,
};
use crate::glnorm::{family_unit_norm_check, gls_norm};
use crate::io;
use crate::measure::{lp_norm, DiscreteMeasureSpace, MeasurableFunction};
use crate::orlicz::{build_n, conjugate_young, luxemburg, YoungConjugateOptions, LUXEMBURG_TOL};
use crate::psi::{adjacent, natural_function, tabulate, ExponentGrid, PsiFunction};
use crate::search::{grid, ScanSpec, Spacing};
use crate::verify::{run_suite, SuiteOptions};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

/// Slack for the bracket `oracle ≤ associate_bound` reported by
/// `dual-oracle`.
const BRACKET_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Parser, Serialize)]
#[command(
    name = "gls",
    version,
    about = "Grand Lebesgue space norms, associate bounds and Orlicz embeddings",
    after_help = "Defaults: --grid-points 256, --p-max 200, --q-max 200, --lambda-cap 50, \
                  --tol 1e-10, --seed 42, --trials 100."
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Measure-space input (`weight,value` CSV or JSON); `natural` accepts
    /// several, one family member each.
    #[arg(long, global = true)]
    pub input: Vec<PathBuf>,

    /// Generating function: inline JSON, a JSON file, or a `p,psi` CSV table.
    #[arg(long, global = true)]
    pub psi: Option<String>,

    /// φ descriptor for `bphi-norm`: inline JSON or a JSON file.
    #[arg(long, global = true)]
    pub phi: Option<String>,

    /// Exponent for `lp` (`inf` allowed).
    #[arg(long, global = true)]
    pub p: Option<f64>,

    /// Evaluation points for `adjacent`.
    #[arg(long, global = true)]
    pub q: Vec<f64>,

    /// Arguments of `legendre` and `conjugate-young`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub v: Vec<f64>,

    /// Arguments of `orlicz-build`.
    #[arg(long, global = true)]
    pub u: Vec<f64>,

    #[arg(long, global = true, default_value_t = 256)]
    pub grid_points: usize,

    #[arg(long, global = true, default_value_t = 200.0)]
    pub p_max: f64,

    #[arg(long, global = true, default_value_t = 200.0)]
    pub q_max: f64,

    #[arg(long, global = true, default_value_t = 50.0)]
    pub lambda_cap: f64,

    /// Relative tolerance of the scalar searches.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,

    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Instances per check in `verify`.
    #[arg(long, global = true, default_value_t = 100)]
    pub trials: usize,

    /// `setnorm`: read the input values as a density `g` (`γ_i = g_i w_i`)
    /// instead of atom values.
    #[arg(long, global = true)]
    pub density: bool,

    /// Also export the computed table as two-column CSV.
    #[arg(long, global = true)]
    pub table: Option<PathBuf>,

    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// GLS norm sup_p |f|_p / ψ(p).
    Gnorm,
    /// Lebesgue-Riesz norm |f|_p.
    Lp,
    /// Natural function of a family of inputs on one space.
    Natural,
    /// Adjacent function ν(q) = 1/ψ(q/(q-1)).
    Adjacent,
    /// Associate bound inf_q |g|_q / ν(q).
    DualBound,
    /// Unit-ball maximization of |∫ f g dμ|, bracketed by the associate bound.
    DualOracle,
    /// Norm of a set function given by atom values.
    Setnorm,
    /// Young-Fenchel transform of h(p) = p ln ψ(p).
    Legendre,
    /// Young-Orlicz function N[ψ].
    OrliczBuild,
    /// Luxemburg norm under N[ψ].
    OrliczNorm,
    /// Conjugate N*[ψ].
    ConjugateYoung,
    /// B(φ) norm and the GLS norm under ψ_φ.
    BphiNorm,
    /// Seeded randomized property suite.
    Verify,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(16..=65536).contains(&self.grid_points) {
            return Err(Error::Invalid(format!(
                "--grid-points {} outside [16, 65536]",
                self.grid_points
            )));
        }
        for (name, v) in [
            ("--p-max", self.p_max),
            ("--q-max", self.q_max),
            ("--lambda-cap", self.lambda_cap),
        ] {
            if !(10.0..=1e4).contains(&v) {
                return Err(Error::Invalid(format!("{name} {v} outside [10, 1e4]")));
            }
        }
        if !(1e-14..=1e-2).contains(&self.tol) {
            return Err(Error::Invalid(format!("--tol {} outside [1e-14, 1e-2]", self.tol)));
        }
        if self.trials == 0 {
            return Err(Error::Invalid("--trials must be positive".into()));
        }
        Ok(())
    }

    fn p_spec(&self) -> ScanSpec {
        ScanSpec {
            points: self.grid_points,
            cap: self.p_max,
            rel_tol: self.tol,
            ..ScanSpec::default()
        }
    }

    fn q_spec(&self) -> ScanSpec {
        ScanSpec {
            cap: self.q_max,
            ..self.p_spec()
        }
    }

    fn settings(&self) -> Value {
        json!({
            "grid_points": self.grid_points,
            "p_max": self.p_max,
            "q_max": self.q_max,
            "lambda_cap": self.lambda_cap,
            "tol": self.tol,
        })
    }

    fn echo(&self) -> Value {
        json!({
            "input": self.input.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "psi": self.psi,
            "phi": self.phi,
            "p": self.p.map(num),
            "q": self.q,
            "u": self.u,
            "v": self.v,
            "seed": self.seed,
            "trials": self.trials,
            "density": self.density,
        })
    }

    fn psi(&self) -> Result<PsiFunction> {
        let arg = self
            .psi
            .as_deref()
            .ok_or_else(|| Error::Invalid("--psi is required".into()))?;
        io::parse_psi(arg)
    }

    fn single_input(&self) -> Result<(DiscreteMeasureSpace, MeasurableFunction)> {
        match self.input.as_slice() {
            [path] => io::read_space(path),
            [] => Err(Error::Invalid("--input is required".into())),
            _ => Err(Error::Invalid("exactly one --input expected".into())),
        }
    }
}

/// JSON number, or a string for non-finite values (`"inf"`, `"-inf"`,
/// `"nan"`), which JSON cannot represent.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

/// Runs one command and writes its report.
pub fn run(config: &RunConfig) -> i32 {
    let outcome = config.validate().and_then(|()| execute(config));
    let (result, verified) = match outcome {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let report = json!({
        "command": config.command,
        "inputs": config.echo(),
        "settings": config.settings(),
        "result": result,
    });
    let text = match serde_json::to_string_pretty(&report) {
        Ok(t) => t + "\n",
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    match &config.out {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_INVALID;
            }
        }
        None => print!("{text}"),
    }
    if verified {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}

/// The result object and whether any verification it contains passed.
fn execute(cfg: &RunConfig) -> Result<(Value, bool)> {
    let ok = |v: Value| Ok((v, true));
    match cfg.command {
        Command::Gnorm => {
            let (s, f) = cfg.single_input()?;
            let r = gls_norm(&f, &cfg.psi()?, &s, &cfg.p_spec())?;
            ok(json!({"value": r.value, "argmax_p": r.argmax_p, "hit_cap": r.hit_cap}))
        }
        Command::Lp => {
            let (s, f) = cfg.single_input()?;
            let p = cfg.p.ok_or_else(|| Error::Invalid("--p is required".into()))?;
            ok(json!({"value": lp_norm(&f, p, &s)?, "p": num(p)}))
        }
        Command::Natural => natural(cfg),
        Command::Adjacent => {
            let psi = cfg.psi()?;
            let nu = adjacent(&psi);
            let (lo, hi) = nu.domain();
            let qs = if cfg.q.is_empty() {
                let iv = nu.scan_interval(cfg.q_max)?;
                grid(iv.lo, iv.hi, cfg.grid_points, Spacing::Geometric)
            } else {
                cfg.q.clone()
            };
            let rows: Vec<(f64, f64)> = qs.iter().map(|&q| (q, nu.eval(q))).collect();
            export(cfg, ("q", "nu"), &rows)?;
            ok(json!({
                "domain": [num(lo), num(hi)],
                "includes_lo": nu.includes_lo(),
                "includes_hi": nu.includes_hi(),
                "hit_cap": hi > cfg.q_max && cfg.q.is_empty(),
                "table": rows.iter().map(|&(q, v)| json!([q, v])).collect::<Vec<_>>(),
            }))
        }
        Command::DualBound => {
            let (s, g) = cfg.single_input()?;
            let b = associate_bound(&g, &cfg.psi()?, &s, &cfg.q_spec())?;
            ok(json!({"value": b.value, "arginf_q": b.arginf_q, "hit_cap": b.hit_cap}))
        }
        Command::DualOracle => {
            let (s, g) = cfg.single_input()?;
            let psi = cfg.psi()?;
            let opts = OracleOptions {
                scan: cfg.p_spec(),
                ..OracleOptions::default()
            };
            let o = associate_norm_oracle(&g, &psi, &s, &opts)?;
            let b = associate_bound(&g, &psi, &s, &cfg.q_spec())?;
            let pass = o.value <= b.value + BRACKET_SLACK;
            Ok((
                json!({
                    "value": o.value,
                    "maximizer": o.maximizer,
                    "bound": b.value,
                    "arginf_q": b.arginf_q,
                    "hit_cap": b.hit_cap,
                    "gap": b.value - o.value,
                    "slack": BRACKET_SLACK,
                    "pass": pass,
                }),
                pass,
            ))
        }
        Command::Setnorm => {
            let (s, f) = cfg.single_input()?;
            let gamma = if cfg.density {
                SetFunction::from_density(&f, &s)?
            } else {
                SetFunction::new(f.values().to_vec())?
            };
            let opts = OracleOptions {
                scan: cfg.p_spec(),
                ..OracleOptions::default()
            };
            let r = setfunction_norm(&gamma, &cfg.psi()?, &s, &opts)?;
            ok(json!({"value": r.value, "maximizer": r.maximizer, "atom_values": gamma.atom_values()}))
        }
        Command::Legendre => {
            let psi = cfg.psi()?;
            let h = h_of(&psi, cfg.p_max)?;
            let vs = if cfg.v.is_empty() {
                grid(0.0, 10.0, cfg.grid_points, Spacing::Linear)
            } else {
                cfg.v.clone()
            };
            let opts = ConjugateOptions {
                rel_tol: cfg.tol,
                ..ConjugateOptions::default()
            };
            let vals: Vec<_> = vs.iter().map(|&v| young_fenchel(&h, v, &opts)).collect();
            let rows: Vec<(f64, f64)> = vs.iter().zip(&vals).map(|(&v, c)| (v, c.value)).collect();
            export(cfg, ("v", "h_star"), &rows)?;
            ok(json!({
                "rows": vs.iter().zip(&vals).map(|(&v, c)| json!({
                    "v": v,
                    "value": num(c.value),
                    "argmax": c.argmax,
                    "hit_cap": c.hit_cap,
                    "unbounded": c.unbounded,
                })).collect::<Vec<_>>(),
            }))
        }
        Command::OrliczBuild => {
            let psi = cfg.psi()?;
            let n = build_n(&psi)?;
            let us = if cfg.u.is_empty() {
                grid(0.0, 20.0, cfg.grid_points, Spacing::Linear)
            } else {
                cfg.u.clone()
            };
            let rows: Vec<(f64, f64)> = us.iter().map(|&u| (u, n.eval(u))).collect();
            export(cfg, ("u", "N"), &rows)?;
            let check = n.check(20.0, 401);
            ok(json!({
                "label": n.label(),
                "branch_point": n.branch_point(),
                "convex": n.is_convex(),
                "check": check,
                "rows": rows.iter().map(|&(u, v)| json!([u, num(v)])).collect::<Vec<_>>(),
            }))
        }
        Command::OrliczNorm => {
            let (s, f) = cfg.single_input()?;
            let psi = cfg.psi()?;
            let n = build_n(&psi)?;
            let r = luxemburg(&f, &n, &s, LUXEMBURG_TOL)?;
            let g = gls_norm(&f, &psi, &s, &cfg.p_spec())?;
            ok(json!({
                "norm": r.norm,
                "modular": r.modular,
                "convex": n.is_convex(),
                "gls_norm": g.value,
                "gls_hit_cap": g.hit_cap,
                "ratio": if g.value > 0.0 { num(r.norm / g.value) } else { Value::Null },
            }))
        }
        Command::ConjugateYoung => {
            let psi = cfg.psi()?;
            let n = build_n(&psi)?;
            let vs = if cfg.v.is_empty() {
                grid(0.0, 100.0, cfg.grid_points.min(64), Spacing::Linear)
            } else {
                cfg.v.clone()
            };
            let opts = YoungConjugateOptions::default();
            let vals: Vec<_> = vs.iter().map(|&v| conjugate_young(&n, v, &opts)).collect();
            let rows: Vec<(f64, f64)> = vs.iter().zip(&vals).map(|(&v, c)| (v, c.value)).collect();
            export(cfg, ("v", "N_star"), &rows)?;
            ok(json!({
                "u_max": opts.u_max,
                "rows": vs.iter().zip(&vals).map(|(&v, c)| json!({
                    "v": v,
                    "value": num(c.value),
                    "argmax": c.argmax,
                    "hit_cap": c.hit_cap,
                    "unbounded": c.unbounded,
                })).collect::<Vec<_>>(),
            }))
        }
        Command::BphiNorm => {
            let (s, f) = cfg.single_input()?;
            let phi_arg = cfg
                .phi
                .as_deref()
                .ok_or_else(|| Error::Invalid("--phi is required".into()))?;
            let phi = io::parse_phi(phi_arg)?;
            let xi = RandomVariableSample::new(f, s)?;
            let lambda_grid = LambdaGrid {
                cap: cfg.lambda_cap,
                ..LambdaGrid::default()
            };
            let m = membership_check(&xi, &phi, &lambda_grid, &cfg.p_spec())?;
            ok(json!({
                "bphi_norm": num(m.bphi_norm),
                "gls_norm": num(m.gls_norm),
                "ratio": m.ratio.map(num),
                "gls_hit_cap": m.gls_hit_cap,
                "lambda_capped": m.lambda_capped,
            }))
        }
        Command::Verify => {
            let opts = SuiteOptions {
                trials: cfg.trials,
                scan: cfg.p_spec(),
            };
            let report = run_suite(cfg.seed, &opts)?;
            let pass = report.pass;
            Ok((serde_json::to_value(&report)?, pass))
        }
    }
}

fn natural(cfg: &RunConfig) -> Result<(Value, bool)> {
    if cfg.input.is_empty() {
        return Err(Error::Invalid("--input is required".into()));
    }
    let mut space: Option<DiscreteMeasureSpace> = None;
    let mut family = Vec::new();
    for path in &cfg.input {
        let (s, f) = io::read_space(path)?;
        if let Some(first) = &space {
            if first.weights() != s.weights() {
                return Err(Error::Invalid(format!(
                    "{} has different weights from the first input",
                    path.display()
                )));
            }
        } else {
            space = Some(s);
        }
        family.push(f);
    }
    let s = space.expect("at least one input");
    let grid_spec = ExponentGrid {
        points: cfg.grid_points,
        lo: 1.0,
        hi: cfg.p_max,
    };
    let psi = natural_function(&family, &s, &grid_spec)?;
    let table = tabulate(&psi, &grid_spec);
    export(cfg, ("p", "psi"), &table)?;
    let fam = family_unit_norm_check(&family, &s, &grid_spec, &cfg.p_spec())?;
    Ok((
        json!({
            "table": table.iter().map(|&(p, v)| json!([p, v])).collect::<Vec<_>>(),
            "member_norms": fam.norms,
            "sup_norm": fam.sup_norm,
            "deviation": fam.deviation,
        }),
        true,
    ))
}

fn export(cfg: &RunConfig, header: (&str, &str), rows: &[(f64, f64)]) -> Result<()> {
    match &cfg.table {
        Some(path) => io::write_table(path, header, rows),
        None => Ok(()),
    }
}
