//! Numerical toolkit for Grand Lebesgue spaces on finite measure spaces.
//!
//! A Grand Lebesgue space `Gψ` is normed by
//!
//! ```text
//! ||f||Gψ = sup_{p ∈ (a,b)} |f|_p / ψ(p)
//! ```
//!
//! where `ψ` is a generating function normalized so that `inf ψ = 1`.
//! The crate computes these norms together with the machinery around their
//! associate and dual spaces:
//!
//! - [`measure`]: finite weighted atom spaces, Lebesgue-Riesz norms.
//! - [`psi`]: generating functions, adjacent functions, natural functions.
//! - [`glnorm`]: the GLS norm as a one-dimensional maximization over `p`.
//! - [`convex`]: Young-Fenchel transforms and the exponent `V[ψ]`.
//! - [`orlicz`]: the exponential Young-Orlicz function `N[ψ]`, conjugates,
//!   Luxemburg norms and the Orlicz-Hölder inequality.
//! - [`duality`]: associate bounds, unit-ball optimization oracles and
//!   set-function norms.
//! - [`bphi`]: moment-generating-function norms of `B(φ)` spaces.
//! - [`cli`]: the `gls` command-line front end.
//!
//! Every supremum or infimum over an unbounded exponent range is computed on
//! a capped interval; results carry a `hit_cap` flag whenever the extremum
//! touches the cap.

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bphi;
pub mod cli;
pub mod convex;
pub mod duality;
mod error;
pub mod glnorm;
pub mod io;
pub mod measure;
pub mod orlicz;
pub mod psi;
pub mod search;
pub mod verify;

pub use error::{Error, Result};
pub use measure::{DiscreteMeasureSpace, MeasurableFunction};
pub use psi::PsiFunction;
