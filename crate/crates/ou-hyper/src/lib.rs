//! Numerical verification toolkit for smoothing inequalities of the
//! Ornstein-Uhlenbeck semigroup on Gaussian space.
//!
//! The crate evaluates both sides of hypercontractivity, its exponential and
//! reverse variants, the logarithmic Sobolev inequality, and the generalized
//! u/phi comparison that unifies them, returning quantitative verdicts whose
//! tolerances are derived from quadrature and inversion error estimates.
//!
//! Modules, bottom up:
//!
//! - [`quadrature`]: tensor Gauss-Hermite rules for the standard Gaussian
//!   measure (probabilists' weight), with order-doubling error control.
//! - [`functions`]: the test-function corpus f, generator functions c, and
//!   grid checkers for the structural conditions (C) and (C').
//! - [`ou`]: the semigroup Q_t and L^p norms (including p < 1, p < 0, and
//!   the p -> 0 geometric-mean endpoint).
//! - [`uv`]: u(t,x) = int_0^x c(y)^{e^{2t}} dy, its inverse phi, and the
//!   companions G, H, G^{-1}.
//! - [`inequalities`]: verdict evaluators for each inequality.
//! - [`mc`]: Brownian-martingale Monte Carlo and the identity-in-law check.
//! - [`scan`]: parameter sweeps and counterexample search.
//! - [`report`], [`config`], [`cli`]: reproducible reports and the CLI.

// Guards written as `!(x >= lo)` are deliberate: unlike `x < lo` they also
// reject NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod functions;
pub mod inequalities;
pub mod mc;
pub mod ou;
pub mod quadrature;
pub mod report;
pub mod scan;
pub mod uv;

pub use error::{OuError, Result};
