//! Monte Carlo realization of the Brownian martingale M_t(f) = E[f(W_1)|F_t]
//! and statistical checks against the semigroup.
//!
//! By the Markov property, M_t = E[f(W_{1-t} + x)] evaluated at x = W_t, so
//! a sample of M_t needs one Gaussian draw for W_t plus a quadrature for the
//! inner conditional expectation (no nested Monte Carlo: the inner variance
//! is removed, which keeps 4-standard-error bands tight at 1e5 paths).
//!
//! With tau = e^{-2t}, the pair (Q_t f under the Gaussian measure) and
//! (M_tau under the Wiener measure) agree in law, which is what
//! `check_identity_in_law` tests moment by moment.
//!
//! Every path draws from its own counter-derived substream of a seeded
//! ChaCha generator, so results are bit-identical for a fixed seed
//! regardless of how the paths are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{OuError, Result};
use crate::functions::{check_condition_c, GeneratorC, GridSpec, TestFunction};
use crate::ou::{default_rule, values_on, SemigroupEval};
use crate::quadrature::{integrate_fn, QuadRule, MAX_DIM};
use crate::uv::UPhi;

/// Minimum ensemble size for the statistical comparisons.
pub const MIN_STAT_PATHS: usize = 1000;

/// Confidence band half-width in standard errors.
pub const SE_BAND: f64 = 4.0;

/// Ensemble description: path count, seed, dimension, and the rule used for
/// inner conditional expectations.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub n_paths: usize,
    pub seed: u64,
    pub dim: usize,
    pub inner_rule: QuadRule,
}

impl EnsembleSpec {
    /// Spec with the per-dimension default inner rule.
    pub fn new(n_paths: usize, seed: u64, dim: usize) -> Result<Self> {
        Ok(EnsembleSpec {
            n_paths,
            seed,
            dim,
            inner_rule: default_rule(dim)?,
        })
    }

    pub fn with_inner_rule(mut self, rule: QuadRule) -> Result<Self> {
        if rule.dim() != self.dim {
            return Err(OuError::InvalidParam(format!(
                "inner rule dimension {} does not match ensemble dimension {}",
                rule.dim(),
                self.dim
            )));
        }
        self.inner_rule = rule;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(OuError::InvalidParam("n_paths must be positive".into()));
        }
        if self.inner_rule.dim() != self.dim {
            return Err(OuError::InvalidParam(format!(
                "inner rule dimension {} does not match ensemble dimension {}",
                self.inner_rule.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    fn validate_statistical(&self) -> Result<()> {
        self.validate()?;
        if self.n_paths < MIN_STAT_PATHS {
            return Err(OuError::InvalidParam(format!(
                "statistical checks need at least {MIN_STAT_PATHS} paths, got {}",
                self.n_paths
            )));
        }
        Ok(())
    }
}

/// Samples of M_t(f) for one ensemble.
#[derive(Debug, Clone)]
pub struct MartingaleSample {
    pub t: f64,
    pub values: Vec<f64>,
    pub spec: EnsembleSpec,
}

impl MartingaleSample {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
            / (self.values.len() - 1).max(1) as f64
    }
}

/// Mean and standard error of a sample.
fn mean_se(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let m = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

/// One path: W_t = sqrt(t) * Z from the path's own substream, then the inner
/// conditional expectation over the remaining time 1 - t by quadrature.
fn simulate_one(
    f: &TestFunction,
    t: f64,
    spec: &EnsembleSpec,
    path: usize,
) -> Result<f64> {
    let dim = spec.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(path as u64);
    let mut w = [0.0f64; MAX_DIM];
    let sqrt_t = t.sqrt();
    for wk in w.iter_mut().take(dim) {
        let z: f64 = rng.sample(StandardNormal);
        *wk = sqrt_t * z;
    }
    if t == 1.0 {
        let v = f.eval(&w[..dim]);
        if !v.is_finite() {
            return Err(OuError::NonFinite(format!(
                "f non-finite at sampled endpoint {:?}",
                &w[..dim]
            )));
        }
        return Ok(v);
    }
    let sigma = (1.0 - t).sqrt();
    let mut z = [0.0f64; MAX_DIM];
    integrate_fn(&spec.inner_rule, |y| {
        for k in 0..dim {
            z[k] = w[k] + sigma * y[k];
        }
        f.eval(&z[..dim])
    })
}

/// Draws an ensemble of M_t(f) samples, t in (0, 1]. At t = 1 the sample is
/// f(W_1) exactly.
pub fn simulate_m(f: &TestFunction, t: f64, spec: &EnsembleSpec) -> Result<MartingaleSample> {
    spec.validate()?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(OuError::InvalidParam(format!(
            "martingale time must lie in (0, 1], got {t}"
        )));
    }
    if f.dim() != spec.dim {
        return Err(OuError::InvalidParam(format!(
            "f has dimension {}, ensemble has {}",
            f.dim(),
            spec.dim
        )));
    }
    let values: Result<Vec<f64>> = (0..spec.n_paths)
        .into_par_iter()
        .map(|i| simulate_one(f, t, spec, i))
        .collect();
    Ok(MartingaleSample {
        t,
        values: values?,
        spec: spec.clone(),
    })
}

/// One moment's comparison between the quadrature and Monte Carlo sides.
#[derive(Debug, Clone, Serialize)]
pub struct MomentComparison {
    pub order: usize,
    pub quadrature: f64,
    pub monte_carlo: f64,
    pub std_error: f64,
    pub within_bands: bool,
}

/// Moment-by-moment comparison of Q_t f under the Gaussian measure with
/// M_{e^{-2t}}(f) under the Wiener measure.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityLawReport {
    pub t: f64,
    pub tau: f64,
    pub n_paths: usize,
    pub moments: Vec<MomentComparison>,
    pub passed: bool,
}

/// Tests the identity in law by matching moments 1-3: each must agree within
/// `SE_BAND` standard errors (plus a 1e-12 relative floor for exact cases).
pub fn check_identity_in_law(
    f: &TestFunction,
    t: f64,
    spec: &EnsembleSpec,
    rule: &QuadRule,
) -> Result<IdentityLawReport> {
    spec.validate_statistical()?;
    if !(t >= 0.0) {
        return Err(OuError::InvalidParam(format!(
            "identity-in-law check needs t >= 0, got {t}"
        )));
    }
    if rule.dim() != spec.dim {
        return Err(OuError::InvalidParam(format!(
            "outer rule dimension {} does not match ensemble dimension {}",
            rule.dim(),
            spec.dim
        )));
    }
    let tau = (-2.0 * t).exp();
    let sample = simulate_m(f, tau, spec)?;
    let qv = if t == 0.0 {
        values_on(rule, f)?
    } else {
        SemigroupEval::with_rules(t, spec.inner_rule.clone(), rule.clone())?.q_values(f)?
    };
    let mut moments = Vec::with_capacity(3);
    let mut passed = true;
    for order in 1..=3usize {
        let quadrature: f64 = (0..rule.count())
            .map(|i| rule.weight(i) * qv[i].powi(order as i32))
            .sum();
        let powered: Vec<f64> = sample.values.iter().map(|v| v.powi(order as i32)).collect();
        let (monte_carlo, std_error) = mean_se(&powered);
        let tol = SE_BAND * std_error + 1e-12 * quadrature.abs().max(1.0);
        let within_bands = (quadrature - monte_carlo).abs() <= tol;
        passed &= within_bands;
        moments.push(MomentComparison {
            order,
            quadrature,
            monte_carlo,
            std_error,
            within_bands,
        });
    }
    Ok(IdentityLawReport {
        t,
        tau,
        n_paths: spec.n_paths,
        moments,
        passed,
    })
}

/// One Monte Carlo point of the generalized smoothing curve in the
/// martingale parameterization (exponent 1/t).
#[derive(Debug, Clone, Serialize)]
pub struct McCurvePoint {
    pub t: f64,
    pub value: f64,
    /// phi of (mean - 4 SE) of the u-samples.
    pub lower: f64,
    /// phi of (mean + 4 SE) of the u-samples.
    pub upper: f64,
}

/// Monte Carlo smoothing curve with its quadrature endpoint reference.
#[derive(Debug, Clone, Serialize)]
pub struct McCurveReport {
    pub points: Vec<McCurvePoint>,
    /// Quadrature value of the t = 1 endpoint phi(0-time integral of u(f)),
    /// which the whole curve must stay below.
    pub endpoint_reference: f64,
    pub chain_holds: bool,
}

/// Monte Carlo check of the martingale form of the generalized comparison:
/// with u parameterized by exponent 1/t, the curve
/// t -> phi(t, E[u(t, M_t(f))]) is bounded by its t = 1 endpoint for all
/// t in (0, 1]. Bands are the u-sample mean +/- 4 SE mapped through phi.
pub fn mc_genhc(
    c: &GeneratorC,
    f: &TestFunction,
    t_grid: &[f64],
    spec: &EnsembleSpec,
) -> Result<McCurveReport> {
    spec.validate_statistical()?;
    if t_grid.is_empty() {
        return Err(OuError::InvalidParam("t grid must be non-empty".into()));
    }
    for &t in t_grid {
        if !(t > 0.0 && t <= 1.0) {
            return Err(OuError::InvalidParam(format!(
                "martingale grid times must lie in (0, 1], got {t}"
            )));
        }
    }
    if !f.positivity() {
        return Err(OuError::InvalidParam(format!(
            "the generalized comparison requires nonnegative f, `{}` is not flagged positive",
            f.label()
        )));
    }
    let rep = check_condition_c(c, &GridSpec::default())?;
    if !rep.passed {
        return Err(OuError::InvalidParam(format!(
            "generator {} fails condition (C): {}",
            c.label(),
            rep.summary()
        )));
    }

    // Quadrature reference for the t = 1 endpoint: E[u(1, f(W_1))] equals
    // the Gaussian integral of u(exponent 1) of f.
    let outer = default_rule(spec.dim)?;
    let u1 = UPhi::with_exponent(c, 1.0)?;
    let fv = values_on(&outer, f)?;
    let mut ref_int = 0.0;
    for (i, &v) in fv.iter().enumerate() {
        ref_int += outer.weight(i) * u1.eval_u(v)?.0;
    }
    let (endpoint_reference, ref_err) = u1.eval_phi(ref_int)?;

    let mut points = Vec::with_capacity(t_grid.len());
    let mut chain_holds = true;
    for &t in t_grid {
        let up = UPhi::with_exponent(c, 1.0 / t)?;
        let sample = simulate_m(f, t, spec)?;
        let u_samples: Result<Vec<f64>> = sample
            .values
            .par_iter()
            .map(|&v| up.eval_u(v).map(|(u, _)| u))
            .collect();
        let (m, se) = mean_se(&u_samples?);
        let (value, _) = up.eval_phi(m)?;
        let (lower, _) = up.eval_phi((m - SE_BAND * se).max(0.0))?;
        let (upper, _) = up.eval_phi(m + SE_BAND * se)?;
        chain_holds &=
            lower <= endpoint_reference + ref_err + 1e-9 * endpoint_reference.abs().max(1.0);
        points.push(McCurvePoint {
            t,
            value,
            lower,
            upper,
        });
    }
    Ok(McCurveReport {
        points,
        endpoint_reference,
        chain_holds,
    })
}
