//! Test-function corpus, generator functions c, and the structural condition
//! checkers for c.
//!
//! Scalar families extend to R^d along the diagonal: a family profile g is
//! evaluated as f(x) = g(s) with s = (x_1 + ... + x_d)/sqrt(d). Under the
//! standard Gaussian measure s is again standard normal, so every
//! one-dimensional closed form (norms, semigroup action, extremal equalities)
//! transfers verbatim to d = 2, 3.
//!
//! Generators are stored through log c and (log c)' rather than c itself:
//! steep families (c = x^{a} e^{x^b}) overflow f64 on the condition grid,
//! while log c, the sign of c' = c * (log c)', and the ratio
//! c/c' = 1/(log c)' stay finite everywhere the checkers probe.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{OuError, Result};

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Eval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type Grad = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Step used by the finite-difference gradient fallback.
pub const FD_STEP: f64 = 1e-5;

// ─── test functions ───

/// A concrete f: R^d -> R with optional analytic gradient and declared
/// positivity/bound flags (declared by the constructor, never inferred).
#[derive(Clone)]
pub struct TestFunction {
    dim: usize,
    label: String,
    positivity: bool,
    lower_bound: Option<f64>,
    upper_bound: Option<f64>,
    eval: Eval,
    grad: Option<Grad>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("positivity", &self.positivity)
            .field("lower_bound", &self.lower_bound)
            .field("upper_bound", &self.upper_bound)
            .finish()
    }
}

impl TestFunction {
    /// Wraps an arbitrary closure; gradient and bounds can be attached with
    /// the builder methods.
    pub fn custom(
        dim: usize,
        label: impl Into<String>,
        positivity: bool,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TestFunction {
            dim,
            label: label.into(),
            positivity,
            lower_bound: None,
            upper_bound: None,
            eval: Arc::new(eval),
            grad: None,
        }
    }

    pub fn with_gradient(
        mut self,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_bounds(mut self, lower: Option<f64>, upper: Option<f64>) -> Self {
        self.lower_bound = lower;
        self.upper_bound = upper;
        self
    }

    /// Builds f(x) = g(s), s = sum(x)/sqrt(d), from a scalar profile and its
    /// derivative.
    fn scalar_profile(
        dim: usize,
        label: String,
        positivity: bool,
        lower: Option<f64>,
        upper: Option<f64>,
        g: Scalar,
        dg: Option<Scalar>,
    ) -> Self {
        let inv = 1.0 / (dim as f64).sqrt();
        let ge = Arc::clone(&g);
        let eval: Eval = Arc::new(move |x: &[f64]| ge(x.iter().sum::<f64>() * inv));
        let grad: Option<Grad> = dg.map(|dg| {
            let g: Grad = Arc::new(move |x: &[f64]| {
                let s = x.iter().sum::<f64>() * inv;
                vec![dg(s) * inv; dim]
            });
            g
        });
        TestFunction {
            dim,
            label,
            positivity,
            lower_bound: lower,
            upper_bound: upper,
            eval,
            grad,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Whether the function is declared (essentially) positive.
    pub fn positivity(&self) -> bool {
        self.positivity
    }

    pub fn lower_bound(&self) -> Option<f64> {
        self.lower_bound
    }

    pub fn upper_bound(&self) -> Option<f64> {
        self.upper_bound
    }

    /// Whether the function is declared bounded away from zero.
    pub fn bounded_away_from_zero(&self) -> bool {
        matches!(self.lower_bound, Some(l) if l > 0.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    /// Analytic gradient when the family admits one, otherwise central
    /// finite differences with step `FD_STEP`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        if let Some(g) = &self.grad {
            return g(x);
        }
        let mut out = vec![0.0; self.dim];
        let mut xp = x.to_vec();
        for i in 0..self.dim {
            let xi = x[i];
            xp[i] = xi + FD_STEP;
            let up = (self.eval)(&xp);
            xp[i] = xi - FD_STEP;
            let dn = (self.eval)(&xp);
            xp[i] = xi;
            out[i] = (up - dn) / (2.0 * FD_STEP);
        }
        out
    }

    /// Squared Euclidean norm of the gradient at x.
    pub fn grad_norm_sq(&self, x: &[f64]) -> f64 {
        self.gradient(x).iter().map(|g| g * g).sum()
    }
}

// ─── parameter maps ───

fn param_map(params: &[(String, f64)]) -> BTreeMap<String, f64> {
    params
        .iter()
        .map(|(k, v)| (k.clone(), *v))
        .collect()
}

fn take(map: &mut BTreeMap<String, f64>, key: &str, family: &str) -> Result<f64> {
    map.remove(key)
        .ok_or_else(|| OuError::InvalidParam(format!("{family}: missing parameter `{key}`")))
}

fn take_or(map: &mut BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    map.remove(key).unwrap_or(default)
}

fn reject_leftovers(map: &BTreeMap<String, f64>, family: &str) -> Result<()> {
    if let Some(key) = map.keys().next() {
        return Err(OuError::InvalidParam(format!(
            "{family}: unknown parameter `{key}`"
        )));
    }
    Ok(())
}

fn check_dim(dim: usize) -> Result<()> {
    if !(1..=3).contains(&dim) {
        return Err(OuError::InvalidParam(format!("dim {dim} outside [1, 3]")));
    }
    Ok(())
}

// ─── builtin test-function corpus ───

/// Builds a corpus function by name. Families: `exp_linear(lambda)`,
/// `constant(kappa)`, `shifted_gauss_bump(a, sigma, kappa)`,
/// `poly_plus_const(c0.., kappa)`, `logistic(a, b)`.
///
/// The logistic family is offset by one, f = 1 + 1/(1 + e^{-(a s + b)}), so
/// its range sits inside [1, 2]: bounded, C^1, and bounded away from zero.
pub fn builtin_f(name: &str, params: &[(String, f64)], dim: usize) -> Result<TestFunction> {
    check_dim(dim)?;
    let mut map = param_map(params);
    let f = match name {
        "exp_linear" => {
            let lambda = take(&mut map, "lambda", name)?;
            reject_leftovers(&map, name)?;
            TestFunction::scalar_profile(
                dim,
                format!("exp_linear(lambda={lambda})"),
                true,
                Some(0.0),
                None,
                Arc::new(move |s| (lambda * s).exp()),
                Some(Arc::new(move |s| lambda * (lambda * s).exp())),
            )
        }
        "constant" => {
            let kappa = take(&mut map, "kappa", name)?;
            reject_leftovers(&map, name)?;
            TestFunction::scalar_profile(
                dim,
                format!("constant(kappa={kappa})"),
                kappa > 0.0,
                Some(kappa),
                Some(kappa),
                Arc::new(move |_| kappa),
                Some(Arc::new(|_| 0.0)),
            )
        }
        "shifted_gauss_bump" => {
            let a = take(&mut map, "a", name)?;
            let sigma = take(&mut map, "sigma", name)?;
            let kappa = take(&mut map, "kappa", name)?;
            reject_leftovers(&map, name)?;
            if sigma <= 0.0 {
                return Err(OuError::InvalidParam(format!(
                    "{name}: sigma must be positive, got {sigma}"
                )));
            }
            if kappa <= 0.0 {
                return Err(OuError::InvalidParam(format!(
                    "{name}: kappa must be positive (the floor keeps f bounded away from 0), got {kappa}"
                )));
            }
            let s2 = sigma * sigma;
            TestFunction::scalar_profile(
                dim,
                format!("shifted_gauss_bump(a={a},sigma={sigma},kappa={kappa})"),
                true,
                Some(kappa),
                Some(kappa + 1.0),
                Arc::new(move |s| kappa + (-(s - a) * (s - a) / (2.0 * s2)).exp()),
                Some(Arc::new(move |s| {
                    -((s - a) / s2) * (-(s - a) * (s - a) / (2.0 * s2)).exp()
                })),
            )
        }
        "poly_plus_const" => {
            let kappa = take(&mut map, "kappa", name)?;
            let mut coeffs = Vec::new();
            let mut j = 0;
            while let Some(v) = map.remove(&format!("c{j}")) {
                coeffs.push(v);
                j += 1;
            }
            reject_leftovers(&map, name)?;
            if coeffs.is_empty() {
                return Err(OuError::InvalidParam(format!(
                    "{name}: needs coefficients c0, c1, ... (contiguous from c0)"
                )));
            }
            // A decidable sufficient condition for positivity: only even
            // powers, all nonnegative, positive constant part.
            let even_nonneg = coeffs
                .iter()
                .enumerate()
                .all(|(j, &c)| if j % 2 == 0 { c >= 0.0 } else { c == 0.0 });
            let floor = kappa + coeffs[0];
            let positive = even_nonneg && floor > 0.0;
            let cs = coeffs.clone();
            let cs2 = coeffs.clone();
            let labelled: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
            TestFunction::scalar_profile(
                dim,
                format!("poly_plus_const(coeffs=[{}],kappa={kappa})", labelled.join(",")),
                positive,
                positive.then_some(floor),
                None,
                Arc::new(move |s| {
                    cs.iter().rev().fold(0.0, |acc, &c| acc * s + c) + kappa
                }),
                Some(Arc::new(move |s| {
                    cs2.iter()
                        .enumerate()
                        .skip(1)
                        .rev()
                        .fold(0.0, |acc, (j, &c)| acc * s + j as f64 * c)
                })),
            )
        }
        "logistic" => {
            let a = take(&mut map, "a", name)?;
            let b = take(&mut map, "b", name)?;
            reject_leftovers(&map, name)?;
            TestFunction::scalar_profile(
                dim,
                format!("logistic(a={a},b={b})"),
                true,
                Some(1.0),
                Some(2.0),
                Arc::new(move |s| 1.0 + 1.0 / (1.0 + (-(a * s + b)).exp())),
                Some(Arc::new(move |s| {
                    let sig = 1.0 / (1.0 + (-(a * s + b)).exp());
                    a * sig * (1.0 - sig)
                })),
            )
        }
        other => {
            return Err(OuError::InvalidParam(format!(
                "unknown test function family `{other}`"
            )))
        }
    };
    Ok(f)
}

// ─── generator functions c ───

/// A positive generator c: (0, inf) -> (0, inf), held as log c and (log c)'.
#[derive(Clone)]
pub struct GeneratorC {
    label: String,
    params: Vec<(String, f64)>,
    log_c: Scalar,
    dlog_c: Scalar,
    closed_form_u: Option<Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>>,
    closed_form_phi: Option<Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>>,
}

impl fmt::Debug for GeneratorC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorC")
            .field("label", &self.label)
            .field("params", &self.params)
            .finish()
    }
}

impl GeneratorC {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn log_c(&self, x: f64) -> f64 {
        (self.log_c)(x)
    }

    /// (log c)'(x) = c'(x)/c(x); finite wherever the families are defined.
    pub fn dlog_c(&self, x: f64) -> f64 {
        (self.dlog_c)(x)
    }

    pub fn c(&self, x: f64) -> f64 {
        (self.log_c)(x).exp()
    }

    pub fn c_prime(&self, x: f64) -> f64 {
        (self.dlog_c)(x) * (self.log_c)(x).exp()
    }

    /// The ratio c/c' = 1/(log c)', the quantity conditions (C)/(C') constrain.
    pub fn ratio(&self, x: f64) -> f64 {
        1.0 / (self.dlog_c)(x)
    }

    /// Closed-form u(t, x) when the family has one (power, exp); test oracle
    /// only, never consulted by the numeric path.
    pub fn closed_form_u(&self, t: f64, x: f64) -> Option<f64> {
        self.closed_form_u.as_ref().map(|u| u(t, x))
    }

    /// Closed-form phi(t, y) when the family has one (power, exp).
    pub fn closed_form_phi(&self, t: f64, y: f64) -> Option<f64> {
        self.closed_form_phi.as_ref().map(|p| p(t, y))
    }

    /// Whether c is defined (positive, finite) on all of R rather than just
    /// (0, inf). True for the exponential families, whose u-construction
    /// therefore accepts negative arguments as a signed integral from 0.
    pub fn extends_below_zero(&self) -> bool {
        self.label == "exp" || self.label.starts_with("exp_decay(")
    }

    pub fn custom(
        label: impl Into<String>,
        log_c: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dlog_c: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        GeneratorC {
            label: label.into(),
            params: Vec::new(),
            log_c: Arc::new(log_c),
            dlog_c: Arc::new(dlog_c),
            closed_form_u: None,
            closed_form_phi: None,
        }
    }
}

/// Builds a generator by name. Families and domains:
///
/// - `power(p)`, p > 1: c = x^{p-1}
/// - `exp`: c = e^x
/// - `exm1(alpha, beta)`, beta > 0: c = x^{alpha+beta-1} e^{x^beta}
/// - `loglog(alpha, beta, a)`, alpha, beta > 0, a >= e^{2+beta/alpha}:
///   c = (x+a)^alpha / log^beta(x+a)
/// - `inv_power(alpha, kappa)`, alpha, kappa > 0: c = 1/(x+kappa)^{alpha+1}
/// - `exp_decay(kappa)`: c = e^{-(x-kappa)}
/// - `inv_shift(kappa)`, kappa > 0: c = 1/(x+kappa)
/// - `inv_shift_pow(s, kappa)`, s, kappa > 0: c = 1/(x+kappa)^s
pub fn builtin_c(name: &str, params: &[(String, f64)]) -> Result<GeneratorC> {
    let mut map = param_map(params);
    let g = match name {
        "power" => {
            let p = take(&mut map, "p", name)?;
            reject_leftovers(&map, name)?;
            if p <= 1.0 {
                return Err(OuError::InvalidParam(format!(
                    "power: p must exceed 1, got {p}"
                )));
            }
            let e = p - 1.0;
            GeneratorC {
                label: format!("power(p={p})"),
                params: vec![("p".into(), p)],
                log_c: Arc::new(move |x: f64| e * x.ln()),
                dlog_c: Arc::new(move |x: f64| e / x),
                closed_form_u: Some(Arc::new(move |t: f64, x: f64| {
                    let q = (2.0 * t).exp() * (p - 1.0) + 1.0;
                    x.powf(q) / q
                })),
                closed_form_phi: Some(Arc::new(move |t: f64, y: f64| {
                    let q = (2.0 * t).exp() * (p - 1.0) + 1.0;
                    (q * y).powf(1.0 / q)
                })),
            }
        }
        "exp" => {
            reject_leftovers(&map, name)?;
            GeneratorC {
                label: "exp".into(),
                params: Vec::new(),
                log_c: Arc::new(|x: f64| x),
                dlog_c: Arc::new(|_| 1.0),
                closed_form_u: Some(Arc::new(|t: f64, x: f64| {
                    let e2t = (2.0 * t).exp();
                    (-2.0 * t).exp() * ((e2t * x).exp() - 1.0)
                })),
                closed_form_phi: Some(Arc::new(|t: f64, y: f64| {
                    let e2t = (2.0 * t).exp();
                    (-2.0 * t).exp() * (e2t * y).ln_1p()
                })),
            }
        }
        "exm1" => {
            let alpha = take(&mut map, "alpha", name)?;
            let beta = take(&mut map, "beta", name)?;
            reject_leftovers(&map, name)?;
            if beta <= 0.0 {
                return Err(OuError::InvalidParam(format!(
                    "exm1: beta must be positive, got {beta}"
                )));
            }
            let rho = alpha + beta - 1.0;
            GeneratorC {
                label: format!("exm1(alpha={alpha},beta={beta})"),
                params: vec![("alpha".into(), alpha), ("beta".into(), beta)],
                log_c: Arc::new(move |x: f64| rho * x.ln() + x.powf(beta)),
                dlog_c: Arc::new(move |x: f64| rho / x + beta * x.powf(beta - 1.0)),
                closed_form_u: None,
                closed_form_phi: None,
            }
        }
        "loglog" => {
            let alpha = take(&mut map, "alpha", name)?;
            let beta = take(&mut map, "beta", name)?;
            let a = take(&mut map, "a", name)?;
            reject_leftovers(&map, name)?;
            if alpha <= 0.0 || beta <= 0.0 {
                return Err(OuError::InvalidParam(format!(
                    "loglog: alpha and beta must be positive, got alpha={alpha}, beta={beta}"
                )));
            }
            let a_min = (2.0 + beta / alpha).exp();
            if a < a_min {
                return Err(OuError::InvalidParam(format!(
                    "loglog: a must be at least e^(2+beta/alpha) = {a_min}, got {a}"
                )));
            }
            GeneratorC {
                label: format!("loglog(alpha={alpha},beta={beta},a={a})"),
                params: vec![("alpha".into(), alpha), ("beta".into(), beta), ("a".into(), a)],
                log_c: Arc::new(move |x: f64| {
                    let l = (x + a).ln();
                    alpha * l - beta * l.ln()
                }),
                dlog_c: Arc::new(move |x: f64| {
                    let l = (x + a).ln();
                    (alpha - beta / l) / (x + a)
                }),
                closed_form_u: None,
                closed_form_phi: None,
            }
        }
        "inv_power" => {
            let alpha = take(&mut map, "alpha", name)?;
            let kappa = take(&mut map, "kappa", name)?;
            reject_leftovers(&map, name)?;
            if alpha <= 0.0 || kappa <= 0.0 {
                return Err(OuError::InvalidParam(format!(
                    "inv_power: alpha and kappa must be positive, got alpha={alpha}, kappa={kappa}"
                )));
            }
            let s = alpha + 1.0;
            GeneratorC {
                label: format!("inv_power(alpha={alpha},kappa={kappa})"),
                params: vec![("alpha".into(), alpha), ("kappa".into(), kappa)],
                log_c: Arc::new(move |x: f64| -s * (x + kappa).ln()),
                dlog_c: Arc::new(move |x: f64| -s / (x + kappa)),
                closed_form_u: None,
                closed_form_phi: None,
            }
        }
        "exp_decay" => {
            let kappa = take_or(&mut map, "kappa", 0.0);
            reject_leftovers(&map, name)?;
            GeneratorC {
                label: format!("exp_decay(kappa={kappa})"),
                params: vec![("kappa".into(), kappa)],
                log_c: Arc::new(move |x: f64| kappa - x),
                dlog_c: Arc::new(|_| -1.0),
                closed_form_u: None,
                closed_form_phi: None,
            }
        }
        "inv_shift" => {
            let kappa = take(&mut map, "kappa", name)?;
            reject_leftovers(&map, name)?;
            if kappa <= 0.0 {
                return Err(OuError::InvalidParam(format!(
                    "inv_shift: kappa must be positive, got {kappa}"
                )));
            }
            GeneratorC {
                label: format!("inv_shift(kappa={kappa})"),
                params: vec![("kappa".into(), kappa)],
                log_c: Arc::new(move |x: f64| -(x + kappa).ln()),
                dlog_c: Arc::new(move |x: f64| -1.0 / (x + kappa)),
                closed_form_u: None,
                closed_form_phi: None,
            }
        }
        "inv_shift_pow" => {
            let s = take(&mut map, "s", name)?;
            let kappa = take(&mut map, "kappa", name)?;
            reject_leftovers(&map, name)?;
            if s <= 0.0 || kappa <= 0.0 {
                return Err(OuError::InvalidParam(format!(
                    "inv_shift_pow: s and kappa must be positive, got s={s}, kappa={kappa}"
                )));
            }
            GeneratorC {
                label: format!("inv_shift_pow(s={s},kappa={kappa})"),
                params: vec![("s".into(), s), ("kappa".into(), kappa)],
                log_c: Arc::new(move |x: f64| -s * (x + kappa).ln()),
                dlog_c: Arc::new(move |x: f64| -s / (x + kappa)),
                closed_form_u: None,
                closed_form_phi: None,
            }
        }
        other => {
            return Err(OuError::InvalidParam(format!(
                "unknown generator family `{other}`"
            )))
        }
    };
    Ok(g)
}

// ─── condition checkers ───

/// Probe grid for the condition checkers.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub log_spaced: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            x_min: 1e-3,
            x_max: 1e3,
            n_points: 200,
            log_spaced: true,
        }
    }
}

impl GridSpec {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.x_min > 0.0 && self.x_min < self.x_max) {
            return Err(OuError::InvalidParam(format!(
                "grid requires 0 < x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if self.n_points < 16 {
            return Err(OuError::InvalidParam(format!(
                "grid needs at least 16 points, got {}",
                self.n_points
            )));
        }
        Ok(())
    }

    pub fn abscissae(&self) -> Vec<f64> {
        let n = self.n_points;
        let mut xs = Vec::with_capacity(n);
        if self.log_spaced {
            let (la, lb) = (self.x_min.ln(), self.x_max.ln());
            for i in 0..n {
                xs.push((la + (lb - la) * i as f64 / (n - 1) as f64).exp());
            }
        } else {
            for i in 0..n {
                xs.push(self.x_min + (self.x_max - self.x_min) * i as f64 / (n - 1) as f64);
            }
        }
        xs
    }
}

/// Which structural condition a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionName {
    C,
    CPrime,
}

impl fmt::Display for ConditionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionName::C => write!(f, "C"),
            ConditionName::CPrime => write!(f, "C_prime"),
        }
    }
}

/// Grid verdict for condition (C) or (C'). A pass means the condition was
/// not falsified on the probe grid; it is not a proof over all of (0, inf).
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub condition_name: ConditionName,
    pub passed: bool,
    pub grid: Vec<f64>,
    /// (x, diagnostic): sign violations carry (log c)'(x), curvature
    /// violations carry the offending second divided difference.
    pub violations: Vec<(f64, f64)>,
    /// Smallest second divided difference of c/c' observed on the grid
    /// (the most concave triple).
    pub min_margin: f64,
}

impl ConditionReport {
    pub fn summary(&self) -> String {
        if self.passed {
            format!(
                "condition ({}) not falsified on grid of {} points (min second difference {:.3e})",
                self.condition_name,
                self.grid.len(),
                self.min_margin
            )
        } else {
            format!(
                "condition ({}) falsified at {} grid point(s), first at x={:.6e}",
                self.condition_name,
                self.violations.len(),
                self.violations[0].0
            )
        }
    }
}

/// Relative tolerance for the curvature sign test.
fn tol_concavity(r: f64) -> f64 {
    1e-9 * r.abs().max(1.0)
}

fn condition_scan(
    c: &GeneratorC,
    grid: &GridSpec,
    name: ConditionName,
) -> Result<ConditionReport> {
    grid.validate()?;
    let xs = grid.abscissae();
    let n = xs.len();
    let mut violations = Vec::new();
    let mut ratios = Vec::with_capacity(n);

    for &x in &xs {
        let dl = c.dlog_c(x);
        if !dl.is_finite() {
            return Err(OuError::NonFinite(format!(
                "(log c)' not finite at grid point x={x}"
            )));
        }
        let sign_ok = match name {
            ConditionName::C => dl > 0.0,
            ConditionName::CPrime => dl < 0.0,
        };
        if !sign_ok {
            violations.push((x, dl));
        }
        // c' = 0 makes the ratio infinite; record it and skip its triples.
        ratios.push(if dl == 0.0 { f64::INFINITY } else { 1.0 / dl });
    }

    if name == ConditionName::CPrime {
        // Condition (C') additionally needs c finite at 0+: probe x_min and
        // x_min/2. A blow-up there is a condition violation, not an error.
        for x in [grid.x_min, grid.x_min / 2.0] {
            let v = c.c(x);
            if !v.is_finite() {
                violations.push((x, v));
            }
        }
    }

    let mut min_margin = f64::INFINITY;
    for i in 1..n - 1 {
        let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
        let (r0, r1, r2) = (ratios[i - 1], ratios[i], ratios[i + 1]);
        if !(r0.is_finite() && r1.is_finite() && r2.is_finite()) {
            continue;
        }
        // Chord gap at the middle point: same sign as r'' but without the
        // 1/h^2 normalization, whose rounding amplification on tightly
        // clustered log-grid points would swamp the tolerance.
        let d2 = (r0 * (x2 - x1) + r2 * (x1 - x0)) / (x2 - x0) - r1;
        min_margin = min_margin.min(d2);
        let tol = tol_concavity(r1);
        let violated = match name {
            ConditionName::C => d2 > tol,       // concavity: d2 must stay <= tol
            ConditionName::CPrime => d2 < -tol, // convexity: d2 must stay >= -tol
        };
        if violated {
            violations.push((x1, d2));
        }
    }
    violations.sort_by(|a, b| a.0.total_cmp(&b.0));

    Ok(ConditionReport {
        condition_name: name,
        passed: violations.is_empty(),
        grid: xs,
        violations,
        min_margin,
    })
}

/// Checks condition (C): c' > 0 and c/c' concave, on the probe grid.
pub fn check_condition_c(c: &GeneratorC, grid: &GridSpec) -> Result<ConditionReport> {
    condition_scan(c, grid, ConditionName::C)
}

/// Checks condition (C'): c' < 0, c/c' convex, and c finite at 0+.
pub fn check_condition_cprime(c: &GeneratorC, grid: &GridSpec) -> Result<ConditionReport> {
    condition_scan(c, grid, ConditionName::CPrime)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(entries: &[(&str, f64)]) -> Vec<(String, f64)> {
        entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn exp_linear_basics() {
        let f = builtin_f("exp_linear", &p(&[("lambda", 0.8)]), 1).unwrap();
        assert!(f.positivity());
        assert_eq!(f.upper_bound(), None);
        let x = [0.37];
        assert!((f.eval(&x) - (0.8f64 * 0.37).exp()).abs() < 1e-15);
        let g = f.gradient(&x);
        assert!((g[0] - 0.8 * f.eval(&x)).abs() < 1e-12);
    }

    #[test]
    fn constant_bounds() {
        let f = builtin_f("constant", &p(&[("kappa", 2.5)]), 2).unwrap();
        assert_eq!(f.eval(&[1.0, -3.0]), 2.5);
        assert_eq!(f.lower_bound(), Some(2.5));
        assert_eq!(f.upper_bound(), Some(2.5));
    }

    #[test]
    fn poly_plus_const_example() {
        let f = builtin_f(
            "poly_plus_const",
            &p(&[("c0", 0.0), ("c1", 0.0), ("c2", 1.0), ("kappa", 1.0)]),
            1,
        )
        .unwrap();
        assert_eq!(f.lower_bound(), Some(1.0));
        assert!((f.eval(&[2.0]) - 5.0).abs() < 1e-14);
        assert!((f.gradient(&[2.0])[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn logistic_sits_in_unit_shifted_band() {
        let f = builtin_f("logistic", &p(&[("a", 1.0), ("b", 1.0)]), 1).unwrap();
        assert_eq!(f.lower_bound(), Some(1.0));
        assert_eq!(f.upper_bound(), Some(2.0));
        for &x in &[-8.0, -1.0, 0.0, 2.0, 9.0] {
            let v = f.eval(&[x]);
            assert!(v > 1.0 && v < 2.0);
        }
    }

    #[test]
    fn diagonal_profile_matches_1d_in_distribution_parameters() {
        // f_d(x) = g(sum x_i / sqrt(d)) evaluated at a point where the
        // projection is explicit.
        let f1 = builtin_f("exp_linear", &p(&[("lambda", 0.5)]), 1).unwrap();
        let f3 = builtin_f("exp_linear", &p(&[("lambda", 0.5)]), 3).unwrap();
        let s = 3.0f64.sqrt();
        assert!((f3.eval(&[1.0, 1.0, 1.0]) - f1.eval(&[s])).abs() < 1e-14);
    }

    #[test]
    fn unknown_names_and_params_rejected() {
        assert!(builtin_f("nope", &[], 1).is_err());
        assert!(builtin_f("exp_linear", &p(&[("lambda", 1.0), ("x", 2.0)]), 1).is_err());
        assert!(builtin_f("exp_linear", &[], 1).is_err());
        assert!(builtin_c("nope", &[]).is_err());
        assert!(builtin_c("power", &p(&[("p", 2.0), ("q", 1.0)])).is_err());
        assert!(builtin_c("power", &p(&[("p", 1.0)])).is_err());
        assert!(builtin_f("shifted_gauss_bump", &p(&[("a", 0.0), ("sigma", 1.0), ("kappa", 0.0)]), 1).is_err());
    }

    #[test]
    fn loglog_domain_guard() {
        let a_min = (2.0f64 + 1.0).exp();
        assert!(builtin_c("loglog", &p(&[("alpha", 1.0), ("beta", 1.0), ("a", a_min - 0.01)])).is_err());
        assert!(builtin_c("loglog", &p(&[("alpha", 1.0), ("beta", 1.0), ("a", a_min)])).is_ok());
    }

    #[test]
    fn generator_ratio_reference_forms() {
        // power(2): c/c' = x; exp: c/c' = 1; exm1: x/(rho + beta x^beta);
        // inv_power: -(x+kappa)/(alpha+1); exp_decay: -1.
        let pw = builtin_c("power", &p(&[("p", 2.0)])).unwrap();
        assert!((pw.ratio(0.7) - 0.7).abs() < 1e-15);
        let ex = builtin_c("exp", &[]).unwrap();
        assert!((ex.ratio(3.3) - 1.0).abs() < 1e-15);
        let em = builtin_c("exm1", &p(&[("alpha", 1.0), ("beta", 1.0)])).unwrap();
        let x = 1.3;
        assert!((em.ratio(x) - x / (1.0 + x)).abs() < 1e-14);
        let ip = builtin_c("inv_power", &p(&[("alpha", 0.5), ("kappa", 1.0)])).unwrap();
        assert!((ip.ratio(x) + (x + 1.0) / 1.5).abs() < 1e-14);
        let ed = builtin_c("exp_decay", &p(&[("kappa", 1.0)])).unwrap();
        assert!((ed.ratio(x) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn c_prime_matches_finite_differences() {
        // 64 log-spaced probes on [1e-2, 1e2] for every documented family.
        let gens = vec![
            builtin_c("power", &p(&[("p", 1.5)])).unwrap(),
            builtin_c("power", &p(&[("p", 3.0)])).unwrap(),
            builtin_c("exp", &[]).unwrap(),
            builtin_c("exm1", &p(&[("alpha", 1.0), ("beta", 1.0)])).unwrap(),
            builtin_c("exm1", &p(&[("alpha", 0.5), ("beta", 0.5)])).unwrap(),
            builtin_c("loglog", &p(&[("alpha", 1.0), ("beta", 1.0), ("a", 3.0f64.exp())])).unwrap(),
            builtin_c("inv_power", &p(&[("alpha", 0.5), ("kappa", 1.0)])).unwrap(),
            builtin_c("exp_decay", &p(&[("kappa", 1.0)])).unwrap(),
            builtin_c("inv_shift", &p(&[("kappa", 1.0)])).unwrap(),
            builtin_c("inv_shift_pow", &p(&[("s", 0.5), ("kappa", 1.0)])).unwrap(),
        ];
        let grid = GridSpec {
            x_min: 1e-2,
            x_max: 1e2,
            n_points: 64,
            log_spaced: true,
        };
        for g in &gens {
            for &x in &grid.abscissae() {
                let h = 1e-6 * x;
                let fd = (g.c(x + h) - g.c(x - h)) / (2.0 * h);
                let cp = g.c_prime(x);
                let denom = cp.abs().max(1e-300);
                assert!(
                    ((fd - cp) / denom).abs() < 1e-6,
                    "{}: c' mismatch at x={x}: fd={fd}, analytic={cp}",
                    g.label()
                );
            }
        }
    }

    #[test]
    fn condition_c_documented_families() {
        let grid = GridSpec::default();
        for &pp in &[1.1, 1.5, 2.0, 3.0, 10.0] {
            let c = builtin_c("power", &p(&[("p", pp)])).unwrap();
            let rep = check_condition_c(&c, &grid).unwrap();
            assert!(rep.passed, "power({pp}) should pass (C): {:?}", rep.violations.first());
        }
        let c = builtin_c("exp", &[]).unwrap();
        assert!(check_condition_c(&c, &grid).unwrap().passed);

        for &(a, b) in &[(1.0, 1.0), (0.5, 0.5), (2.0, 0.3), (0.0, 1.0), (1.5, 0.25)] {
            let c = builtin_c("exm1", &p(&[("alpha", a), ("beta", b)])).unwrap();
            let rep = check_condition_c(&c, &grid).unwrap();
            assert!(rep.passed, "exm1({a},{b}) should pass (C): {:?}", rep.violations.first());
        }

        let c = builtin_c("loglog", &p(&[("alpha", 1.0), ("beta", 1.0), ("a", 3.0f64.exp())])).unwrap();
        assert!(check_condition_c(&c, &grid).unwrap().passed);
    }

    #[test]
    fn condition_c_rejects_beta_above_one() {
        // (c/c')'' for c = x^2 e^{x^2} changes sign at x = sqrt(3): the grid
        // scan must flag curvature violations on the convex tail.
        let c = builtin_c("exm1", &p(&[("alpha", 1.0), ("beta", 2.0)])).unwrap();
        let rep = check_condition_c(&c, &GridSpec::default()).unwrap();
        assert!(!rep.passed);
        assert!(!rep.violations.is_empty());
        for &(x, d2) in &rep.violations {
            assert!(x > 3.0f64.sqrt() * 0.9, "violation at x={x}, d2={d2}");
        }
        assert!(rep.summary().contains("falsified"));
    }

    #[test]
    fn condition_cprime_documented_families() {
        let grid = GridSpec::default();
        let ip = builtin_c("inv_power", &p(&[("alpha", 0.5), ("kappa", 1.0)])).unwrap();
        assert!(check_condition_cprime(&ip, &grid).unwrap().passed);
        let ed = builtin_c("exp_decay", &p(&[("kappa", 1.0)])).unwrap();
        assert!(check_condition_cprime(&ed, &grid).unwrap().passed);
        let is1 = builtin_c("inv_shift", &p(&[("kappa", 1.0)])).unwrap();
        assert!(check_condition_cprime(&is1, &grid).unwrap().passed);
        let isp = builtin_c("inv_shift_pow", &p(&[("s", 0.3), ("kappa", 0.5)])).unwrap();
        assert!(check_condition_cprime(&isp, &grid).unwrap().passed);

        // increasing families fail (C') on the sign test
        let pw = builtin_c("power", &p(&[("p", 2.0)])).unwrap();
        let rep = check_condition_cprime(&pw, &grid).unwrap();
        assert!(!rep.passed);
        let ex = builtin_c("exp", &[]).unwrap();
        assert!(!check_condition_cprime(&ex, &grid).unwrap().passed);
        // and the decreasing families fail (C)
        assert!(!check_condition_c(&ip, &grid).unwrap().passed);
        assert!(!check_condition_c(&ed, &grid).unwrap().passed);
    }

    #[test]
    fn grid_validation() {
        let c = builtin_c("exp", &[]).unwrap();
        let bad = GridSpec { x_min: 0.0, x_max: 1.0, n_points: 20, log_spaced: false };
        assert!(check_condition_c(&c, &bad).is_err());
        let few = GridSpec { x_min: 0.1, x_max: 1.0, n_points: 4, log_spaced: false };
        assert!(check_condition_c(&c, &few).is_err());
    }

    #[test]
    fn closed_forms_present_only_for_power_and_exp() {
        let pw = builtin_c("power", &p(&[("p", 2.0)])).unwrap();
        assert!((pw.closed_form_u(0.0, 2.0).unwrap() - 2.0).abs() < 1e-14);
        let ex = builtin_c("exp", &[]).unwrap();
        assert!((ex.closed_form_u(0.0, 1.0).unwrap() - (1.0f64.exp() - 1.0)).abs() < 1e-14);
        assert!((ex.closed_form_phi(0.0, 1.0f64.exp() - 1.0).unwrap() - 1.0).abs() < 1e-12);
        let em = builtin_c("exm1", &p(&[("alpha", 1.0), ("beta", 1.0)])).unwrap();
        assert!(em.closed_form_u(0.1, 1.0).is_none());
    }
}
