//! Verdict evaluators for the semigroup smoothing inequalities.
//!
//! Every check computes both sides numerically, estimates its own numeric
//! error by recomputing at half quadrature order, and returns a `Verdict`
//! whose slack is derived from that estimate: the inequalities themselves
//! are exact, so all slack is numerical. Margins are always rhs - lhs; a
//! <=-type claim holds when margin >= -slack, a >=-type claim when
//! margin <= slack.
//!
//! At t = 0 the smoothing claims are identities; those checks short-circuit
//! lhs := rhs so the reported margin is exactly zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{OuError, Result};
use crate::functions::{
    check_condition_c, check_condition_cprime, GeneratorC, GridSpec, TestFunction,
};
use crate::ou::{
    exp_norm_values, log_mean_values, lp_norm_values, values_on, SemigroupEval, DEFAULT_ORDERS,
};
use crate::quadrature::{build_rule, QuadRule, MAX_DIM, MIN_ORDER};
use crate::uv::{GHPair, UPhi};

/// Inequality direction: which way the claim reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Claim is lhs <= rhs.
    Leq,
    /// Claim is lhs >= rhs.
    Geq,
}

/// Quantitative outcome of one inequality check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs - lhs. Nonnegative margins favor <=-type claims.
    pub margin: f64,
    /// Tolerance actually applied when deciding `holds`.
    pub slack: f64,
    pub holds: bool,
    /// Combined quadrature + inversion error estimate; always <= slack.
    pub error_estimate: f64,
    pub direction: Direction,
    /// Echo of the parameters that produced this verdict.
    pub inputs: BTreeMap<String, String>,
}

fn make_verdict(
    name: &str,
    direction: Direction,
    lhs: f64,
    rhs: f64,
    quad_err: f64,
    inv_tol: f64,
    inputs: BTreeMap<String, String>,
) -> Result<Verdict> {
    if !lhs.is_finite() || !rhs.is_finite() {
        return Err(OuError::NonFinite(format!(
            "{name}: sides lhs={lhs}, rhs={rhs} are not finite"
        )));
    }
    let margin = rhs - lhs;
    let error_estimate = quad_err + inv_tol;
    let slack =
        (10.0 * error_estimate).max(1e-9 * lhs.abs().max(rhs.abs()).max(1.0));
    let holds = match direction {
        Direction::Leq => margin >= -slack,
        Direction::Geq => margin <= slack,
    };
    Ok(Verdict {
        name: name.to_string(),
        lhs,
        rhs,
        margin,
        slack,
        holds,
        error_estimate,
        direction,
        inputs,
    })
}

/// The forward exponent q(t) = e^{2t}(p - 1) + 1.
pub fn q_exponent(p: f64, t: f64) -> f64 {
    (2.0 * t).exp() * (p - 1.0) + 1.0
}

/// The reverse exponent e^{2t}(alpha + 1) - 1.
pub fn reverse_q_exponent(alpha: f64, t: f64) -> f64 {
    (2.0 * t).exp() * (alpha + 1.0) - 1.0
}

/// One point of a smoothing curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    pub value: f64,
}

/// Curve t -> phi(t, ||u(t, Q_t f)||_1) with its monotonicity diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct CurveReport {
    pub points: Vec<CurvePoint>,
    /// Largest increase between consecutive points (0 when nonincreasing).
    pub max_upward_jump: f64,
}

/// Evaluation context: quadrature rule plus its half-order companion used
/// for error estimation.
pub struct Evaluator {
    rule: QuadRule,
    half_rule: QuadRule,
}

impl Evaluator {
    /// Context with the per-dimension default order (64/32/16 for d=1/2/3).
    pub fn new(dim: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(OuError::InvalidParam(format!(
                "dim {dim} outside [1, {MAX_DIM}]"
            )));
        }
        Self::with_order(DEFAULT_ORDERS[dim - 1], dim)
    }

    pub fn with_order(order: usize, dim: usize) -> Result<Self> {
        Ok(Evaluator {
            rule: build_rule(order, dim)?,
            half_rule: build_rule((order / 2).max(MIN_ORDER), dim)?,
        })
    }

    pub fn rule(&self) -> &QuadRule {
        &self.rule
    }

    fn base_inputs(&self, f: &TestFunction, t: Option<f64>) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("f".into(), f.label().to_string());
        m.insert("dim".into(), self.rule.dim().to_string());
        m.insert("order".into(), self.rule.order().to_string());
        if let Some(t) = t {
            m.insert("t".into(), format!("{t}"));
        }
        m
    }

    /// Q_t f at every node of `rule` (f itself when t = 0).
    fn q_vals_on(&self, f: &TestFunction, t: f64, rule: &QuadRule) -> Result<Vec<f64>> {
        if t == 0.0 {
            return values_on(rule, f);
        }
        let se = SemigroupEval::with_rules(t, rule.clone(), rule.clone())?;
        se.q_values(f)
    }

    /// ||Q_t f||_q at the given rule order.
    fn qt_norm(&self, f: &TestFunction, t: f64, q: f64, rule: &QuadRule) -> Result<f64> {
        let vals = self.q_vals_on(f, t, rule)?;
        lp_norm_values(&vals, rule, q, f.positivity())
    }

    /// Hypercontractivity: ||Q_t f||_{q(t)} <= ||f||_p with
    /// q(t) = e^{2t}(p - 1) + 1.
    pub fn check_hc(&self, f: &TestFunction, p: f64, t: f64) -> Result<Verdict> {
        self.check_hc_with_scale(f, p, t, 1.0)
    }

    /// As `check_hc` but with the target exponent multiplied by `q_scale`.
    /// Any value other than 1 deliberately tests a false claim; the scan
    /// module uses this to confirm the counterexample search has teeth.
    pub fn check_hc_with_scale(
        &self,
        f: &TestFunction,
        p: f64,
        t: f64,
        q_scale: f64,
    ) -> Result<Verdict> {
        if !(p > 1.0) {
            return Err(OuError::InvalidParam(format!("hc requires p > 1, got {p}")));
        }
        if !(t >= 0.0) {
            return Err(OuError::InvalidParam(format!("hc requires t >= 0, got {t}")));
        }
        if !(q_scale > 0.0) {
            return Err(OuError::InvalidParam(format!(
                "exponent scale must be positive, got {q_scale}"
            )));
        }
        let q = q_scale * q_exponent(p, t);
        let rhs = lp_norm_values(&values_on(&self.rule, f)?, &self.rule, p, f.positivity())?;
        let rhs_h =
            lp_norm_values(&values_on(&self.half_rule, f)?, &self.half_rule, p, f.positivity())?;
        let (lhs, lhs_h) = if t == 0.0 && q_scale == 1.0 {
            (rhs, rhs_h)
        } else {
            (
                self.qt_norm(f, t, q, &self.rule)?,
                self.qt_norm(f, t, q, &self.half_rule)?,
            )
        };
        let quad_err = (lhs - lhs_h).abs() + (rhs - rhs_h).abs();
        let mut inputs = self.base_inputs(f, Some(t));
        inputs.insert("p".into(), format!("{p}"));
        inputs.insert("q".into(), format!("{q}"));
        if q_scale != 1.0 {
            inputs.insert("q_scale".into(), format!("{q_scale}"));
        }
        make_verdict("hc", Direction::Leq, lhs, rhs, quad_err, 0.0, inputs)
    }

    /// Exponential variant: ||exp(Q_t f)||_{e^{2t}} <= ||e^f||_1, with the
    /// lhs evaluated in log space throughout.
    pub fn check_ehc(&self, f: &TestFunction, t: f64) -> Result<Verdict> {
        if !(t >= 0.0) {
            return Err(OuError::InvalidParam(format!("ehc requires t >= 0, got {t}")));
        }
        let e2t = (2.0 * t).exp();
        let one_side = |rule: &QuadRule| -> Result<(f64, f64)> {
            let fv = values_on(rule, f)?;
            let (_, rhs) = exp_norm_values(&fv, rule, 1.0)?;
            let lhs = if t == 0.0 {
                rhs
            } else {
                let qv = self.q_vals_on(f, t, rule)?;
                exp_norm_values(&qv, rule, e2t)?.1
            };
            if !lhs.is_finite() || !rhs.is_finite() {
                return Err(OuError::Range(format!(
                    "ehc sides exceed f64 range for f={} at t={t}",
                    f.label()
                )));
            }
            Ok((lhs, rhs))
        };
        let (lhs, rhs) = one_side(&self.rule)?;
        let (lhs_h, rhs_h) = one_side(&self.half_rule)?;
        let quad_err = (lhs - lhs_h).abs() + (rhs - rhs_h).abs();
        let inputs = self.base_inputs(f, Some(t));
        make_verdict("ehc", Direction::Leq, lhs, rhs, quad_err, 0.0, inputs)
    }

    /// int u(Q_t f) dgamma over the rule, with accumulated integration error.
    fn u_norm(up: &UPhi, vals: &[f64], rule: &QuadRule) -> Result<(f64, f64)> {
        let mut acc = 0.0;
        let mut err = 0.0;
        for (i, &v) in vals.iter().enumerate() {
            let (u, e) = up.eval_u(v)?;
            acc += rule.weight(i) * u;
            err += rule.weight(i) * e;
        }
        if !acc.is_finite() {
            return Err(OuError::Range("u-integral exceeds f64 range".into()));
        }
        Ok((acc, err))
    }

    /// One side phi(t, ||u(t, g)||_1) of the generalized comparison, at a
    /// given rule, with (value, x-unit error) returned.
    fn gen_side(&self, up: &UPhi, f: &TestFunction, t: f64, rule: &QuadRule) -> Result<(f64, f64)> {
        let vals = self.q_vals_on(f, t, rule)?;
        let (ybar, yerr) = Self::u_norm(up, &vals, rule)?;
        let (x, xerr) = up.eval_phi(ybar)?;
        let du = up.du(x);
        let mapped = if du.is_finite() && du > 0.0 { yerr / du } else { 0.0 };
        Ok((x, xerr + mapped))
    }

    fn gen_comparison(
        &self,
        name: &str,
        direction: Direction,
        c: &GeneratorC,
        f: &TestFunction,
        t: f64,
        mut inputs: BTreeMap<String, String>,
    ) -> Result<Verdict> {
        let u0 = UPhi::new(c, 0.0)?;
        let (rhs, rhs_xerr) = self.gen_side(&u0, f, 0.0, &self.rule)?;
        let (rhs_h, _) = self.gen_side(&u0, f, 0.0, &self.half_rule)?;
        let (lhs, lhs_xerr, lhs_h) = if t == 0.0 {
            (rhs, rhs_xerr, rhs_h)
        } else {
            let ut = UPhi::new(c, t)?;
            let (lhs, lhs_xerr) = self.gen_side(&ut, f, t, &self.rule)?;
            let (lhs_h, _) = self.gen_side(&ut, f, t, &self.half_rule)?;
            (lhs, lhs_xerr, lhs_h)
        };
        let quad_err = (lhs - lhs_h).abs() + (rhs - rhs_h).abs();
        inputs.insert("c".into(), c.label().to_string());
        make_verdict(name, direction, lhs, rhs, quad_err, lhs_xerr + rhs_xerr, inputs)
    }

    /// Generalized comparison phi(t, ||u(t, Q_t f)||_1) <= phi(0, ||u(0, f)||_1)
    /// for generators satisfying condition (C). The condition is checked on
    /// the default grid; failures are errors unless overridden.
    pub fn check_genhc(&self, c: &GeneratorC, f: &TestFunction, t: f64) -> Result<Verdict> {
        self.check_genhc_with(c, f, t, false)
    }

    /// As `check_genhc`; `override_condition` turns a failed condition (C)
    /// grid check into a warning recorded in the verdict inputs.
    pub fn check_genhc_with(
        &self,
        c: &GeneratorC,
        f: &TestFunction,
        t: f64,
        override_condition: bool,
    ) -> Result<Verdict> {
        if !(t >= 0.0) {
            return Err(OuError::InvalidParam(format!(
                "genhc requires t >= 0, got {t}"
            )));
        }
        if !f.positivity() {
            return Err(OuError::InvalidParam(format!(
                "genhc requires a nonnegative test function, `{}` is not flagged positive",
                f.label()
            )));
        }
        let mut inputs = self.base_inputs(f, Some(t));
        let rep = check_condition_c(c, &GridSpec::default())?;
        if !rep.passed {
            if !override_condition {
                return Err(OuError::InvalidParam(format!(
                    "generator {} fails condition (C): {}",
                    c.label(),
                    rep.summary()
                )));
            }
            inputs.insert(
                "warning".into(),
                format!("condition (C) overridden: {}", rep.summary()),
            );
        }
        self.gen_comparison("genhc", Direction::Leq, c, f, t, inputs)
    }

    /// The curve t -> phi(t, ||u(t, Q_t f)||_1) over an ascending grid,
    /// with the largest upward jump as a monotonicity diagnostic.
    pub fn curve_genhc(
        &self,
        c: &GeneratorC,
        f: &TestFunction,
        t_grid: &[f64],
    ) -> Result<CurveReport> {
        if t_grid.is_empty() {
            return Err(OuError::InvalidParam("curve needs at least one t".into()));
        }
        for w in t_grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(OuError::InvalidParam(format!(
                    "t grid must be strictly ascending, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if !(t_grid[0] >= 0.0) {
            return Err(OuError::InvalidParam(format!(
                "t grid must be nonnegative, starts at {}",
                t_grid[0]
            )));
        }
        if !f.positivity() {
            return Err(OuError::InvalidParam(format!(
                "curve requires a nonnegative test function, `{}` is not flagged positive",
                f.label()
            )));
        }
        let mut points = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let ut = UPhi::new(c, t)?;
            let (value, _) = self.gen_side(&ut, f, t, &self.rule)?;
            points.push(CurvePoint { t, value });
        }
        let mut max_upward_jump = 0.0f64;
        for w in points.windows(2) {
            max_upward_jump = max_upward_jump.max(w[1].value - w[0].value);
        }
        Ok(CurveReport {
            points,
            max_upward_jump,
        })
    }

    /// Logarithmic Sobolev: int f^2 log|f| <= int |grad f|^2 + ||f||_2^2 log ||f||_2.
    pub fn check_lsi(&self, f: &TestFunction) -> Result<Verdict> {
        let sides = |rule: &QuadRule| -> Result<(f64, f64)> {
            let mut x = [0.0; MAX_DIM];
            let mut entropy = 0.0;
            let mut grad = 0.0;
            let mut sq = 0.0;
            for i in 0..rule.count() {
                rule.node(i, &mut x);
                let pt = &x[..rule.dim()];
                let v = f.eval(pt);
                let g = f.grad_norm_sq(pt);
                if !v.is_finite() || !g.is_finite() {
                    return Err(OuError::NonFinite(format!(
                        "lsi integrand non-finite at {pt:?}"
                    )));
                }
                let w = rule.weight(i);
                // v^2 log|v| extends continuously by 0 at v = 0.
                if v != 0.0 {
                    entropy += w * v * v * v.abs().ln();
                }
                grad += w * g;
                sq += w * v * v;
            }
            if sq <= 0.0 {
                return Err(OuError::NonFinite(
                    "lsi requires a nonzero function".into(),
                ));
            }
            let n2 = sq.sqrt();
            Ok((entropy, grad + sq * n2.ln()))
        };
        let (lhs, rhs) = sides(&self.rule)?;
        let (lhs_h, rhs_h) = sides(&self.half_rule)?;
        let quad_err = (lhs - lhs_h).abs() + (rhs - rhs_h).abs();
        let inputs = self.base_inputs(f, None);
        make_verdict("lsi", Direction::Leq, lhs, rhs, quad_err, 0.0, inputs)
    }

    /// Generalized log-Sobolev:
    /// int H(f) <= (1/2) int c'(f) |grad f|^2 + H(G^{-1}(||G(f)||_1)),
    /// for f bounded away from zero.
    pub fn check_glsi(&self, c: &GeneratorC, f: &TestFunction) -> Result<Verdict> {
        if !f.bounded_away_from_zero() {
            return Err(OuError::InvalidParam(format!(
                "glsi requires f bounded away from zero, `{}` has no positive lower bound",
                f.label()
            )));
        }
        let gh = GHPair::new(c)?;
        let sides = |rule: &QuadRule| -> Result<(f64, f64, f64, f64)> {
            let mut x = [0.0; MAX_DIM];
            let mut h_int = 0.0;
            let mut h_err = 0.0;
            let mut fisher = 0.0;
            let mut g_int = 0.0;
            for i in 0..rule.count() {
                rule.node(i, &mut x);
                let pt = &x[..rule.dim()];
                let v = f.eval(pt);
                let gsq = f.grad_norm_sq(pt);
                if !v.is_finite() || !gsq.is_finite() {
                    return Err(OuError::NonFinite(format!(
                        "glsi integrand non-finite at {pt:?}"
                    )));
                }
                let w = rule.weight(i);
                let (hv, he) = gh.eval_h(v)?;
                let (gv, _) = gh.eval_g(v)?;
                h_int += w * hv;
                h_err += w * he;
                fisher += w * c.c_prime(v) * gsq;
                g_int += w * gv;
            }
            Ok((h_int, h_err, fisher, g_int))
        };
        let (h_int, h_err, fisher, g_int) = sides(&self.rule)?;
        let (xstar, xerr) = gh.eval_ginv(g_int)?;
        let (h_star, hs_err) = gh.eval_h(xstar)?;
        let lhs = h_int;
        let rhs = 0.5 * fisher + h_star;
        let (h_int_h, _, fisher_h, g_int_h) = sides(&self.half_rule)?;
        let (xstar_h, _) = gh.eval_ginv(g_int_h)?;
        let (h_star_h, _) = gh.eval_h(xstar_h)?;
        let quad_err =
            (lhs - h_int_h).abs() + (rhs - (0.5 * fisher_h + h_star_h)).abs();
        // dH/dx = c(x) log c(x) maps the inversion error into H units.
        let lc = c.log_c(xstar);
        let dh = (lc.exp() * lc).abs();
        let inv_tol = h_err + hs_err + if dh.is_finite() { xerr * dh } else { 0.0 };
        let mut inputs = self.base_inputs(f, None);
        inputs.insert("c".into(), c.label().to_string());
        make_verdict("glsi", Direction::Leq, lhs, rhs, quad_err, inv_tol, inputs)
    }

    /// Reverse variant: ||1/Q_t f||_{e^{2t}(alpha+1)-1} <= ||1/f||_alpha
    /// for positive f.
    pub fn check_rhc(&self, f: &TestFunction, alpha: f64, t: f64) -> Result<Verdict> {
        if !(alpha > 0.0) {
            return Err(OuError::InvalidParam(format!(
                "rhc requires alpha > 0, got {alpha}"
            )));
        }
        if !(t >= 0.0) {
            return Err(OuError::InvalidParam(format!("rhc requires t >= 0, got {t}")));
        }
        if !f.positivity() {
            return Err(OuError::InvalidParam(format!(
                "rhc requires positive f, `{}` is not flagged positive",
                f.label()
            )));
        }
        let qr = reverse_q_exponent(alpha, t);
        let recip_norm = |vals: &[f64], rule: &QuadRule, e: f64| -> Result<f64> {
            let mut recip = Vec::with_capacity(vals.len());
            for &v in vals {
                if !(v > 0.0) {
                    return Err(OuError::NonFinite(format!(
                        "rhc hit a non-positive value {v} at a node"
                    )));
                }
                recip.push(1.0 / v);
            }
            lp_norm_values(&recip, rule, e, true)
        };
        let rhs = recip_norm(&values_on(&self.rule, f)?, &self.rule, alpha)?;
        let rhs_h = recip_norm(&values_on(&self.half_rule, f)?, &self.half_rule, alpha)?;
        let (lhs, lhs_h) = if t == 0.0 {
            (rhs, rhs_h)
        } else {
            (
                recip_norm(&self.q_vals_on(f, t, &self.rule)?, &self.rule, qr)?,
                recip_norm(&self.q_vals_on(f, t, &self.half_rule)?, &self.half_rule, qr)?,
            )
        };
        let quad_err = (lhs - lhs_h).abs() + (rhs - rhs_h).abs();
        let mut inputs = self.base_inputs(f, Some(t));
        inputs.insert("alpha".into(), format!("{alpha}"));
        inputs.insert("q_reverse".into(), format!("{qr}"));
        make_verdict("rhc", Direction::Leq, lhs, rhs, quad_err, 0.0, inputs)
    }

    /// Generalized reverse comparison (>= direction) for generators
    /// satisfying condition (C') and f bounded away from zero.
    pub fn check_genrhc(&self, c: &GeneratorC, f: &TestFunction, t: f64) -> Result<Verdict> {
        self.check_genrhc_with(c, f, t, false)
    }

    /// As `check_genrhc`; `override_condition` downgrades a failed (C') grid
    /// check to a warning (used by scans probing out-of-scope generators).
    pub fn check_genrhc_with(
        &self,
        c: &GeneratorC,
        f: &TestFunction,
        t: f64,
        override_condition: bool,
    ) -> Result<Verdict> {
        if !(t >= 0.0) {
            return Err(OuError::InvalidParam(format!(
                "genrhc requires t >= 0, got {t}"
            )));
        }
        if !f.bounded_away_from_zero() {
            return Err(OuError::InvalidParam(format!(
                "genrhc requires f bounded away from zero, `{}` has no positive lower bound",
                f.label()
            )));
        }
        let mut inputs = self.base_inputs(f, Some(t));
        let rep = check_condition_cprime(c, &GridSpec::default())?;
        if !rep.passed {
            if !override_condition {
                return Err(OuError::InvalidParam(format!(
                    "generator {} fails condition (C'): {}",
                    c.label(),
                    rep.summary()
                )));
            }
            inputs.insert(
                "warning".into(),
                format!("condition (C') overridden: {}", rep.summary()),
            );
        }
        self.gen_comparison("genrhc", Direction::Geq, c, f, t, inputs)
    }

    /// ||1/Q_t f||_{e^{2t}-1} <= exp(-int log f dgamma), t > 0.
    pub fn check_ctmain(&self, f: &TestFunction, t: f64) -> Result<Verdict> {
        if !(t > 0.0) {
            return Err(OuError::InvalidParam(format!(
                "this check needs t > 0 (the lhs exponent e^{{2t}}-1 vanishes at 0), got {t}"
            )));
        }
        if !f.positivity() {
            return Err(OuError::InvalidParam(format!(
                "check requires positive f, `{}` is not flagged positive",
                f.label()
            )));
        }
        let e = (2.0 * t).exp() - 1.0;
        let sides = |rule: &QuadRule| -> Result<(f64, f64)> {
            let fv = values_on(rule, f)?;
            let rhs = 1.0 / log_mean_values(&fv, rule)?;
            let qv = self.q_vals_on(f, t, rule)?;
            let mut recip = Vec::with_capacity(qv.len());
            for &v in &qv {
                if !(v > 0.0) {
                    return Err(OuError::NonFinite(format!(
                        "non-positive smoothed value {v} at a node"
                    )));
                }
                recip.push(1.0 / v);
            }
            let lhs = lp_norm_values(&recip, rule, e, true)?;
            Ok((lhs, rhs))
        };
        let (lhs, rhs) = sides(&self.rule)?;
        let (lhs_h, rhs_h) = sides(&self.half_rule)?;
        let quad_err = (lhs - lhs_h).abs() + (rhs - rhs_h).abs();
        let inputs = self.base_inputs(f, Some(t));
        make_verdict("ctmain", Direction::Leq, lhs, rhs, quad_err, 0.0, inputs)
    }

    /// The two-sided chain ||f||_1 >= exp(int log Q_s f) >= ||Q_t f||_{1-e^{-2(s-t)}}
    /// for 0 <= t < s, returned as two >=-type verdicts.
    pub fn check_sandwich(
        &self,
        f: &TestFunction,
        s: f64,
        t: f64,
    ) -> Result<(Verdict, Verdict)> {
        if !(s > 0.0) {
            return Err(OuError::InvalidParam(format!(
                "sandwich requires s > 0, got {s}"
            )));
        }
        if !(t >= 0.0 && t < s) {
            return Err(OuError::InvalidParam(format!(
                "sandwich requires 0 <= t < s, got t={t}, s={s}"
            )));
        }
        if !f.positivity() {
            return Err(OuError::InvalidParam(format!(
                "sandwich requires positive f, `{}` is not flagged positive",
                f.label()
            )));
        }
        let p = 1.0 - (-2.0 * (s - t)).exp();
        let sides = |rule: &QuadRule| -> Result<(f64, f64, f64)> {
            let fv = values_on(rule, f)?;
            let norm1 = lp_norm_values(&fv, rule, 1.0, true)?;
            let qs = self.q_vals_on(f, s, rule)?;
            let middle = log_mean_values(&qs, rule)?;
            let qt = self.q_vals_on(f, t, rule)?;
            let lower = lp_norm_values(&qt, rule, p, true)?;
            Ok((norm1, middle, lower))
        };
        let (a, m, b) = sides(&self.rule)?;
        let (a_h, m_h, b_h) = sides(&self.half_rule)?;
        let mut inputs = self.base_inputs(f, Some(t));
        inputs.insert("s".into(), format!("{s}"));
        inputs.insert("p_lower".into(), format!("{p}"));
        let upper = make_verdict(
            "sandwich_upper",
            Direction::Geq,
            a,
            m,
            (a - a_h).abs() + (m - m_h).abs(),
            0.0,
            inputs.clone(),
        )?;
        let lower = make_verdict(
            "sandwich_lower",
            Direction::Geq,
            m,
            b,
            (m - m_h).abs() + (b - b_h).abs(),
            0.0,
            inputs,
        )?;
        Ok((upper, lower))
    }

    /// Integrability transfer for the named generator families: the
    /// premise integral ||u(0,f)||_1 being finite implies the smoothed
    /// integral ||u(t,Q_t f)||_1 is finite and bounded by
    /// u(t, phi(0, ||u(0,f)||_1)).
    pub fn check_integrability_implication(
        &self,
        c: &GeneratorC,
        f: &TestFunction,
        t: f64,
    ) -> Result<Verdict> {
        if !(t > 0.0) {
            return Err(OuError::InvalidParam(format!(
                "integrability transfer needs t > 0, got {t}"
            )));
        }
        let family_ok =
            c.label().starts_with("exm1(") || c.label().starts_with("loglog(");
        if !family_ok {
            return Err(OuError::InvalidParam(format!(
                "integrability transfer is stated for the exm1 and loglog families, got {}",
                c.label()
            )));
        }
        if !f.positivity() {
            return Err(OuError::InvalidParam(format!(
                "integrability transfer requires nonnegative f, `{}` is not flagged positive",
                f.label()
            )));
        }
        let u0 = UPhi::new(c, 0.0)?;
        let ut = UPhi::new(c, t)?;
        let fv = values_on(&self.rule, f)?;
        let (premise, p_err) = Self::u_norm(&u0, &fv, &self.rule).map_err(|e| {
            OuError::Range(format!("premise-side integral diverged: {e}"))
        })?;
        let qv = self.q_vals_on(f, t, &self.rule)?;
        let (conclusion, c_err) = Self::u_norm(&ut, &qv, &self.rule).map_err(|e| {
            OuError::Range(format!("conclusion-side integral diverged: {e}"))
        })?;
        let (x0, x0_err) = u0.eval_phi(premise)?;
        let (bound, b_err) = ut.eval_u(x0).map_err(|e| {
            OuError::Range(format!("implied bound exceeds f64 range: {e}"))
        })?;
        // Half-order recomputation of both integrals for the error estimate.
        let fv_h = values_on(&self.half_rule, f)?;
        let (premise_h, _) = Self::u_norm(&u0, &fv_h, &self.half_rule)?;
        let qv_h = self.q_vals_on(f, t, &self.half_rule)?;
        let (conclusion_h, _) = Self::u_norm(&ut, &qv_h, &self.half_rule)?;
        let (x0_h, _) = u0.eval_phi(premise_h)?;
        let (bound_h, _) = ut.eval_u(x0_h)?;
        let quad_err = (conclusion - conclusion_h).abs() + (bound - bound_h).abs();
        // The bound's sensitivity to the premise inversion is u'(t, x0).
        let du = ut.du(x0);
        let inv_tol = if du.is_finite() {
            x0_err * du + b_err + p_err + c_err
        } else {
            b_err + p_err + c_err
        };
        let mut inputs = self.base_inputs(f, Some(t));
        inputs.insert("c".into(), c.label().to_string());
        inputs.insert("premise_integral".into(), format!("{premise}"));
        inputs.insert("conclusion_integral".into(), format!("{conclusion}"));
        make_verdict(
            "integrability",
            Direction::Leq,
            conclusion,
            bound,
            quad_err,
            inv_tol,
            inputs,
        )
    }
}

/// Fits the affine majorant r(x) <= kappa1 x + kappa2 of r = c/c' over the
/// grid: kappa1 is the final chord slope (a concave increasing r approaches
/// its asymptotic slope from above), kappa2 the largest residual. Reported
/// as informational; there is no canonical choice of the pair.
pub fn fitted_kappa(c: &GeneratorC, grid: &GridSpec) -> Result<(f64, f64)> {
    grid.validate()?;
    let xs = grid.abscissae();
    let n = xs.len();
    let r = |x: f64| -> Result<f64> {
        let v = c.ratio(x);
        if !v.is_finite() {
            return Err(OuError::NonFinite(format!("c/c' not finite at x={x}")));
        }
        Ok(v)
    };
    let kappa1 = (r(xs[n - 1])? - r(xs[n - 2])?) / (xs[n - 1] - xs[n - 2]);
    let mut kappa2 = f64::NEG_INFINITY;
    for &x in &xs {
        kappa2 = kappa2.max(r(x)? - kappa1 * x);
    }
    Ok((kappa1, kappa2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{builtin_c, builtin_f};

    fn pm(entries: &[(&str, f64)]) -> Vec<(String, f64)> {
        entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn f_exp(lam: f64) -> TestFunction {
        builtin_f("exp_linear", &pm(&[("lambda", lam)]), 1).unwrap()
    }

    fn f_const(k: f64) -> TestFunction {
        builtin_f("constant", &pm(&[("kappa", k)]), 1).unwrap()
    }

    fn f_poly1() -> TestFunction {
        builtin_f(
            "poly_plus_const",
            &pm(&[("c0", 1.0), ("c1", 0.0), ("c2", 1.0), ("kappa", 0.0)]),
            1,
        )
        .unwrap()
    }

    fn f_logistic() -> TestFunction {
        builtin_f("logistic", &pm(&[("a", 1.0), ("b", 1.0)]), 1).unwrap()
    }

    fn c_power(p: f64) -> GeneratorC {
        builtin_c("power", &pm(&[("p", p)])).unwrap()
    }

    fn c_exp() -> GeneratorC {
        builtin_c("exp", &[]).unwrap()
    }

    fn ev() -> Evaluator {
        Evaluator::new(1).unwrap()
    }

    #[test]
    fn hc_constant_is_equality() {
        let v = ev().check_hc(&f_const(2.5), 2.0, 0.7).unwrap();
        assert!(v.holds);
        assert!(v.margin.abs() <= v.slack, "{v:?}");
        assert!((v.lhs - 2.5).abs() < 1e-12 && (v.rhs - 2.5).abs() < 1e-12);
    }

    #[test]
    fn hc_exponential_extremal() {
        // At e^{2t} = 2, q = 3 and both sides equal e^{p lambda^2 / 2}.
        let t = (2.0f64).ln() / 2.0;
        let v = ev().check_hc(&f_exp(0.6), 2.0, t).unwrap();
        let expect = (0.36f64).exp();
        assert!((v.lhs - v.rhs).abs() <= 1e-8, "{} vs {}", v.lhs, v.rhs);
        assert!((v.rhs - expect).abs() <= 1e-8);
        assert!(v.holds);
    }

    #[test]
    fn hc_strict_for_poly() {
        let v = ev().check_hc(&f_poly1(), 2.0, 0.5).unwrap();
        assert!(v.holds);
        assert!(v.margin > v.slack, "margin {} slack {}", v.margin, v.slack);
    }

    #[test]
    fn hc_t_zero_margin_exact() {
        let v = ev().check_hc(&f_poly1(), 2.0, 0.0).unwrap();
        assert_eq!(v.margin, 0.0);
        assert!(v.holds);
    }

    #[test]
    fn hc_rejects_bad_exponent() {
        assert!(ev().check_hc(&f_poly1(), 1.0, 0.5).is_err());
        assert!(ev().check_hc(&f_poly1(), 2.0, -0.1).is_err());
    }

    #[test]
    fn ehc_linear_extremal() {
        for &t in &[0.0, 0.3, 1.0] {
            let f = TestFunction::custom(1, "x", false, |x| x[0]);
            let v = ev().check_ehc(&f, t).unwrap();
            let expect = (0.5f64).exp();
            assert!((v.rhs - expect).abs() <= 1e-8, "t={t}: rhs {}", v.rhs);
            assert!((v.lhs - v.rhs).abs() <= 1e-8, "t={t}");
            assert!(v.holds);
        }
    }

    #[test]
    fn ehc_constant_and_sin() {
        let v = ev().check_ehc(&f_const(1.3), 0.5).unwrap();
        assert!((v.lhs - (1.3f64).exp()).abs() < 1e-10);
        assert!((v.rhs - (1.3f64).exp()).abs() < 1e-10);
        let s = TestFunction::custom(1, "sin(x)+2", true, |x| x[0].sin() + 2.0);
        let v = ev().check_ehc(&s, 0.7).unwrap();
        assert!(v.holds);
        assert!(v.margin > v.slack);
    }

    #[test]
    fn genhc_power_matches_hc() {
        let t = (2.0f64).ln() / 2.0;
        let e = ev();
        let f = f_exp(0.6);
        let hc = e.check_hc(&f, 2.0, t).unwrap();
        let gen = e.check_genhc(&c_power(2.0), &f, t).unwrap();
        assert!((gen.lhs - hc.lhs).abs() <= 1e-7, "{} vs {}", gen.lhs, hc.lhs);
        assert!((gen.rhs - hc.rhs).abs() <= 1e-7);
        assert!((gen.margin - hc.margin).abs() <= 1e-7);
        assert!(gen.holds);
    }

    #[test]
    fn genhc_exp_matches_ehc_on_shifted_linear() {
        // f = 0.6x + 5 is in the equality family of the exponential variant,
        // so both formulations report margin ~ 0.
        let f = TestFunction::custom(1, "0.6x+5", true, |x| 0.6 * x[0] + 5.0);
        let e = ev();
        let ehc = e.check_ehc(&f, 0.4).unwrap();
        let gen = e.check_genhc(&c_exp(), &f, 0.4).unwrap();
        assert!(ehc.margin.abs() <= 1e-7 * ehc.rhs);
        assert!(gen.margin.abs() <= 1e-7 * gen.rhs.abs().max(1.0));
        // The generalized sides are the logarithms of the exponential-variant
        // sides; exponentiating reproduces them.
        assert!((gen.lhs.exp() - ehc.lhs).abs() <= 1e-6 * ehc.lhs);
        assert!((gen.rhs.exp() - ehc.rhs).abs() <= 1e-6 * ehc.rhs);
    }

    #[test]
    fn genhc_t_zero_margin_exact() {
        let v = ev().check_genhc(&c_power(2.0), &f_logistic(), 0.0).unwrap();
        assert_eq!(v.margin, 0.0);
        assert!(v.holds);
    }

    #[test]
    fn genhc_condition_gate_and_override() {
        let bad = builtin_c("exm1", &pm(&[("alpha", 1.0), ("beta", 2.0)])).unwrap();
        let e = ev();
        assert!(e.check_genhc(&bad, &f_logistic(), 0.3).is_err());
        let v = e.check_genhc_with(&bad, &f_logistic(), 0.3, true).unwrap();
        assert!(v.inputs.contains_key("warning"));
    }

    #[test]
    fn curve_constant_for_extremal() {
        let grid: Vec<f64> = (0..6).map(|i| 0.2 * i as f64).collect();
        let rep = ev().curve_genhc(&c_power(2.0), &f_exp(0.6), &grid).unwrap();
        assert_eq!(rep.points.len(), 6);
        let v0 = rep.points[0].value;
        for p in &rep.points {
            assert!((p.value - v0).abs() <= 1e-7, "t={}: {}", p.t, p.value);
        }
        assert!(rep.max_upward_jump <= 1e-8, "{}", rep.max_upward_jump);
    }

    #[test]
    fn curve_decreasing_for_poly() {
        let grid: Vec<f64> = (0..6).map(|i| 0.2 * i as f64).collect();
        let rep = ev().curve_genhc(&c_power(2.0), &f_poly1(), &grid).unwrap();
        for w in rep.points.windows(2) {
            assert!(
                w[1].value <= w[0].value + 1e-9,
                "upward at t={}",
                w[1].t
            );
        }
        assert!(rep.points[5].value < rep.points[0].value - 1e-3);
    }

    #[test]
    fn curve_rejects_unsorted_grid() {
        assert!(ev()
            .curve_genhc(&c_power(2.0), &f_poly1(), &[0.3, 0.1])
            .is_err());
        let single = ev()
            .curve_genhc(&c_power(2.0), &f_poly1(), &[0.4])
            .unwrap();
        assert_eq!(single.max_upward_jump, 0.0);
    }

    #[test]
    fn lsi_equality_case() {
        // f = e^{x/2}: both sides e^{1/2}/2.
        let f = TestFunction::custom(1, "exp(x/2)", true, |x| (x[0] / 2.0).exp())
            .with_gradient(|x| vec![0.5 * (x[0] / 2.0).exp()]);
        let v = ev().check_lsi(&f).unwrap();
        let expect = 0.8243606353500641;
        assert!((v.lhs - expect).abs() <= 1e-8, "lhs {}", v.lhs);
        assert!((v.rhs - expect).abs() <= 1e-8, "rhs {}", v.rhs);
        assert!(v.holds);
    }

    #[test]
    fn lsi_constant_and_poly() {
        let v = ev().check_lsi(&f_const(2.0)).unwrap();
        let expect = 4.0 * (2.0f64).ln();
        assert!((v.lhs - expect).abs() < 1e-12);
        assert!(v.margin.abs() <= v.slack);
        let v = ev().check_lsi(&f_poly1()).unwrap();
        assert!(v.holds && v.margin > v.slack);
    }

    #[test]
    fn glsi_power2_halves_the_lsi_margin() {
        // For c(x) = x: G = x^2/2, H = (x^2/2)log x - x^2/4, c' = 1, and the
        // generalized bound is exactly half the log-Sobolev bound for the
        // same f, so margin_lsi = 2 margin_glsi.
        let f = f_logistic();
        let e = ev();
        let lsi = e.check_lsi(&f).unwrap();
        let glsi = e.check_glsi(&c_power(2.0), &f).unwrap();
        assert!(glsi.holds);
        assert!(
            (lsi.margin - 2.0 * glsi.margin).abs() <= 1e-7,
            "lsi {} vs 2x glsi {}",
            lsi.margin,
            2.0 * glsi.margin
        );
    }

    #[test]
    fn glsi_constant_equality_and_exp_generator() {
        let v = ev().check_glsi(&c_power(2.0), &f_const(2.5)).unwrap();
        assert!(v.margin.abs() <= v.slack, "{v:?}");
        let s = TestFunction::custom(1, "2+sin(x)/2", true, |x| 2.0 + x[0].sin() / 2.0)
            .with_gradient(|x| vec![x[0].cos() / 2.0])
            .with_bounds(Some(1.5), Some(2.5));
        let v = ev().check_glsi(&c_exp(), &s).unwrap();
        assert!(v.holds && v.margin > 0.0, "{v:?}");
    }

    #[test]
    fn glsi_requires_lower_bound() {
        // Positive but decaying to zero, with no declared lower bound.
        let f = TestFunction::custom(1, "exp(-x^2)", true, |x| (-x[0] * x[0]).exp());
        assert!(ev().check_glsi(&c_power(2.0), &f).is_err());
    }

    #[test]
    fn rhc_exponential_extremal() {
        // exponent algebra puts both sides at e^{alpha lambda^2 / 2}.
        let v = ev().check_rhc(&f_exp(0.5), 1.0, 0.3).unwrap();
        let expect = (0.125f64).exp();
        assert!((v.lhs - expect).abs() <= 1e-8, "lhs {}", v.lhs);
        assert!((v.rhs - expect).abs() <= 1e-8, "rhs {}", v.rhs);
        assert!(v.holds);
    }

    #[test]
    fn rhc_constant_and_poly() {
        let v = ev().check_rhc(&f_const(2.0), 1.5, 0.4).unwrap();
        assert!((v.lhs - 0.5).abs() < 1e-10 && (v.rhs - 0.5).abs() < 1e-10);
        let shifted = builtin_f(
            "poly_plus_const",
            &pm(&[("c0", 1.0), ("c1", 0.0), ("c2", 1.0), ("kappa", 0.0)]),
            1,
        )
        .unwrap();
        let v = ev().check_rhc(&shifted, 0.5, 0.4).unwrap();
        assert!(v.holds);
    }

    #[test]
    fn rhc_requires_positive_f() {
        let f = TestFunction::custom(1, "x", false, |x| x[0]);
        assert!(ev().check_rhc(&f, 1.0, 0.3).is_err());
    }

    #[test]
    fn genrhc_inv_power_reduces_to_reverse_norms() {
        // With c = (x+kappa)^{-(alpha+1)}, the generalized side at time t is
        // 1/||1/(Q_t f + kappa)||_{e^{2t}(alpha+1)-1} - kappa.
        let kappa = 0.5;
        let alpha = 1.0;
        let c = builtin_c("inv_power", &pm(&[("alpha", alpha), ("kappa", kappa)])).unwrap();
        let f = f_logistic();
        let e = ev();
        let t = 0.4;
        let v = e.check_genrhc(&c, &f, t).unwrap();
        assert!(v.holds, "{v:?}");

        let qr = reverse_q_exponent(alpha, t);
        let qv = e.q_vals_on(&f, t, &e.rule).unwrap();
        let recip: Vec<f64> = qv.iter().map(|&x| 1.0 / (x + kappa)).collect();
        let n = lp_norm_values(&recip, &e.rule, qr, true).unwrap();
        let expect = 1.0 / n - kappa;
        assert!(
            (v.lhs - expect).abs() <= 1e-6 * (1.0 + expect.abs()),
            "{} vs {}",
            v.lhs,
            expect
        );
    }

    #[test]
    fn genrhc_exp_decay_reduces_to_exponential_variant() {
        // With c = e^{kappa - x}, the generalized side at time t is
        // kappa - log ||exp(Q_t g)||_{e^{2t}} for g = kappa - f.
        let kappa = 3.0;
        let c = builtin_c("exp_decay", &pm(&[("kappa", kappa)])).unwrap();
        let f = f_logistic();
        let e = ev();
        let t = 0.5;
        let v = e.check_genrhc(&c, &f, t).unwrap();
        assert!(v.holds, "{v:?}");

        let g = TestFunction::custom(1, "kappa - logistic", true, move |x| {
            kappa - (1.0 + 1.0 / (1.0 + (-(x[0] + 1.0)).exp()))
        });
        let ehc = e.check_ehc(&g, t).unwrap();
        assert!(
            (v.lhs - (kappa - ehc.lhs.ln())).abs() <= 1e-6,
            "{} vs {}",
            v.lhs,
            kappa - ehc.lhs.ln()
        );
        assert!(
            (v.rhs - (kappa - ehc.rhs.ln())).abs() <= 1e-6,
            "{} vs {}",
            v.rhs,
            kappa - ehc.rhs.ln()
        );
        // Direction coherence with the exponential variant.
        assert_eq!(v.holds, ehc.holds);
    }

    #[test]
    fn genrhc_t_zero_and_guards() {
        let c = builtin_c("inv_power", &pm(&[("alpha", 0.5), ("kappa", 1.0)])).unwrap();
        let v = ev().check_genrhc(&c, &f_logistic(), 0.0).unwrap();
        assert_eq!(v.margin, 0.0);
        assert!(v.holds);
        // unbounded f rejected
        assert!(ev().check_genrhc(&c, &f_exp(0.5), 0.3).is_err());
        // increasing generator fails (C')
        assert!(ev().check_genrhc(&c_power(2.0), &f_logistic(), 0.3).is_err());
    }

    #[test]
    fn ctmain_equalities_and_poly() {
        let e = ev();
        let v = e.check_ctmain(&f_exp(0.8), 0.6).unwrap();
        assert!((v.lhs - 1.0).abs() <= 1e-8, "lhs {}", v.lhs);
        assert!((v.rhs - 1.0).abs() <= 1e-8, "rhs {}", v.rhs);
        let v = e.check_ctmain(&f_const(2.0), 0.5).unwrap();
        assert!((v.lhs - 0.5).abs() < 1e-10 && (v.rhs - 0.5).abs() < 1e-10);
        let shifted = builtin_f(
            "poly_plus_const",
            &pm(&[("c0", 0.5), ("c1", 0.0), ("c2", 1.0), ("kappa", 0.0)]),
            1,
        )
        .unwrap();
        let v = e.check_ctmain(&shifted, 0.6).unwrap();
        assert!(v.holds);
        assert!(e.check_ctmain(&f_const(1.0), 0.0).is_err());
    }

    #[test]
    fn sandwich_constant_and_exponential() {
        let e = ev();
        let (up, lo) = e.check_sandwich(&f_const(2.0), 0.5, 0.2).unwrap();
        for v in [&up, &lo] {
            assert!(v.holds);
            assert!((v.lhs - 2.0).abs() < 1e-10 && (v.rhs - 2.0).abs() < 1e-10);
        }
        // f = e^x, s = 0.5, t = 0: ||f||_1 = e^{1/2}; both lower quantities
        // equal e^{(1 - e^{-1})/2} (the exponential family saturates the
        // lower link).
        let (up, lo) = e.check_sandwich(&f_exp(1.0), 0.5, 0.0).unwrap();
        let a = (0.5f64).exp();
        let m = ((1.0 - (-1.0f64).exp()) / 2.0).exp();
        assert!((up.lhs - a).abs() <= 1e-8);
        assert!((up.rhs - m).abs() <= 1e-8, "middle {}", up.rhs);
        assert!((lo.lhs - m).abs() <= 1e-8);
        assert!((lo.rhs - m).abs() <= 1e-8, "lower {}", lo.rhs);
        assert!(up.holds && lo.holds);
    }

    #[test]
    fn sandwich_degenerates_at_t_near_s() {
        let (up, lo) = ev().check_sandwich(&f_poly1(), 0.5, 0.5 - 1e-6).unwrap();
        assert!(up.holds && lo.holds);
        assert!(
            (lo.lhs - lo.rhs).abs() <= 1e-4 * lo.lhs.abs().max(1.0),
            "middle {} vs lower {}",
            lo.lhs,
            lo.rhs
        );
    }

    #[test]
    fn sandwich_rejects_bad_times() {
        assert!(ev().check_sandwich(&f_const(1.0), 0.5, 0.5).is_err());
        assert!(ev().check_sandwich(&f_const(1.0), 0.0, 0.0).is_err());
    }

    #[test]
    fn integrability_transfer_examples() {
        let e = ev();
        let exm1 = builtin_c("exm1", &pm(&[("alpha", 1.0), ("beta", 1.0)])).unwrap();
        let smooth_abs =
            TestFunction::custom(1, "sqrt(x^2+1e-4)+0.1", true, |x| {
                (x[0] * x[0] + 1e-4).sqrt() + 0.1
            });
        let v = e.check_integrability_implication(&exm1, &smooth_abs, 0.2).unwrap();
        assert!(v.holds, "{v:?}");
        assert!(v.inputs.contains_key("premise_integral"));
        assert!(v.inputs.contains_key("conclusion_integral"));

        let v = e.check_integrability_implication(&exm1, &f_const(2.0), 0.4).unwrap();
        assert!(v.holds);

        let loglog = builtin_c(
            "loglog",
            &pm(&[("alpha", 1.0), ("beta", 1.0), ("a", (3.0f64).exp())]),
        )
        .unwrap();
        let v = e.check_integrability_implication(&loglog, &f_poly1(), 0.3).unwrap();
        assert!(v.holds, "{v:?}");

        // family guard
        assert!(e
            .check_integrability_implication(&c_power(2.0), &f_poly1(), 0.3)
            .is_err());
    }

    #[test]
    fn fitted_kappa_reference_generators() {
        let grid = GridSpec::default();
        // power(p): r = x/(p-1) exactly, so kappa1 = 1/(p-1), kappa2 = 0.
        let (k1, k2) = fitted_kappa(&c_power(3.0), &grid).unwrap();
        assert!((k1 - 0.5).abs() < 1e-9, "{k1}");
        assert!(k2.abs() < 1e-6, "{k2}");
        // exp: r = 1 constant, so kappa1 = 0, kappa2 = 1.
        let (k1, k2) = fitted_kappa(&c_exp(), &grid).unwrap();
        assert!(k1.abs() < 1e-12);
        assert!((k2 - 1.0).abs() < 1e-12);
        // exm1(1,1): r = x/(1+x) saturates at 1.
        let c = builtin_c("exm1", &pm(&[("alpha", 1.0), ("beta", 1.0)])).unwrap();
        let (k1, k2) = fitted_kappa(&c, &grid).unwrap();
        assert!((0.0..1e-3).contains(&k1), "{k1}");
        assert!(k2 > 0.9 && k2 <= 1.0, "{k2}");
    }

    #[test]
    fn verdict_slack_dominates_error() {
        let e = ev();
        let verdicts = vec![
            e.check_hc(&f_poly1(), 2.0, 0.5).unwrap(),
            e.check_ehc(&f_logistic(), 0.7).unwrap(),
            e.check_genhc(&c_power(2.0), &f_logistic(), 0.5).unwrap(),
            e.check_lsi(&f_poly1()).unwrap(),
            e.check_rhc(&f_logistic(), 0.5, 0.4).unwrap(),
            e.check_ctmain(&f_logistic(), 0.6).unwrap(),
        ];
        for v in verdicts {
            assert!(v.slack >= v.error_estimate, "{}: {v:?}", v.name);
            assert!(v.holds, "{}: {v:?}", v.name);
        }
    }
}
