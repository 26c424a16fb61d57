//! The Ornstein-Uhlenbeck semigroup Q_t and L^p(gamma_d) norms.
//!
//! (Q_t f)(x) = int f(e^{-t} x + sqrt(1 - e^{-2t}) y) gamma_d(dy), evaluated
//! by Gauss-Hermite quadrature in y. Norms are defined as
//! ||f||_p = (int |f|^p dgamma)^{1/p} for every nonzero p, including
//! 0 < p < 1 and p < 0 (where f must be positive); the p -> 0 endpoint is
//! the geometric mean exp(int log f dgamma).
//!
//! Exponents of order e^{2t} overflow naive evaluation quickly, so norms
//! switch to a log-sum-exp path once p * max|log f| passes 500, and the
//! dedicated exponential-norm helper works in log space unconditionally.

use crate::error::{OuError, Result};
use crate::functions::TestFunction;
use crate::quadrature::{build_rule, integrate_fn, QuadRule, MAX_DIM};

/// Default nodes-per-axis for each dimension (1-based index).
pub const DEFAULT_ORDERS: [usize; MAX_DIM] = [64, 32, 16];

/// Semigroup evaluation context: the time t plus the inner rule (for the
/// y-integral) and outer rule (for norms over x). Rules share the dimension.
#[derive(Debug, Clone)]
pub struct SemigroupEval {
    t: f64,
    inner_rule: QuadRule,
    outer_rule: QuadRule,
}

/// Default rule for a dimension: 64 nodes/axis for d=1, 32 for d=2, 16 for d=3.
pub fn default_rule(dim: usize) -> Result<QuadRule> {
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(OuError::InvalidParam(format!("dim {dim} outside [1, {MAX_DIM}]")));
    }
    build_rule(DEFAULT_ORDERS[dim - 1], dim)
}

impl SemigroupEval {
    /// Context with the per-dimension default orders.
    pub fn new(t: f64, dim: usize) -> Result<Self> {
        let rule = default_rule(dim)?;
        Self::with_rules(t, rule.clone(), rule)
    }

    pub fn with_rules(t: f64, inner_rule: QuadRule, outer_rule: QuadRule) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(OuError::InvalidParam(format!("time t must be >= 0, got {t}")));
        }
        if inner_rule.dim() != outer_rule.dim() {
            return Err(OuError::InvalidParam(format!(
                "inner dim {} != outer dim {}",
                inner_rule.dim(),
                outer_rule.dim()
            )));
        }
        Ok(SemigroupEval { t, inner_rule, outer_rule })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.inner_rule.dim()
    }

    pub fn inner_rule(&self) -> &QuadRule {
        &self.inner_rule
    }

    pub fn outer_rule(&self) -> &QuadRule {
        &self.outer_rule
    }

    /// (Q_t f)(x). t = 0 short-circuits to f(x) with no quadrature; once
    /// e^{-t} underflows (< 1e-300) the value is exactly int f dgamma.
    pub fn apply_q(&self, f: &TestFunction, x: &[f64]) -> Result<f64> {
        if f.dim() != self.dim() {
            return Err(OuError::InvalidParam(format!(
                "function dim {} does not match semigroup dim {}",
                f.dim(),
                self.dim()
            )));
        }
        if self.t == 0.0 {
            let v = f.eval(x);
            if !v.is_finite() {
                return Err(OuError::NonFinite(format!("f non-finite at {x:?}")));
            }
            return Ok(v);
        }
        let e = (-self.t).exp();
        if e < 1e-300 {
            return integrate_fn(&self.inner_rule, |y| f.eval(y));
        }
        let s = (1.0 - e * e).sqrt();
        let dim = self.dim();
        let mut z = [0.0; MAX_DIM];
        integrate_fn(&self.inner_rule, move |y: &[f64]| {
            for k in 0..dim {
                z[k] = e * x[k] + s * y[k];
            }
            f.eval(&z[..dim])
        })
    }

    /// Q_t f evaluated at every outer-rule node, in node order. Inequality
    /// evaluators compute this once and reuse it across norms.
    pub fn q_values(&self, f: &TestFunction) -> Result<Vec<f64>> {
        let n = self.outer_rule.count();
        let mut out = Vec::with_capacity(n);
        let mut x = [0.0; MAX_DIM];
        for i in 0..n {
            self.outer_rule.node(i, &mut x);
            out.push(self.apply_q(f, &x[..self.dim()])?);
        }
        Ok(out)
    }

    /// f evaluated at every outer-rule node.
    pub fn f_values(&self, f: &TestFunction) -> Result<Vec<f64>> {
        let n = self.outer_rule.count();
        let mut out = Vec::with_capacity(n);
        let mut x = [0.0; MAX_DIM];
        for i in 0..n {
            self.outer_rule.node(i, &mut x);
            let v = f.eval(&x[..self.dim()]);
            if !v.is_finite() {
                return Err(OuError::NonFinite(format!(
                    "f non-finite at node {:?}",
                    &x[..self.dim()]
                )));
            }
            out.push(v);
        }
        Ok(out)
    }
}

/// log(sum exp(a_i)) guarded against overflow; empty input gives -inf.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + terms.iter().map(|&a| (a - m).exp()).sum::<f64>().ln()
}

/// Threshold on p * max|log f| above which norms go through log space.
const LOG_SPACE_THRESHOLD: f64 = 500.0;

/// ( sum_i w_i |v_i|^p )^{1/p} over precomputed node values.
pub fn lp_norm_values(vals: &[f64], rule: &QuadRule, p: f64, positive: bool) -> Result<f64> {
    if p == 0.0 {
        return Err(OuError::InvalidParam("lp_norm requires p != 0".into()));
    }
    if vals.len() != rule.count() {
        return Err(OuError::InvalidParam(format!(
            "value count {} does not match rule node count {}",
            vals.len(),
            rule.count()
        )));
    }
    if p < 0.0 && !positive {
        return Err(OuError::InvalidParam(
            "negative-power norm requested on a function not flagged positive".into(),
        ));
    }
    let mut max_log = 0.0f64;
    let mut any_nonpos = false;
    for &v in vals {
        if !v.is_finite() {
            return Err(OuError::NonFinite(format!("norm integrand value {v}")));
        }
        if v <= 0.0 {
            any_nonpos = true;
        } else {
            max_log = max_log.max(v.ln().abs());
        }
    }
    if p < 0.0 && any_nonpos {
        return Err(OuError::NonFinite(
            "negative-power norm hit a non-positive node value".into(),
        ));
    }
    if p.abs() * max_log > LOG_SPACE_THRESHOLD {
        // |v|^p spans too many orders of magnitude for direct summation.
        let terms: Vec<f64> = vals
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if v == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    rule.weight(i).ln() + p * v.abs().ln()
                }
            })
            .collect();
        return Ok((log_sum_exp(&terms) / p).exp());
    }
    let mut acc = 0.0;
    for (i, &v) in vals.iter().enumerate() {
        acc += rule.weight(i) * v.abs().powf(p);
    }
    if !acc.is_finite() {
        return Err(OuError::NonFinite(format!(
            "norm integral overflowed (p={p})"
        )));
    }
    Ok(acc.powf(1.0 / p))
}

/// ||f||_p = (int |f|^p dgamma)^{1/p}; p < 0 requires the positivity flag.
pub fn lp_norm(f: &TestFunction, p: f64, rule: &QuadRule) -> Result<f64> {
    let mut vals = Vec::with_capacity(rule.count());
    let mut x = [0.0; MAX_DIM];
    for i in 0..rule.count() {
        rule.node(i, &mut x);
        vals.push(f.eval(&x[..rule.dim()]));
    }
    lp_norm_values(&vals, rule, p, f.positivity())
}

/// ||e^g||_p = exp( log-sum-exp(log w_i + p g_i) / p ) over precomputed
/// exponent values g_i; always in log space. Returns the norm's logarithm
/// alongside the norm so callers can stay in log space when the linear
/// value overflows.
pub fn exp_norm_values(gvals: &[f64], rule: &QuadRule, p: f64) -> Result<(f64, f64)> {
    if p == 0.0 {
        return Err(OuError::InvalidParam("exp_norm requires p != 0".into()));
    }
    if gvals.len() != rule.count() {
        return Err(OuError::InvalidParam(format!(
            "value count {} does not match rule node count {}",
            gvals.len(),
            rule.count()
        )));
    }
    let mut terms = Vec::with_capacity(gvals.len());
    for (i, &g) in gvals.iter().enumerate() {
        if !g.is_finite() {
            return Err(OuError::NonFinite(format!("exponent value {g}")));
        }
        terms.push(rule.weight(i).ln() + p * g);
    }
    let log_norm = log_sum_exp(&terms) / p;
    Ok((log_norm, log_norm.exp()))
}

/// Geometric mean exp(int log f dgamma), the p -> 0 limit of ||f||_p.
pub fn log_mean(f: &TestFunction, rule: &QuadRule) -> Result<f64> {
    let vals = values_on(rule, f)?;
    log_mean_values(&vals, rule)
}

/// Geometric mean over precomputed node values.
pub fn log_mean_values(vals: &[f64], rule: &QuadRule) -> Result<f64> {
    if vals.len() != rule.count() {
        return Err(OuError::InvalidParam(format!(
            "value count {} does not match rule node count {}",
            vals.len(),
            rule.count()
        )));
    }
    let mut acc = 0.0;
    for (i, &v) in vals.iter().enumerate() {
        if !(v > 0.0) {
            return Err(OuError::NonFinite(format!(
                "log_mean requires positive values, got {v}"
            )));
        }
        acc += rule.weight(i) * v.ln();
    }
    Ok(acc.exp())
}

/// Evaluates f at every node of the rule.
pub fn values_on(rule: &QuadRule, f: &TestFunction) -> Result<Vec<f64>> {
    if f.dim() != rule.dim() {
        return Err(OuError::InvalidParam(format!(
            "function dim {} does not match rule dim {}",
            f.dim(),
            rule.dim()
        )));
    }
    let mut out = Vec::with_capacity(rule.count());
    let mut x = [0.0; MAX_DIM];
    for i in 0..rule.count() {
        rule.node(i, &mut x);
        let v = f.eval(&x[..rule.dim()]);
        if !v.is_finite() {
            return Err(OuError::NonFinite(format!(
                "f non-finite at node {:?}",
                &x[..rule.dim()]
            )));
        }
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::builtin_f;

    fn pm(entries: &[(&str, f64)]) -> Vec<(String, f64)> {
        entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn constant_is_fixed_point() {
        let f = builtin_f("constant", &pm(&[("kappa", 2.5)]), 1).unwrap();
        let se = SemigroupEval::new(0.7, 1).unwrap();
        assert!((se.apply_q(&f, &[1.3]).unwrap() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn linear_contracts_by_exp_minus_t() {
        let f = builtin_f(
            "poly_plus_const",
            &pm(&[("c0", 0.0), ("c1", 2.0), ("kappa", 0.0)]),
            1,
        )
        .unwrap();
        let se = SemigroupEval::new(0.4, 1).unwrap();
        let x = 1.1;
        let expect = (-0.4f64).exp() * 2.0 * x;
        assert!((se.apply_q(&f, &[x]).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn exponential_closed_form() {
        // Q_t e^{lambda x} = exp(e^{-t} lambda x + lambda^2 (1-e^{-2t})/2)
        let lam = 0.9;
        let f = builtin_f("exp_linear", &pm(&[("lambda", lam)]), 1).unwrap();
        for &t in &[0.1, 0.5, 1.5] {
            let se = SemigroupEval::new(t, 1).unwrap();
            for &x in &[-1.2, 0.0, 2.3] {
                let e = (-t).exp();
                let expect = (e * lam * x + lam * lam * (1.0 - e * e) / 2.0).exp();
                let got = se.apply_q(&f, &[x]).unwrap();
                assert!(
                    ((got - expect) / expect).abs() < 1e-12,
                    "t={t}, x={x}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn t_zero_is_identity() {
        let f = builtin_f("logistic", &pm(&[("a", 1.0), ("b", 1.0)]), 1).unwrap();
        let se = SemigroupEval::new(0.0, 1).unwrap();
        let x = [0.77];
        assert_eq!(se.apply_q(&f, &x).unwrap(), f.eval(&x));
    }

    #[test]
    fn huge_t_short_circuits_to_mean() {
        let f = builtin_f(
            "poly_plus_const",
            &pm(&[("c0", 0.0), ("c1", 0.0), ("c2", 1.0), ("kappa", 1.0)]),
            1,
        )
        .unwrap();
        let se = SemigroupEval::new(800.0, 1).unwrap();
        // E[x^2 + 1] = 2, regardless of the evaluation point
        assert!((se.apply_q(&f, &[123.0]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mass_preservation() {
        let f = builtin_f("shifted_gauss_bump", &pm(&[("a", 0.5), ("sigma", 0.8), ("kappa", 0.1)]), 1).unwrap();
        let se = SemigroupEval::new(0.6, 1).unwrap();
        let direct = integrate_fn(se.outer_rule(), |x| f.eval(x)).unwrap();
        let through = {
            let vals = se.q_values(&f).unwrap();
            let mut acc = 0.0;
            for (i, v) in vals.iter().enumerate() {
                acc += se.outer_rule().weight(i) * v;
            }
            acc
        };
        assert!((direct - through).abs() < 1e-10);
    }

    #[test]
    fn norm_of_exponential_matches_mgf() {
        let f = builtin_f("exp_linear", &pm(&[("lambda", 1.0)]), 1).unwrap();
        let rule = default_rule(1).unwrap();
        // ||e^{lambda x}||_p = e^{p lambda^2 / 2}
        let n2 = lp_norm(&f, 2.0, &rule).unwrap();
        assert!((n2 - 1.0f64.exp()).abs() < 1e-12, "{n2}");
        let nm1 = lp_norm(&f, -1.0, &rule).unwrap();
        let expect = (-0.5f64).exp(); // e^{p lambda^2/2} at p = -1
        assert!((nm1 - expect).abs() < 1e-12, "{nm1} vs {expect}");
        let nhalf = lp_norm(&f, 0.5, &rule).unwrap();
        assert!((nhalf - (0.25f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn negative_power_needs_positivity_flag() {
        let f = builtin_f(
            "poly_plus_const",
            &pm(&[("c0", 0.0), ("c1", 1.0), ("kappa", 0.0)]),
            1,
        )
        .unwrap();
        assert!(!f.positivity());
        let rule = default_rule(1).unwrap();
        assert!(lp_norm(&f, -1.0, &rule).is_err());
    }

    #[test]
    fn log_space_norm_matches_direct_sum() {
        // p log 2 ~ 540 fires the log-space switch while 2^p is still
        // representable, so the direct sum is available as a reference.
        let f = builtin_f("logistic", &pm(&[("a", 1.0), ("b", 0.0)]), 1).unwrap();
        let rule = default_rule(1).unwrap();
        let p = 780.0;
        let got = lp_norm(&f, p, &rule).unwrap();
        let direct = {
            let vals = values_on(&rule, &f).unwrap();
            let mut acc = 0.0;
            for (i, v) in vals.iter().enumerate() {
                acc += rule.weight(i) * v.powf(p);
            }
            acc.powf(1.0 / p)
        };
        assert!(direct.is_finite());
        assert!(((got - direct) / direct).abs() < 1e-12, "{got} vs {direct}");
    }

    #[test]
    fn log_space_norm_survives_direct_overflow() {
        // 2.5^800 overflows f64; the norm of a constant is the constant.
        let f = builtin_f("constant", &pm(&[("kappa", 2.5)]), 1).unwrap();
        let rule = default_rule(1).unwrap();
        let got = lp_norm(&f, 800.0, &rule).unwrap();
        assert!(((got - 2.5) / 2.5).abs() < 1e-12, "{got}");
    }

    #[test]
    fn exp_norm_equals_mgf_in_log_space() {
        let rule = default_rule(1).unwrap();
        let lam = 1.0;
        let gvals: Vec<f64> = {
            let mut v = Vec::new();
            let mut x = [0.0];
            for i in 0..rule.count() {
                rule.node(i, &mut x);
                v.push(lam * x[0]);
            }
            v
        };
        let (log_n, n) = exp_norm_values(&gvals, &rule, 1.0).unwrap();
        assert!((n - (0.5f64).exp()).abs() < 1e-12);
        assert!((log_n - 0.5).abs() < 1e-12);
    }

    #[test]
    fn log_mean_examples() {
        let rule = default_rule(1).unwrap();
        let c = builtin_f("constant", &pm(&[("kappa", 3.0)]), 1).unwrap();
        assert!((log_mean(&c, &rule).unwrap() - 3.0).abs() < 1e-14);
        let f = builtin_f("exp_linear", &pm(&[("lambda", 0.8)]), 1).unwrap();
        assert!((log_mean(&f, &rule).unwrap() - 1.0).abs() < 1e-12);
        // exp(int x^2/4 dgamma) = e^{1/4}
        let g = TestFunction::custom(1, "exp(x^2/4)", true, |x| (x[0] * x[0] / 4.0).exp());
        assert!((log_mean(&g, &rule).unwrap() - (0.25f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn norm_monotone_in_p() {
        let f = builtin_f("shifted_gauss_bump", &pm(&[("a", 0.3), ("sigma", 1.1), ("kappa", 0.2)]), 1).unwrap();
        let rule = default_rule(1).unwrap();
        let ps = [-2.0, -0.5, 0.5, 1.0, 2.0, 5.0];
        let mut prev = f64::NEG_INFINITY;
        for &p in &ps {
            let n = lp_norm(&f, p, &rule).unwrap();
            assert!(n >= prev - 1e-12, "p={p}: {n} < {prev}");
            prev = n;
        }
        let gm = log_mean(&f, &rule).unwrap();
        let n_half = lp_norm(&f, 0.5, &rule).unwrap();
        assert!(gm <= n_half + 1e-12);
    }

    #[test]
    fn semigroup_law_on_probe_points() {
        let f = builtin_f("logistic", &pm(&[("a", 1.0), ("b", 1.0)]), 1).unwrap();
        let (s, t) = (0.2, 0.7);
        let se_s = SemigroupEval::new(s, 1).unwrap();
        let se_t = SemigroupEval::new(t, 1).unwrap();
        let se_st = SemigroupEval::new(s + t, 1).unwrap();
        let qs = TestFunction::custom(1, "Q_s f", true, move |x| {
            se_s.apply_q(&f, x).unwrap()
        });
        for i in 0..16 {
            let x = -3.0 + 6.0 * i as f64 / 15.0;
            let lhs = se_t.apply_q(&qs, &[x]).unwrap();
            let f2 = builtin_f("logistic", &pm(&[("a", 1.0), ("b", 1.0)]), 1).unwrap();
            let rhs = se_st.apply_q(&f2, &[x]).unwrap();
            assert!((lhs - rhs).abs() <= 1e-8, "x={x}: {lhs} vs {rhs}");
        }
    }
}
