//! The increasing bijections u(t, .) and their inverses phi(t, .).
//!
//! For a positive generator c and exponent s = e^{2t},
//!     u(t, x) = int_0^x c(y)^s dy,    phi(t, .) = u(t, .)^{-1}.
//! Both are evaluated numerically for every generator, including the two
//! with closed forms; the closed forms are kept on `GeneratorC` strictly as
//! test references so the generic code path is the one that gets exercised.
//!
//! The integral is computed over geometrically graded panels near 0 (the
//! integrand can vary over many orders of magnitude there) with adaptive
//! bisection driven by a 16- vs 32-point Gauss-Legendre difference. A value
//! of c(y)^s past f64 range makes the integral +inf for every larger x; that
//! state is kept as an explicit overflow signal so inversion can still
//! bracket against it, while `eval_u` reports it as a range error.
//!
//! Inversion uses a bracketed secant iteration with forced bisection every
//! other step, terminating when the residual is at most tol * (1 + ybar)
//! and the bracket is at most 1e-12 * max(1, x) wide.

use std::collections::BTreeMap;
use std::sync::Mutex;

use nalgebra::DMatrix;
use once_cell::sync::Lazy;

use crate::error::{OuError, Result};
use crate::functions::GeneratorC;

/// Default per-call integration tolerance (relative to max(1, |value|)).
pub const DEFAULT_INTEGRATION_TOL: f64 = 1e-11;
/// Inversion brackets never expand past this abscissa.
pub const BRACKET_CAP: f64 = 1e12;

const GEOMETRIC_PANELS: i32 = 48;
const MAX_BISECT_DEPTH: u32 = 40;
const PANEL_BUDGET: usize = 200_000;
const MAX_INVERT_ITERS: usize = 200;
const MEMO_CAP: usize = 4096;

/// Gauss-Legendre axis on [-1, 1]; weights sum to 2.
struct GlAxis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn build_gl(n: usize) -> GlAxis {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eigen = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let first = eigen.eigenvectors[(0, i)];
            (eigen.eigenvalues[i], 2.0 * first * first)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        weights[n / 2] = pairs[n / 2].1;
    }
    GlAxis { nodes, weights }
}

static GL16: Lazy<GlAxis> = Lazy::new(|| build_gl(16));
static GL32: Lazy<GlAxis> = Lazy::new(|| build_gl(32));

fn gl_panel<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, axis: &GlAxis) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in axis.nodes.iter().zip(&axis.weights) {
        acc += w * g(mid + half * x);
    }
    half * acc
}

/// Outcome of an adaptive integral: a value with an accumulated error bound,
/// or a non-finite integrand somewhere in (0, x].
enum IntegralOut {
    Finite { value: f64, err: f64 },
    NonFinite,
}

/// int_0^x g(y) dy by graded panels plus difference-driven bisection.
fn adaptive_integral<F: Fn(f64) -> f64>(g: &F, x: f64, tol: f64) -> IntegralOut {
    if x == 0.0 {
        return IntegralOut::Finite { value: 0.0, err: 0.0 };
    }
    let mut stack: Vec<(f64, f64, u32)> = Vec::with_capacity(64);
    stack.push((0.0, x * 2f64.powi(-GEOMETRIC_PANELS), 0));
    for k in (1..=GEOMETRIC_PANELS).rev() {
        stack.push((x * 2f64.powi(-k), x * 2f64.powi(-(k - 1)), 0));
    }
    let mut total = 0.0;
    let mut err = 0.0;
    let mut processed = 0usize;
    while let Some((a, b, depth)) = stack.pop() {
        processed += 1;
        let v1 = gl_panel(g, a, b, &GL16);
        let v2 = gl_panel(g, a, b, &GL32);
        if !v1.is_finite() || !v2.is_finite() {
            return IntegralOut::NonFinite;
        }
        let e = (v2 - v1).abs();
        let accept = e <= tol * v2.abs().max(1.0) / 64.0
            || depth >= MAX_BISECT_DEPTH
            || (b - a) < 1e-15 * x
            || processed > PANEL_BUDGET;
        if accept {
            total += v2;
            err += e;
        } else {
            let m = 0.5 * (a + b);
            stack.push((a, m, depth + 1));
            stack.push((m, b, depth + 1));
        }
    }
    if !total.is_finite() {
        return IntegralOut::NonFinite;
    }
    IntegralOut::Finite { value: total, err }
}

/// Memoized result of one u(x) evaluation.
#[derive(Clone, Copy)]
enum UMemo {
    Finite(f64, f64),
    Overflow,
}

/// u(t, .) = int_0^x c^{e^{2t}} and its inverse for one generator at one
/// exponent. Cheap to clone conceptually but holds a memo, so share by
/// reference; it is Send + Sync and safe to use from parallel scans.
pub struct UPhi {
    gen: GeneratorC,
    s: f64,
    tol: f64,
    memo: Mutex<BTreeMap<u64, UMemo>>,
}

impl UPhi {
    /// Construction at time t >= 0, exponent e^{2t}.
    pub fn new(gen: &GeneratorC, t: f64) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(OuError::InvalidParam(format!(
                "u construction needs finite t >= 0, got {t}"
            )));
        }
        Self::with_exponent(gen, (2.0 * t).exp())
    }

    /// Construction at a raw exponent s > 0 (the Monte Carlo module uses
    /// s = 1/tau along the backward-time parameterization).
    pub fn with_exponent(gen: &GeneratorC, s: f64) -> Result<Self> {
        if !s.is_finite() || s <= 0.0 {
            return Err(OuError::InvalidParam(format!(
                "u construction needs finite exponent s > 0, got {s}"
            )));
        }
        Ok(UPhi {
            gen: gen.clone(),
            s,
            tol: DEFAULT_INTEGRATION_TOL,
            memo: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(OuError::InvalidParam(format!(
                "integration tolerance must be positive, got {tol}"
            )));
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn exponent(&self) -> f64 {
        self.s
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn generator(&self) -> &GeneratorC {
        &self.gen
    }

    /// du/dx = c(x)^s; +inf when past f64 range.
    pub fn du(&self, x: f64) -> f64 {
        (self.s * self.gen.log_c(x)).exp()
    }

    fn u_memo(&self, x: f64) -> UMemo {
        let key = x.to_bits();
        if let Some(hit) = self.memo.lock().expect("u memo poisoned").get(&key) {
            return *hit;
        }
        let s = self.s;
        let gen = &self.gen;
        let out = if x >= 0.0 {
            match adaptive_integral(&|y: f64| (s * gen.log_c(y)).exp(), x, self.tol) {
                IntegralOut::Finite { value, err } => UMemo::Finite(value, err),
                IntegralOut::NonFinite => UMemo::Overflow,
            }
        } else {
            // Signed integral from 0 for generators defined on all of R.
            match adaptive_integral(&|y: f64| (s * gen.log_c(-y)).exp(), -x, self.tol) {
                IntegralOut::Finite { value, err } => UMemo::Finite(-value, err),
                IntegralOut::NonFinite => UMemo::Overflow,
            }
        };
        let mut memo = self.memo.lock().expect("u memo poisoned");
        if memo.len() < MEMO_CAP {
            // First writer wins so every later reader sees the same value.
            memo.entry(key).or_insert(out);
        }
        out
    }

    /// u(x) with its accumulated integration error bound. Negative x is
    /// accepted only for generators whose c extends below zero.
    pub fn eval_u(&self, x: f64) -> Result<(f64, f64)> {
        if !x.is_finite() || (x < 0.0 && !self.gen.extends_below_zero()) {
            return Err(OuError::InvalidParam(format!(
                "u is defined for x >= 0 for generator {}, got {x}",
                self.gen.label()
            )));
        }
        match self.u_memo(x) {
            UMemo::Finite(v, e) => Ok((v, e)),
            UMemo::Overflow => Err(OuError::Range(format!(
                "u({x}) exceeds f64 range for {} at exponent {}",
                self.gen.label(),
                self.s
            ))),
        }
    }

    /// u(x) - ybar with overflow collapsed to a signed infinity (valid for
    /// bracketing because u is nondecreasing, so overflow happens past the
    /// root: above it for x > 0, below it for x < 0).
    fn residual(&self, x: f64, ybar: f64) -> f64 {
        match self.u_memo(x) {
            UMemo::Finite(v, _) => v - ybar,
            UMemo::Overflow => {
                if x >= 0.0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// phi(ybar): the x with u(x) = ybar, plus an error bound in x units
    /// (bracket radius + residual tolerance divided by u'(x)). Negative ybar
    /// is meaningful only for generators extending below zero.
    pub fn eval_phi(&self, ybar: f64) -> Result<(f64, f64)> {
        if !ybar.is_finite() || (ybar < 0.0 && !self.gen.extends_below_zero()) {
            return Err(OuError::Range(format!(
                "phi is defined for finite ybar >= 0 for generator {}, got {ybar}",
                self.gen.label()
            )));
        }
        if ybar == 0.0 {
            return Ok((0.0, 0.0));
        }
        let (mut lo, mut hi) = if ybar > 0.0 {
            (ybar.min(1.0), ybar.clamp(1.0, BRACKET_CAP))
        } else {
            (-1.0, 0.0)
        };
        while self.residual(lo, ybar) > 0.0 {
            if lo > 0.0 {
                lo /= 4.0;
                if lo < 1e-300 {
                    lo = 0.0; // u(0) = 0 <= ybar closes the bracket exactly
                    break;
                }
            } else {
                lo *= 4.0;
                if lo < -BRACKET_CAP {
                    return Err(OuError::Range(format!(
                        "phi({ybar}) is below the range of u for {} (bracket hit -{BRACKET_CAP:e})",
                        self.gen.label()
                    )));
                }
            }
        }
        while self.residual(hi, ybar) < 0.0 {
            hi *= 4.0;
            if hi > BRACKET_CAP {
                return Err(OuError::Range(format!(
                    "phi({ybar}) bracket for {} exceeded the expansion cap {BRACKET_CAP:e}",
                    self.gen.label()
                )));
            }
        }
        let mut flo = self.residual(lo, ybar);
        let mut fhi = self.residual(hi, ybar);
        let res_tol = self.tol * (1.0 + ybar.abs());
        for iter in 0..MAX_INVERT_ITERS {
            // Secant proposal on even iterations, bisection otherwise; the
            // forced bisection halves the bracket at least every other step.
            let mut mid = 0.5 * (lo + hi);
            if iter % 2 == 0 && flo.is_finite() && fhi.is_finite() && fhi > flo {
                let sec = hi - fhi * (hi - lo) / (fhi - flo);
                if sec.is_finite() && sec > lo && sec < hi {
                    mid = sec;
                }
            }
            let fm = self.residual(mid, ybar);
            if fm.abs() <= res_tol && (hi - lo) <= 1e-12 * mid.abs().max(1.0) {
                let du = self.du(mid);
                let mapped = if du.is_finite() && du > 0.0 {
                    res_tol / du
                } else {
                    0.0
                };
                return Ok((mid, 0.5 * (hi - lo) + mapped));
            }
            if fm < 0.0 {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
                fhi = fm;
            }
        }
        Err(OuError::NonConvergent {
            what: format!(
                "phi({ybar}) inversion for {} at exponent {}",
                self.gen.label(),
                self.s
            ),
            value: 0.5 * (lo + hi),
            error_estimate: 0.5 * (hi - lo),
        })
    }
}

/// G(x) = int_0^x c and H(x) = int_0^x c log c, the pair appearing in the
/// generalized log-Sobolev bound, with G's inverse.
pub struct GHPair {
    g: UPhi,
    memo_h: Mutex<BTreeMap<u64, Option<(f64, f64)>>>,
}

impl GHPair {
    pub fn new(gen: &GeneratorC) -> Result<Self> {
        Ok(GHPair {
            g: UPhi::with_exponent(gen, 1.0)?,
            memo_h: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn with_tol(gen: &GeneratorC, tol: f64) -> Result<Self> {
        Ok(GHPair {
            g: UPhi::with_exponent(gen, 1.0)?.with_tol(tol)?,
            memo_h: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn generator(&self) -> &GeneratorC {
        self.g.generator()
    }

    /// G(x) with error bound.
    pub fn eval_g(&self, x: f64) -> Result<(f64, f64)> {
        self.g.eval_u(x)
    }

    /// H(x) with error bound; the integrand c log c is signed.
    pub fn eval_h(&self, x: f64) -> Result<(f64, f64)> {
        if !x.is_finite() || x < 0.0 {
            return Err(OuError::InvalidParam(format!(
                "H is defined for x >= 0, got {x}"
            )));
        }
        let key = x.to_bits();
        if let Some(hit) = self.memo_h.lock().expect("H memo poisoned").get(&key) {
            return hit.ok_or_else(|| {
                OuError::Range(format!(
                    "H({x}) exceeds f64 range for {}",
                    self.generator().label()
                ))
            });
        }
        let gen = self.g.generator().clone();
        let out = match adaptive_integral(
            &|y: f64| {
                let lc = gen.log_c(y);
                lc.exp() * lc
            },
            x,
            self.g.tol(),
        ) {
            IntegralOut::Finite { value, err } => Some((value, err)),
            IntegralOut::NonFinite => None,
        };
        let mut memo = self.memo_h.lock().expect("H memo poisoned");
        if memo.len() < MEMO_CAP {
            memo.entry(key).or_insert(out);
        }
        out.ok_or_else(|| {
            OuError::Range(format!(
                "H({x}) exceeds f64 range for {}",
                self.generator().label()
            ))
        })
    }

    /// G^{-1}(y) with error bound in x units.
    pub fn eval_ginv(&self, y: f64) -> Result<(f64, f64)> {
        self.g.eval_phi(y)
    }
}
