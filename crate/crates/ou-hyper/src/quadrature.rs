//! Tensorized Gauss-Hermite quadrature for the standard Gaussian measure.
//!
//! Rules use the probabilists' weight e^{-x^2/2}/sqrt(2 pi), so a rule
//! integrates directly against the standard Gaussian measure with no change
//! of variables: `integrate` returns `sum_i w_i f(x_i)` with `sum_i w_i = 1`.
//!
//! Nodes and weights for one axis come from a Golub-Welsch symmetric
//! tridiagonal eigendecomposition (off-diagonals sqrt(k)), which is stable
//! through order 256. Multi-dimensional rules are tensor grids over up to
//! three axes; nodes and weights are synthesized from the shared axis on
//! demand, so a rule stays O(order) in memory regardless of dimension.
//!
//! An order-n axis integrates polynomials of degree <= 2n-1 exactly; the
//! rule is symmetric under x -> -x, so odd monomials vanish up to rounding.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::DMatrix;
use once_cell::sync::Lazy;

use crate::error::{OuError, Result};
use crate::functions::TestFunction;

/// Smallest accepted nodes-per-axis count.
pub const MIN_ORDER: usize = 2;
/// Largest accepted nodes-per-axis count.
pub const MAX_ORDER: usize = 256;
/// Largest accepted dimension (higher d is the Monte Carlo module's job).
pub const MAX_DIM: usize = 3;

/// One quadrature axis: symmetric nodes and positive weights summing to 1.
#[derive(Debug, Clone)]
struct Axis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

static AXIS_CACHE: Lazy<RwLock<HashMap<usize, Arc<Axis>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

/// Gauss-Hermite rule on R^d for the standard Gaussian measure.
#[derive(Debug, Clone)]
pub struct QuadRule {
    dim: usize,
    order: usize,
    axis: Arc<Axis>,
}

/// Orthonormal probabilists' Hermite values (p_{n-1}(x), p_n(x)) and the
/// Christoffel sum S(x) = sum_{k<n} p_k(x)^2, via the stable forward
/// recurrence p_{k+1} = (x p_k - sqrt(k) p_{k-1}) / sqrt(k+1).
fn hermite_triplet(n: usize, x: f64) -> (f64, f64, f64) {
    let mut pkm1 = 0.0;
    let mut pk = 1.0;
    let mut sum = 1.0;
    for k in 0..n {
        let kf = k as f64;
        let next = (x * pk - kf.sqrt() * pkm1) / (kf + 1.0).sqrt();
        pkm1 = pk;
        pk = next;
        if k + 1 < n {
            sum += pk * pk;
        }
    }
    (pkm1, pk, sum)
}

/// Builds the order-point probabilists' Gauss-Hermite axis.
///
/// Eigenvalues of the Golub-Welsch tridiagonal seed the nodes; each node is
/// then Newton-polished on the orthonormal Hermite recurrence and its weight
/// computed as the reciprocal Christoffel sum 1 / sum_{k<n} p_k(x)^2. The
/// eigenvector-based weights would carry ~1e-32 absolute noise, which is
/// larger than the true far-tail weights and ruins integrands that grow on
/// the tail; the recurrence form keeps every weight relatively accurate.
fn build_axis(order: usize) -> Arc<Axis> {
    if let Some(axis) = AXIS_CACHE.read().expect("axis cache poisoned").get(&order) {
        return Arc::clone(axis);
    }
    let n = order;
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let mut seeds = jacobi.symmetric_eigen().eigenvalues.as_slice().to_vec();
    seeds.sort_by(f64::total_cmp);

    let mut pairs: Vec<(f64, f64)> = seeds
        .into_iter()
        .map(|seed| {
            let mut x = seed;
            // Newton on p_n with p_n'(x) = sqrt(n) p_{n-1}(x); the eigenvalue
            // is already within ~1e-13, so three steps reach a fixed point.
            for _ in 0..3 {
                let (pnm1, pn, _) = hermite_triplet(n, x);
                let dpn = (n as f64).sqrt() * pnm1;
                if dpn != 0.0 {
                    x -= pn / dpn;
                }
            }
            let (_, _, sum) = hermite_triplet(n, x);
            (x, 1.0 / sum)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Enforce exact mirror symmetry: average each (i, n-1-i) pair. The
    // computed values are accurate to rounding, so this only cleans the last
    // bits, making odd moments cancel exactly instead of to ~1e-16 * scale.
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
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }

    let axis = Arc::new(Axis { nodes, weights });
    AXIS_CACHE
        .write()
        .expect("axis cache poisoned")
        .insert(order, Arc::clone(&axis));
    axis
}

/// Builds a tensor Gauss-Hermite rule with `order` nodes per axis.
pub fn build_rule(order: usize, dim: usize) -> Result<QuadRule> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
        return Err(OuError::InvalidParam(format!(
            "quadrature order {order} outside [{MIN_ORDER}, {MAX_ORDER}]"
        )));
    }
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(OuError::InvalidParam(format!(
            "quadrature dim {dim} outside [1, {MAX_DIM}]"
        )));
    }
    Ok(QuadRule {
        dim,
        order,
        axis: build_axis(order),
    })
}

impl QuadRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Total node count, order^dim.
    pub fn count(&self) -> usize {
        self.order.pow(self.dim as u32)
    }

    /// Writes node `i` (row-major tensor index) into `out[..dim]`.
    pub fn node(&self, mut i: usize, out: &mut [f64]) {
        debug_assert!(out.len() >= self.dim);
        for k in (0..self.dim).rev() {
            out[k] = self.axis.nodes[i % self.order];
            i /= self.order;
        }
    }

    /// Weight of node `i`: the product of the per-axis weights.
    pub fn weight(&self, mut i: usize) -> f64 {
        let mut w = 1.0;
        for _ in 0..self.dim {
            w *= self.axis.weights[i % self.order];
            i /= self.order;
        }
        w
    }

    /// Nodes of the underlying one-dimensional axis.
    pub fn axis_nodes(&self) -> &[f64] {
        &self.axis.nodes
    }

    /// Weights of the underlying one-dimensional axis.
    pub fn axis_weights(&self) -> &[f64] {
        &self.axis.weights
    }

    /// Materializes all nodes (row-major, `count() * dim` reals).
    /// Intended for small rules and tests; prefer `node`/`weight` loops.
    pub fn nodes_vec(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.count() * self.dim];
        for i in 0..self.count() {
            let base = i * self.dim;
            self.node(i, &mut out[base..base + self.dim]);
        }
        out
    }

    /// Materializes all weights.
    pub fn weights_vec(&self) -> Vec<f64> {
        (0..self.count()).map(|i| self.weight(i)).collect()
    }
}

/// Integrates a raw closure against the rule. Errors name the offending node
/// if the integrand is non-finite there.
pub fn integrate_fn<F: FnMut(&[f64]) -> f64>(rule: &QuadRule, mut g: F) -> Result<f64> {
    let mut acc = 0.0;
    let mut x = [0.0; MAX_DIM];
    for i in 0..rule.count() {
        rule.node(i, &mut x);
        let v = g(&x[..rule.dim]);
        if !v.is_finite() {
            return Err(OuError::NonFinite(format!(
                "integrand value {v} at node {:?}",
                &x[..rule.dim]
            )));
        }
        acc += rule.weight(i) * v;
    }
    Ok(acc)
}

/// Integrates a test function against the Gaussian measure.
pub fn integrate(rule: &QuadRule, f: &TestFunction) -> Result<f64> {
    if f.dim() != rule.dim() {
        return Err(OuError::InvalidParam(format!(
            "function dim {} does not match rule dim {}",
            f.dim(),
            rule.dim()
        )));
    }
    integrate_fn(rule, |x| f.eval(x))
}

/// Per-dimension top of the order-doubling ladder. d=3 stops at 128 nodes
/// per axis (2M nodes); beyond that the tensor grid no longer pays its way.
fn ladder_cap(dim: usize) -> usize {
    if dim == 3 {
        128
    } else {
        MAX_ORDER
    }
}

/// Integrates a raw closure with order-doubling error control: runs nested
/// orders (n, 2n) until |value_2n - value_n| <= target_tol or the order cap
/// is reached. Returns (value, last difference); non-convergence is an error
/// carrying the best value and its estimate.
pub fn integrate_with_error_fn<F: Fn(&[f64]) -> f64>(
    dim: usize,
    g: F,
    target_tol: f64,
) -> Result<(f64, f64)> {
    if !(target_tol > 0.0) {
        return Err(OuError::InvalidParam(format!(
            "target_tol must be positive, got {target_tol}"
        )));
    }
    let mut order = 8;
    let mut prev = integrate_fn(&build_rule(order, dim)?, &g)?;
    let cap = ladder_cap(dim);
    let mut diff = f64::INFINITY;
    while order * 2 <= cap {
        order *= 2;
        let value = integrate_fn(&build_rule(order, dim)?, &g)?;
        diff = (value - prev).abs();
        if diff <= target_tol {
            return Ok((value, diff));
        }
        prev = value;
    }
    Err(OuError::NonConvergent {
        what: format!("order-doubling ladder exhausted at {cap} nodes/axis"),
        value: prev,
        error_estimate: diff,
    })
}

/// `integrate_with_error_fn` for a test function (dimension taken from it).
pub fn integrate_with_error(f: &TestFunction, target_tol: f64) -> Result<(f64, f64)> {
    integrate_with_error_fn(f.dim(), |x| f.eval(x), target_tol)
}
