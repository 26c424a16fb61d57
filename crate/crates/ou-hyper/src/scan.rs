//! Parameter sweeps over (generator params, test corpus, t, p/alpha) grids,
//! and randomized counterexample search.
//!
//! Scans enumerate their cells in a fixed nested order (corpus, generator,
//! exponent, time) before any evaluation happens, then evaluate cells in
//! parallel and reassemble by index, so row order never depends on
//! scheduling. A failing cell records its error in its row; it never aborts
//! the scan.
//!
//! The counterexample search maximizes the violation score
//! (lhs - rhs)/slack (sign flipped for >=-type claims). A score above 1
//! means the claim failed by more than the cell's slack, which is itself at
//! least 10x the numeric error estimate, so quadrature noise cannot rank as
//! a counterexample. Searches over deliberately broken configurations
//! (scaled exponents, overridden structural conditions) are labeled
//! exploratory.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{OuError, Result};
use crate::functions::{builtin_c, builtin_f, GeneratorC, TestFunction};
use crate::inequalities::{Direction, Evaluator, Verdict};

/// Default seed used across the toolkit for reproducibility.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// A generator family swept over a Cartesian grid of parameter values.
#[derive(Debug, Clone, Serialize)]
pub struct GeneratorSweep {
    pub family: String,
    /// (param name, values); the sweep is the Cartesian product.
    pub param_grids: Vec<(String, Vec<f64>)>,
}

impl GeneratorSweep {
    pub fn fixed(family: &str, params: &[(String, f64)]) -> Self {
        GeneratorSweep {
            family: family.to_string(),
            param_grids: params
                .iter()
                .map(|(k, v)| (k.clone(), vec![*v]))
                .collect(),
        }
    }

    /// All generators in the sweep, in grid order.
    pub fn generators(&self) -> Result<Vec<GeneratorC>> {
        for (k, vs) in &self.param_grids {
            if vs.is_empty() {
                return Err(OuError::InvalidParam(format!(
                    "empty value grid for generator parameter `{k}`"
                )));
            }
        }
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.param_grids.len()];
        loop {
            let params: Vec<(String, f64)> = self
                .param_grids
                .iter()
                .zip(&idx)
                .map(|((k, vs), &i)| (k.clone(), vs[i]))
                .collect();
            out.push(builtin_c(&self.family, &params)?);
            // odometer increment over the parameter grids
            let mut k = idx.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < self.param_grids[k].1.len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    /// (min, max) range of each parameter, for the randomized search.
    fn ranges(&self) -> Vec<(String, f64, f64)> {
        self.param_grids
            .iter()
            .map(|(k, vs)| {
                let lo = vs.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (k.clone(), lo, hi)
            })
            .collect()
    }
}

/// Scan description: which inequality, over what grid.
#[derive(Debug, Clone)]
pub struct ScanSpec {
    /// One of hc, ehc, genhc, genrhc, lsi, glsi, rhc, ctmain, sandwich,
    /// integrability.
    pub inequality: String,
    /// Required for the generator-driven checks (genhc, genrhc, glsi,
    /// integrability), ignored otherwise.
    pub generator: Option<GeneratorSweep>,
    /// Family-name filters on the standard corpus; empty means the whole
    /// corpus.
    pub corpus_filter: Vec<String>,
    pub dim: usize,
    /// Times for the smoothing checks; doubles as the s grid for sandwich
    /// (with t = s/2).
    pub t_grid: Vec<f64>,
    /// p values for hc, alpha values for rhc; ignored otherwise.
    pub p_grid: Vec<f64>,
    /// Quadrature order override (per-dimension default when absent).
    pub order: Option<usize>,
    /// Diagnostic multiplier on the hypercontractive exponent q(t); 1 is
    /// the mathematical value, anything else deliberately breaks the claim.
    pub q_scale: f64,
    /// Run generator checks even when the structural condition fails on the
    /// probe grid (the verdict rows then carry the condition report).
    pub override_condition: bool,
    /// Floor on the decision slack, overriding the per-cell estimate when
    /// larger.
    pub min_slack: Option<f64>,
    /// Worker threads for this scan; global pool when absent.
    pub workers: Option<usize>,
    pub seed: u64,
}

impl ScanSpec {
    pub fn new(inequality: &str, dim: usize) -> Self {
        ScanSpec {
            inequality: inequality.to_string(),
            generator: None,
            corpus_filter: Vec::new(),
            dim,
            t_grid: vec![0.5],
            p_grid: vec![2.0],
            order: None,
            q_scale: 1.0,
            override_condition: false,
            min_slack: None,
            workers: None,
            seed: DEFAULT_SEED,
        }
    }
}

/// The five-family reference corpus at documented default parameters.
pub fn standard_corpus(dim: usize) -> Result<Vec<TestFunction>> {
    let p = |entries: &[(&str, f64)]| -> Vec<(String, f64)> {
        entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    };
    Ok(vec![
        builtin_f("exp_linear", &p(&[("lambda", 0.6)]), dim)?,
        builtin_f("constant", &p(&[("kappa", 2.5)]), dim)?,
        builtin_f(
            "shifted_gauss_bump",
            &p(&[("a", 1.0), ("sigma", 1.0), ("kappa", 0.5)]),
            dim,
        )?,
        builtin_f(
            "poly_plus_const",
            &p(&[("c0", 1.0), ("c1", 0.0), ("c2", 1.0), ("kappa", 0.0)]),
            dim,
        )?,
        builtin_f("logistic", &p(&[("a", 1.0), ("b", 1.0)]), dim)?,
    ])
}

fn filtered_corpus(dim: usize, filter: &[String]) -> Result<Vec<TestFunction>> {
    let all = standard_corpus(dim)?;
    if filter.is_empty() {
        return Ok(all);
    }
    let kept: Vec<TestFunction> = all
        .into_iter()
        .filter(|f| filter.iter().any(|name| f.label().starts_with(name.as_str())))
        .collect();
    if kept.is_empty() {
        return Err(OuError::InvalidParam(format!(
            "corpus filter {filter:?} matched no function"
        )));
    }
    Ok(kept)
}

/// One evaluated grid cell: its coordinates plus either a verdict or the
/// error that prevented one.
#[derive(Debug, Clone, Serialize)]
pub struct ScanCell {
    pub coordinates: BTreeMap<String, String>,
    pub verdict: Option<Verdict>,
    pub error: Option<String>,
}

/// Full scan output, rows in deterministic grid order.
#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub inequality: String,
    pub cells: Vec<ScanCell>,
    pub n_holds: usize,
    pub n_failures: usize,
    pub n_errors: usize,
}

/// The abstract description of one cell, produced before any evaluation so
/// ordering is fixed up front.
#[derive(Clone)]
struct CellPlan {
    f: TestFunction,
    c: Option<GeneratorC>,
    t: f64,
    p: f64,
}

impl CellPlan {
    fn coordinates(&self, inequality: &str) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("f".into(), self.f.label().to_string());
        if let Some(c) = &self.c {
            m.insert("c".into(), c.label().to_string());
        }
        match inequality {
            "hc" => {
                m.insert("p".into(), format!("{}", self.p));
                m.insert("t".into(), format!("{}", self.t));
            }
            "rhc" => {
                m.insert("alpha".into(), format!("{}", self.p));
                m.insert("t".into(), format!("{}", self.t));
            }
            "sandwich" => {
                m.insert("s".into(), format!("{}", self.t));
                m.insert("t".into(), format!("{}", self.t / 2.0));
            }
            "lsi" | "glsi" => {}
            _ => {
                m.insert("t".into(), format!("{}", self.t));
            }
        }
        m
    }
}

fn needs_generator(inequality: &str) -> bool {
    matches!(inequality, "genhc" | "genrhc" | "glsi" | "integrability")
}

fn uses_p_grid(inequality: &str) -> bool {
    matches!(inequality, "hc" | "rhc")
}

fn uses_t_grid(inequality: &str) -> bool {
    !matches!(inequality, "lsi" | "glsi")
}

const KNOWN_INEQUALITIES: [&str; 10] = [
    "hc",
    "ehc",
    "genhc",
    "genrhc",
    "lsi",
    "glsi",
    "rhc",
    "ctmain",
    "sandwich",
    "integrability",
];

fn plan_cells(spec: &ScanSpec) -> Result<Vec<CellPlan>> {
    if !KNOWN_INEQUALITIES.contains(&spec.inequality.as_str()) {
        return Err(OuError::InvalidParam(format!(
            "unknown inequality `{}`; expected one of {KNOWN_INEQUALITIES:?}",
            spec.inequality
        )));
    }
    let corpus = filtered_corpus(spec.dim, &spec.corpus_filter)?;
    let gens: Vec<Option<GeneratorC>> = if needs_generator(&spec.inequality) {
        let sweep = spec.generator.as_ref().ok_or_else(|| {
            OuError::InvalidParam(format!(
                "inequality `{}` needs a generator sweep",
                spec.inequality
            ))
        })?;
        sweep.generators()?.into_iter().map(Some).collect()
    } else {
        vec![None]
    };
    let ps: &[f64] = if uses_p_grid(&spec.inequality) {
        if spec.p_grid.is_empty() {
            return Err(OuError::InvalidParam(format!(
                "inequality `{}` needs a non-empty exponent grid",
                spec.inequality
            )));
        }
        &spec.p_grid
    } else {
        &[f64::NAN][..]
    };
    let ts: &[f64] = if uses_t_grid(&spec.inequality) {
        if spec.t_grid.is_empty() {
            return Err(OuError::InvalidParam(format!(
                "inequality `{}` needs a non-empty t grid",
                spec.inequality
            )));
        }
        &spec.t_grid
    } else {
        &[f64::NAN][..]
    };
    let mut plans = Vec::new();
    for f in &corpus {
        for c in &gens {
            for &p in ps {
                for &t in ts {
                    plans.push(CellPlan {
                        f: f.clone(),
                        c: c.clone(),
                        t,
                        p,
                    });
                }
            }
        }
    }
    Ok(plans)
}

/// Applies the scan-level slack floor, re-deciding `holds` when raised.
fn apply_min_slack(mut v: Verdict, min_slack: Option<f64>) -> Verdict {
    if let Some(floor) = min_slack {
        if floor > v.slack {
            v.slack = floor;
            v.holds = match v.direction {
                Direction::Leq => v.margin >= -v.slack,
                Direction::Geq => v.margin <= v.slack,
            };
        }
    }
    v
}

fn evaluate_cell(ev: &Evaluator, spec: &ScanSpec, plan: &CellPlan) -> Result<Vec<Verdict>> {
    let c = plan.c.as_ref();
    let verdicts = match spec.inequality.as_str() {
        "hc" => vec![ev.check_hc_with_scale(&plan.f, plan.p, plan.t, spec.q_scale)?],
        "ehc" => vec![ev.check_ehc(&plan.f, plan.t)?],
        "genhc" => vec![ev.check_genhc_with(
            c.unwrap(),
            &plan.f,
            plan.t,
            spec.override_condition,
        )?],
        "genrhc" => vec![ev.check_genrhc_with(
            c.unwrap(),
            &plan.f,
            plan.t,
            spec.override_condition,
        )?],
        "lsi" => vec![ev.check_lsi(&plan.f)?],
        "glsi" => vec![ev.check_glsi(c.unwrap(), &plan.f)?],
        "rhc" => vec![ev.check_rhc(&plan.f, plan.p, plan.t)?],
        "ctmain" => vec![ev.check_ctmain(&plan.f, plan.t)?],
        "sandwich" => {
            let (a, b) = ev.check_sandwich(&plan.f, plan.t, plan.t / 2.0)?;
            vec![a, b]
        }
        "integrability" => {
            vec![ev.check_integrability_implication(c.unwrap(), &plan.f, plan.t)?]
        }
        _ => unreachable!("validated in plan_cells"),
    };
    Ok(verdicts
        .into_iter()
        .map(|v| apply_min_slack(v, spec.min_slack))
        .collect())
}

fn run_cells(spec: &ScanSpec, plans: &[CellPlan]) -> Result<Vec<ScanCell>> {
    let ev = match spec.order {
        Some(order) => Evaluator::with_order(order, spec.dim)?,
        None => Evaluator::new(spec.dim)?,
    };
    let eval_all = || -> Vec<Vec<ScanCell>> {
        plans
            .par_iter()
            .map(|plan| {
                let coords = plan.coordinates(&spec.inequality);
                match evaluate_cell(&ev, spec, plan) {
                    Ok(verdicts) => verdicts
                        .into_iter()
                        .map(|v| ScanCell {
                            coordinates: coords.clone(),
                            verdict: Some(v),
                            error: None,
                        })
                        .collect(),
                    Err(e) => vec![ScanCell {
                        coordinates: coords,
                        verdict: None,
                        error: Some(e.to_string()),
                    }],
                }
            })
            .collect()
    };
    let nested: Vec<Vec<ScanCell>> = match spec.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| OuError::InvalidParam(format!("worker pool: {e}")))?;
            pool.install(eval_all)
        }
        None => eval_all(),
    };
    Ok(nested.into_iter().flatten().collect())
}

/// Evaluates the named check over the full Cartesian grid. Row order is the
/// deterministic nested grid order regardless of scheduling; per-cell
/// failures become rows with `error` set.
pub fn run_scan(spec: &ScanSpec) -> Result<ScanResult> {
    let plans = plan_cells(spec)?;
    let cells = run_cells(spec, &plans)?;
    let n_holds = cells
        .iter()
        .filter(|c| c.verdict.as_ref().is_some_and(|v| v.holds))
        .count();
    let n_failures = cells
        .iter()
        .filter(|c| c.verdict.as_ref().is_some_and(|v| !v.holds))
        .count();
    let n_errors = cells.iter().filter(|c| c.error.is_some()).count();
    Ok(ScanResult {
        inequality: spec.inequality.clone(),
        cells,
        n_holds,
        n_failures,
        n_errors,
    })
}

/// A violating cell found by the search, with everything needed to
/// reproduce it.
#[derive(Debug, Clone, Serialize)]
pub struct ViolationCell {
    pub coordinates: BTreeMap<String, String>,
    pub verdict: Verdict,
    /// (lhs - rhs)/slack for <=-type claims, (rhs - lhs)/slack for >=-type;
    /// above 1 the claim failed beyond slack (which is >= 10x the numeric
    /// error estimate).
    pub score: f64,
}

/// Search outcome: the best violation (score > 1) if any, and the best
/// score seen overall.
#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub evaluations_used: usize,
    pub cell_errors: usize,
    /// True when the search probed deliberately broken configurations
    /// (scaled exponents or overridden structural conditions); findings are
    /// then diagnostics about scope, never counterexamples to a proven
    /// inequality.
    pub exploratory: bool,
    pub best_score: f64,
    pub violation: Option<ViolationCell>,
}

fn violation_score(v: &Verdict) -> f64 {
    match v.direction {
        Direction::Leq => (v.lhs - v.rhs) / v.slack,
        Direction::Geq => (v.rhs - v.lhs) / v.slack,
    }
}

/// Randomized search for violations: half the budget samples the scan's
/// parameter ranges uniformly, the other half perturbs the best cell with
/// shrinking steps. Deterministic for a fixed ScanSpec and seed.
pub fn search_counterexample(spec: &ScanSpec, budget: usize) -> Result<SearchReport> {
    if budget == 0 {
        return Err(OuError::InvalidParam("search budget must be >= 1".into()));
    }
    let plans = plan_cells(spec)?; // validates spec, fixes corpus/generator sets
    let corpus = filtered_corpus(spec.dim, &spec.corpus_filter)?;
    let ev = match spec.order {
        Some(order) => Evaluator::with_order(order, spec.dim)?,
        None => Evaluator::new(spec.dim)?,
    };
    let (t_lo, t_hi) = grid_range(&spec.t_grid, 0.5);
    let (p_lo, p_hi) = grid_range(&spec.p_grid, 2.0);
    let ranges = spec.generator.as_ref().map(|s| s.ranges());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let sample_plan = |rng: &mut ChaCha8Rng, around: Option<(&CellPlan, f64)>| -> Result<CellPlan> {
        let (f, t, p, c) = match around {
            None => {
                let f = corpus[rng.gen_range(0..corpus.len())].clone();
                let t = uniform_in(rng, t_lo, t_hi);
                let p = uniform_in(rng, p_lo, p_hi);
                let c = match (&spec.generator, &ranges) {
                    (Some(sweep), Some(rs)) => {
                        let params: Vec<(String, f64)> = rs
                            .iter()
                            .map(|(k, lo, hi)| (k.clone(), uniform_in(rng, *lo, *hi)))
                            .collect();
                        Some(builtin_c(&sweep.family, &params)?)
                    }
                    _ => None,
                };
                (f, t, p, c)
            }
            Some((base, step)) => {
                let t = perturb(rng, base.t, step, t_lo, t_hi);
                let p = perturb(rng, base.p, step, p_lo, p_hi);
                let c = match (&spec.generator, &ranges, &base.c) {
                    (Some(sweep), Some(rs), Some(basec)) => {
                        let params: Vec<(String, f64)> = rs
                            .iter()
                            .map(|(k, lo, hi)| {
                                let cur = basec.param(k).unwrap_or((lo + hi) / 2.0);
                                (k.clone(), perturb(rng, cur, step, *lo, *hi))
                            })
                            .collect();
                        Some(builtin_c(&sweep.family, &params)?)
                    }
                    _ => base.c.clone(),
                };
                (base.f.clone(), t, p, c)
            }
        };
        Ok(CellPlan { f, c, t, p })
    };

    let mut best: Option<(CellPlan, Verdict, f64)> = None;
    let mut errors = 0usize;
    let mut used = 0usize;

    // Phase 1: the planned grid corners first (cheap determinism anchor),
    // then uniform random cells.
    let random_budget = budget - budget / 2;
    for plan in plans.iter().take(random_budget.min(plans.len())) {
        used += 1;
        match evaluate_cell(&ev, spec, plan) {
            Ok(vs) => {
                for v in vs {
                    let s = violation_score(&v);
                    if best.as_ref().is_none_or(|(_, _, bs)| s > *bs) {
                        best = Some((plan.clone(), v, s));
                    }
                }
            }
            Err(_) => errors += 1,
        }
        if used >= random_budget {
            break;
        }
    }
    while used < random_budget {
        used += 1;
        match sample_plan(&mut rng, None) {
            Ok(plan) => match evaluate_cell(&ev, spec, &plan) {
                Ok(vs) => {
                    for v in vs {
                        let s = violation_score(&v);
                        if best.as_ref().is_none_or(|(_, _, bs)| s > *bs) {
                            best = Some((plan.clone(), v, s));
                        }
                    }
                }
                Err(_) => errors += 1,
            },
            Err(_) => errors += 1,
        }
    }

    // Phase 2: local refinement around the best cell with shrinking steps.
    let mut step = 0.25;
    while used < budget {
        let Some((base_plan, _, base_score)) = best.clone() else {
            break;
        };
        used += 1;
        match sample_plan(&mut rng, Some((&base_plan, step))) {
            Ok(plan) => match evaluate_cell(&ev, spec, &plan) {
                Ok(vs) => {
                    let mut improved = false;
                    for v in vs {
                        let s = violation_score(&v);
                        if s > base_score {
                            best = Some((plan.clone(), v, s));
                            improved = true;
                        }
                    }
                    if !improved {
                        step *= 0.9;
                    }
                }
                Err(_) => errors += 1,
            },
            Err(_) => errors += 1,
        }
    }

    let exploratory = spec.q_scale != 1.0 || spec.override_condition;
    let best_score = best.as_ref().map_or(f64::NEG_INFINITY, |(_, _, s)| *s);
    let violation = best.and_then(|(plan, verdict, score)| {
        (score > 1.0).then(|| ViolationCell {
            coordinates: plan.coordinates(&spec.inequality),
            verdict,
            score,
        })
    });
    Ok(SearchReport {
        evaluations_used: used,
        cell_errors: errors,
        exploratory,
        best_score,
        violation,
    })
}

fn grid_range(grid: &[f64], fallback: f64) -> (f64, f64) {
    if grid.is_empty() {
        return (fallback, fallback);
    }
    let lo = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn uniform_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return lo;
    }
    rng.gen_range(lo..=hi)
}

fn perturb(rng: &mut ChaCha8Rng, x: f64, step: f64, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return x;
    }
    let delta = step * (hi - lo) * (rng.gen_range(-1.0..=1.0f64));
    (x + delta).clamp(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hc_grid_all_hold() {
        let mut spec = ScanSpec::new("hc", 1);
        spec.p_grid = vec![1.5, 2.0, 4.0];
        spec.t_grid = vec![0.0, 0.5, 1.0];
        let res = run_scan(&spec).unwrap();
        assert_eq!(res.cells.len(), 45);
        assert_eq!(res.n_holds, 45, "{res:?}");
        assert_eq!(res.n_failures, 0);
        assert_eq!(res.n_errors, 0);
    }

    #[test]
    fn rows_are_in_deterministic_grid_order() {
        let mut spec = ScanSpec::new("hc", 1);
        spec.p_grid = vec![1.5, 2.0];
        spec.t_grid = vec![0.0, 0.5];
        spec.corpus_filter = vec!["constant".into(), "logistic".into()];
        let a = run_scan(&spec).unwrap();
        spec.workers = Some(1);
        let b = run_scan(&spec).unwrap();
        assert_eq!(a.cells.len(), 8);
        for (x, y) in a.cells.iter().zip(&b.cells) {
            assert_eq!(x.coordinates, y.coordinates);
            let (vx, vy) = (x.verdict.as_ref().unwrap(), y.verdict.as_ref().unwrap());
            assert_eq!(vx.lhs.to_bits(), vy.lhs.to_bits());
            assert_eq!(vx.rhs.to_bits(), vy.rhs.to_bits());
        }
    }

    #[test]
    fn empty_corpus_filter_is_an_error() {
        let mut spec = ScanSpec::new("hc", 1);
        spec.corpus_filter = vec!["no_such_family".into()];
        assert!(run_scan(&spec).is_err());
    }

    #[test]
    fn genhc_scan_with_condition_override_records_rows() {
        let mut spec = ScanSpec::new("genhc", 1);
        spec.generator = Some(GeneratorSweep::fixed(
            "exm1",
            &[("alpha".into(), 1.0), ("beta".into(), 2.0)],
        ));
        spec.t_grid = vec![0.3];
        spec.corpus_filter = vec!["logistic".into(), "constant".into()];
        // Without the override every cell errors out (condition C fails).
        let res = run_scan(&spec).unwrap();
        assert_eq!(res.n_errors, 2, "{res:?}");
        // With it, rows evaluate and carry the condition warning.
        spec.override_condition = true;
        let res = run_scan(&spec).unwrap();
        assert_eq!(res.n_errors, 0);
        for cell in &res.cells {
            let v = cell.verdict.as_ref().unwrap();
            assert!(
                v.inputs.get("warning").is_some_and(|w| w.contains("condition (C)")),
                "{v:?}"
            );
        }
    }

    #[test]
    fn cell_failures_never_abort() {
        // genrhc needs f bounded away from zero; exp_linear (inf f = 0)
        // must error per-row while the other four corpus members evaluate.
        let mut spec = ScanSpec::new("genrhc", 1);
        spec.generator = Some(GeneratorSweep::fixed(
            "inv_power",
            &[("alpha".into(), 0.5), ("kappa".into(), 1.0)],
        ));
        spec.t_grid = vec![0.4];
        let res = run_scan(&spec).unwrap();
        assert_eq!(res.cells.len(), 5);
        assert_eq!(res.n_errors, 1, "{res:?}");
        assert_eq!(res.n_holds, 4, "{res:?}");
    }

    #[test]
    fn search_finds_nothing_on_a_true_inequality() {
        let mut spec = ScanSpec::new("hc", 1);
        spec.p_grid = vec![1.5, 4.0];
        spec.t_grid = vec![0.0, 1.0];
        let rep = search_counterexample(&spec, 60).unwrap();
        assert!(!rep.exploratory);
        assert!(rep.violation.is_none(), "{rep:?}");
        assert!(rep.best_score <= 1.0);
    }

    #[test]
    fn search_finds_violation_with_inflated_exponent() {
        // q scaled 1.5x beyond e^{2t}(p-1)+1 breaks the claim, and the
        // exponential family exposes it.
        let mut spec = ScanSpec::new("hc", 1);
        spec.p_grid = vec![2.0];
        spec.t_grid = vec![0.25, 1.0];
        spec.q_scale = 1.5;
        let rep = search_counterexample(&spec, 60).unwrap();
        assert!(rep.exploratory);
        let v = rep.violation.expect("violation should be found");
        assert!(v.score > 1.0);
        assert!(
            v.verdict.lhs - v.verdict.rhs > 10.0 * v.verdict.error_estimate,
            "no-false-alarm bound: {v:?}"
        );
        assert!(v.coordinates["f"].starts_with("exp_linear"));
    }

    #[test]
    fn search_is_deterministic_for_fixed_seed() {
        let mut spec = ScanSpec::new("hc", 1);
        spec.p_grid = vec![2.0];
        spec.t_grid = vec![0.5];
        spec.q_scale = 1.2;
        let a = search_counterexample(&spec, 40).unwrap();
        let b = search_counterexample(&spec, 40).unwrap();
        assert_eq!(a.best_score.to_bits(), b.best_score.to_bits());
        assert_eq!(
            a.violation.map(|v| v.coordinates),
            b.violation.map(|v| v.coordinates)
        );
    }

    #[test]
    fn genrhc_search_with_override_is_exploratory() {
        let mut spec = ScanSpec::new("genrhc", 1);
        spec.generator = Some(GeneratorSweep::fixed(
            "power",
            &[("p".into(), 2.0)],
        ));
        spec.t_grid = vec![0.3];
        spec.corpus_filter = vec!["logistic".into()];
        spec.override_condition = true;
        let rep = search_counterexample(&spec, 20).unwrap();
        assert!(rep.exploratory);
        // Outcome (violation or none) is reported, never asserted: the row
        // is exploratory because the structural condition failed.
    }

    #[test]
    fn sandwich_scan_emits_two_rows_per_cell() {
        let mut spec = ScanSpec::new("sandwich", 1);
        spec.t_grid = vec![0.5];
        spec.corpus_filter = vec!["constant".into()];
        let res = run_scan(&spec).unwrap();
        assert_eq!(res.cells.len(), 2);
        assert!(res.cells.iter().all(|c| c.verdict.as_ref().unwrap().holds));
    }

    #[test]
    fn min_slack_override_raises_slack() {
        let mut spec = ScanSpec::new("hc", 1);
        spec.p_grid = vec![2.0];
        spec.t_grid = vec![0.5];
        spec.corpus_filter = vec!["constant".into()];
        spec.min_slack = Some(0.125);
        let res = run_scan(&spec).unwrap();
        let v = res.cells[0].verdict.as_ref().unwrap();
        assert_eq!(v.slack, 0.125);
        assert!(v.holds);
    }
}
