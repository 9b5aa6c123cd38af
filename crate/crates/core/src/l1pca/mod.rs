//! L1-norm principal component analysis.
//!
//! The median-centred table `X` (products × terms) is approximated by
//! `S·Lᵀ` with `K` components by alternating least-absolute-deviation fits:
//! with the loadings fixed each product row is an LAD regression on `L`,
//! with the scores fixed each term column is an LAD regression on `S`. Every
//! half-step solves its subproblems exactly, so the objective `‖X − S·Lᵀ‖₁`
//! never increases.

mod bootstrap;
mod ellipse;
pub mod lad;

pub use bootstrap::{bootstrap_scores, project_table, resample_table, BootstrapClouds};
pub use ellipse::{covering_ellipse, EllipseSpec};
pub use lad::lad_solve;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::CataTable;
use crate::error::{Error, Result};
use crate::stats::median;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Stop when the relative objective improvement of a full iteration
    /// falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Initialisations tried: the L2 solution plus `restarts - 1` random
    /// orthonormal ones.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 500,
            restarts: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1PcaModel {
    pub products: Vec<String>,
    pub terms: Vec<String>,
    pub components: usize,
    /// Column medians subtracted before fitting.
    pub medians: Vec<f64>,
    /// Scores, one row per product.
    pub scores: Vec<Vec<f64>>,
    /// Loadings, one row per term; columns have unit Euclidean length.
    pub loadings: Vec<Vec<f64>>,
    /// Final `‖X − S·Lᵀ‖₁`.
    pub objective: f64,
    /// `‖X‖₁`.
    pub total_l1: f64,
    /// `‖S·Lᵀ‖₁ / ‖X‖₁`; 1 when `X` is zero.
    pub prop: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `X` is identically zero; nothing to explain.
    pub degenerate: bool,
    /// Objective after every half-step of the retained initialisation.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

impl L1PcaModel {
    pub fn scores_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.products.len(), self.components, |p, c| self.scores[p][c])
    }

    pub fn loadings_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.terms.len(), self.components, |t, c| self.loadings[t][c])
    }

    /// `S·Lᵀ` plus the medians, on the percentage scale.
    pub fn reconstruction(&self) -> DMatrix<f64> {
        let mut r = self.scores_matrix() * self.loadings_matrix().transpose();
        for (t, m) in self.medians.iter().enumerate() {
            r.column_mut(t).add_scalar_mut(*m);
        }
        r
    }
}

/// Median-centres the table's columns.
pub fn centre(table: &CataTable) -> (DMatrix<f64>, Vec<f64>) {
    let medians: Vec<f64> = (0..table.n_terms())
        .map(|t| median(&table.column(t)).expect("non-empty column"))
        .collect();
    let x = DMatrix::from_fn(table.n_products(), table.n_terms(), |p, t| {
        table.value(p, t) - medians[t]
    });
    (x, medians)
}

fn l1(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v.abs()).sum()
}

struct Alternation {
    scores: DMatrix<f64>,
    loadings: DMatrix<f64>,
    objective: f64,
    converged: bool,
    iterations: usize,
    trace: Vec<f64>,
}

/// Refits each row of `x` on `basis` (scores step) or each column of `x` on
/// `basis` (loadings step). A row keeps its previous coefficients when the
/// new fit is not strictly better, so no row's residual grows by rounding.
fn lad_step(
    targets: &DMatrix<f64>,
    basis: &DMatrix<f64>,
    previous: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let mut out = previous.clone();
    for r in 0..targets.nrows() {
        let y: DVector<f64> = targets.row(r).transpose();
        let old: DVector<f64> = previous.row(r).transpose();
        let new = lad::solve_unchecked(basis, &y)?;
        if lad::l1_residual(basis, &y, &new) < lad::l1_residual(basis, &y, &old) {
            out.set_row(r, &new.transpose());
        }
    }
    Ok(out)
}

fn alternate(x: &DMatrix<f64>, init: DMatrix<f64>, opts: &FitOptions) -> Result<Alternation> {
    let (np, _) = x.shape();
    let k = init.ncols();
    let xt = x.transpose();
    let mut loadings = init;
    let mut scores = lad_step(x, &loadings, &DMatrix::zeros(np, k))?;
    let mut objective = l1(&(x - &scores * loadings.transpose()));
    let mut trace = vec![objective];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let before = objective;
        loadings = lad_step(&xt, &scores, &loadings)?;
        trace.push(l1(&(x - &scores * loadings.transpose())));
        scores = lad_step(x, &loadings, &scores)?;
        objective = l1(&(x - &scores * loadings.transpose()));
        trace.push(objective);
        if before - objective <= opts.tolerance * before.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    Ok(Alternation {
        scores,
        loadings,
        objective,
        converged,
        iterations,
        trace,
    })
}

/// Leading right singular vectors of `x`.
fn l2_loadings(x: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let svd = x.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let nt = x.ncols();
    let mut l = DMatrix::zeros(nt, k);
    for (c, &i) in order.iter().take(k).enumerate() {
        l.set_column(c, &v_t.row(i).transpose());
    }
    // Fewer singular vectors than components (P < K is excluded, but keep
    // the basis full anyway).
    for c in order.len().min(k)..k {
        l[(c % nt, c)] = 1.0;
    }
    l
}

fn random_orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng));
    g.qr().q().columns(0, cols).into_owned()
}

/// Unit-length loading columns, largest-magnitude loading positive,
/// components ordered by decreasing L1 norm of their scores.
fn normalise(mut scores: DMatrix<f64>, mut loadings: DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let k = loadings.ncols();
    for c in 0..k {
        let norm = loadings.column(c).norm();
        if norm > 0.0 {
            loadings.column_mut(c).scale_mut(1.0 / norm);
            scores.column_mut(c).scale_mut(norm);
        }
        let lead = loadings
            .column(c)
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map(|(_, v)| v)
            .unwrap_or(0.0);
        if lead < 0.0 {
            loadings.column_mut(c).neg_mut();
            scores.column_mut(c).neg_mut();
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    let weight = |c: usize| scores.column(c).iter().map(|v| v.abs()).sum::<f64>();
    order.sort_by(|&a, &b| weight(b).total_cmp(&weight(a)));
    let s = DMatrix::from_fn(scores.nrows(), k, |r, c| scores[(r, order[c])]);
    let l = DMatrix::from_fn(loadings.nrows(), k, |r, c| loadings[(r, order[c])]);
    (s, l)
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Fits a `k`-component L1-PCA to the table.
pub fn fit(table: &CataTable, k: usize, opts: &FitOptions) -> Result<L1PcaModel> {
    let (np, nt) = (table.n_products(), table.n_terms());
    if k == 0 || k > np.min(nt) {
        return Err(Error::InvalidParameter(format!(
            "component count {k} not in 1..={}",
            np.min(nt)
        )));
    }
    if opts.restarts == 0 || opts.tolerance.is_nan() || opts.tolerance < 0.0 {
        return Err(Error::InvalidParameter("restarts must be >= 1 and tolerance >= 0".into()));
    }
    let (x, medians) = centre(table);
    let total = l1(&x);

    if total == 0.0 {
        let loadings = DMatrix::from_fn(nt, k, |t, c| if t == c { 1.0 } else { 0.0 });
        return Ok(L1PcaModel {
            products: table.products().to_vec(),
            terms: table.terms().to_vec(),
            components: k,
            medians,
            scores: vec![vec![0.0; k]; np],
            loadings: to_rows(&loadings),
            objective: 0.0,
            total_l1: 0.0,
            prop: 1.0,
            converged: true,
            iterations: 0,
            degenerate: true,
            trace: vec![0.0],
        });
    }

    let mut best: Option<Alternation> = None;
    for restart in 0..opts.restarts {
        let init = if restart == 0 {
            l2_loadings(&x, k)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(restart as u64);
            random_orthonormal(nt, k, &mut rng)
        };
        let run = alternate(&x, init, opts)?;
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let (scores, loadings) = normalise(best.scores, best.loadings);
    let fitted = &scores * loadings.transpose();
    Ok(L1PcaModel {
        products: table.products().to_vec(),
        terms: table.terms().to_vec(),
        components: k,
        medians,
        scores: to_rows(&scores),
        loadings: to_rows(&loadings),
        objective: l1(&(&x - &fitted)),
        total_l1: total,
        prop: l1(&fitted) / total,
        converged: best.converged,
        iterations: best.iterations,
        degenerate: false,
        trace: best.trace,
    })
}

/// `‖S·Lᵀ‖₁ / ‖X‖₁` for `X` the table centred by the model's medians.
pub fn explained_proportion(model: &L1PcaModel, table: &CataTable) -> Result<f64> {
    if table.n_products() != model.products.len() || table.n_terms() != model.terms.len() {
        return Err(Error::Dimensions("table does not match the model".into()));
    }
    let x = DMatrix::from_fn(table.n_products(), table.n_terms(), |p, t| {
        table.value(p, t) - model.medians[t]
    });
    let total = l1(&x);
    if total == 0.0 {
        return Err(Error::Numerical("degenerate table: zero L1 norm".into()));
    }
    Ok(l1(&(model.scores_matrix() * model.loadings_matrix().transpose())) / total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeEntry {
    pub components: usize,
    pub prop: f64,
    /// `prop_K − prop_{K−1}`, with `prop_0 = 0`. May be negative: the
    /// solutions are not nested.
    pub gain: f64,
    /// `‖X − S·Lᵀ‖₁` of the fit.
    pub objective: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeTable {
    pub entries: Vec<ScreeEntry>,
}

/// Independent fits for `K = 1..=kmax`.
pub fn scree(table: &CataTable, kmax: usize, opts: &FitOptions) -> Result<ScreeTable> {
    if kmax == 0 || kmax > table.n_products().min(table.n_terms()) {
        return Err(Error::InvalidParameter(format!("kmax {kmax} out of range")));
    }
    let fits: Vec<Result<L1PcaModel>> = (1..=kmax)
        .into_par_iter()
        .map(|k| fit(table, k, opts))
        .collect();
    let mut entries = Vec::with_capacity(kmax);
    let mut previous = 0.0;
    for (i, f) in fits.into_iter().enumerate() {
        let m = f?;
        entries.push(ScreeEntry {
            components: i + 1,
            prop: m.prop,
            gain: m.prop - previous,
            objective: m.objective,
            converged: m.converged,
        });
        previous = m.prop;
    }
    Ok(ScreeTable { entries })
}
