//! Permutation null distributions for the five MAD tests.
//!
//! Each permutation relabels the product rows of every assessor slice
//! independently, aggregates the result and evaluates every requested
//! statistic on it, so all tests share the same `B` random tables.
//!
//! Permutation `b` (1-based) draws from its own ChaCha8 stream: the root
//! seed keys the generator and `b` selects the stream. Results therefore do
//! not depend on how permutations are spread over worker threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{CataArray, CataTable};
use crate::error::{Error, Result};
use crate::fdr::{bh_stepup, BhRule};
use crate::stats::{median, product_pairs, Sign, StatLayout};

pub const DEFAULT_PERMUTATIONS: usize = 9_999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum TestId {
    /// Global: median over terms of the per-term MADs.
    Global = 1,
    /// Per term: MAD of the term's column.
    Term = 2,
    /// Per cell: distance from the term median.
    Cell = 3,
    /// Per product pair: median absolute difference over terms.
    Pair = 4,
    /// Per product pair and term: signed difference.
    PairTerm = 5,
}

impl TestId {
    pub const ALL: [TestId; 5] = [
        TestId::Global,
        TestId::Term,
        TestId::Cell,
        TestId::Pair,
        TestId::PairTerm,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(TestId::Global),
            2 => Ok(TestId::Term),
            3 => Ok(TestId::Cell),
            4 => Ok(TestId::Pair),
            5 => Ok(TestId::PairTerm),
            _ => Err(Error::InvalidParameter(format!("no test number {n}"))),
        }
    }

    /// Family size for multiplicity control.
    pub fn family_size(self, products: usize, terms: usize) -> usize {
        let pairs = products * (products - 1) / 2;
        match self {
            TestId::Global => 1,
            TestId::Term => terms,
            TestId::Cell => products * terms,
            TestId::Pair => pairs,
            TestId::PairTerm => pairs * terms,
        }
    }

    /// Test 5 compares absolute signed differences.
    pub fn two_sided(self) -> bool {
        self == TestId::PairTerm
    }
}

impl From<TestId> for u8 {
    fn from(t: TestId) -> u8 {
        t.number()
    }
}

impl TryFrom<u8> for TestId {
    type Error = Error;
    fn try_from(n: u8) -> Result<Self> {
        TestId::from_number(n)
    }
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Test {}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationPlan {
    pub permutations: usize,
    pub seed: u64,
    pub tests: BTreeSet<TestId>,
    /// Worker threads; `None` uses the ambient rayon pool.
    #[serde(skip)]
    pub workers: Option<usize>,
    /// Keep every simulated value of every statistic. Test 1 and Test 2
    /// nulls are always kept.
    #[serde(skip)]
    pub retain_all: bool,
}

impl PermutationPlan {
    pub fn new(permutations: usize, seed: u64) -> Self {
        Self {
            permutations,
            seed,
            tests: TestId::ALL.into_iter().collect(),
            workers: None,
            retain_all: false,
        }
    }

    pub fn with_tests(mut self, tests: impl IntoIterator<Item = TestId>) -> Self {
        self.tests = tests.into_iter().collect();
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.tests.is_empty() {
            return Err(Error::InvalidParameter("no tests requested".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidParameter("worker count must be positive".into()));
        }
        if self.permutations > u32::MAX as usize - 1 {
            return Err(Error::InvalidParameter("too many permutations".into()));
        }
        Ok(())
    }
}

/// Random stream for permutation `index`.
pub fn permutation_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws one relabelling per assessor: `perm[p]` is the original product
/// whose row lands under label `p`.
fn draw_relabelling(perm: &mut [usize], rng: &mut ChaCha8Rng) {
    for (i, v) in perm.iter_mut().enumerate() {
        *v = i;
    }
    perm.shuffle(rng);
}

/// Reassigns the product rows of every assessor slice by an independent
/// uniform permutation. Term columns within a row stay together.
pub fn permute_within_assessor(array: &CataArray, rng: &mut ChaCha8Rng) -> CataArray {
    let (np, nt) = (array.n_products(), array.n_terms());
    let mut perm = vec![0usize; np];
    let mut cells = Vec::with_capacity(array.cells().len());
    for a in 0..array.n_assessors() {
        draw_relabelling(&mut perm, rng);
        let slice = array.slice(a);
        for &src in &perm {
            cells.extend_from_slice(&slice[src * nt..(src + 1) * nt]);
        }
    }
    array.with_cells(cells)
}

/// The `index`-th permuted table exactly as the engine generates it.
pub fn permuted_table(array: &CataArray, seed: u64, index: u64) -> CataTable {
    let mut rng = permutation_rng(seed, index);
    permute_within_assessor(array, &mut rng).aggregate()
}

/// Identifies one hypothesis. Indices refer to the table's label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatisticId {
    pub test: TestId,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub product: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub product2: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub term: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    pub statistic: StatisticId,
    pub observed: f64,
    pub simulated: Vec<f64>,
}

impl NullDistribution {
    pub fn permutations(&self) -> usize {
        self.simulated.len()
    }
}

/// Share of the `B + 1` values (observed included) at least as large as the
/// observed value; on absolute values when `two_sided_on_abs` is set.
pub fn pvalue(null: &NullDistribution, two_sided_on_abs: bool) -> f64 {
    let f = |x: f64| if two_sided_on_abs { x.abs() } else { x };
    let obs = f(null.observed);
    let hits = 1 + null.simulated.iter().filter(|&&s| f(s) >= obs).count();
    hits as f64 / (null.simulated.len() + 1) as f64
}

/// Raw engine output before multiplicity control.
#[derive(Debug, Clone)]
pub struct PermutationOutcome {
    pub products: Vec<String>,
    pub terms: Vec<String>,
    pub assessors: usize,
    pub permutations: usize,
    pub seed: u64,
    pub tests: BTreeSet<TestId>,
    layout: StatLayout,
    /// Observed statistics on the percentage scale, flattened.
    observed: Vec<f64>,
    /// Signed Test 3 deviations of the observed table, product-major.
    cell_deviation: Vec<f64>,
    /// Simulated values at least as extreme as the observed one.
    exceed: Vec<u32>,
    /// Simulated flattened statistics per permutation (index order), when kept.
    kept: Vec<Vec<f64>>,
    kept_all: bool,
}

impl PermutationOutcome {
    fn range(&self, test: TestId) -> std::ops::Range<usize> {
        let l = &self.layout;
        match test {
            TestId::Global => 0..1,
            TestId::Term => l.test2_offset()..l.test3_offset(),
            TestId::Cell => l.test3_offset()..l.test4_offset(),
            TestId::Pair => l.test4_offset()..l.test5_offset(),
            TestId::PairTerm => l.test5_offset()..l.len(),
        }
    }

    fn statistic_id(&self, test: TestId, k: usize) -> StatisticId {
        let nt = self.terms.len();
        let pairs = product_pairs(self.products.len());
        let (product, product2, term) = match test {
            TestId::Global => (None, None, None),
            TestId::Term => (None, None, Some(k)),
            TestId::Cell => (Some(k / nt), None, Some(k % nt)),
            TestId::Pair => (Some(pairs[k].0), Some(pairs[k].1), None),
            TestId::PairTerm => {
                let (i, j) = pairs[k / nt];
                (Some(i), Some(j), Some(k % nt))
            }
        };
        StatisticId {
            test,
            product,
            product2,
            term,
        }
    }

    /// Observed statistics of one test (percentage scale; Test 5 signed).
    pub fn observed(&self, test: TestId) -> &[f64] {
        &self.observed[self.range(test)]
    }

    pub fn pvalues(&self, test: TestId) -> Vec<f64> {
        let denom = (self.permutations + 1) as f64;
        self.exceed[self.range(test)]
            .iter()
            .map(|&e| (e as f64 + 1.0) / denom)
            .collect()
    }

    /// Null distributions for one test. Available for Tests 1 and 2, and
    /// for every test when the plan asked to retain everything.
    pub fn null_distributions(&self, test: TestId) -> Option<Vec<NullDistribution>> {
        let range = self.range(test);
        if !self.kept_all && !matches!(test, TestId::Global | TestId::Term) {
            return None;
        }
        let scale = 100.0 / self.assessors as f64;
        Some(
            range
                .clone()
                .enumerate()
                .map(|(k, i)| NullDistribution {
                    statistic: self.statistic_id(test, k),
                    observed: self.observed[i],
                    simulated: self.kept.iter().map(|v| v[i] * scale).collect(),
                })
                .collect(),
        )
    }

    pub fn statistic_ids(&self, test: TestId) -> Vec<StatisticId> {
        (0..self.range(test).len())
            .map(|k| self.statistic_id(test, k))
            .collect()
    }
}

struct Accumulator {
    exceed: Vec<u32>,
    kept: Vec<(u64, Vec<f64>)>,
    counts: Vec<u32>,
    values: DMatrix<f64>,
    stats: Vec<f64>,
    scratch: Vec<f64>,
    perm: Vec<usize>,
}

/// Generates the null distributions of every requested statistic.
pub fn simulate(array: &CataArray, plan: &PermutationPlan) -> Result<PermutationOutcome> {
    plan.validate()?;
    let run = || simulate_inner(array, plan);
    match plan.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn simulate_inner(array: &CataArray, plan: &PermutationPlan) -> Result<PermutationOutcome> {
    let (na, np, nt) = (array.n_assessors(), array.n_products(), array.n_terms());
    let layout = StatLayout::new(np, nt);
    let n_stats = layout.len();
    let keep_len = if plan.retain_all {
        n_stats
    } else {
        layout.test3_offset()
    };
    let two_sided_from = layout.test5_offset();

    let counts = array.counts();
    let observed_values = DMatrix::from_fn(np, nt, |p, t| counts[p * nt + t] as f64);
    let mut observed_counts = vec![0.0; n_stats];
    layout.evaluate(&observed_values, &mut Vec::new(), &mut observed_counts);
    let observed_abs: Vec<f64> = observed_counts
        .iter()
        .enumerate()
        .map(|(i, &v)| if i >= two_sided_from { v.abs() } else { v })
        .collect();

    let new_acc = || Accumulator {
        exceed: vec![0; n_stats],
        kept: Vec::new(),
        counts: vec![0; np * nt],
        values: DMatrix::zeros(np, nt),
        stats: vec![0.0; n_stats],
        scratch: Vec::with_capacity(np.max(nt)),
        perm: vec![0; np],
    };

    let acc = (1..=plan.permutations as u64)
        .into_par_iter()
        .fold(new_acc, |mut acc, b| {
            let mut rng = permutation_rng(plan.seed, b);
            acc.counts.iter_mut().for_each(|c| *c = 0);
            for a in 0..na {
                draw_relabelling(&mut acc.perm, &mut rng);
                let slice = array.slice(a);
                for (p, &src) in acc.perm.iter().enumerate() {
                    let row = &slice[src * nt..(src + 1) * nt];
                    for (c, &v) in acc.counts[p * nt..(p + 1) * nt].iter_mut().zip(row) {
                        *c += v as u32;
                    }
                }
            }
            for p in 0..np {
                for t in 0..nt {
                    acc.values[(p, t)] = acc.counts[p * nt + t] as f64;
                }
            }
            layout.evaluate(&acc.values, &mut acc.scratch, &mut acc.stats);
            for (i, (e, &s)) in acc.exceed.iter_mut().zip(&acc.stats).enumerate() {
                let s = if i >= two_sided_from { s.abs() } else { s };
                if s >= observed_abs[i] {
                    *e += 1;
                }
            }
            acc.kept.push((b, acc.stats[..keep_len].to_vec()));
            acc
        })
        .map(|acc| (acc.exceed, acc.kept))
        .reduce(
            || (vec![0; n_stats], Vec::new()),
            |(mut e1, mut k1), (e2, k2)| {
                for (a, b) in e1.iter_mut().zip(e2) {
                    *a += b;
                }
                k1.extend(k2);
                (e1, k1)
            },
        );
    let (exceed, mut kept) = acc;
    kept.sort_by_key(|(b, _)| *b);

    let scale = 100.0 / na as f64;
    let table = array.aggregate();
    let mut cell_deviation = vec![0.0; np * nt];
    for t in 0..nt {
        let m = median(&table.column(t))?;
        for p in 0..np {
            cell_deviation[p * nt + t] = table.value(p, t) - m;
        }
    }

    Ok(PermutationOutcome {
        products: array.products().to_vec(),
        terms: array.terms().to_vec(),
        assessors: na,
        permutations: plan.permutations,
        seed: plan.seed,
        tests: plan.tests.clone(),
        layout,
        observed: observed_counts.iter().map(|v| v * scale).collect(),
        cell_deviation,
        exceed,
        kept: kept.into_iter().map(|(_, v)| v).collect(),
        kept_all: plan.retain_all,
    })
}

/// Multiplicity settings applied per test family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdrOptions {
    pub alpha: f64,
    /// When false, hypotheses are flagged by `p <= alpha`.
    pub control: bool,
    pub rule: BhRule,
}

impl Default for FdrOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            control: true,
            rule: BhRule::Strict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisRow {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub product: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub product2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub term: Option<String>,
    /// Statistic on the percentage scale; signed for Test 5.
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sign: Option<Sign>,
    pub p_value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub step_up: Option<f64>,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: TestId,
    pub permutations: usize,
    pub seed: u64,
    pub alpha: f64,
    pub fdr_controlled: bool,
    pub family_size: usize,
    /// BH critical value; `None` without FDR control or when nothing qualifies.
    pub critical_value: Option<f64>,
    pub boundary_ties: usize,
    pub rows: Vec<HypothesisRow>,
}

impl TestReport {
    pub fn n_significant(&self) -> usize {
        self.rows.iter().filter(|r| r.significant).count()
    }

    pub fn pvalues(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.p_value).collect()
    }
}

/// Applies multiplicity control to one test family of the outcome.
pub fn build_report(outcome: &PermutationOutcome, test: TestId, fdr: &FdrOptions) -> Result<TestReport> {
    let np = outcome.products.len();
    let nt = outcome.terms.len();
    let pvalues = outcome.pvalues(test);
    let observed = outcome.observed(test);
    let ids = outcome.statistic_ids(test);
    let family_size = test.family_size(np, nt);

    let use_bh = fdr.control && test != TestId::Global;
    let (flags, step_up, critical, ties) = if use_bh {
        let r = bh_stepup(&pvalues, fdr.alpha, Some(family_size), fdr.rule)?;
        (
            r.significant,
            r.step_up_values.into_iter().map(Some).collect(),
            r.critical_value,
            r.boundary_ties,
        )
    } else {
        if !(fdr.alpha > 0.0 && fdr.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha {} outside (0, 1)", fdr.alpha)));
        }
        (
            pvalues.iter().map(|&p| p <= fdr.alpha).collect(),
            vec![None; pvalues.len()],
            None,
            0,
        )
    };

    let rows = ids
        .iter()
        .enumerate()
        .map(|(k, id)| {
            let sign = match test {
                TestId::Cell => {
                    let (p, t) = (id.product.unwrap(), id.term.unwrap());
                    Some(Sign::of(outcome.cell_deviation[p * nt + t]))
                }
                TestId::PairTerm => Some(Sign::of(observed[k])),
                _ => None,
            };
            HypothesisRow {
                product: id.product.map(|p| outcome.products[p].clone()),
                product2: id.product2.map(|p| outcome.products[p].clone()),
                term: id.term.map(|t| outcome.terms[t].clone()),
                statistic: observed[k],
                sign,
                p_value: pvalues[k],
                step_up: step_up[k],
                significant: flags[k],
            }
        })
        .collect();

    Ok(TestReport {
        test,
        permutations: outcome.permutations,
        seed: outcome.seed,
        alpha: fdr.alpha,
        fdr_controlled: use_bh,
        family_size,
        critical_value: critical,
        boundary_ties: ties,
        rows,
    })
}

/// Runs the requested tests: one shared pass of `B` permutations, then
/// per-family multiplicity control.
pub fn run_tests(
    array: &CataArray,
    plan: &PermutationPlan,
    fdr: &FdrOptions,
) -> Result<(BTreeMap<TestId, TestReport>, PermutationOutcome)> {
    let outcome = simulate(array, plan)?;
    let mut reports = BTreeMap::new();
    for &test in &plan.tests {
        reports.insert(test, build_report(&outcome, test, fdr)?);
    }
    Ok((reports, outcome))
}

/// Hypotheses whose p-values differ by more than `tolerance` between two
/// runs of the same test (typically two seeds).
pub fn unstable_hypotheses(a: &TestReport, b: &TestReport, tolerance: f64) -> Vec<usize> {
    a.rows
        .iter()
        .zip(&b.rows)
        .enumerate()
        .filter(|(_, (x, y))| (x.p_value - y.p_value).abs() > tolerance)
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> CataArray {
        // Two assessors, both citing product 1 only.
        CataArray::from_fn(2, 2, 1, |_, p, _| p == 0).unwrap()
    }

    #[test]
    fn permutation_preserves_row_multisets() {
        let array = CataArray::from_fn(5, 4, 3, |a, p, t| (a * 7 + p * 3 + t) % 3 == 0).unwrap();
        let mut rng = permutation_rng(9, 1);
        let out = permute_within_assessor(&array, &mut rng);
        for a in 0..5 {
            let rows = |arr: &CataArray| {
                let mut r: Vec<Vec<u8>> = arr.slice(a).chunks(3).map(<[u8]>::to_vec).collect();
                r.sort();
                r
            };
            assert_eq!(rows(&array), rows(&out));
        }
    }

    #[test]
    fn joint_outcomes_uniform() {
        // Four equally likely joint outcomes for (A=2, P=2, T=1).
        let array = tiny();
        let draws = 40_000u64;
        let mut freq = [0u32; 4];
        for b in 0..draws {
            let mut rng = permutation_rng(77, b);
            let out = permute_within_assessor(&array, &mut rng);
            let code = (out.cell(0, 0, 0) as usize) * 2 + out.cell(1, 0, 0) as usize;
            freq[code] += 1;
        }
        for f in freq {
            let share = f as f64 / draws as f64;
            assert!((share - 0.25).abs() < 0.02, "share {share}");
        }
    }

    #[test]
    fn pvalue_examples() {
        let null = |obs: f64, sim: Vec<f64>| NullDistribution {
            statistic: StatisticId {
                test: TestId::Global,
                product: None,
                product2: None,
                term: None,
            },
            observed: obs,
            simulated: sim,
        };
        assert_eq!(pvalue(&null(5.0, vec![2.0, 2.0, 2.0]), false), 0.25);
        assert_eq!(pvalue(&null(5.0, vec![1.0; 9_999]), false), 0.0001);
        assert_eq!(pvalue(&null(3.0, vec![3.0; 7]), false), 1.0);
        assert_eq!(pvalue(&null(-4.0, vec![4.0, 1.0, -5.0]), true), 0.75);
    }

    #[test]
    fn no_signal_gives_unit_pvalues() {
        let array = CataArray::from_fn(2, 2, 1, |_, _, _| true).unwrap();
        let (reports, _) = run_tests(&array, &PermutationPlan::new(50, 1), &FdrOptions::default()).unwrap();
        for r in reports.values() {
            assert!(r.rows.iter().all(|row| row.p_value == 1.0), "{}", r.test);
            assert_eq!(r.n_significant(), 0);
        }
    }

    #[test]
    fn zero_permutations_give_unit_pvalues() {
        let array = CataArray::from_fn(4, 3, 2, |a, p, t| (a + p + t) % 2 == 0).unwrap();
        let (reports, _) = run_tests(&array, &PermutationPlan::new(0, 1), &FdrOptions::default()).unwrap();
        for r in reports.values() {
            assert!(r.rows.iter().all(|row| row.p_value == 1.0));
        }
    }

    #[test]
    fn engine_tables_match_permuted_table() {
        let array = CataArray::from_fn(6, 3, 2, |a, p, t| (a * 5 + p * 2 + t) % 4 < 2).unwrap();
        let plan = PermutationPlan {
            retain_all: true,
            ..PermutationPlan::new(20, 42)
        };
        let outcome = simulate(&array, &plan).unwrap();
        let layout = StatLayout::new(3, 2);
        for b in 1..=20u64 {
            let table = permuted_table(&array, 42, b);
            let mut stats = vec![0.0; layout.len()];
            layout.evaluate(table.values(), &mut Vec::new(), &mut stats);
            let kept = &outcome.kept[(b - 1) as usize];
            for (x, y) in stats.iter().zip(kept) {
                assert!((x - y * 100.0 / 6.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn counts_agree_with_null_distributions() {
        let array = CataArray::from_fn(5, 3, 2, |a, p, t| (a * 3 + p + 2 * t) % 3 == 0).unwrap();
        let plan = PermutationPlan {
            retain_all: true,
            ..PermutationPlan::new(300, 5)
        };
        let outcome = simulate(&array, &plan).unwrap();
        for test in TestId::ALL {
            let nulls = outcome.null_distributions(test).unwrap();
            let direct: Vec<f64> = nulls.iter().map(|n| pvalue(n, test.two_sided())).collect();
            assert_eq!(direct, outcome.pvalues(test), "{test}");
        }
    }

    #[test]
    fn column_sums_preserved_per_permutation() {
        let array = CataArray::from_fn(7, 4, 3, |a, p, t| (a * 11 + p * 5 + t * 3) % 7 < 3).unwrap();
        let total: u32 = array.counts().iter().sum();
        for b in 1..=10 {
            let mut rng = permutation_rng(3, b);
            let out = permute_within_assessor(&array, &mut rng);
            for a in 0..7 {
                for t in 0..3 {
                    let before: u8 = (0..4).map(|p| array.cell(a, p, t)).sum();
                    let after: u8 = (0..4).map(|p| out.cell(a, p, t)).sum();
                    assert_eq!(before, after);
                }
            }
            assert_eq!(out.counts().iter().sum::<u32>(), total);
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let array = CataArray::from_fn(12, 4, 5, |a, p, t| (a * 13 + p * 7 + t * 3) % 5 < 2).unwrap();
        let fdr = FdrOptions::default();
        let one = run_tests(&array, &PermutationPlan::new(400, 11).with_workers(1), &fdr).unwrap().0;
        let four = run_tests(&array, &PermutationPlan::new(400, 11).with_workers(4), &fdr).unwrap().0;
        assert_eq!(one, four);
    }

    #[test]
    fn test_subset_and_validation() {
        let plan = PermutationPlan::new(10, 1).with_tests([]);
        assert!(plan.validate().is_err());
        assert!(TestId::from_number(6).is_err());
        let array = tiny();
        let (reports, _) = run_tests(
            &array,
            &PermutationPlan::new(10, 1).with_tests([TestId::Pair]),
            &FdrOptions::default(),
        )
        .unwrap();
        assert_eq!(reports.keys().copied().collect::<Vec<_>>(), vec![TestId::Pair]);
    }
}
