//! Batch driver: runs the analyses, then writes `results.json`,
//! `summary.txt` and `fig_*.svg` into the output directory.

pub mod svg;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{classical_report, ClassicalReport};
use crate::cluster::{complete_linkage, product_distances, term_distances, Dendrogram, DistanceMatrix};
use crate::data::{CataArray, CataTable};
use crate::error::{Error, Result};
use crate::fdr::BhRule;
use crate::l1pca::{bootstrap_scores, covering_ellipse, fit, scree, EllipseSpec, FitOptions, L1PcaModel, ScreeTable};
use crate::perm::{run_tests, FdrOptions, PermutationPlan, TestId, TestReport, DEFAULT_PERMUTATIONS};
use crate::stats::{term_summaries, TermSummary};

pub use svg::{render_biplot, render_heatmap};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Tests 1–5 with multiplicity control.
    Analyze,
    Cluster,
    L1pca,
    Classical,
    All,
}

impl Command {
    fn permutation(self) -> bool {
        matches!(self, Command::Analyze | Command::All)
    }
    fn cluster(self) -> bool {
        matches!(self, Command::Cluster | Command::All)
    }
    fn l1pca(self) -> bool {
        matches!(self, Command::L1pca | Command::All)
    }
    fn classical(self) -> bool {
        matches!(self, Command::Classical | Command::All)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub input: PathBuf,
    #[serde(skip)]
    pub out: PathBuf,
    pub permutations: usize,
    /// `None` draws a random seed, recorded in the provenance.
    pub seed: Option<u64>,
    pub alpha: f64,
    pub fdr: bool,
    pub tests: BTreeSet<TestId>,
    pub product_clusters: usize,
    pub term_clusters: usize,
    pub components: usize,
    /// Largest K in the scree table; `None` means `min(P, T)`.
    pub max_components: Option<usize>,
    pub replicates: usize,
    pub coverage: f64,
    /// Loading vector multiplier in the biplot; `None` picks one so the
    /// longest vector matches the largest score.
    pub loading_scale: Option<f64>,
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn new(command: Command, input: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            command,
            input: input.into(),
            out: out.into(),
            permutations: DEFAULT_PERMUTATIONS,
            seed: None,
            alpha: 0.05,
            fdr: true,
            tests: TestId::ALL.into_iter().collect(),
            product_clusters: 2,
            term_clusters: 2,
            components: 2,
            max_components: None,
            replicates: 1000,
            coverage: 0.95,
            loading_scale: None,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} not in (0, 1)", self.alpha));
        }
        if self.tests.is_empty() {
            return bad("no tests selected".into());
        }
        if self.product_clusters == 0 || self.term_clusters == 0 {
            return bad("cluster counts must be positive".into());
        }
        if self.components == 0 {
            return bad("component count must be positive".into());
        }
        if self.max_components == Some(0) {
            return bad("kmax must be positive".into());
        }
        if self.replicates == 0 {
            return bad("need at least one bootstrap replicate".into());
        }
        if !(self.coverage > 0.0 && self.coverage <= 1.0) {
            return bad(format!("coverage {} not in (0, 1]", self.coverage));
        }
        if let Some(s) = self.loading_scale {
            if !(s.is_finite() && s >= 0.0) {
                return bad(format!("loading scale {s}"));
            }
        }
        if self.workers == Some(0) {
            return bad("worker count must be positive".into());
        }
        Ok(())
    }
}

/// Seeds for each random component, derived from the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedSeeds {
    pub permutation: u64,
    pub l1pca_restarts: u64,
    pub bootstrap: u64,
}

impl DerivedSeeds {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            permutation: seed,
            l1pca_restarts: splitmix64(seed ^ 0x6c31_7063_6100_0001),
            bootstrap: splitmix64(seed ^ 0x6c31_7063_6100_0002),
        }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub seed: u64,
    /// `"given"` or `"random"`.
    pub seed_source: String,
    pub derived_seeds: DerivedSeeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub assessors: usize,
    pub products: Vec<String>,
    pub terms: Vec<String>,
    /// Citation percentages, one row per product.
    pub table: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullBar {
    pub value: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationResults {
    pub permutations: usize,
    pub seed: u64,
    pub tests: Vec<TestReport>,
    /// Test 1 simulated values as distinct value counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_null: Option<Vec<NullBar>>,
}

impl PermutationResults {
    pub fn report(&self, test: TestId) -> Option<&TestReport> {
        self.tests.iter().find(|r| r.test == test)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResults {
    pub product_distances: DistanceMatrix,
    pub term_distances: DistanceMatrix,
    pub product_dendrogram: Dendrogram,
    pub term_dendrogram: Dendrogram,
    pub product_tree: String,
    pub term_tree: String,
    pub product_clusters: Vec<Vec<String>>,
    pub term_clusters: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1PcaResults {
    pub model: L1PcaModel,
    pub scree: ScreeTable,
    pub replicates: usize,
    pub bootstrap_seed: u64,
    pub coverage: f64,
    pub ellipses: Vec<EllipseSpec>,
    /// Products without an ellipse and why.
    pub notes: Vec<String>,
    pub loading_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Results {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub data: DataSummary,
    pub term_summaries: Vec<TermSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<PermutationResults>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clustering: Option<ClusterResults>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1pca: Option<L1PcaResults>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalReport>,
}

/// Rounds to six significant digits.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn sig6_all(v: &mut [f64]) {
    for x in v {
        *x = sig6(*x);
    }
}

fn sig6_rows(v: &mut [Vec<f64>]) {
    for r in v {
        sig6_all(r);
    }
}

impl Results {
    /// Rounds every reported number except p-values, critical values and
    /// significance levels to six significant digits.
    fn round(&mut self) {
        sig6_rows(&mut self.data.table);
        for s in &mut self.term_summaries {
            s.median = sig6(s.median);
            s.mad = sig6(s.mad);
        }
        if let Some(p) = &mut self.permutation {
            for rep in &mut p.tests {
                for r in &mut rep.rows {
                    r.statistic = sig6(r.statistic);
                    r.step_up = r.step_up.map(sig6);
                }
            }
            if let Some(null) = &mut p.global_null {
                for b in null {
                    b.value = sig6(b.value);
                }
            }
        }
        if let Some(c) = &mut self.clustering {
            sig6_all(c.product_distances.values_mut());
            sig6_all(c.term_distances.values_mut());
            for m in c.product_dendrogram.merges.iter_mut().chain(&mut c.term_dendrogram.merges) {
                m.height = sig6(m.height);
            }
        }
        if let Some(l) = &mut self.l1pca {
            let m = &mut l.model;
            sig6_all(&mut m.medians);
            sig6_rows(&mut m.scores);
            sig6_rows(&mut m.loadings);
            m.objective = sig6(m.objective);
            m.total_l1 = sig6(m.total_l1);
            m.prop = sig6(m.prop);
            for e in &mut l.scree.entries {
                e.prop = sig6(e.prop);
                e.gain = sig6(e.gain);
                e.objective = sig6(e.objective);
            }
            for e in &mut l.ellipses {
                sig6_all(&mut e.center);
                sig6_all(&mut e.semi_axes);
                e.angle = sig6(e.angle);
                e.coverage = sig6(e.coverage);
            }
            l.loading_scale = sig6(l.loading_scale);
        }
        if let Some(c) = &mut self.classical {
            for r in &mut c.cochran {
                r.statistic = r.statistic.map(sig6);
                r.step_up = r.step_up.map(sig6);
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Runs the configured analyses on an already loaded array.
pub fn analyse(array: &CataArray, config: &RunConfig, seed: u64, seed_source: &str) -> Result<Results> {
    config.validate()?;
    let seeds = DerivedSeeds::from_seed(seed);
    let table = array.aggregate();
    let cmd = config.command;

    let permutation = if cmd.permutation() {
        Some(permutation_results(array, config, seeds.permutation)?)
    } else {
        None
    };
    let clustering = if cmd.cluster() {
        Some(cluster_results(&table, config)?)
    } else {
        None
    };
    let l1pca = if cmd.l1pca() {
        Some(l1pca_results(array, &table, config, &seeds)?)
    } else {
        None
    };
    let classical = if cmd.classical() {
        Some(classical_report(array, config.alpha, config.fdr, BhRule::Strict)?)
    } else {
        None
    };

    let mut results = Results {
        schema_version: SCHEMA_VERSION,
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: RunConfig {
                seed: Some(seed),
                ..config.clone()
            },
            seed,
            seed_source: seed_source.into(),
            derived_seeds: seeds,
        },
        data: DataSummary {
            assessors: array.n_assessors(),
            products: array.products().to_vec(),
            terms: array.terms().to_vec(),
            table: svg::table_rows(&table),
        },
        term_summaries: term_summaries(&table),
        permutation,
        clustering,
        l1pca,
        classical,
    };
    results.round();
    Ok(results)
}

fn permutation_results(array: &CataArray, config: &RunConfig, seed: u64) -> Result<PermutationResults> {
    let mut plan = PermutationPlan::new(config.permutations, seed).with_tests(config.tests.iter().copied());
    if let Some(w) = config.workers {
        plan = plan.with_workers(w);
    }
    let fdr = FdrOptions {
        alpha: config.alpha,
        control: config.fdr,
        rule: BhRule::Strict,
    };
    let (reports, outcome) = run_tests(array, &plan, &fdr)?;
    let global_null = if config.tests.contains(&TestId::Global) {
        outcome.null_distributions(TestId::Global).map(|nulls| {
            let mut values = nulls[0].simulated.clone();
            values.sort_by(f64::total_cmp);
            let mut bars: Vec<NullBar> = Vec::new();
            for v in values {
                match bars.last_mut() {
                    Some(b) if b.value == v => b.count += 1,
                    _ => bars.push(NullBar { value: v, count: 1 }),
                }
            }
            bars
        })
    } else {
        None
    };
    Ok(PermutationResults {
        permutations: config.permutations,
        seed,
        tests: reports.into_values().collect(),
        global_null,
    })
}

fn cluster_results(table: &CataTable, config: &RunConfig) -> Result<ClusterResults> {
    let pd = product_distances(table);
    let td = term_distances(table);
    let product_dendrogram = complete_linkage(&pd)?;
    let term_dendrogram = complete_linkage(&td)?;
    let kp = config.product_clusters.min(table.n_products());
    let kt = config.term_clusters.min(table.n_terms());
    Ok(ClusterResults {
        product_tree: product_dendrogram.to_text(),
        term_tree: term_dendrogram.to_text(),
        product_clusters: product_dendrogram.cut_labels(kp)?,
        term_clusters: if table.n_terms() >= 2 {
            term_dendrogram.cut_labels(kt)?
        } else {
            vec![table.terms().to_vec()]
        },
        product_distances: pd,
        term_distances: td,
        product_dendrogram,
        term_dendrogram,
    })
}

fn l1pca_results(array: &CataArray, table: &CataTable, config: &RunConfig, seeds: &DerivedSeeds) -> Result<L1PcaResults> {
    let limit = table.n_products().min(table.n_terms());
    if config.components > limit {
        return Err(Error::InvalidParameter(format!(
            "component count {} exceeds min(P, T) = {limit}",
            config.components
        )));
    }
    let kmax = config.max_components.unwrap_or(limit);
    if kmax > limit {
        return Err(Error::InvalidParameter(format!("kmax {kmax} exceeds min(P, T) = {limit}")));
    }
    let opts = FitOptions {
        seed: seeds.l1pca_restarts,
        ..FitOptions::default()
    };
    let model = fit(table, config.components, &opts)?;
    let scree = scree(table, kmax, &opts)?;
    let clouds = bootstrap_scores(array, &model, config.replicates, seeds.bootstrap)?;
    let mut ellipses = Vec::new();
    let mut notes = Vec::new();
    if model.components >= 2 {
        for (p, name) in model.products.iter().enumerate() {
            match covering_ellipse(name, &clouds.plane(p), config.coverage) {
                Ok(e) => ellipses.push(e),
                Err(Error::DegenerateGeometry(why)) => notes.push(format!("{name}: no ellipse ({why})")),
                Err(e) => return Err(e),
            }
        }
    } else {
        notes.push("one component: no biplot or ellipses".into());
    }
    let loading_scale = config.loading_scale.unwrap_or_else(|| {
        let score = model.scores.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let load = model.loadings.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if load > 0.0 && score > 0.0 {
            score / load
        } else {
            1.0
        }
    });
    Ok(L1PcaResults {
        model,
        scree,
        replicates: config.replicates,
        bootstrap_seed: seeds.bootstrap,
        coverage: config.coverage,
        ellipses,
        notes,
        loading_scale,
    })
}

/// Renders every figure the results support, as `(file name, SVG)`.
pub fn render_figures(results: &Results) -> Result<Vec<(String, String)>> {
    let mut figs = Vec::new();
    let perm = results.permutation.as_ref();
    let clusters = results
        .clustering
        .as_ref()
        .map(|c| (&c.product_dendrogram, &c.term_dendrogram));
    if let Some(p) = perm {
        if let (Some(null), Some(rep)) = (&p.global_null, p.report(TestId::Global)) {
            let hist: Vec<(f64, usize)> = null.iter().map(|b| (b.value, b.count)).collect();
            let row = &rep.rows[0];
            figs.push(("fig_test1_null.svg".into(), svg::render_null_chart(&hist, row.statistic, row.p_value)));
        }
    }
    figs.push((
        "fig_term_mad.svg".into(),
        svg::render_mad_chart(&results.term_summaries, perm.and_then(|p| p.report(TestId::Term))),
    ));
    if let Some(p) = perm {
        for rep in &p.tests {
            let name = match rep.test {
                TestId::Global => continue,
                TestId::Term => "fig_test2_heatmap.svg",
                TestId::Cell => "fig_test3_heatmap.svg",
                TestId::Pair => "fig_test4_heatmap.svg",
                TestId::PairTerm => "fig_test5_heatmap.svg",
            };
            figs.push((name.into(), render_heatmap(rep, clusters)?));
        }
    }
    if let Some(c) = &results.clustering {
        figs.push((
            "fig_dendrograms.svg".into(),
            svg::render_dendrograms(&c.product_dendrogram, &c.term_dendrogram),
        ));
    }
    if let Some(l) = &results.l1pca {
        if l.model.components >= 2 {
            figs.push((
                "fig_biplot.svg".into(),
                render_biplot(&l.model, &l.ellipses, l.loading_scale, Some(&l.scree))?,
            ));
        }
        figs.push(("fig_scree.svg".into(), svg::render_scree(&l.scree)));
        figs.push((
            "fig_reconstruction.svg".into(),
            svg::render_reconstruction(&results.data.table, &svg::reconstruction_rows(&l.model)),
        ));
    }
    Ok(figs)
}

fn fmt_p(p: f64) -> String {
    if p >= 1e-4 {
        let s = format!("{p:.4}");
        if s.parse::<f64>().ok() == Some(p) {
            s
        } else {
            format!("{}", sig6(p))
        }
    } else {
        format!("{p:.3e}")
    }
}

fn fmt_opt_p(p: Option<f64>) -> String {
    p.map(fmt_p).unwrap_or_else(|| "none".into())
}

/// Human-readable digest. Every significant count here equals the number
/// of flags in the matching part of the results.
pub fn summary(results: &Results) -> String {
    let mut s = String::new();
    let pv = &results.provenance;
    let _ = writeln!(s, "{} {}", pv.tool, pv.version);
    let _ = writeln!(
        s,
        "input: {} ({} assessors, {} products, {} terms)",
        pv.config.input.display(),
        results.data.assessors,
        results.data.products.len(),
        results.data.terms.len()
    );
    let _ = writeln!(s, "seed: {} ({})", pv.seed, pv.seed_source);
    let alpha = pv.config.alpha;
    let control = if pv.config.fdr {
        format!("FDR {alpha}")
    } else {
        format!("p <= {alpha}, uncorrected")
    };

    if let Some(p) = &results.permutation {
        let _ = writeln!(s, "\npermutation tests: B = {}, {control}", p.permutations);
        for rep in &p.tests {
            if rep.test == TestId::Global {
                let r = &rep.rows[0];
                let _ = writeln!(
                    s,
                    "global test p = {} (statistic {})",
                    fmt_p(r.p_value),
                    r.statistic
                );
                continue;
            }
            let unit = match rep.test {
                TestId::Term => "terms",
                TestId::Cell => "product-term cells",
                TestId::Pair => "product pairs",
                _ => "pair-term comparisons",
            };
            let _ = write!(
                s,
                "{}: {} of {} {unit} significant",
                rep.test,
                rep.n_significant(),
                rep.rows.len()
            );
            if rep.fdr_controlled {
                let _ = write!(s, ", critical value {}", fmt_opt_p(rep.critical_value));
                if rep.boundary_ties > 0 {
                    let _ = write!(s, ", {} p-values equal to their BH entry", rep.boundary_ties);
                }
            }
            s.push('\n');
        }
    }
    if let Some(c) = &results.clustering {
        let _ = writeln!(s, "\nproduct tree: {}", c.product_tree);
        for (i, g) in c.product_clusters.iter().enumerate() {
            let _ = writeln!(s, "product cluster {}: {}", i + 1, g.join(", "));
        }
        let _ = writeln!(s, "term tree: {}", c.term_tree);
        for (i, g) in c.term_clusters.iter().enumerate() {
            let _ = writeln!(s, "term cluster {} ({} terms): {}", i + 1, g.len(), g.join(", "));
        }
    }
    if let Some(l) = &results.l1pca {
        let m = &l.model;
        let _ = writeln!(
            s,
            "\nL1-PCA: K = {}, prop = {}, converged = {}{}",
            m.components,
            m.prop,
            m.converged,
            if m.degenerate { ", degenerate table" } else { "" }
        );
        for e in &l.scree.entries {
            let _ = writeln!(
                s,
                "  K = {}: prop {}, gain {}, L1 residual {}",
                e.components, e.prop, e.gain, e.objective
            );
        }
        let _ = writeln!(
            s,
            "bootstrap: {} replicates, {} ellipses at coverage {}",
            l.replicates,
            l.ellipses.len(),
            l.coverage
        );
        for n in &l.notes {
            let _ = writeln!(s, "  {n}");
        }
    }
    if let Some(c) = &results.classical {
        let _ = writeln!(s, "\nclassical tests: {control}");
        let _ = write!(
            s,
            "Cochran's Q: {} of {} terms significant",
            c.cochran_significant(),
            c.cochran.len()
        );
        if c.fdr_controlled {
            let _ = write!(s, ", critical value {}", fmt_opt_p(c.cochran_critical_value));
        }
        s.push('\n');
        let _ = write!(
            s,
            "McNemar: {} of {} pair-term tests significant",
            c.mcnemar_significant(),
            c.mcnemar.len()
        );
        if c.fdr_controlled {
            let _ = write!(s, ", critical value {}", fmt_opt_p(c.mcnemar_critical_value));
        }
        s.push('\n');
        let _ = writeln!(s, "McNemar uncorrected (p <= {alpha}): {}", c.mcnemar_uncorrected());
        for pc in &c.pair_counts {
            let _ = writeln!(s, "  {}: {} significant, {} uncorrected", pc.term, pc.significant, pc.uncorrected);
        }
    }
    s
}

/// Output of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub results: Results,
    pub files: Vec<PathBuf>,
}

/// Loads the input, runs the analyses and writes every artifact. Nothing is
/// left in the output directory when any step fails. Without a configured
/// seed a random one is drawn and recorded.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    match config.seed {
        Some(s) => run_seeded(config, s, "given"),
        None => run_seeded(config, random_seed(), "random"),
    }
}

pub fn random_seed() -> u64 {
    rand::rng().random::<u64>()
}

/// Like [`run`] with an explicit seed and a note on where it came from.
pub fn run_seeded(config: &RunConfig, seed: u64, seed_source: &str) -> Result<RunOutput> {
    config.validate()?;
    let array = CataArray::read_long_path(&config.input)?;
    let results = analyse(&array, config, seed, seed_source)?;
    let mut files = vec![
        ("results.json".to_string(), results.to_json()?),
        ("summary.txt".to_string(), summary(&results)),
    ];
    files.extend(render_figures(&results)?);
    let written = write_all(&config.out, &files)?;
    Ok(RunOutput { results, files: written })
}

fn write_all(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut done: Vec<PathBuf> = Vec::new();
    for (name, body) in files {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.partial"));
        let step = (|| -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(body.as_bytes())?;
            f.sync_all()?;
            fs::rename(&tmp, &target)
        })();
        if let Err(e) = step {
            let _ = fs::remove_file(&tmp);
            for p in &done {
                let _ = fs::remove_file(p);
            }
            return Err(e.into());
        }
        done.push(target);
    }
    Ok(done)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_rounding() {
        assert_eq!(sig6(1.0 / 3.0), 0.333333);
        assert_eq!(sig6(123456789.0), 123457000.0);
        assert_eq!(sig6(0.0), 0.0);
        assert_eq!(sig6(-2.5), -2.5);
    }

    #[test]
    fn derived_seeds_differ() {
        let s = DerivedSeeds::from_seed(7);
        assert_eq!(s.permutation, 7);
        assert_ne!(s.l1pca_restarts, s.bootstrap);
        assert_eq!(s, DerivedSeeds::from_seed(7));
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new(Command::All, "x.csv", "out");
        assert!(c.validate().is_ok());
        c.alpha = 1.0;
        assert!(c.validate().is_err());
        c.alpha = 0.05;
        c.coverage = 0.0;
        assert!(c.validate().is_err());
        c.coverage = 0.95;
        c.tests.clear();
        assert!(matches!(c.validate(), Err(e) if e.exit_code() == 2));
    }

    #[test]
    fn p_formatting() {
        assert_eq!(fmt_p(1.0 / 10000.0), "0.0001");
        assert_eq!(fmt_p(1.0), "1.0000");
        assert_eq!(fmt_p(1.0 / 3.0), "0.333333");
        assert_eq!(fmt_p(2.5e-5), "2.500e-5");
    }
}
