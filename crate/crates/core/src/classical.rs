//! Cochran's Q and exact McNemar tests on the raw binary array.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::gamma_ur;

use crate::data::CataArray;
use crate::error::{Error, Result};
use crate::fdr::{bh_stepup, BhRule};
use crate::stats::product_pairs;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CochranQ {
    /// `None` when every assessor answers the same for all products.
    pub statistic: Option<f64>,
    pub df: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discordance {
    /// Assessors citing the term for the first product only.
    pub first_only: u32,
    /// Assessors citing the term for the second product only.
    pub second_only: u32,
}

fn check_term(array: &CataArray, t: usize) -> Result<()> {
    if t >= array.n_terms() {
        return Err(Error::OutOfRange(format!("term index {t}")));
    }
    Ok(())
}

pub fn cochran_q(array: &CataArray, t: usize) -> Result<CochranQ> {
    check_term(array, t)?;
    let (na, np) = (array.n_assessors(), array.n_products());
    let mut col = vec![0u64; np];
    let mut row_sq = 0u64;
    let mut total = 0u64;
    for a in 0..na {
        let mut r = 0u64;
        for (p, c) in col.iter_mut().enumerate() {
            let v = array.cell(a, p, t) as u64;
            *c += v;
            r += v;
        }
        row_sq += r * r;
        total += r;
    }
    let pf = np as f64;
    let df = np - 1;
    let denom = pf * total as f64 - row_sq as f64;
    if denom <= 0.0 {
        return Ok(CochranQ {
            statistic: None,
            df,
            p_value: 1.0,
        });
    }
    let col_sq: f64 = col.iter().map(|&c| (c * c) as f64).sum();
    let n = total as f64;
    let q = ((df as f64) * (pf * col_sq - n * n) / denom).max(0.0);
    Ok(CochranQ {
        statistic: Some(q),
        df,
        p_value: chi_squared_upper(q, df),
    })
}

/// Upper tail of the chi-squared distribution.
pub fn chi_squared_upper(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(df as f64 / 2.0, x / 2.0).clamp(0.0, 1.0)
}

pub fn discordance(array: &CataArray, p1: usize, p2: usize, t: usize) -> Result<Discordance> {
    check_term(array, t)?;
    let np = array.n_products();
    if p1 >= np || p2 >= np {
        return Err(Error::OutOfRange(format!("product indices {p1}, {p2}")));
    }
    if p1 == p2 {
        return Err(Error::SameProduct(array.products()[p1].clone()));
    }
    let mut d = Discordance {
        first_only: 0,
        second_only: 0,
    };
    for a in 0..array.n_assessors() {
        match (array.cell(a, p1, t), array.cell(a, p2, t)) {
            (1, 0) => d.first_only += 1,
            (0, 1) => d.second_only += 1,
            _ => {}
        }
    }
    Ok(d)
}

/// Two-sided exact p-value: twice the smaller binomial tail, capped at 1.
pub fn mcnemar_pvalue(b: u32, c: u32) -> f64 {
    let n = (b + c) as u64;
    if n == 0 {
        return 1.0;
    }
    let m = b.min(c) as u64;
    let ln_half = -(n as f64) * std::f64::consts::LN_2;
    let tail: f64 = (0..=m).map(|i| (ln_binomial(n, i) + ln_half).exp()).sum();
    (2.0 * tail).min(1.0)
}

pub fn mcnemar_exact(array: &CataArray, p1: usize, p2: usize, t: usize) -> Result<(Discordance, f64)> {
    let d = discordance(array, p1, p2, t)?;
    Ok((d, mcnemar_pvalue(d.first_only, d.second_only)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CochranRow {
    pub term: String,
    pub statistic: Option<f64>,
    pub df: usize,
    pub p_value: f64,
    pub step_up: Option<f64>,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McNemarRow {
    pub product: String,
    pub product2: String,
    pub term: String,
    pub first_only: u32,
    pub second_only: u32,
    pub p_value: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermPairCounts {
    pub term: String,
    /// Significant pairs under the multiplicity control in force.
    pub significant: usize,
    /// Pairs with `p ≤ α`, uncorrected.
    pub uncorrected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalReport {
    pub alpha: f64,
    pub fdr_controlled: bool,
    pub cochran: Vec<CochranRow>,
    pub cochran_critical_value: Option<f64>,
    pub mcnemar: Vec<McNemarRow>,
    pub mcnemar_critical_value: Option<f64>,
    pub pair_counts: Vec<TermPairCounts>,
}

impl ClassicalReport {
    pub fn cochran_significant(&self) -> usize {
        self.cochran.iter().filter(|r| r.significant).count()
    }

    pub fn mcnemar_significant(&self) -> usize {
        self.mcnemar.iter().filter(|r| r.significant).count()
    }

    pub fn mcnemar_uncorrected(&self) -> usize {
        self.pair_counts.iter().map(|c| c.uncorrected).sum()
    }
}

/// Cochran's Q for every term and exact McNemar for every product pair and
/// term. With `fdr` the Q family is the terms and the McNemar family is all
/// pair × term tests.
pub fn classical_report(array: &CataArray, alpha: f64, fdr: bool, rule: BhRule) -> Result<ClassicalReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} not in (0, 1)")));
    }
    let terms = array.terms();
    let products = array.products();
    let qs: Vec<CochranQ> = (0..array.n_terms())
        .map(|t| cochran_q(array, t))
        .collect::<Result<_>>()?;
    let q_p: Vec<f64> = qs.iter().map(|q| q.p_value).collect();

    let (cochran, cochran_critical_value) = if fdr {
        let bh = bh_stepup(&q_p, alpha, None, rule)?;
        let rows = qs
            .iter()
            .enumerate()
            .map(|(t, q)| CochranRow {
                term: terms[t].clone(),
                statistic: q.statistic,
                df: q.df,
                p_value: q.p_value,
                step_up: Some(bh.step_up_values[t]),
                significant: bh.significant[t],
            })
            .collect();
        (rows, bh.critical_value)
    } else {
        let rows = qs
            .iter()
            .enumerate()
            .map(|(t, q)| CochranRow {
                term: terms[t].clone(),
                statistic: q.statistic,
                df: q.df,
                p_value: q.p_value,
                step_up: None,
                significant: q.p_value <= alpha,
            })
            .collect();
        (rows, None)
    };

    let pairs = product_pairs(array.n_products());
    let mut mcnemar = Vec::with_capacity(pairs.len() * array.n_terms());
    for &(p1, p2) in &pairs {
        for (t, term) in terms.iter().enumerate() {
            let (d, p) = mcnemar_exact(array, p1, p2, t)?;
            mcnemar.push(McNemarRow {
                product: products[p1].clone(),
                product2: products[p2].clone(),
                term: term.clone(),
                first_only: d.first_only,
                second_only: d.second_only,
                p_value: p,
                significant: p <= alpha,
            });
        }
    }
    let mut pair_counts: Vec<TermPairCounts> = terms
        .iter()
        .map(|t| TermPairCounts {
            term: t.clone(),
            significant: 0,
            uncorrected: 0,
        })
        .collect();
    let nt = array.n_terms();
    for (i, row) in mcnemar.iter().enumerate() {
        if row.significant {
            pair_counts[i % nt].uncorrected += 1;
        }
    }
    let mut mcnemar_critical_value = None;
    if fdr {
        let ps: Vec<f64> = mcnemar.iter().map(|r| r.p_value).collect();
        let bh = bh_stepup(&ps, alpha, None, rule)?;
        for (row, s) in mcnemar.iter_mut().zip(&bh.significant) {
            row.significant = *s;
        }
        mcnemar_critical_value = bh.critical_value;
    }
    for (i, row) in mcnemar.iter().enumerate() {
        if row.significant {
            pair_counts[i % nt].significant += 1;
        }
    }

    Ok(ClassicalReport {
        alpha,
        fdr_controlled: fdr,
        cochran,
        cochran_critical_value,
        mcnemar,
        mcnemar_critical_value,
        pair_counts,
    })
}
