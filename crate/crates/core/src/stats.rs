//! Medians, MADs and the five permutation-test statistics.
//!
//! Every statistic lives on the scale of the table it is given. The
//! permutation engine evaluates them on raw counts, where all intermediate
//! values are exact multiples of 1/8, and rescales afterwards.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::CataTable;
use crate::error::{Error, Result};

/// Median of a scratch buffer; reorders the buffer. Even lengths take the
/// midpoint of the two central order statistics.
pub(crate) fn median_in_place(buf: &mut [f64]) -> f64 {
    let n = buf.len();
    debug_assert!(n > 0);
    let mid = n / 2;
    let (lower, upper_mid, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
    let upper_mid = *upper_mid;
    if n % 2 == 1 {
        upper_mid
    } else {
        let lower_mid = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lower_mid + upper_mid) / 2.0
    }
}

pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut buf = values.to_vec();
    Ok(median_in_place(&mut buf))
}

/// Median absolute deviation about the median (unscaled).
pub fn mad_about_median(values: &[f64]) -> Result<f64> {
    let m = median(values)?;
    let mut dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    Ok(median_in_place(&mut dev))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(x: f64) -> Self {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSummary {
    pub term: String,
    pub median: f64,
    pub mad: f64,
}

pub fn term_summaries(table: &CataTable) -> Vec<TermSummary> {
    (0..table.n_terms())
        .map(|t| {
            let col = table.column(t);
            TermSummary {
                term: table.terms()[t].clone(),
                median: median(&col).expect("non-empty column"),
                mad: mad_about_median(&col).expect("non-empty column"),
            }
        })
        .collect()
}

fn check_term(table: &CataTable, t: usize) -> Result<()> {
    if t >= table.n_terms() {
        return Err(Error::OutOfRange(format!("term index {t}")));
    }
    Ok(())
}

fn check_pair(table: &CataTable, p1: usize, p2: usize) -> Result<()> {
    if p1 >= table.n_products() || p2 >= table.n_products() {
        return Err(Error::OutOfRange(format!("product pair ({p1}, {p2})")));
    }
    if p1 == p2 {
        return Err(Error::SameProduct(table.products()[p1].clone()));
    }
    Ok(())
}

/// Test 2: MAD of one term's column.
pub fn stat_test2(table: &CataTable, t: usize) -> Result<f64> {
    check_term(table, t)?;
    mad_about_median(&table.column(t))
}

/// Test 1: median over terms of the per-term MADs.
pub fn stat_test1(table: &CataTable) -> f64 {
    let mut mads: Vec<f64> = (0..table.n_terms())
        .map(|t| stat_test2(table, t).expect("valid term"))
        .collect();
    median_in_place(&mut mads)
}

/// Test 3: distance of one cell from its column median, with the sign of the
/// deviation.
pub fn stat_test3(table: &CataTable, p: usize, t: usize) -> Result<(f64, Sign)> {
    check_term(table, t)?;
    if p >= table.n_products() {
        return Err(Error::OutOfRange(format!("product index {p}")));
    }
    let m = median(&table.column(t))?;
    let d = table.value(p, t) - m;
    Ok((d.abs(), Sign::of(d)))
}

/// Test 4: median over terms of the absolute paired differences.
pub fn stat_test4(table: &CataTable, p1: usize, p2: usize) -> Result<f64> {
    check_pair(table, p1, p2)?;
    let mut diffs: Vec<f64> = (0..table.n_terms())
        .map(|t| (table.value(p1, t) - table.value(p2, t)).abs())
        .collect();
    Ok(median_in_place(&mut diffs))
}

/// Test 5: signed paired difference on one term.
pub fn stat_test5(table: &CataTable, p1: usize, p2: usize, t: usize) -> Result<f64> {
    check_pair(table, p1, p2)?;
    check_term(table, t)?;
    Ok(table.value(p1, t) - table.value(p2, t))
}

/// Unordered product pairs `(i, j)` with `i < j`, in row-major order.
pub fn product_pairs(n_products: usize) -> Vec<(usize, usize)> {
    (0..n_products)
        .flat_map(|i| (i + 1..n_products).map(move |j| (i, j)))
        .collect()
}

/// Every statistic of every test for one table, flattened.
///
/// Layout: Test 1 (1), Test 2 (T, by term), Test 3 (P·T, product-major),
/// Test 4 (pairs), Test 5 (pairs·T, pair-major, signed).
#[derive(Debug, Clone, Copy)]
pub(crate) struct StatLayout {
    pub products: usize,
    pub terms: usize,
}

impl StatLayout {
    pub fn new(products: usize, terms: usize) -> Self {
        Self { products, terms }
    }

    pub fn n_pairs(&self) -> usize {
        self.products * (self.products - 1) / 2
    }

    pub fn test2_offset(&self) -> usize {
        1
    }

    pub fn test3_offset(&self) -> usize {
        1 + self.terms
    }

    pub fn test4_offset(&self) -> usize {
        self.test3_offset() + self.products * self.terms
    }

    pub fn test5_offset(&self) -> usize {
        self.test4_offset() + self.n_pairs()
    }

    pub fn len(&self) -> usize {
        self.test5_offset() + self.n_pairs() * self.terms
    }

    /// Evaluates all statistics of `values` (P×T) into `out`.
    pub fn evaluate(&self, values: &DMatrix<f64>, scratch: &mut Vec<f64>, out: &mut [f64]) {
        let (np, nt) = (self.products, self.terms);
        debug_assert_eq!(out.len(), self.len());
        let o2 = self.test2_offset();
        let o3 = self.test3_offset();
        for t in 0..nt {
            let col = values.column(t);
            scratch.clear();
            scratch.extend(col.iter().copied());
            let m = median_in_place(scratch);
            for p in 0..np {
                out[o3 + p * nt + t] = (col[p] - m).abs();
            }
            scratch.clear();
            scratch.extend((0..np).map(|p| out[o3 + p * nt + t]));
            out[o2 + t] = median_in_place(scratch);
        }
        scratch.clear();
        scratch.extend_from_slice(&out[o2..o2 + nt]);
        out[0] = median_in_place(scratch);

        let o4 = self.test4_offset();
        let o5 = self.test5_offset();
        let mut k = 0;
        for i in 0..np {
            for j in i + 1..np {
                scratch.clear();
                for t in 0..nt {
                    let d = values[(i, t)] - values[(j, t)];
                    out[o5 + k * nt + t] = d;
                    scratch.push(d.abs());
                }
                out[o4 + k] = median_in_place(scratch);
                k += 1;
            }
        }
    }
}
