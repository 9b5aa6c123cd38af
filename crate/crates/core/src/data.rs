//! Raw three-way CATA data and the aggregated percentage table.
//!
//! The raw array holds one binary citation per (assessor, product, term).
//! Aggregating over assessors gives the products-by-terms table of citation
//! percentages that every analysis in this crate works on.

use std::collections::HashMap;
use std::io::{Read, Write};

use nalgebra::DMatrix;
use crate::error::{Error, Result};

/// Binary citation array, stored assessor-major: each assessor owns a
/// contiguous P×T slice in row-major (product, term) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CataArray {
    assessors: Vec<String>,
    products: Vec<String>,
    terms: Vec<String>,
    cells: Vec<u8>,
}

fn check_unique(kind: &str, labels: &[String]) -> Result<()> {
    let mut seen = HashMap::with_capacity(labels.len());
    for l in labels {
        if seen.insert(l.as_str(), ()).is_some() {
            return Err(Error::Dimensions(format!("duplicate {kind} label {l:?}")));
        }
    }
    Ok(())
}

impl CataArray {
    /// Builds an array from labels and a cell buffer laid out as
    /// `[assessor][product][term]`.
    pub fn new(
        assessors: Vec<String>,
        products: Vec<String>,
        terms: Vec<String>,
        cells: Vec<u8>,
    ) -> Result<Self> {
        if assessors.len() < 2 || products.len() < 2 || terms.is_empty() {
            return Err(Error::Dimensions(format!(
                "need A >= 2, P >= 2, T >= 1 (got A={}, P={}, T={})",
                assessors.len(),
                products.len(),
                terms.len()
            )));
        }
        check_unique("assessor", &assessors)?;
        check_unique("product", &products)?;
        check_unique("term", &terms)?;
        let expected = assessors.len() * products.len() * terms.len();
        if cells.len() != expected {
            return Err(Error::Dimensions(format!(
                "expected {expected} cells, got {}",
                cells.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|&&c| c > 1) {
            return Err(Error::NonBinary {
                line: 0,
                value: bad.to_string(),
            });
        }
        Ok(Self {
            assessors,
            products,
            terms,
            cells,
        })
    }

    /// Builds an array with generated labels (`A1..`, `P1..`, `T1..`) from a
    /// cell function `f(assessor, product, term)`.
    pub fn from_fn(
        n_assessors: usize,
        n_products: usize,
        n_terms: usize,
        mut f: impl FnMut(usize, usize, usize) -> bool,
    ) -> Result<Self> {
        let mut cells = Vec::with_capacity(n_assessors * n_products * n_terms);
        for a in 0..n_assessors {
            for p in 0..n_products {
                for t in 0..n_terms {
                    cells.push(f(a, p, t) as u8);
                }
            }
        }
        Self::new(
            (1..=n_assessors).map(|i| format!("A{i}")).collect(),
            (1..=n_products).map(|i| format!("P{i}")).collect(),
            (1..=n_terms).map(|i| format!("T{i}")).collect(),
            cells,
        )
    }

    pub fn n_assessors(&self) -> usize {
        self.assessors.len()
    }

    pub fn n_products(&self) -> usize {
        self.products.len()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn assessors(&self) -> &[String] {
        &self.assessors
    }

    pub fn products(&self) -> &[String] {
        &self.products
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn cell(&self, assessor: usize, product: usize, term: usize) -> u8 {
        let (p, t) = (self.n_products(), self.n_terms());
        self.cells[(assessor * p + product) * t + term]
    }

    /// The P×T slice of one assessor, row-major.
    pub fn slice(&self, assessor: usize) -> &[u8] {
        let len = self.n_products() * self.n_terms();
        &self.cells[assessor * len..(assessor + 1) * len]
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    /// Same labels, new cells. The caller guarantees the layout.
    pub(crate) fn with_cells(&self, cells: Vec<u8>) -> Self {
        debug_assert_eq!(cells.len(), self.cells.len());
        Self {
            assessors: self.assessors.clone(),
            products: self.products.clone(),
            terms: self.terms.clone(),
            cells,
        }
    }

    /// Reads the long format: header `assessor,product,term,cited`, one row
    /// per (assessor, product, term). Labels are ordered by first appearance.
    pub fn read_long<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["assessor", "product", "term", "cited"];
        if headers.len() != 4 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::Malformed {
                line: 1,
                message: format!("header must be `assessor,product,term,cited`, got {headers:?}"),
            });
        }

        let mut a_idx: HashMap<String, usize> = HashMap::new();
        let mut p_idx: HashMap<String, usize> = HashMap::new();
        let mut t_idx: HashMap<String, usize> = HashMap::new();
        let (mut assessors, mut products, mut terms) = (Vec::new(), Vec::new(), Vec::new());
        let mut rows: Vec<(usize, usize, usize, u8)> = Vec::new();

        fn intern(
            map: &mut HashMap<String, usize>,
            labels: &mut Vec<String>,
            key: &str,
        ) -> usize {
            if let Some(&i) = map.get(key) {
                return i;
            }
            let i = labels.len();
            labels.push(key.to_owned());
            map.insert(key.to_owned(), i);
            i
        }

        for record in rdr.records() {
            let record = record?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            if record.len() != 4 {
                return Err(Error::Malformed {
                    line,
                    message: format!("expected 4 fields, got {}", record.len()),
                });
            }
            let cited = match &record[3] {
                "0" => 0u8,
                "1" => 1u8,
                other => {
                    return Err(Error::NonBinary {
                        line,
                        value: other.to_owned(),
                    })
                }
            };
            let a = intern(&mut a_idx, &mut assessors, &record[0]);
            let p = intern(&mut p_idx, &mut products, &record[1]);
            let t = intern(&mut t_idx, &mut terms, &record[2]);
            rows.push((a, p, t, cited));
        }

        let (na, np, nt) = (assessors.len(), products.len(), terms.len());
        let mut cells = vec![0u8; na * np * nt];
        let mut filled = vec![false; na * np * nt];
        for (a, p, t, v) in rows {
            let i = (a * np + p) * nt + t;
            if filled[i] {
                return Err(Error::DuplicateTriple {
                    assessor: assessors[a].clone(),
                    product: products[p].clone(),
                    term: terms[t].clone(),
                });
            }
            filled[i] = true;
            cells[i] = v;
        }
        if let Some(gap) = filled.iter().position(|f| !f) {
            let t = gap % nt;
            let p = (gap / nt) % np;
            let a = gap / (nt * np);
            return Err(Error::IncompleteDesign {
                assessor: assessors[a].clone(),
                product: products[p].clone(),
                term: terms[t].clone(),
            });
        }
        Self::new(assessors, products, terms, cells)
    }

    pub fn read_long_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_long(std::io::BufReader::new(file))
    }

    /// Writes the long format in assessor, product, term order.
    pub fn write_long<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["assessor", "product", "term", "cited"])?;
        for (a, al) in self.assessors.iter().enumerate() {
            for (p, pl) in self.products.iter().enumerate() {
                for (t, tl) in self.terms.iter().enumerate() {
                    let v = if self.cell(a, p, t) == 1 { "1" } else { "0" };
                    w.write_record([al.as_str(), pl.as_str(), tl.as_str(), v])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Citation counts per (product, term), row-major.
    pub fn counts(&self) -> Vec<u32> {
        let len = self.n_products() * self.n_terms();
        let mut counts = vec![0u32; len];
        for slice in self.cells.chunks_exact(len) {
            for (c, &v) in counts.iter_mut().zip(slice) {
                *c += v as u32;
            }
        }
        counts
    }

    /// Sums the assessor slices into the table of citation percentages.
    pub fn aggregate(&self) -> CataTable {
        CataTable::from_counts(
            self.products.clone(),
            self.terms.clone(),
            self.n_assessors(),
            &self.counts(),
        )
    }
}

/// Products-by-terms table of citation percentages.
#[derive(Debug, Clone, PartialEq)]
pub struct CataTable {
    products: Vec<String>,
    terms: Vec<String>,
    assessors: usize,
    values: DMatrix<f64>,
}

impl CataTable {
    /// Builds a table from row-major citation counts.
    pub fn from_counts(
        products: Vec<String>,
        terms: Vec<String>,
        assessors: usize,
        counts: &[u32],
    ) -> Self {
        let (np, nt) = (products.len(), terms.len());
        let values = DMatrix::from_fn(np, nt, |p, t| {
            100.0 * counts[p * nt + t] as f64 / assessors as f64
        });
        Self {
            products,
            terms,
            assessors,
            values,
        }
    }

    /// Builds a table directly from percentages, given as one row per product.
    pub fn from_rows(
        products: Vec<String>,
        terms: Vec<String>,
        assessors: usize,
        rows: &[Vec<f64>],
    ) -> Result<Self> {
        if rows.len() != products.len() || rows.iter().any(|r| r.len() != terms.len()) {
            return Err(Error::Dimensions(format!(
                "table rows must be {}x{}",
                products.len(),
                terms.len()
            )));
        }
        if products.is_empty() || terms.is_empty() || assessors == 0 {
            return Err(Error::Dimensions("empty table".into()));
        }
        check_unique("product", &products)?;
        check_unique("term", &terms)?;
        for r in rows {
            for &v in r {
                if !(0.0..=100.0).contains(&v) {
                    return Err(Error::Dimensions(format!("percentage {v} outside [0, 100]")));
                }
            }
        }
        let values = DMatrix::from_fn(products.len(), terms.len(), |p, t| rows[p][t]);
        Ok(Self {
            products,
            terms,
            assessors,
            values,
        })
    }

    /// Convenience for tests and examples: generated labels, A = 100.
    pub fn from_percentages(rows: &[Vec<f64>]) -> Result<Self> {
        let np = rows.len();
        let nt = rows.first().map_or(0, Vec::len);
        Self::from_rows(
            (1..=np).map(|i| format!("P{i}")).collect(),
            (1..=nt).map(|i| format!("T{i}")).collect(),
            100,
            rows,
        )
    }

    pub fn n_products(&self) -> usize {
        self.products.len()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn n_assessors(&self) -> usize {
        self.assessors
    }

    pub fn products(&self) -> &[String] {
        &self.products
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn value(&self, product: usize, term: usize) -> f64 {
        self.values[(product, term)]
    }

    pub fn column(&self, term: usize) -> Vec<f64> {
        self.values.column(term).iter().copied().collect()
    }

    pub fn row(&self, product: usize) -> Vec<f64> {
        self.values.row(product).iter().copied().collect()
    }

    pub fn product_index(&self, label: &str) -> Option<usize> {
        self.products.iter().position(|p| p == label)
    }

    pub fn term_index(&self, label: &str) -> Option<usize> {
        self.terms.iter().position(|t| t == label)
    }

    /// Wide CSV: product label, then one column per term, one decimal place.
    pub fn write_wide<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["product".to_owned()];
        header.extend(self.terms.iter().cloned());
        w.write_record(&header)?;
        for (p, label) in self.products.iter().enumerate() {
            let mut rec = vec![label.clone()];
            rec.extend((0..self.n_terms()).map(|t| format!("{:.1}", self.value(p, t))));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
