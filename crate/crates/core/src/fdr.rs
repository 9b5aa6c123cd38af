//! Benjamini-Hochberg step-up control of the false discovery rate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a sorted p-value is compared with its BH series entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BhRule {
    /// `p(k) < (k/M)·α`
    #[default]
    Strict,
    /// `p(k) <= (k/M)·α`, the classical formulation.
    NonStrict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrResult {
    pub alpha: f64,
    pub family_size: usize,
    pub rule: BhRule,
    /// Largest qualifying p-value; `None` when nothing qualifies.
    pub critical_value: Option<f64>,
    /// BH series entry `(k/M)·α` at each hypothesis' rank, in input order.
    pub step_up_values: Vec<f64>,
    pub significant: Vec<bool>,
    /// Hypotheses whose p-value equals its BH entry exactly; only these are
    /// sensitive to the choice of rule.
    pub boundary_ties: usize,
}

impl FdrResult {
    pub fn n_significant(&self) -> usize {
        self.significant.iter().filter(|&&s| s).count()
    }
}

/// BH series entry for rank `k` (1-based) in a family of `m`.
pub fn bh_value(k: usize, m: usize, alpha: f64) -> f64 {
    alpha * k as f64 / m as f64
}

/// Step-up procedure over `pvalues` with family size `family_size`
/// (defaults to the number supplied when `None`).
///
/// Tied p-values share the rank of the last member of their block, so a tied
/// block is either significant or not as a unit.
pub fn bh_stepup(
    pvalues: &[f64],
    alpha: f64,
    family_size: Option<usize>,
    rule: BhRule,
) -> Result<FdrResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside (0, 1)")));
    }
    if let Some(p) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidParameter(format!("p-value {p} outside [0, 1]")));
    }
    let m = family_size.unwrap_or(pvalues.len());
    if m < pvalues.len() {
        return Err(Error::InvalidParameter(format!(
            "family size {m} smaller than the {} p-values supplied",
            pvalues.len()
        )));
    }

    let mut order: Vec<usize> = (0..pvalues.len()).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]));

    let mut ranks = vec![0usize; pvalues.len()];
    let mut critical: Option<f64> = None;
    let mut boundary_ties = 0;
    let mut start = 0;
    while start < order.len() {
        let p = pvalues[order[start]];
        let mut end = start;
        while end + 1 < order.len() && pvalues[order[end + 1]] == p {
            end += 1;
        }
        let rank = end + 1;
        let bh = bh_value(rank, m, alpha);
        let qualifies = match rule {
            BhRule::Strict => p < bh,
            BhRule::NonStrict => p <= bh,
        };
        if p == bh {
            boundary_ties += end - start + 1;
        }
        if qualifies {
            critical = Some(p);
        }
        for &i in &order[start..=end] {
            ranks[i] = rank;
        }
        start = end + 1;
    }

    let significant = pvalues
        .iter()
        .map(|&p| critical.is_some_and(|c| p <= c))
        .collect();
    Ok(FdrResult {
        alpha,
        family_size: m,
        rule,
        critical_value: critical,
        step_up_values: ranks.iter().map(|&k| bh_value(k, m, alpha)).collect(),
        significant,
        boundary_ties,
    })
}
