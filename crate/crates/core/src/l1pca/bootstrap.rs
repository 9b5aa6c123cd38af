use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lad::{numerical_rank, solve_unchecked};
use super::L1PcaModel;
use crate::data::{CataArray, CataTable};
use crate::error::{Error, Result};

/// Bootstrap score clouds: `points[product][replicate]` is a K-vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapClouds {
    pub products: Vec<String>,
    pub replicates: usize,
    pub seed: u64,
    pub points: Vec<Vec<Vec<f64>>>,
}

impl BootstrapClouds {
    /// First two score coordinates of one product's cloud.
    pub fn plane(&self, product: usize) -> Vec<[f64; 2]> {
        self.points[product].iter().map(|v| [v[0], v[1]]).collect()
    }
}

/// Aggregates the array restricted to the given assessor draws (repeats
/// allowed).
pub fn resample_table(array: &CataArray, assessors: &[usize]) -> CataTable {
    let len = array.n_products() * array.n_terms();
    let mut counts = vec![0u32; len];
    for &a in assessors {
        for (c, &v) in counts.iter_mut().zip(array.slice(a)) {
            *c += v as u32;
        }
    }
    CataTable::from_counts(
        array.products().to_vec(),
        array.terms().to_vec(),
        assessors.len(),
        &counts,
    )
}

/// Projects each product row, centred by the model's medians, onto the
/// model's loadings by LAD regression.
pub fn project_table(model: &L1PcaModel, table: &CataTable) -> Result<Vec<Vec<f64>>> {
    let loadings = model.loadings_matrix();
    if numerical_rank(&loadings) < model.components {
        return Err(Error::RankDeficient {
            rank: numerical_rank(&loadings),
            columns: model.components,
        });
    }
    project_with(&loadings, &model.medians, table)
}

fn project_with(loadings: &DMatrix<f64>, medians: &[f64], table: &CataTable) -> Result<Vec<Vec<f64>>> {
    (0..table.n_products())
        .map(|p| {
            let y = DVector::from_fn(table.n_terms(), |t, _| table.value(p, t) - medians[t]);
            Ok(solve_unchecked(loadings, &y)?.iter().copied().collect())
        })
        .collect()
}

/// Resamples assessors with replacement `replicates` times and projects each
/// replicate's table onto the fixed model.
///
/// Replicate `r` draws from ChaCha8 stream `r` keyed by `seed`.
pub fn bootstrap_scores(
    array: &CataArray,
    model: &L1PcaModel,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapClouds> {
    if replicates == 0 {
        return Err(Error::InvalidParameter("need at least one bootstrap replicate".into()));
    }
    if array.products() != model.products.as_slice() || array.terms() != model.terms.as_slice() {
        return Err(Error::Dimensions("array labels do not match the model".into()));
    }
    let loadings = model.loadings_matrix();
    let rank = numerical_rank(&loadings);
    if rank < model.components {
        return Err(Error::RankDeficient {
            rank,
            columns: model.components,
        });
    }
    let na = array.n_assessors();
    let per_replicate: Vec<Vec<Vec<f64>>> = (1..=replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r);
            let draws: Vec<usize> = (0..na).map(|_| rng.random_range(0..na)).collect();
            project_with(&loadings, &model.medians, &resample_table(array, &draws))
        })
        .collect::<Result<_>>()?;

    let np = array.n_products();
    let mut points = vec![Vec::with_capacity(replicates); np];
    for rep in per_replicate {
        for (p, v) in rep.into_iter().enumerate() {
            points[p].push(v);
        }
    }
    Ok(BootstrapClouds {
        products: array.products().to_vec(),
        replicates,
        seed,
        points,
    })
}
