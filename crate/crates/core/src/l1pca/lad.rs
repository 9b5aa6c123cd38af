//! Least-absolute-deviation regression as a linear program.
//!
//! `min Σ|y − Xβ|` is written with split variables
//! `Xβ⁺ − Xβ⁻ + u − v = y`, all nonnegative, cost `Σ(u + v)`, and solved with
//! a dense primal simplex. Rows with negative `y` are negated so the residual
//! slacks form an initial feasible basis and no phase one is needed.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

pub fn l1_residual(design: &DMatrix<f64>, target: &DVector<f64>, coef: &DVector<f64>) -> f64 {
    (target - design * coef).abs().sum()
}

/// Numerical rank from the singular values.
pub fn numerical_rank(design: &DMatrix<f64>) -> usize {
    let sv = design.clone().singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let tol = smax * f64::EPSILON * design.nrows().max(design.ncols()) as f64;
    sv.iter().filter(|&&s| s > tol).count()
}

/// LAD coefficients for `target ≈ design · coef`.
///
/// Fails on a rank-deficient design, where the minimiser is not unique.
pub fn lad_solve(design: &DMatrix<f64>, target: &DVector<f64>) -> Result<DVector<f64>> {
    check_shapes(design, target)?;
    let rank = numerical_rank(design);
    if rank < design.ncols() {
        return Err(Error::RankDeficient {
            rank,
            columns: design.ncols(),
        });
    }
    solve_unchecked(design, target)
}

fn check_shapes(design: &DMatrix<f64>, target: &DVector<f64>) -> Result<()> {
    if design.nrows() == 0 || design.ncols() == 0 {
        return Err(Error::Dimensions("LAD design must be at least 1x1".into()));
    }
    if design.nrows() != target.len() {
        return Err(Error::Dimensions(format!(
            "design has {} rows, target has {}",
            design.nrows(),
            target.len()
        )));
    }
    if design.iter().chain(target.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite LAD input".into()));
    }
    Ok(())
}

/// LAD fit without the rank check; any minimiser is returned when several
/// exist.
pub(crate) fn solve_unchecked(design: &DMatrix<f64>, target: &DVector<f64>) -> Result<DVector<f64>> {
    check_shapes(design, target)?;
    let (n, k) = design.shape();
    let cols = 2 * k + 2 * n;
    let width = cols + 1;
    let scale = design
        .iter()
        .chain(target.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let eps = 1e-11 * scale;

    // Tableau rows: constraints, then the reduced-cost row.
    let mut tab = vec![0.0; (n + 1) * width];
    let mut basis = vec![0usize; n];
    for i in 0..n {
        let flip = if target[i] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut tab[i * width..(i + 1) * width];
        for j in 0..k {
            row[j] = flip * design[(i, j)];
            row[k + j] = -flip * design[(i, j)];
        }
        row[2 * k + i] = flip;
        row[2 * k + n + i] = -flip;
        row[cols] = flip * target[i];
        basis[i] = if flip > 0.0 { 2 * k + i } else { 2 * k + n + i };
    }
    // Reduced costs r = c − c_Bᵀ T, every basic cost is 1.
    {
        let (body, last) = tab.split_at_mut(n * width);
        for j in 0..width {
            let c = if j < 2 * k || j == cols { 0.0 } else { 1.0 };
            let s: f64 = (0..n).map(|i| body[i * width + j]).sum();
            last[j] = c - s;
        }
    }

    let max_pivots = 100 * (n + k) + 1_000;
    let mut degenerate_run = 0;
    for _ in 0..max_pivots {
        let bland = degenerate_run >= DEGENERATE_LIMIT;
        let cost = &tab[n * width..(n + 1) * width];
        let entering = if bland {
            (0..cols).find(|&j| cost[j] < -eps)
        } else {
            (0..cols)
                .filter(|&j| cost[j] < -eps)
                .min_by(|&a, &b| cost[a].total_cmp(&cost[b]))
        };
        let Some(e) = entering else {
            let mut coef = DVector::zeros(k);
            for (i, &b) in basis.iter().enumerate() {
                if b < k {
                    coef[b] += tab[i * width + cols];
                } else if b < 2 * k {
                    coef[b - k] -= tab[i * width + cols];
                }
            }
            return Ok(coef);
        };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..n {
            let a = tab[i * width + e];
            if a > eps {
                let ratio = tab[i * width + cols] / a;
                let better = match leave {
                    None => true,
                    Some((l, best)) => {
                        if ratio < best - eps {
                            true
                        } else if ratio <= best + eps {
                            if bland {
                                basis[i] < basis[l]
                            } else {
                                a > tab[l * width + e]
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, ratio)) = leave else {
            return Err(Error::Numerical("LAD linear program unbounded".into()));
        };
        if ratio.abs() <= eps {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
        pivot(&mut tab, width, n + 1, r, e);
        basis[r] = e;
    }
    Err(Error::Numerical(format!(
        "LAD simplex did not terminate within {max_pivots} pivots"
    )))
}

fn pivot(tab: &mut [f64], width: usize, rows: usize, r: usize, e: usize) {
    let p = tab[r * width + e];
    for v in &mut tab[r * width..(r + 1) * width] {
        *v /= p;
    }
    tab[r * width + e] = 1.0;
    let pivot_row: Vec<f64> = tab[r * width..(r + 1) * width].to_vec();
    for i in 0..rows {
        if i == r {
            continue;
        }
        let f = tab[i * width + e];
        if f == 0.0 {
            continue;
        }
        let row = &mut tab[i * width..(i + 1) * width];
        for (v, &pv) in row.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        row[e] = 0.0;
    }
}
