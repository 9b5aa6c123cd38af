//! Least-absolute-deviation regression: robust to a gross outlier where
//! least squares is not.

use cata_l1::l1pca::lad_solve;
use nalgebra::{DMatrix, DVector};

fn main() -> cata_l1::Result<()> {
    let x = DMatrix::from_fn(8, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
    let mut y = DVector::from_fn(8, |i, _| 2.0 + 0.5 * i as f64);
    y[6] = 40.0;

    let lad = lad_solve(&x, &y)?;
    let ls = (x.transpose() * &x).lu().solve(&(x.transpose() * &y)).expect("full rank");
    println!("LAD intercept {:.3}, slope {:.3}", lad[0], lad[1]);
    println!("LS  intercept {:.3}, slope {:.3}", ls[0], ls[1]);
    println!("LAD residual sum {:.3}", (&y - &x * lad).abs().sum());
    Ok(())
}
