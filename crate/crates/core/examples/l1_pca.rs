//! L1-PCA with a scree table, assessor bootstrap and covering ellipses.

use cata_l1::l1pca::{bootstrap_scores, covering_ellipse, fit, scree, FitOptions};
use cata_l1::CataArray;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> cata_l1::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let array = CataArray::from_fn(60, 6, 9, |_, p, t| {
        let lean = (p as f64 - 2.5) * (t as f64 - 4.0) / 25.0;
        rng.random_bool((0.4 + lean).clamp(0.05, 0.95))
    })?;
    let table = array.aggregate();
    let opts = FitOptions::default();

    for e in &scree(&table, 4, &opts)?.entries {
        println!("K = {}: prop {:.3}, gain {:+.3}, residual {:.1}", e.components, e.prop, e.gain, e.objective);
    }

    let model = fit(&table, 2, &opts)?;
    println!("\nK = 2 scores:");
    for (name, s) in model.products.iter().zip(&model.scores) {
        println!("  {name:<3} {:>7.2} {:>7.2}", s[0], s[1]);
    }

    let clouds = bootstrap_scores(&array, &model, 300, 99)?;
    println!("\n95% covering ellipses:");
    for (p, name) in model.products.iter().enumerate() {
        match covering_ellipse(name, &clouds.plane(p), 0.95) {
            Ok(e) => println!(
                "  {name:<3} centre ({:.2}, {:.2}) axes {:.2} x {:.2} at {:.0} deg",
                e.center[0],
                e.center[1],
                e.semi_axes[0],
                e.semi_axes[1],
                e.angle.to_degrees()
            ),
            Err(err) => println!("  {name:<3} {err}"),
        }
    }
    Ok(())
}
