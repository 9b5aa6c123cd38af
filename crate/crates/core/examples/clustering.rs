//! Complete-linkage clustering of products and terms on MAD distances.

use cata_l1::cluster::{complete_linkage, product_distances, term_distances};
use cata_l1::CataArray;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> cata_l1::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // Products 0-2 favour terms 0-3; products 3-5 favour terms 4-7.
    let array = CataArray::from_fn(50, 6, 8, |_, p, t| {
        let rate = if (p < 3) == (t < 4) { 0.7 } else { 0.2 };
        rng.random_bool(rate)
    })?;
    let table = array.aggregate();

    let products = complete_linkage(&product_distances(&table))?;
    println!("products: {}", products.to_text());
    for (i, g) in products.cut_labels(2)?.iter().enumerate() {
        println!("  cluster {}: {}", i + 1, g.join(", "));
    }

    let terms = complete_linkage(&term_distances(&table))?;
    println!("terms: {}", terms.to_text());
    println!("  leaf order: {:?}", terms.leaf_order());
    for (i, g) in terms.cut_labels(2)?.iter().enumerate() {
        println!("  cluster {}: {}", i + 1, g.join(", "));
    }
    Ok(())
}
