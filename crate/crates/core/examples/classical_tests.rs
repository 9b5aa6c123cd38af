//! Cochran's Q per term and exact McNemar tests per product pair.

use cata_l1::classical::{classical_report, cochran_q, mcnemar_exact};
use cata_l1::{BhRule, CataArray};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> cata_l1::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let array = CataArray::from_fn(30, 4, 3, |_, p, t| {
        let rate = if t == 0 { 0.2 + 0.2 * p as f64 } else { 0.4 };
        rng.random_bool(rate)
    })?;

    for t in 0..array.n_terms() {
        let q = cochran_q(&array, t)?;
        println!("{}: Q = {:?} on {} df, p = {:.4}", array.terms()[t], q.statistic, q.df, q.p_value);
    }
    let (d, p) = mcnemar_exact(&array, 0, 3, 0)?;
    println!(
        "{} vs {} on {}: {} / {} discordant, p = {:.4}",
        array.products()[0],
        array.products()[3],
        array.terms()[0],
        d.first_only,
        d.second_only,
        p
    );

    let report = classical_report(&array, 0.05, true, BhRule::Strict)?;
    println!(
        "with FDR: {} Cochran terms, {} of {} McNemar tests significant",
        report.cochran_significant(),
        report.mcnemar_significant(),
        report.mcnemar.len()
    );
    Ok(())
}
