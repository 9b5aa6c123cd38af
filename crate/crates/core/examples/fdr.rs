//! Benjamini-Hochberg step-up: strict and non-strict boundary rules, tied
//! p-values, and a family larger than the list supplied.

use cata_l1::fdr::bh_value;
use cata_l1::{bh_stepup, BhRule};

fn main() -> cata_l1::Result<()> {
    let alpha = 0.05;
    // The third value sits exactly on its BH entry 3 * 0.05 / 6; the two
    // tied values share rank 5.
    let p = [0.001, 0.012, bh_value(3, 6, alpha), 0.2, 0.2, 0.6];

    for rule in [BhRule::Strict, BhRule::NonStrict] {
        let r = bh_stepup(&p, alpha, None, rule)?;
        println!(
            "{rule:?}: critical {:?}, {} significant, {} on the boundary",
            r.critical_value,
            r.n_significant(),
            r.boundary_ties
        );
        for (pv, (s, e)) in p.iter().zip(r.significant.iter().zip(&r.step_up_values)) {
            println!("    p {pv:<8.4} entry {e:<8.4} {}", if *s { "significant" } else { "" });
        }
    }

    let wide = bh_stepup(&p, alpha, Some(20), BhRule::Strict)?;
    println!("same p-values in a family of 20: {} significant", wide.n_significant());
    Ok(())
}
