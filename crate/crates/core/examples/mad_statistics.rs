//! Column medians, MADs and the five test statistics on a small table.

use cata_l1::stats::{stat_test1, stat_test2, stat_test3, stat_test4, stat_test5, term_summaries};
use cata_l1::CataTable;

fn main() -> cata_l1::Result<()> {
    let products = ["crisp", "soft", "sweet", "plain"].map(String::from).to_vec();
    let terms = ["fresh", "bitter", "fruity"].map(String::from).to_vec();
    // Citation counts out of 20 assessors, one row per product.
    let counts = [14, 2, 9, 5, 11, 3, 12, 1, 15, 6, 8, 4];
    let table = CataTable::from_counts(products, terms, 20, &counts);

    for s in term_summaries(&table) {
        println!("{:<7} median {:>5.1}%  MAD {:>5.1}", s.term, s.median, s.mad);
    }
    println!("global statistic: {}", stat_test1(&table));
    println!("MAD of 'bitter': {}", stat_test2(&table, 1)?);
    let (dev, sign) = stat_test3(&table, 2, 2)?;
    println!("sweet/fruity deviates {dev} from the term median ({sign:?})");
    println!("crisp vs soft, median |difference|: {}", stat_test4(&table, 0, 1)?);
    println!("crisp - soft on 'fresh': {}", stat_test5(&table, 0, 1, 0)?);
    Ok(())
}
