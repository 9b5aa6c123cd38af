//! End-to-end run: writes results.json, summary.txt and the SVG figures for a
//! generated data set into a temporary directory.

use cata_l1::report::{run_seeded, Command, RunConfig};
use cata_l1::CataArray;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> cata_l1::Result<()> {
    let dir = std::env::temp_dir().join("cata-full-report");
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("input.csv");

    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let array = CataArray::from_fn(40, 7, 10, |_, p, t| {
        let rate = if (p < 3) == (t % 2 == 0) { 0.65 } else { 0.25 };
        rng.random_bool(rate)
    })?;
    array.write_long(std::fs::File::create(&input)?)?;

    let mut config = RunConfig::new(Command::All, &input, dir.join("out"));
    config.permutations = 1_999;
    config.replicates = 200;
    let out = run_seeded(&config, 42, "given")?;

    for f in &out.files {
        println!("wrote {}", f.display());
    }
    println!();
    print!("{}", std::fs::read_to_string(dir.join("out/summary.txt"))?);
    Ok(())
}
