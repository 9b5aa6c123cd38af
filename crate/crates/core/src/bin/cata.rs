use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cata_l1::report::{random_seed, run_seeded, Command, RunConfig};
use cata_l1::{Error, TestId};

#[derive(Parser)]
#[command(name = "cata", version, about = "L1-norm analysis of CATA data")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Permutation tests 1-5 with FDR control
    Analyze(Opts),
    /// Complete-linkage clustering of products and terms
    Cluster(Opts),
    /// L1-PCA, scree table and bootstrap ellipses
    L1pca(Opts),
    /// Cochran's Q and exact McNemar tests
    Classical(Opts),
    /// Everything above
    All(Opts),
}

#[derive(Args)]
struct Opts {
    /// Long-format CSV: assessor,product,term,cited
    #[arg(long)]
    input: PathBuf,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Number of permutations
    #[arg(long = "b", default_value_t = 9_999)]
    permutations: usize,
    /// Random seed; drawn at random and reported when omitted
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Flag p <= alpha instead of controlling the FDR
    #[arg(long)]
    no_fdr: bool,
    /// Comma-separated subset of tests, e.g. 1,2,4
    #[arg(long, value_delimiter = ',')]
    tests: Option<Vec<u8>>,
    /// Product clusters to cut
    #[arg(long, default_value_t = 2)]
    product_clusters: usize,
    /// Term clusters to cut
    #[arg(long, default_value_t = 2)]
    term_clusters: usize,
    /// L1-PCA components
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Largest K in the scree table (default min(P, T))
    #[arg(long)]
    kmax: Option<usize>,
    /// Bootstrap replicates
    #[arg(long, default_value_t = 1000)]
    replicates: usize,
    /// Ellipse coverage
    #[arg(long, default_value_t = 0.95)]
    coverage: f64,
    /// Biplot loading multiplier (default: automatic)
    #[arg(long)]
    loading_scale: Option<f64>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
}

fn config(command: Command, o: Opts) -> Result<RunConfig, Error> {
    let mut c = RunConfig::new(command, o.input, o.out);
    c.permutations = o.permutations;
    c.seed = o.seed;
    c.alpha = o.alpha;
    c.fdr = !o.no_fdr;
    if let Some(t) = o.tests {
        c.tests = t.into_iter().map(TestId::from_number).collect::<Result<_, _>>()?;
    }
    c.product_clusters = o.product_clusters;
    c.term_clusters = o.term_clusters;
    c.components = o.k;
    c.max_components = o.kmax;
    c.replicates = o.replicates;
    c.coverage = o.coverage;
    c.loading_scale = o.loading_scale;
    c.workers = o.workers;
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match cli.command {
        Cmd::Analyze(o) => (Command::Analyze, o),
        Cmd::Cluster(o) => (Command::Cluster, o),
        Cmd::L1pca(o) => (Command::L1pca, o),
        Cmd::Classical(o) => (Command::Classical, o),
        Cmd::All(o) => (Command::All, o),
    };
    let result = config(command, opts).and_then(|c| match c.seed {
        Some(seed) => run_seeded(&c, seed, "given"),
        None => {
            let seed = random_seed();
            eprintln!("warning: no --seed given; using random seed {seed}");
            run_seeded(&c, seed, "random")
        }
    });
    match result {
        Ok(out) => {
            for f in &out.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
