//! `debias` — confidence bands and sets from bootstrapped debiased
//! estimators.
//!
//! Exit codes: 0 success, 1 estimation failure, 2 usage error, 3 missing
//! input file, 4 malformed input data, 5 output I/O failure.

use clap::Parser;
use debias_cli::{args, run};

fn main() {
    let cli = args::Cli::parse();

    let threads = match &cli.command {
        args::Command::DensityBand(a) => a.common.threads,
        args::Command::RegressionBand(a) => a.common.threads,
        args::Command::LevelsetSet(a) => a.common.threads,
        args::Command::InvregSet(a) => a.common.threads,
        args::Command::SimulateCoverage(a) => a.threads,
    };
    if let Some(t) = threads {
        // scheduling only; numeric results are thread-count independent
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }

    if let Err(e) = run::execute(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}
