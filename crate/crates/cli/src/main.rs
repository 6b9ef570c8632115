use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use skewlab_cli::{combined_exit_code, list_scenarios, load_config, run_scenario, EXIT_CONFIG};

#[derive(Debug, Parser)]
#[command(name = "skewlab", version, about = "Run skewlab scenarios from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one or more scenario configs.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Number of scenarios run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Root directory; each scenario writes to `<DIR>/<name>`.
        #[arg(long, value_name = "DIR")]
        output: Option<PathBuf>,
        /// Overrides the seed in every config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the scenario kinds.
    List,
}

fn run(configs: &[PathBuf], jobs: usize, output: Option<PathBuf>, seed: Option<u64>) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let results: Vec<(PathBuf, Result<_, _>)> = pool.install(|| {
        configs
            .par_iter()
            .with_max_len(1)
            .map(|path| {
                let outcome = load_config(path).and_then(|mut c| {
                    if let Some(s) = seed {
                        c.seed = s;
                    }
                    run_scenario(&c, output.as_deref())
                });
                (path.clone(), outcome)
            })
            .collect()
    });
    let mut codes = Vec::with_capacity(results.len());
    for (path, result) in results {
        match result {
            Ok(o) => {
                let status = if o.passed() { "PASS" } else { "FAIL" };
                println!("{status} {} ({}) -> {} [{:.2}s]", o.name, o.kind, o.output_dir.display(), o.runtime_s);
                for a in o.assertions.iter().filter(|a| !a.passed) {
                    println!("  failed {}: {}", a.name, a.detail);
                }
                codes.push(o.exit_code());
            }
            Err(e) => {
                eprintln!("ERROR {}: {e}", path.display());
                codes.push(e.exit_code());
            }
        }
    }
    combined_exit_code(&codes)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    let code = match cli.command {
        Command::List => {
            for entry in list_scenarios() {
                println!("{:<32} [{}] {}", entry.kind.name(), entry.anchor, entry.description);
            }
            0
        }
        Command::Run {
            configs,
            jobs,
            output,
            seed,
        } => run(&configs, jobs, output, seed),
    };
    ExitCode::from(code as u8)
}
