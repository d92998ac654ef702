use clap::{Parser, Subcommand};
use qde_cli::config::{ExperimentConfig, Overrides};
use qde_cli::{runner, selfcheck, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Simulate repeated quantum measurements: entropy traces, gap bounds, and
/// phase-space grids, driven by flat config files.
#[derive(Parser)]
#[command(name = "qde", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

// One value exists for the life of the process; variant size is irrelevant.
#[allow(clippy::large_enum_variant)]
#[derive(Subcommand)]
enum Cmd {
    /// Execute one experiment: config file defaults plus flag overrides
    Run {
        /// Flat `key = value` config file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for CSV/PGM artifacts and manifest.json
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Dynamics: baker, baker_squared, haar_random, identity, custom
        #[arg(long)]
        map: Option<String>,
        /// Hilbert-space dimension
        #[arg(long)]
        d: Option<usize>,
        /// Partition: momentum, rotated_momentum, custom
        #[arg(long)]
        partition: Option<String>,
        /// Number of partition members
        #[arg(long)]
        k: Option<usize>,
        /// Longest trace length
        #[arg(long)]
        t_max: Option<usize>,
        /// Monte Carlo samples for the mean decoherence trace
        #[arg(long)]
        n_samples: Option<usize>,
        /// Root seed; every random draw is a labeled child of it
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated: s_trace, e_trace, bounds, free_probe, husimi
        #[arg(long)]
        outputs: Option<String>,
        /// Husimi grid resolution per axis
        #[arg(long)]
        grid_n: Option<usize>,
        /// Largest affordable word count k^t for Gram evaluation
        #[arg(long)]
        gram_cap: Option<usize>,
        /// Largest dimension for the doubled-space evaluation path
        #[arg(long)]
        omega_dim: Option<usize>,
        /// Monte Carlo samples for the gap bounds
        #[arg(long)]
        bounds_samples: Option<usize>,
        /// Measured-refinement depth of the gap-bound word family
        #[arg(long)]
        bounds_steps: Option<usize>,
        /// Word length probed for free independence
        #[arg(long)]
        probe_t: Option<usize>,
        /// Operator container holding the custom map (map = custom)
        #[arg(long)]
        map_file: Option<PathBuf>,
        /// Operator container holding the custom partition (partition = custom)
        #[arg(long)]
        partition_file: Option<PathBuf>,
    },
    /// Run the built-in consistency checks and print a table
    Selfcheck {
        /// Also check this operator container as a custom map
        #[arg(long)]
        map_file: Option<PathBuf>,
        /// Seed for the randomized checks
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// QDE_THREADS caps worker parallelism; 0 or unset means automatic.
fn init_threads() -> Result<(), CliError> {
    match std::env::var("QDE_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| CliError::Config(format!("QDE_THREADS: cannot parse '{raw}'")))?;
            if n == 0 {
                return Ok(());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(format!("QDE_THREADS: {e}")))
        }
    }
}

fn main() -> ExitCode {
    if let Err(e) = init_threads() {
        eprintln!("{e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    match Cli::parse().cmd {
        Cmd::Run {
            config,
            out_dir,
            map,
            d,
            partition,
            k,
            t_max,
            n_samples,
            seed,
            outputs,
            grid_n,
            gram_cap,
            omega_dim,
            bounds_samples,
            bounds_steps,
            probe_t,
            map_file,
            partition_file,
        } => {
            let overrides = Overrides {
                map,
                d,
                partition,
                k,
                t_max,
                n_samples,
                seed,
                outputs,
                grid_n,
                gram_cap,
                omega_dim,
                bounds_samples,
                bounds_steps,
                probe_t,
                map_file,
                partition_file,
            };
            let cfg = match ExperimentConfig::build(config.as_deref(), &overrides) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(e.exit_code() as u8);
                }
            };
            match runner::run(&cfg, &out_dir) {
                Ok(manifest) => {
                    let n = manifest
                        .json
                        .get("outputs")
                        .and_then(|o| o.as_object())
                        .map_or(0, |o| o.len());
                    println!(
                        "wrote {n} outputs to {} ({})",
                        manifest.out_dir.display(),
                        manifest.manifest_path.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Cmd::Selfcheck { map_file, seed } => {
            let (report, ok) = selfcheck::selfcheck(seed, map_file.as_deref());
            print!("{report}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
    }
}
