use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};
use planlab::calibration::{estimate, loss, Suite};
use planlab::chain::chain_solve;
use planlab::maze::{bfs_distances, generate_maze};
use planlab::search::{Budget, Evaluator};
use planlab::Variant;
use planlab_bench::calibrate::{run_calibration, Residuals, SearchGrid};
use planlab_bench::{corpus, report, sweep, BenchError, ExperimentConfig, Result, DEFAULT_OUT};

#[derive(Parser)]
#[command(name = "planlab", version, about = "Maze corpora, simulator calibration, search sweeps and reports")]
struct Cli {
    /// Output root; overrides the config's output_dir.
    #[arg(long, global = true, env = "PLANLAB_OUT")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write the configured maze corpus to <out>/corpus.
    GenCorpus {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fit the simulator knobs to the calibration targets; writes <out>/calibration/profile.json.
    Calibrate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 500)]
        rollouts: usize,
        #[arg(long, default_value_t = 3)]
        sweeps: usize,
        /// JSON search grid; a built-in grid when absent.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Only measure the current profile.
        #[arg(long)]
        eval_only: bool,
    },
    /// Run every configured method over the corpus into <out>/sweep, then report.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        no_report: bool,
    },
    /// Summarise a sweep directory (default <out>/sweep).
    Report { dir: Option<PathBuf> },
    /// Chain EPBS rounds on one maze and print the transcript.
    ChainDemo {
        #[arg(long, default_value_t = 10)]
        size: usize,
        #[arg(long, default_value_t = 0.0)]
        density: f64,
        #[arg(long, value_enum, default_value_t = Layout::Norm)]
        variant: Layout,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 400)]
        budget: u64,
        #[arg(long, default_value_t = 5)]
        tau: u32,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Layout {
    Norm,
    Vary,
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn out_root(cli_out: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    cli_out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| BenchError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn print_residuals(r: &Residuals, l: f64) {
    println!(
        "residuals: convergence {:+.4}, refine diversity {:+.4}, cross-seed diversity {:+.4}, long-horizon success {:+.4}; loss {l:.6}",
        r.convergence, r.refine_diversity, r.cross_seed_diversity, r.long_horizon_success
    );
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match cli.cmd {
        Cmd::GenCorpus { config } => {
            let cfg = load_config(config.as_deref())?;
            cfg.validate()?;
            let dir = out_root(out, &cfg).join("corpus");
            let entries = corpus::generate(&cfg.corpus, cfg.master_seed)?;
            corpus::write(&entries, &dir)?;
            println!("{} mazes written to {}", entries.len(), dir.display());
        }
        Cmd::Calibrate {
            config,
            rollouts,
            sweeps,
            grid,
            eval_only,
        } => {
            let cfg = load_config(config.as_deref())?;
            cfg.validate()?;
            let profile = cfg.load_profile()?;
            let mut suite = Suite::new(rollouts, cfg.master_seed);
            suite.targets = profile.targets;
            let path = out_root(out, &cfg).join("calibration").join("profile.json");
            let result = if eval_only {
                let stats = estimate(&profile.generator, &suite)?;
                let mut p = profile.clone();
                p.stats = Some(stats);
                p.master_seed = cfg.master_seed;
                print_residuals(&Residuals::new(&stats, &suite.targets), loss(&stats, &suite.targets));
                p
            } else {
                let grid = match grid {
                    None => SearchGrid::default(),
                    Some(g) => {
                        let text = std::fs::read_to_string(&g)
                            .map_err(|e| BenchError::Config(format!("grid {}: {e}", g.display())))?;
                        serde_json::from_str(&text).map_err(|e| BenchError::Config(format!("grid {}: {e}", g.display())))?
                    }
                };
                let run = run_calibration(&profile.generator, &grid, &suite, sweeps, cfg.master_seed)?;
                info!("{} parameter points evaluated", run.evaluations);
                print_residuals(&run.residuals, run.loss);
                if run.loss > 1e-2 {
                    warn!("targets not reached within the search grid; profile is best effort");
                }
                run.profile
            };
            write(&path, &(result.to_json() + "\n"))?;
            println!("profile written to {}", path.display());
        }
        Cmd::Sweep { config, no_report } => {
            let cfg = load_config(config.as_deref())?;
            let dir = out_root(out, &cfg).join("sweep");
            let s = sweep::run_sweep(&cfg, &dir)?;
            println!("{} mazes, {} records, {} errors in {}", s.mazes, s.records, s.errors, dir.display());
            if !no_report {
                report::report(&dir)?;
                println!("report in {}", dir.join(report::REPORT_DIR).display());
            }
        }
        Cmd::Report { dir } => {
            let dir = dir.unwrap_or_else(|| out_root(out, &ExperimentConfig::default()).join("sweep"));
            let s = report::report(&dir)?;
            println!("{} records summarised in {}", s.records, dir.join(report::REPORT_DIR).display());
        }
        Cmd::ChainDemo {
            size,
            density,
            variant,
            seed,
            budget,
            tau,
            k,
            depth,
        } => {
            let variant = match variant {
                Layout::Norm => Variant::Norm,
                Layout::Vary => Variant::Vary,
            };
            let cfg = ExperimentConfig::default();
            let profile = cfg.load_profile()?;
            let maze = generate_maze(size, density, variant, seed).map_err(|e| BenchError::Config(e.to_string()))?;
            let b = Budget::new(budget, tau, k, profile.generator.steps()).map_err(|e| BenchError::Config(e.to_string()))?;
            let outcome = chain_solve(&maze, &profile.generator, &b, depth, seed, &Evaluator::default())?;
            let transcript = serde_json::json!({
                "maze": serde_json::from_str::<serde_json::Value>(&maze.to_json())?,
                "bfs_moves": bfs_distances(&maze, maze.goal())[maze.index(maze.start())],
                "rounds": outcome.rounds,
                "stitched": outcome.state.stitched(),
                "nfe_total": outcome.state.nfe_total,
                "verdict": outcome.verdict,
            });
            let text = serde_json::to_string_pretty(&transcript)?;
            println!("{text}");
            write(&out_root(out, &cfg).join("chain-demo.json"), &(text + "\n"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
