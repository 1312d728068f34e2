use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use saddle_core::experiment::{
    default_output_dir, predict_from_json, run_experiment, run_sweep, write_results, ExperimentConfig,
    InstanceDescriptor, SweepConfig,
};
use saddle_core::saddle::Engine;
use saddle_core::testbed::{argmax_lipschitz_check, lemma1_suite, lemma2_check, CheckReport};
use saddle_core::SolverError;

#[derive(Parser)]
#[command(name = "saddle-bench", version, about = "Metered saddle-point solver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with one engine and write its summary and history.
    Solve {
        /// Full experiment config (JSON). Overrides the flags below.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Instance descriptor (JSON), e.g. {"family": "b1"}.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, default_value = "auto")]
        engine: String,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long)]
        run_id: Option<String>,
        /// Output directory; defaults to $SADDLE_OUT_DIR or ./results.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall-clock times.
        #[arg(long)]
        timing: bool,
    },
    /// Run a grid of experiments and write one summary row per run.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sampled property suite; exits 1 on any violation.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print base oracle counts for a spec or an instance.
    Predict {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Lemma1,
    Lemma2,
    #[value(name = "argmax_lipschitz")]
    ArgmaxLipschitz,
}

enum Failure {
    Config(anyhow::Error),
    Run(anyhow::Error),
}

fn config<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn solver(e: SolverError) -> Failure {
    match e {
        SolverError::InvalidSpec(_) | SolverError::InvalidArgument(_) | SolverError::MissingSpectralData(_) => {
            Failure::Config(e.into())
        }
        e => Failure::Run(e.into()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(config)
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = read(path)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(config)
}

fn print_check(rep: &CheckReport) {
    println!(
        "suite {} samples {} violations {} worst excess {:e}",
        rep.suite, rep.samples, rep.violations, rep.worst_excess
    );
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            config: cfg_path,
            instance,
            engine,
            eps,
            run_id,
            out,
            timing,
        } => {
            let cfg = match (cfg_path, instance) {
                (Some(p), _) => parse::<ExperimentConfig>(&p)?,
                (None, Some(p)) => {
                    let inst: InstanceDescriptor = parse(&p)?;
                    let engine: Engine = engine.parse().map_err(config)?;
                    let mut c = ExperimentConfig::new(inst, engine, eps);
                    c.run_id = run_id;
                    c.timing = timing;
                    c
                }
                (None, None) => return Err(config(anyhow::anyhow!("solve needs --config or --instance"))),
            };
            let res = run_experiment(&cfg, "run").map_err(solver)?;
            let dir = out.unwrap_or_else(default_output_dir);
            let summary = format!("summary_{}.csv", res.run_id);
            let paths = write_results(&dir, &summary, std::slice::from_ref(&res)).map_err(|e| Failure::Run(e.into()))?;
            println!("{}", res.summary_fields().join(","));
            for p in paths {
                println!("wrote {}", p.display());
            }
            if !res.converged {
                return Err(Failure::Run(anyhow::anyhow!("run did not reach eps = {}", res.eps)));
            }
            Ok(())
        }
        Command::Sweep { config: p, out } => {
            let cfg: SweepConfig = parse(&p)?;
            let results = run_sweep(&cfg).map_err(solver)?;
            let dir = out.unwrap_or_else(default_output_dir);
            let paths = write_results(&dir, &format!("{}_summary.csv", cfg.name), &results)
                .map_err(|e| Failure::Run(e.into()))?;
            let converged = results.iter().filter(|r| r.converged).count();
            println!("{} runs, {} converged, summary {}", results.len(), converged, paths[0].display());
            Ok(())
        }
        Command::Verify { suite, samples, seed } => {
            if samples == 0 {
                return Err(config(anyhow::anyhow!("samples must be positive")));
            }
            let rep = match suite {
                Suite::Lemma1 => lemma1_suite(50, samples.div_ceil(50), seed),
                Suite::Lemma2 => lemma2_check(samples, seed),
                Suite::ArgmaxLipschitz => argmax_lipschitz_check(samples, seed),
            }
            .map_err(solver)?;
            print_check(&rep);
            if rep.violations > 0 {
                return Err(Failure::Run(anyhow::anyhow!("{} violations", rep.violations)));
            }
            Ok(())
        }
        Command::Predict { spec } => {
            let text = read(&spec)?;
            let p = predict_from_json(&text).map_err(solver)?;
            print!("{p}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
