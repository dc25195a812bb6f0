//! Command-line front end: batch experiment runner around the library.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime abort (including
//! a failed common-random-numbers check in compare mode).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use slicesim::config::{load_config, resolve, SimConfig};
use slicesim::engine::{checkpoint_path, run, Algorithm, RunPlan};
use slicesim::error::SimError;
use slicesim::net::SliceId;
use slicesim::output::{write_artifacts, write_compare_artifacts};

/// Environment variable that overrides the default output directory.
const OUT_ENV: &str = "SLICESIM_OUT";

#[derive(Parser)]
#[command(
    name = "slicesim",
    version,
    about = "Downlink slicing simulator: per-slice learned user association vs. strongest-link"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (TOML); omitted = built-in reference scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; every random stream derives from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory. Precedence: this flag, then $SLICESIM_OUT, then
    /// out/<command>-<algo>-seed<seed>.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the number of agent steps in the run.
    #[arg(long)]
    iterations: Option<u64>,
    /// Override the TTIs between agent decisions.
    #[arg(long)]
    steps_per_action: Option<u64>,
    /// Override the modulation-and-coding table file.
    #[arg(long)]
    lut: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the per-slice agents online and write traces + checkpoints.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        /// Association algorithm: iqra | liqra.
        #[arg(long, default_value = "iqra")]
        algo: String,
    },
    /// Replay a greedy policy from saved checkpoints; no learning.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        /// Association algorithm: iqra | liqra.
        #[arg(long, default_value = "iqra")]
        algo: String,
        /// Directory containing checkpoint_embb.json and checkpoint_urllc.json.
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Strongest-link association with no agents.
    Baseline {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run iqra, liqra and maxsnr on one seed and emit joint comparisons.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn load(common: &CommonArgs) -> Result<SimConfig, SimError> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => slicesim::config::default_config(),
    };
    let mut raw = cfg.raw.clone();
    let mut changed = false;
    if let Some(n) = common.iterations {
        raw.run.iterations = n;
        changed = true;
    }
    if let Some(n) = common.steps_per_action {
        raw.run.ttis_per_step = n;
        changed = true;
    }
    if let Some(path) = &common.lut {
        raw.phy.mcs_lut = Some(path.display().to_string());
        changed = true;
    }
    if changed {
        cfg = resolve(raw)?;
    }
    Ok(cfg)
}

fn parse_algo(name: &str) -> Result<Algorithm, SimError> {
    Algorithm::parse(name).ok_or_else(|| {
        SimError::Config(slicesim::error::ConfigError::Field {
            field: "--algo".into(),
            reason: format!("unknown algorithm {name:?}; expected iqra, liqra or maxsnr"),
        })
    })
}

fn out_dir(common: &CommonArgs, label: &str, seed: u64) -> PathBuf {
    if let Some(dir) = &common.out {
        return dir.clone();
    }
    if let Ok(dir) = std::env::var(OUT_ENV) {
        return PathBuf::from(dir);
    }
    PathBuf::from("out").join(format!("{label}-seed{seed}"))
}

fn print_summary(result: &slicesim::engine::RunResult) {
    let s = &result.summary;
    println!(
        "{} {} seed {} | {} steps / {} TTIs | selectors {}+{}",
        s.algorithm.name(),
        s.mode.name(),
        s.seed,
        s.iterations,
        s.total_ttis,
        s.selectors[0].name(),
        s.selectors[1].name()
    );
    for slice in SliceId::ALL {
        let i = slice.index();
        let delay = s.mean_delay_ms[i]
            .map(|d| format!("{d:.3} ms"))
            .unwrap_or_else(|| "n/a".into());
        println!(
            "  {slice}: reward {:.4} (final {:.4}) | throughput {:.3} Mbps | delay {delay} | QoS pass {:.0}%",
            s.mean_reward[i],
            s.final_mean_reward[i],
            s.system_throughput_bps[i] / 1e6,
            s.qos_pass_fraction[i] * 100.0
        );
    }
    let v = s.violations;
    if v.total() > 0 {
        println!(
            "  WARNING: invariant violations: one-hot {}, budget {}, conservation {}",
            v.one_hot, v.prb_budget, v.bit_conservation
        );
    }
}

fn single_run(
    common: &CommonArgs,
    mut plan: RunPlan,
    label: &str,
) -> Result<(), SimError> {
    let cfg = load(common)?;
    let dir = out_dir(common, label, plan.seed);
    plan.out_dir = Some(dir.clone());
    let result = run(&cfg, &plan)?;
    write_artifacts(&dir, &cfg, &result)?;
    print_summary(&result);
    println!("artifacts: {}", dir.display());
    Ok(())
}

fn compare(common: &CommonArgs) -> Result<(), SimError> {
    let cfg = load(common)?;
    let dir = out_dir(common, "compare", common.seed);
    let mut results = Vec::new();
    for algo in [Algorithm::Iqra, Algorithm::Liqra, Algorithm::MaxSnr] {
        let mut plan = match algo {
            Algorithm::MaxSnr => RunPlan::baseline(common.seed),
            _ => RunPlan::train(algo, common.seed),
        };
        let sub = dir.join(algo.name());
        plan.out_dir = Some(sub.clone());
        let result = run(&cfg, &plan)?;
        write_artifacts(&sub, &cfg, &result)?;
        print_summary(&result);
        results.push((algo.name(), result));
    }
    let refs: Vec<(&str, &slicesim::engine::RunResult)> =
        results.iter().map(|(n, r)| (*n, r)).collect();
    let crn_verified = write_compare_artifacts(&dir, &refs)?;
    println!("artifacts: {}", dir.display());
    if !crn_verified {
        return Err(SimError::Checkpoint {
            path: dir.display().to_string(),
            reason: "channel fingerprints diverged across compared runs".into(),
        });
    }
    println!("common random numbers verified across all three runs");
    Ok(())
}

fn execute(cli: Cli) -> Result<(), SimError> {
    match &cli.command {
        Command::Train { common, algo } => {
            let algorithm = parse_algo(algo)?;
            let label = format!("train-{}", algorithm.name());
            single_run(common, RunPlan::train(algorithm, common.seed), &label)
        }
        Command::Eval {
            common,
            algo,
            checkpoint,
        } => {
            let algorithm = parse_algo(algo)?;
            let ckpts = [
                checkpoint_path(checkpoint, SliceId::Embb),
                checkpoint_path(checkpoint, SliceId::Urllc),
            ];
            let label = format!("eval-{}", algorithm.name());
            single_run(common, RunPlan::eval(algorithm, common.seed, ckpts), &label)
        }
        Command::Baseline { common } => {
            single_run(common, RunPlan::baseline(common.seed), "baseline-maxsnr")
        }
        Command::Compare { common } => compare(common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
