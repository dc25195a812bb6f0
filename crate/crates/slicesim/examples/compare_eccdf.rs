//! Paired comparison under common random numbers: the two learned
//! association algorithms and the strongest-link baseline run against
//! byte-identical channel, traffic and mobility streams, so differences
//! in the resulting distributions are attributable to the algorithms.

use slicesim::config::parse_config;
use slicesim::engine::{run, Algorithm, RunPlan};
use slicesim::kpi::eccdf;
use slicesim::net::SliceId;
use slicesim::output::write_compare_artifacts;

fn quantile(sorted_pairs: &[(f64, f64)], q: f64) -> Option<f64> {
    // eccdf rows are (value ascending, fraction strictly above); the value
    // where the fraction first drops to 1 - q is the q-quantile.
    sorted_pairs
        .iter()
        .find(|(_, p)| *p <= 1.0 - q)
        .map(|(v, _)| *v)
}

fn main() {
    let cfg = parse_config(
        r#"
        [slice.embb]
        users = 3
        r_min_mbps = 16.0
        d_max_ms = 10.0
        packet_bytes = 1024
        arrival_interval_us = 500
        prb_budget = 32
        alpha = 0.7

        [slice.urllc]
        users = 3
        r_min_mbps = 3.8
        d_max_ms = 2.0
        packet_bytes = 480
        arrival_interval_us = 1000
        prb_budget = 15
        alpha = 0.4

        [agent]
        hidden = [64, 64]
        batch_size = 32
        warmup_transitions = 64

        [run]
        iterations = 200
        ttis_per_step = 10
        report_window_ttis = 100
        checkpoint_interval_steps = 100
        "#,
        "compare_eccdf",
    )
    .expect("example scenario is valid");
    let seed = 11;

    let mut results = Vec::new();
    for algo in [Algorithm::Iqra, Algorithm::Liqra, Algorithm::MaxSnr] {
        let plan = match algo {
            Algorithm::MaxSnr => RunPlan::baseline(seed),
            _ => RunPlan::train(algo, seed),
        };
        println!("running {}...", algo.name());
        results.push((algo.name(), run(&cfg, &plan).expect("run succeeds")));
    }

    println!("\nchannel fingerprints (equal = common random numbers held):");
    for (name, r) in &results {
        println!("  {name:<7} {:016x}", r.summary.channel_fingerprint);
    }

    println!("\nlow-latency packet delay quantiles (ms):");
    println!("{:>8} {:>9} {:>9} {:>9} {:>9}", "algo", "median", "p90", "p99", "samples");
    for (name, r) in &results {
        let pairs = eccdf(&r.delay_samples_ms[SliceId::Urllc.index()]);
        println!(
            "{name:>8} {:>9.3} {:>9.3} {:>9.3} {:>9}",
            quantile(&pairs, 0.5).unwrap_or(f64::NAN),
            quantile(&pairs, 0.9).unwrap_or(f64::NAN),
            quantile(&pairs, 0.99).unwrap_or(f64::NAN),
            pairs.len()
        );
    }

    println!("\nbroadband per-user window throughput quantiles (Mbps):");
    println!("{:>8} {:>9} {:>9} {:>9}", "algo", "p10", "median", "p90");
    for (name, r) in &results {
        let pairs = eccdf(&r.throughput_samples_bps[SliceId::Embb.index()]);
        let f = |q| quantile(&pairs, q).map(|v| v / 1e6).unwrap_or(f64::NAN);
        println!("{name:>8} {:>9.2} {:>9.2} {:>9.2}", f(0.1), f(0.5), f(0.9));
    }

    let dir = tempfile::tempdir().expect("tempdir");
    let refs: Vec<(&str, &slicesim::engine::RunResult)> =
        results.iter().map(|(n, r)| (*n, r)).collect();
    let crn = write_compare_artifacts(dir.path(), &refs).expect("artifacts write");
    println!("\njoint artifacts written; common random numbers verified: {crn}");
    println!("(the `slicesim compare` subcommand produces the same files for");
    println!("the full reference scenario, plus per-algorithm run directories)");
}
