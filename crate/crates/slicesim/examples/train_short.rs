//! A complete but short training run through the engine API: 150 agent
//! steps (1.5 simulated seconds) on a reduced scenario, with the reward
//! trend, exploration schedule, and final per-user QoS report printed.
//! Artifacts land in a temporary directory so the example leaves no trace.

use slicesim::config::parse_config;
use slicesim::engine::{run, Algorithm, RunPlan};
use slicesim::net::SliceId;
use slicesim::output::write_artifacts;

fn main() {
    // Trimmed scenario: fewer users and a small network keep this example
    // under a few seconds while leaving the full pipeline in place.
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
        replay_capacity = 4000

        [run]
        iterations = 150
        ttis_per_step = 10
        report_window_ttis = 100
        checkpoint_interval_steps = 50
        "#,
        "train_short",
    )
    .expect("example scenario is valid");

    let mut plan = RunPlan::train(Algorithm::Iqra, 1);
    let dir = tempfile::tempdir().expect("tempdir");
    plan.out_dir = Some(dir.path().to_path_buf());

    println!(
        "training {} for {} steps ({} TTIs)...\n",
        plan.algorithm.name(),
        cfg.run.iterations,
        cfg.run.iterations * cfg.run.ttis_per_step
    );
    let result = run(&cfg, &plan).expect("run succeeds");

    println!("{:>5} {:>9} | {:>21} | {:>21}", "step", "epsilon", "eMBB reward (sw100)", "URLLC reward (sw100)");
    for step in (0..cfg.run.iterations).step_by(25) {
        let e = &result.reward_rows[(step * 2) as usize];
        let u = &result.reward_rows[(step * 2 + 1) as usize];
        println!(
            "{step:>5} {:>9.4} | {:>10.4} {:>10.4} | {:>10.4} {:>10.4}",
            e.epsilon, e.reward, e.sw100, u.reward, u.sw100
        );
    }

    let s = &result.summary;
    println!("\nfinal window ({} steps):", s.final_window_steps);
    for slice in SliceId::ALL {
        let i = slice.index();
        println!(
            "  {slice}: mean reward {:.4}, throughput {:.2} Mbps, delay {}, QoS pass {:.0}%",
            s.final_mean_reward[i],
            s.system_throughput_bps[i] / 1e6,
            s.mean_delay_ms[i]
                .map(|d| format!("{d:.3} ms"))
                .unwrap_or_else(|| "n/a".into()),
            s.qos_pass_fraction[i] * 100.0
        );
    }
    println!("\nper-user verdicts:");
    for u in &s.users {
        println!(
            "  user {} ({}): {:.2} Mbps (rate {}), delay {} (deadline {})",
            u.user,
            u.slice,
            u.throughput_bps / 1e6,
            if u.meets_rate { "ok" } else { "MISS" },
            u.mean_delay_ms
                .map(|d| format!("{d:.3} ms"))
                .unwrap_or_else(|| "n/a".into()),
            if u.meets_delay { "ok" } else { "MISS" },
        );
    }

    write_artifacts(dir.path(), &cfg, &result).expect("artifacts write");
    let files: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    println!("\nartifacts written (removed with the tempdir): {files:?}");
    println!("violations: {:?}", s.violations);
}
