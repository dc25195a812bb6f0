//! File emission for runs: CSV traces, empirical CCDF tables, and TOML
//! summaries. Numbers are written with the shortest round-trip formatting,
//! so identical results produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::SimConfig;
use crate::engine::{RunResult, RunSummary};
use crate::error::SimError;
use crate::kpi::{eccdf, KpiWindow};
use crate::net::SliceId;

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn provenance(summary: &RunSummary) -> String {
    format!(
        "# config {}\n# seed {}\n# algorithm {} mode {}\n",
        summary.config_hash,
        summary.seed,
        summary.algorithm.name(),
        summary.mode.name()
    )
}

fn kpi_cells(kpi: &KpiWindow) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        kpi.window_ttis,
        kpi.throughput_bps,
        fmt_opt(kpi.mean_delay_ms),
        fmt_opt(kpi.mean_ber),
        kpi.pdr,
        kpi.success_rate,
        kpi.completed,
        kpi.dropped
    )
}

fn reward_trace_csv(result: &RunResult) -> String {
    let mut s = provenance(&result.summary);
    s.push_str("step,slice,epsilon,action,w1,w2,reward,loss,reward_sw100\n");
    for r in &result.reward_rows {
        let action = r.action.map(|a| a.to_string()).unwrap_or_default();
        let loss = fmt_opt(r.loss);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.step, r.slice, r.epsilon, action, r.w1, r.w2, r.reward, loss, r.sw100
        );
    }
    s
}

fn kpi_csv(result: &RunResult) -> String {
    let mut s = provenance(&result.summary);
    s.push_str(
        "step,user,slice,window_ttis,throughput_bps,mean_delay_ms,mean_ber,\
         pdr,success_rate,completed,dropped\n",
    );
    for r in &result.kpi_rows {
        let _ = writeln!(s, "{},{},{},{}", r.step, r.user, r.slice, kpi_cells(&r.kpi));
    }
    s
}

fn kpi_report_csv(result: &RunResult) -> String {
    let mut s = provenance(&result.summary);
    s.push_str(
        "window,user,slice,window_ttis,throughput_bps,mean_delay_ms,mean_ber,\
         pdr,success_rate,completed,dropped\n",
    );
    for r in &result.report_rows {
        let _ = writeln!(s, "{},{},{},{}", r.window, r.user, r.slice, kpi_cells(&r.kpi));
    }
    s
}

fn assoc_trace_csv(result: &RunResult) -> String {
    let mut s = provenance(&result.summary);
    s.push_str("step,slice,w1,w2,score,serving\n");
    for r in &result.assoc_rows {
        let serving = r
            .serving
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join("|");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.step, r.slice, r.w1, r.w2, r.score, serving
        );
    }
    s
}

fn eccdf_csv(summary: &RunSummary, values: &[f64]) -> String {
    let mut s = provenance(summary);
    s.push_str("value,ccdf\n");
    for (v, p) in eccdf(values) {
        let _ = writeln!(s, "{v},{p}");
    }
    s
}

fn slice_section(s: &mut String, summary: &RunSummary, slice: SliceId) {
    let i = slice.index();
    let _ = writeln!(s, "[{slice}]");
    let _ = writeln!(s, "selector = \"{}\"", summary.selectors[i].name());
    let _ = writeln!(s, "mean_reward = {}", summary.mean_reward[i]);
    let _ = writeln!(s, "final_mean_reward = {}", summary.final_mean_reward[i]);
    let _ = writeln!(
        s,
        "system_throughput_bps = {}",
        summary.system_throughput_bps[i]
    );
    if let Some(d) = summary.mean_delay_ms[i] {
        let _ = writeln!(s, "mean_delay_ms = {d}");
    }
    let _ = writeln!(s, "qos_pass_fraction = {}", summary.qos_pass_fraction[i]);
    s.push('\n');
}

fn summary_toml(summary: &RunSummary) -> String {
    let mut s = provenance(summary);
    s.push('\n');
    let _ = writeln!(s, "algorithm = \"{}\"", summary.algorithm.name());
    let _ = writeln!(s, "mode = \"{}\"", summary.mode.name());
    let _ = writeln!(s, "seed = {}", summary.seed);
    let _ = writeln!(s, "config_hash = \"{}\"", summary.config_hash);
    let _ = writeln!(s, "iterations = {}", summary.iterations);
    let _ = writeln!(s, "total_ttis = {}", summary.total_ttis);
    let _ = writeln!(
        s,
        "channel_fingerprint = \"{:016x}\"",
        summary.channel_fingerprint
    );
    let _ = writeln!(s, "final_window_steps = {}", summary.final_window_steps);
    s.push('\n');
    for slice in SliceId::ALL {
        slice_section(&mut s, summary, slice);
    }
    let _ = writeln!(s, "[violations]");
    let _ = writeln!(s, "one_hot = {}", summary.violations.one_hot);
    let _ = writeln!(s, "prb_budget = {}", summary.violations.prb_budget);
    let _ = writeln!(
        s,
        "bit_conservation = {}",
        summary.violations.bit_conservation
    );
    for u in &summary.users {
        s.push('\n');
        let _ = writeln!(s, "[[user]]");
        let _ = writeln!(s, "id = {}", u.user);
        let _ = writeln!(s, "slice = \"{}\"", u.slice);
        let _ = writeln!(s, "throughput_bps = {}", u.throughput_bps);
        if let Some(d) = u.mean_delay_ms {
            let _ = writeln!(s, "mean_delay_ms = {d}");
        }
        let _ = writeln!(s, "pdr = {}", u.pdr);
        let _ = writeln!(s, "meets_rate = {}", u.meets_rate);
        let _ = writeln!(s, "meets_delay = {}", u.meets_delay);
    }
    s
}

/// Writes one run's full artifact set into `dir` (created if needed):
/// the canonical configuration, the reward/KPI/association traces, one
/// empirical CCDF table per metric and slice, and the run summary.
pub fn write_artifacts(dir: &Path, cfg: &SimConfig, result: &RunResult) -> Result<(), SimError> {
    fs::create_dir_all(dir)?;
    let config_text = format!(
        "# canonical configuration, hash {}\n{}",
        cfg.config_hash,
        toml::to_string_pretty(&cfg.raw).expect("config serializes")
    );
    fs::write(dir.join("config.toml"), config_text)?;
    fs::write(dir.join("reward_trace.csv"), reward_trace_csv(result))?;
    fs::write(dir.join("kpi.csv"), kpi_csv(result))?;
    fs::write(dir.join("kpi_report.csv"), kpi_report_csv(result))?;
    fs::write(dir.join("assoc_trace.csv"), assoc_trace_csv(result))?;
    for slice in SliceId::ALL {
        let i = slice.index();
        fs::write(
            dir.join(format!("eccdf_delay_{slice}.csv")),
            eccdf_csv(&result.summary, &result.delay_samples_ms[i]),
        )?;
        fs::write(
            dir.join(format!("eccdf_throughput_{slice}.csv")),
            eccdf_csv(&result.summary, &result.throughput_samples_bps[i]),
        )?;
    }
    fs::write(dir.join("summary.toml"), summary_toml(&result.summary))?;
    Ok(())
}

/// Writes the joint comparison artifacts for runs that shared one seed:
/// per-metric CCDF tables with an algorithm column, plus a comparison
/// summary. Returns whether all runs drew identical channel realizations
/// (the common-random-numbers check).
pub fn write_compare_artifacts(
    dir: &Path,
    runs: &[(&str, &RunResult)],
) -> Result<bool, SimError> {
    fs::create_dir_all(dir)?;
    let crn_verified = runs
        .windows(2)
        .all(|w| w[0].1.summary.channel_fingerprint == w[1].1.summary.channel_fingerprint);

    for slice in SliceId::ALL {
        let i = slice.index();
        for (metric, pick) in [
            ("delay", 0usize),
            ("throughput", 1usize),
        ] {
            let mut s = String::from("algo,value,ccdf\n");
            for (name, result) in runs {
                let values = match pick {
                    0 => &result.delay_samples_ms[i],
                    _ => &result.throughput_samples_bps[i],
                };
                for (v, p) in eccdf(values) {
                    let _ = writeln!(s, "{name},{v},{p}");
                }
            }
            fs::write(dir.join(format!("compare_eccdf_{metric}_{slice}.csv")), s)?;
        }
    }

    let mut s = String::new();
    let _ = writeln!(s, "crn_verified = {crn_verified}");
    if let Some((_, first)) = runs.first() {
        let _ = writeln!(s, "seed = {}", first.summary.seed);
        let _ = writeln!(s, "config_hash = \"{}\"", first.summary.config_hash);
    }
    for (name, result) in runs {
        let sm = &result.summary;
        s.push('\n');
        let _ = writeln!(s, "[{name}]");
        let _ = writeln!(s, "channel_fingerprint = \"{:016x}\"", sm.channel_fingerprint);
        for slice in SliceId::ALL {
            let i = slice.index();
            let _ = writeln!(
                s,
                "{slice}_system_throughput_bps = {}",
                sm.system_throughput_bps[i]
            );
            if let Some(d) = sm.mean_delay_ms[i] {
                let _ = writeln!(s, "{slice}_mean_delay_ms = {d}");
            }
            let _ = writeln!(s, "{slice}_qos_pass_fraction = {}", sm.qos_pass_fraction[i]);
        }
    }
    fs::write(dir.join("compare_summary.toml"), s)?;
    Ok(crn_verified)
}
