//! Run configuration: TOML schema, validation, and resolution into the
//! runtime structures the engine consumes.
//!
//! Every field has a default, so an empty document resolves to the reference
//! scenario: a 2x2 grid of radio units 50 m apart in a 100 m square at 26 GHz,
//! five broadband and five low-latency users, and the standard agent
//! hyper-parameters.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::PathlossModel;
use crate::error::ConfigError;
use crate::net::{OruSpec, SliceBudget, SliceId, UserSpec, ENUMERATION_CAP};

pub const SCHEMA_VERSION: u32 = 1;

fn d_schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default = "d_schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub network: RawNetwork,
    #[serde(default)]
    pub channel: RawChannel,
    #[serde(default)]
    pub slice: RawSlices,
    #[serde(default)]
    pub mobility: RawMobility,
    #[serde(default)]
    pub phy: RawPhy,
    #[serde(default)]
    pub association: RawAssociation,
    #[serde(default)]
    pub agent: RawAgent,
    #[serde(default)]
    pub run: RawRun,
}

impl Default for RawConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config resolves to defaults")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNetwork {
    #[serde(default = "d_area")]
    pub area_m: [f64; 2],
    #[serde(default = "d_oru_count")]
    pub oru_count: usize,
    #[serde(default = "d_oru_spacing")]
    pub oru_spacing_m: f64,
    #[serde(default = "d_oru_height")]
    pub oru_height_m: f64,
    #[serde(default = "d_oru_power")]
    pub oru_tx_power_mw: f64,
    /// Explicit placement; when absent, units sit on a centred square grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oru_positions_m: Option<Vec<[f64; 2]>>,
    #[serde(default = "d_bandwidth")]
    pub total_bandwidth_mhz: f64,
}

fn d_area() -> [f64; 2] {
    [100.0, 100.0]
}
fn d_oru_count() -> usize {
    4
}
fn d_oru_spacing() -> f64 {
    50.0
}
fn d_oru_height() -> f64 {
    3.0
}
fn d_oru_power() -> f64 {
    200.0
}
fn d_bandwidth() -> f64 {
    8.46
}

impl Default for RawNetwork {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawChannel {
    #[serde(default = "d_carrier")]
    pub carrier_ghz: f64,
    #[serde(default = "d_pl_exp")]
    pub pathloss_exponent: f64,
    #[serde(default = "d_sh_sigma")]
    pub shadowing_sigma_db: f64,
    #[serde(default = "d_sh_period")]
    pub shadowing_period_ttis: u64,
    #[serde(default = "d_noise")]
    pub noise_dbm: f64,
    /// Receiver noise figure, dB. Informational: documents how `noise_dbm`
    /// was derived, the simulation reads only `noise_dbm`.
    #[serde(default = "d_noise_figure")]
    pub noise_figure_db: f64,
    /// Reference temperature, K. Informational, see `noise_figure_db`.
    #[serde(default = "d_temperature")]
    pub temperature_k: f64,
}

fn d_carrier() -> f64 {
    26.0
}
fn d_pl_exp() -> f64 {
    3.5
}
fn d_sh_sigma() -> f64 {
    8.0
}
fn d_sh_period() -> u64 {
    100
}
fn d_noise() -> f64 {
    -146.424
}
fn d_noise_figure() -> f64 {
    5.0
}
fn d_temperature() -> f64 {
    290.0
}

impl Default for RawChannel {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSlices {
    #[serde(default = "d_embb")]
    pub embb: RawSlice,
    #[serde(default = "d_urllc")]
    pub urllc: RawSlice,
}

impl Default for RawSlices {
    fn default() -> Self {
        RawSlices {
            embb: d_embb(),
            urllc: d_urllc(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSlice {
    pub users: usize,
    pub r_min_mbps: f64,
    pub d_max_ms: f64,
    pub packet_bytes: u64,
    pub arrival_interval_us: u64,
    pub prb_budget: u32,
    /// Weight of the rate term in the agent reward; the delay term gets 1 - alpha.
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fronthaul_cap_mbps: Option<f64>,
}

fn d_embb() -> RawSlice {
    RawSlice {
        users: 5,
        r_min_mbps: 16.0,
        d_max_ms: 10.0,
        packet_bytes: 1024,
        arrival_interval_us: 500,
        prb_budget: 32,
        alpha: 0.7,
        fronthaul_cap_mbps: None,
    }
}

fn d_urllc() -> RawSlice {
    RawSlice {
        users: 5,
        r_min_mbps: 3.8,
        d_max_ms: 2.0,
        packet_bytes: 480,
        arrival_interval_us: 1000,
        prb_budget: 15,
        alpha: 0.4,
        fronthaul_cap_mbps: None,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMobility {
    #[serde(default = "d_speed")]
    pub speed_kmh: f64,
}

fn d_speed() -> f64 {
    30.0
}

impl Default for RawMobility {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPhy {
    /// Path to an MCS table file; when absent the built-in table applies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcs_lut: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAssociation {
    /// "raw" scores candidates on unnormalized terms; "minmax" rescales both
    /// terms to [0, 1] across the candidate set first.
    #[serde(default = "d_scoring")]
    pub scoring: String,
    /// Value assigned to the congestion metric when bits are buffered but
    /// none were transmitted.
    #[serde(default = "d_tau_cap")]
    pub tau_cap: f64,
    #[serde(default = "d_enum_cap")]
    pub enumeration_cap: u64,
    /// When true, the PRB feasibility check pools each slice's budget across
    /// all units instead of enforcing it per unit.
    #[serde(default)]
    pub network_budget: bool,
    /// When exhaustive selection would exceed `enumeration_cap` for a slice,
    /// fall back to the linear selector for that slice instead of aborting.
    #[serde(default = "d_fallback")]
    pub fallback_linear: bool,
}

fn d_fallback() -> bool {
    true
}

fn d_scoring() -> String {
    "raw".into()
}
fn d_tau_cap() -> f64 {
    100.0
}
fn d_enum_cap() -> u64 {
    ENUMERATION_CAP
}

impl Default for RawAssociation {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAgent {
    #[serde(default = "d_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default = "d_lr")]
    pub learning_rate: f64,
    #[serde(default = "d_batch")]
    pub batch_size: usize,
    #[serde(default = "d_replay")]
    pub replay_capacity: usize,
    #[serde(default = "d_warmup")]
    pub warmup_transitions: usize,
    #[serde(default = "d_sync")]
    pub target_sync_interval: u64,
    #[serde(default = "d_gamma")]
    pub gamma: f64,
    #[serde(default = "d_eps_start")]
    pub epsilon_start: f64,
    #[serde(default = "d_eps_decay")]
    pub epsilon_decay: f64,
    #[serde(default = "d_eps_min")]
    pub epsilon_min: f64,
    /// Each action weight ranges over {1/N, ..., N/N}; this is N.
    #[serde(default = "d_weight_grid")]
    pub weight_grid: u32,
    /// Channel gain (dB) mapped to state value 0.
    #[serde(default = "d_state_gain_floor")]
    pub state_gain_floor_db: f64,
    /// Channel gain (dB) mapped to state value 1.
    #[serde(default = "d_state_gain_ceil")]
    pub state_gain_ceil_db: f64,
    /// Buffered packet count mapped to state value 1.
    #[serde(default = "d_state_packet_cap")]
    pub state_packet_cap: u32,
}

fn d_hidden() -> Vec<usize> {
    vec![256, 256]
}
fn d_lr() -> f64 {
    1e-3
}
fn d_batch() -> usize {
    64
}
fn d_replay() -> usize {
    10_000
}
fn d_warmup() -> usize {
    200
}
fn d_sync() -> u64 {
    100
}
fn d_gamma() -> f64 {
    0.995
}
fn d_eps_start() -> f64 {
    1.0
}
fn d_eps_decay() -> f64 {
    0.99
}
fn d_eps_min() -> f64 {
    0.01
}
fn d_weight_grid() -> u32 {
    10
}
fn d_state_gain_floor() -> f64 {
    -160.0
}
fn d_state_gain_ceil() -> f64 {
    -40.0
}
fn d_state_packet_cap() -> u32 {
    64
}

impl Default for RawAgent {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRun {
    /// Number of agent steps (control intervals) per run.
    #[serde(default = "d_iterations")]
    pub iterations: u64,
    /// TTIs per agent step.
    #[serde(default = "d_ttis_per_step")]
    pub ttis_per_step: u64,
    /// KPI reporting window length, TTIs.
    #[serde(default = "d_report_window")]
    pub report_window_ttis: u64,
    /// Agent steps between checkpoint writes in training mode.
    #[serde(default = "d_checkpoint_interval")]
    pub checkpoint_interval_steps: u64,
}

fn d_iterations() -> u64 {
    3000
}
fn d_ttis_per_step() -> u64 {
    10
}
fn d_report_window() -> u64 {
    100
}
fn d_checkpoint_interval() -> u64 {
    500
}

impl Default for RawRun {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}

/// Candidate scoring mode for the exhaustive selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoringMode {
    Raw,
    MinMax,
}

#[derive(Debug, Clone)]
pub struct AgentConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub warmup_transitions: usize,
    pub target_sync_interval: u64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
    pub weight_grid: u32,
    pub state_gain_floor_db: f64,
    pub state_gain_ceil_db: f64,
    pub state_packet_cap: u32,
}

#[derive(Debug, Clone)]
pub struct AssocConfig {
    pub scoring: ScoringMode,
    pub tau_cap: f64,
    pub enumeration_cap: u64,
    pub network_budget: bool,
    pub fallback_linear: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub iterations: u64,
    pub ttis_per_step: u64,
    pub report_window_ttis: u64,
    pub checkpoint_interval_steps: u64,
}

/// Fully validated runtime configuration.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub raw: RawConfig,
    pub users: Vec<UserSpec>,
    pub orus: Vec<OruSpec>,
    pub budgets: [SliceBudget; 2],
    /// User ids belonging to each slice, indexed by `SliceId::index()`.
    pub slice_users: [Vec<usize>; 2],
    /// Reward rate-term weight per slice.
    pub alpha: [f64; 2],
    pub pathloss: PathlossModel,
    pub noise_mw: f64,
    pub shadowing_sigma_db: f64,
    pub shadowing_period_ttis: u64,
    pub area_m: [f64; 2],
    pub mcs_lut_path: Option<String>,
    pub agent: AgentConfig,
    pub assoc: AssocConfig,
    pub run: RunConfig,
    /// SHA-256 over the canonical serialized configuration.
    pub config_hash: String,
}

impl SimConfig {
    pub fn users_of(&self, slice: SliceId) -> &[usize] {
        &self.slice_users[slice.index()]
    }

    pub fn budget(&self, slice: SliceId) -> &SliceBudget {
        &self.budgets[slice.index()]
    }

    pub fn slice_of(&self, user: usize) -> SliceId {
        self.users[user].slice
    }
}

/// Centred square-grid placement for `count` units spaced `spacing` apart.
pub fn grid_positions(count: usize, spacing_m: f64, area_m: [f64; 2]) -> Vec<[f64; 2]> {
    let side = (count as f64).sqrt().ceil() as usize;
    let rows = count.div_ceil(side);
    let width = (side - 1) as f64 * spacing_m;
    let height = (rows - 1) as f64 * spacing_m;
    let origin = [(area_m[0] - width) / 2.0, (area_m[1] - height) / 2.0];
    (0..count)
        .map(|i| {
            let (row, col) = (i / side, i % side);
            [
                origin[0] + col as f64 * spacing_m,
                origin[1] + row as f64 * spacing_m,
            ]
        })
        .collect()
}

fn field_err(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn check_positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if !(v.is_finite() && v > 0.0) {
        return Err(field_err(field, format!("must be a positive finite number, got {v}")));
    }
    Ok(())
}

fn check_unit_interval(field: &str, v: f64) -> Result<(), ConfigError> {
    if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
        return Err(field_err(field, format!("must lie in [0, 1], got {v}")));
    }
    Ok(())
}

/// Validate a raw document and resolve it to runtime form.
pub fn resolve(raw: RawConfig) -> Result<SimConfig, ConfigError> {
    if raw.schema_version != SCHEMA_VERSION {
        return Err(ConfigError::SchemaVersion {
            found: raw.schema_version,
            expected: SCHEMA_VERSION,
        });
    }

    let net = &raw.network;
    if net.oru_count == 0 {
        return Err(field_err("network.oru_count", "need at least one radio unit"));
    }
    check_positive("network.area_m[0]", net.area_m[0])?;
    check_positive("network.area_m[1]", net.area_m[1])?;
    check_positive("network.oru_spacing_m", net.oru_spacing_m)?;
    check_positive("network.oru_tx_power_mw", net.oru_tx_power_mw)?;
    check_positive("network.total_bandwidth_mhz", net.total_bandwidth_mhz)?;
    if !(net.oru_height_m.is_finite() && net.oru_height_m >= 0.0) {
        return Err(field_err("network.oru_height_m", "must be non-negative"));
    }

    let positions = match &net.oru_positions_m {
        Some(p) => {
            if p.len() != net.oru_count {
                return Err(field_err(
                    "network.oru_positions_m",
                    format!("expected {} positions, found {}", net.oru_count, p.len()),
                ));
            }
            for (i, pos) in p.iter().enumerate() {
                if !(0.0..=net.area_m[0]).contains(&pos[0])
                    || !(0.0..=net.area_m[1]).contains(&pos[1])
                {
                    return Err(field_err(
                        &format!("network.oru_positions_m[{i}]"),
                        "position outside the service area",
                    ));
                }
            }
            p.clone()
        }
        None => {
            let p = grid_positions(net.oru_count, net.oru_spacing_m, net.area_m);
            if let Some(bad) = p.iter().find(|pos| {
                !(0.0..=net.area_m[0]).contains(&pos[0]) || !(0.0..=net.area_m[1]).contains(&pos[1])
            }) {
                return Err(field_err(
                    "network.oru_spacing_m",
                    format!("grid placement {bad:?} falls outside the service area"),
                ));
            }
            p
        }
    };
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            if positions[i] == positions[j] {
                return Err(field_err(
                    "network.oru_positions_m",
                    format!("units {i} and {j} share position {:?}", positions[i]),
                ));
            }
        }
    }

    let ch = &raw.channel;
    check_positive("channel.carrier_ghz", ch.carrier_ghz)?;
    check_positive("channel.pathloss_exponent", ch.pathloss_exponent)?;
    if !(ch.shadowing_sigma_db.is_finite() && ch.shadowing_sigma_db >= 0.0) {
        return Err(field_err("channel.shadowing_sigma_db", "must be non-negative"));
    }
    if ch.shadowing_period_ttis == 0 {
        return Err(field_err("channel.shadowing_period_ttis", "must be at least 1"));
    }
    if !ch.noise_dbm.is_finite() {
        return Err(field_err("channel.noise_dbm", "must be finite"));
    }
    check_positive("channel.temperature_k", ch.temperature_k)?;
    if !ch.noise_figure_db.is_finite() {
        return Err(field_err("channel.noise_figure_db", "must be finite"));
    }

    for (name, s) in [("embb", &raw.slice.embb), ("urllc", &raw.slice.urllc)] {
        let f = |suffix: &str| format!("slice.{name}.{suffix}");
        if s.users == 0 {
            return Err(field_err(&f("users"), "need at least one user"));
        }
        check_positive(&f("r_min_mbps"), s.r_min_mbps)?;
        check_positive(&f("d_max_ms"), s.d_max_ms)?;
        if s.packet_bytes == 0 {
            return Err(field_err(&f("packet_bytes"), "must be at least 1"));
        }
        if s.arrival_interval_us == 0 {
            return Err(field_err(&f("arrival_interval_us"), "must be at least 1"));
        }
        if s.prb_budget == 0 {
            return Err(field_err(&f("prb_budget"), "must be at least 1"));
        }
        check_unit_interval(&f("alpha"), s.alpha)?;
        if let Some(cap) = s.fronthaul_cap_mbps {
            check_positive(&f("fronthaul_cap_mbps"), cap)?;
        }
    }

    let total_prbs = raw.slice.embb.prb_budget + raw.slice.urllc.prb_budget;
    let needed_mhz = total_prbs as f64 * 0.18;
    if needed_mhz > net.total_bandwidth_mhz + 1e-9 {
        return Err(field_err(
            "network.total_bandwidth_mhz",
            format!(
                "slice budgets need {total_prbs} PRBs = {needed_mhz:.2} MHz, have {} MHz",
                net.total_bandwidth_mhz
            ),
        ));
    }

    if !(raw.mobility.speed_kmh.is_finite() && raw.mobility.speed_kmh >= 0.0) {
        return Err(field_err("mobility.speed_kmh", "must be non-negative"));
    }

    match raw.association.scoring.as_str() {
        "raw" | "minmax" => {}
        other => {
            return Err(field_err(
                "association.scoring",
                format!("must be \"raw\" or \"minmax\", got \"{other}\""),
            ))
        }
    }
    check_positive("association.tau_cap", raw.association.tau_cap)?;
    if raw.association.enumeration_cap == 0 {
        return Err(field_err("association.enumeration_cap", "must be at least 1"));
    }

    let ag = &raw.agent;
    if ag.hidden.is_empty() || ag.hidden.iter().any(|&h| h == 0) {
        return Err(field_err("agent.hidden", "layer widths must be positive"));
    }
    check_positive("agent.learning_rate", ag.learning_rate)?;
    if ag.batch_size == 0 {
        return Err(field_err("agent.batch_size", "must be at least 1"));
    }
    if ag.replay_capacity < ag.batch_size {
        return Err(field_err(
            "agent.replay_capacity",
            format!(
                "capacity {} smaller than batch size {}",
                ag.replay_capacity, ag.batch_size
            ),
        ));
    }
    if ag.warmup_transitions < ag.batch_size {
        return Err(field_err(
            "agent.warmup_transitions",
            format!(
                "warm-up {} must cover at least one batch of {}",
                ag.warmup_transitions, ag.batch_size
            ),
        ));
    }
    if ag.target_sync_interval == 0 {
        return Err(field_err("agent.target_sync_interval", "must be at least 1"));
    }
    if !(ag.gamma.is_finite() && (0.0..1.0).contains(&ag.gamma)) {
        return Err(field_err("agent.gamma", format!("must lie in [0, 1), got {}", ag.gamma)));
    }
    check_unit_interval("agent.epsilon_start", ag.epsilon_start)?;
    check_unit_interval("agent.epsilon_decay", ag.epsilon_decay)?;
    check_unit_interval("agent.epsilon_min", ag.epsilon_min)?;
    if ag.epsilon_min > ag.epsilon_start {
        return Err(field_err(
            "agent.epsilon_min",
            "floor cannot exceed the starting value",
        ));
    }
    if ag.weight_grid == 0 {
        return Err(field_err("agent.weight_grid", "must be at least 1"));
    }
    if !(ag.state_gain_floor_db < ag.state_gain_ceil_db) {
        return Err(field_err(
            "agent.state_gain_floor_db",
            format!(
                "must lie below state_gain_ceil_db, got {} >= {}",
                ag.state_gain_floor_db, ag.state_gain_ceil_db
            ),
        ));
    }
    if ag.state_packet_cap == 0 {
        return Err(field_err("agent.state_packet_cap", "must be at least 1"));
    }

    let run = &raw.run;
    if run.iterations == 0 {
        return Err(field_err("run.iterations", "must be at least 1"));
    }
    if run.ttis_per_step == 0 {
        return Err(field_err("run.ttis_per_step", "must be at least 1"));
    }
    if run.report_window_ttis == 0 {
        return Err(field_err("run.report_window_ttis", "must be at least 1"));
    }
    if run.checkpoint_interval_steps == 0 {
        return Err(field_err("run.checkpoint_interval_steps", "must be at least 1"));
    }

    // Resolution.
    let speed_mps = raw.mobility.speed_kmh / 3.6;
    let mut users = Vec::new();
    for (slice, s) in [
        (SliceId::Embb, &raw.slice.embb),
        (SliceId::Urllc, &raw.slice.urllc),
    ] {
        for _ in 0..s.users {
            users.push(UserSpec {
                id: users.len(),
                slice,
                r_min_bps: s.r_min_mbps * 1e6,
                d_max_ms: s.d_max_ms,
                packet_bits: s.packet_bytes * 8,
                arrival_interval_us: s.arrival_interval_us,
                speed_mps,
            });
        }
    }
    let slice_users = [
        users
            .iter()
            .filter(|u| u.slice == SliceId::Embb)
            .map(|u| u.id)
            .collect(),
        users
            .iter()
            .filter(|u| u.slice == SliceId::Urllc)
            .map(|u| u.id)
            .collect(),
    ];

    let orus = positions
        .iter()
        .enumerate()
        .map(|(id, &pos_m)| OruSpec {
            id,
            pos_m,
            height_m: net.oru_height_m,
            tx_power_mw: net.oru_tx_power_mw,
        })
        .collect();

    let budgets = [
        SliceBudget {
            slice: SliceId::Embb,
            prb_count: raw.slice.embb.prb_budget,
            fronthaul_cap_bps: raw.slice.embb.fronthaul_cap_mbps.map(|m| m * 1e6),
        },
        SliceBudget {
            slice: SliceId::Urllc,
            prb_count: raw.slice.urllc.prb_budget,
            fronthaul_cap_bps: raw.slice.urllc.fronthaul_cap_mbps.map(|m| m * 1e6),
        },
    ];

    let scoring = match raw.association.scoring.as_str() {
        "raw" => ScoringMode::Raw,
        _ => ScoringMode::MinMax,
    };

    let config_hash = hash_raw(&raw);

    Ok(SimConfig {
        users,
        orus,
        budgets,
        slice_users,
        alpha: [raw.slice.embb.alpha, raw.slice.urllc.alpha],
        pathloss: PathlossModel {
            exponent: raw.channel.pathloss_exponent,
            carrier_hz: raw.channel.carrier_ghz * 1e9,
        },
        noise_mw: crate::channel::dbm_to_mw(raw.channel.noise_dbm),
        shadowing_sigma_db: raw.channel.shadowing_sigma_db,
        shadowing_period_ttis: raw.channel.shadowing_period_ttis,
        area_m: raw.network.area_m,
        mcs_lut_path: raw.phy.mcs_lut.clone(),
        agent: AgentConfig {
            hidden: ag.hidden.clone(),
            learning_rate: ag.learning_rate,
            batch_size: ag.batch_size,
            replay_capacity: ag.replay_capacity,
            warmup_transitions: ag.warmup_transitions,
            target_sync_interval: ag.target_sync_interval,
            gamma: ag.gamma,
            epsilon_start: ag.epsilon_start,
            epsilon_decay: ag.epsilon_decay,
            epsilon_min: ag.epsilon_min,
            weight_grid: ag.weight_grid,
            state_gain_floor_db: ag.state_gain_floor_db,
            state_gain_ceil_db: ag.state_gain_ceil_db,
            state_packet_cap: ag.state_packet_cap,
        },
        assoc: AssocConfig {
            scoring,
            tau_cap: raw.association.tau_cap,
            enumeration_cap: raw.association.enumeration_cap,
            network_budget: raw.association.network_budget,
            fallback_linear: raw.association.fallback_linear,
        },
        run: RunConfig {
            iterations: run.iterations,
            ttis_per_step: run.ttis_per_step,
            report_window_ttis: run.report_window_ttis,
            checkpoint_interval_steps: run.checkpoint_interval_steps,
        },
        config_hash,
        raw,
    })
}

/// SHA-256 over the canonical serialization of the (defaulted) document, so
/// formatting and comments do not affect the hash but every value does.
pub fn hash_raw(raw: &RawConfig) -> String {
    let canonical = toml::to_string(raw).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parse a TOML string and resolve it.
pub fn parse_config(text: &str, origin: &str) -> Result<SimConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: origin.to_string(),
        reason: e.to_string(),
    })?;
    resolve(raw)
}

/// Load and resolve a TOML file.
pub fn load_config(path: &Path) -> Result<SimConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, &path.display().to_string())
}

/// The reference scenario (all defaults).
pub fn default_config() -> SimConfig {
    resolve(RawConfig::default()).expect("defaults validate")
}
