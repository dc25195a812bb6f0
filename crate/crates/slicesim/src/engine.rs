//! Simulation engine: drives the per-TTI loop (mobility, channel, traffic,
//! association, scheduling, transmission, congestion commit), runs the
//! per-slice agents at their decision cadence, enforces the conservation
//! invariants every TTI, and collects every trace a run produces.

use std::path::{Path, PathBuf};

use rand_chacha::ChaCha8Rng;

use crate::association::{
    iqra_select, liqra_select, max_snr_select, NetworkSnapshot, SnapUser, TauState, WeightPair,
};
use crate::channel::{distance_3d, draw_channel, ChannelGains, MobilityModel, ShadowingField};
use crate::config::SimConfig;
use crate::dqn::{action_to_weights, build_state, reward, Checkpoint, DqnAgent, Transition};
use crate::error::SimError;
use crate::kpi::{packet_delay_ms, KpiWindow, UserAccum};
use crate::net::{candidate_count, SliceId};
use crate::phy::{bits_per_prb, prbs_required, McsLut, TTI_MS};
use crate::rng::{named_stream, stream, StreamHasher};
use crate::scheduler::{schedule, Grant, PfState, UserDemand};
use crate::traffic::{arrival_times_ms, Packet, UserBuffer};

/// Steps at the tail of a run over which the summary judges QoS attainment.
pub const FINAL_WINDOW_STEPS: u64 = 500;

/// Association algorithm driving step decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Exhaustive candidate enumeration per slice (falls back to the linear
    /// selector where the candidate count exceeds the enumeration cap, if
    /// the configuration allows it).
    Iqra,
    /// Linear per-user selection.
    Liqra,
    /// Strongest-link assignment; ignores queue state and runs no agent.
    MaxSnr,
}

impl Algorithm {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "iqra" => Some(Algorithm::Iqra),
            "liqra" => Some(Algorithm::Liqra),
            "maxsnr" => Some(Algorithm::MaxSnr),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Iqra => "iqra",
            Algorithm::Liqra => "liqra",
            Algorithm::MaxSnr => "maxsnr",
        }
    }

    /// Whether this algorithm consumes the agent's weight pair.
    pub fn uses_weights(self) -> bool {
        !matches!(self, Algorithm::MaxSnr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Agents explore and learn online.
    Train,
    /// Agents act greedily from loaded checkpoints; no updates.
    Eval,
    /// No agents; strongest-link association throughout.
    Baseline,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Train => "train",
            Mode::Eval => "eval",
            Mode::Baseline => "baseline",
        }
    }
}

/// Everything that defines one run besides the configuration itself.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub mode: Mode,
    pub algorithm: Algorithm,
    pub seed: u64,
    /// When set, training checkpoints are written here during the run.
    pub out_dir: Option<PathBuf>,
    /// Trained parameters per slice for eval mode, indexed by `SliceId`.
    pub checkpoints: Option<[PathBuf; 2]>,
}

impl RunPlan {
    pub fn train(algorithm: Algorithm, seed: u64) -> Self {
        RunPlan {
            mode: Mode::Train,
            algorithm,
            seed,
            out_dir: None,
            checkpoints: None,
        }
    }

    pub fn eval(algorithm: Algorithm, seed: u64, checkpoints: [PathBuf; 2]) -> Self {
        RunPlan {
            mode: Mode::Eval,
            algorithm,
            seed,
            out_dir: None,
            checkpoints: Some(checkpoints),
        }
    }

    pub fn baseline(seed: u64) -> Self {
        RunPlan {
            mode: Mode::Baseline,
            algorithm: Algorithm::MaxSnr,
            seed,
            out_dir: None,
            checkpoints: None,
        }
    }
}

/// Conventional checkpoint file location for a slice under an output dir.
pub fn checkpoint_path(dir: &Path, slice: SliceId) -> PathBuf {
    dir.join(format!("checkpoint_{slice}.json"))
}

/// Effective per-slice selection routine after cap resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Exhaustive,
    Linear,
    StrongestLink,
}

impl Selector {
    pub fn name(self) -> &'static str {
        match self {
            Selector::Exhaustive => "exhaustive",
            Selector::Linear => "linear",
            Selector::StrongestLink => "strongest-link",
        }
    }
}

/// Maps the chosen algorithm onto a concrete selector per slice. Exhaustive
/// selection demands `orus^users` candidate evaluations; slices above the
/// enumeration cap either fall back to the linear selector or abort,
/// depending on configuration.
pub fn resolve_selectors(cfg: &SimConfig, algorithm: Algorithm) -> Result<[Selector; 2], SimError> {
    let orus = cfg.orus.len();
    let mut out = [Selector::StrongestLink; 2];
    for slice in SliceId::ALL {
        let users = cfg.users_of(slice).len();
        out[slice.index()] = match algorithm {
            Algorithm::MaxSnr => Selector::StrongestLink,
            Algorithm::Liqra => Selector::Linear,
            Algorithm::Iqra => {
                let total = candidate_count(users, orus);
                if total <= u128::from(cfg.assoc.enumeration_cap) {
                    Selector::Exhaustive
                } else if cfg.assoc.fallback_linear {
                    Selector::Linear
                } else {
                    return Err(SimError::EnumerationCap {
                        total,
                        orus,
                        users,
                        cap: cfg.assoc.enumeration_cap,
                    });
                }
            }
        };
    }
    Ok(out)
}

/// One agent step of one slice in the reward trace.
#[derive(Debug, Clone)]
pub struct RewardRow {
    pub step: u64,
    pub slice: SliceId,
    /// Exploration rate in effect when this step's action was chosen.
    pub epsilon: f64,
    /// Chosen action index; absent for the strongest-link baseline.
    pub action: Option<usize>,
    pub w1: f64,
    pub w2: f64,
    /// Reward earned over this step's window.
    pub reward: f64,
    /// Training loss incurred at the boundary where this action was chosen.
    pub loss: Option<f64>,
    /// Trailing mean of the last (up to) 100 step rewards.
    pub sw100: f64,
}

/// Per-user KPI summary over one agent step.
#[derive(Debug, Clone)]
pub struct KpiRow {
    pub step: u64,
    pub slice: SliceId,
    pub user: usize,
    pub kpi: KpiWindow,
}

/// Per-user KPI summary over one reporting window.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub window: u64,
    pub slice: SliceId,
    pub user: usize,
    pub kpi: KpiWindow,
}

/// Committed association of one slice at one agent step.
#[derive(Debug, Clone)]
pub struct AssocRow {
    pub step: u64,
    pub slice: SliceId,
    pub w1: f64,
    pub w2: f64,
    /// Raw-weighted score of the committed choice.
    pub score: f64,
    /// Serving unit per slice-local user.
    pub serving: Vec<usize>,
}

/// Per-TTI invariant violation counters; all stay zero in a correct build.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Violations {
    pub one_hot: u64,
    pub prb_budget: u64,
    pub bit_conservation: u64,
}

impl Violations {
    pub fn total(&self) -> u64 {
        self.one_hot + self.prb_budget + self.bit_conservation
    }
}

/// Final per-user record: means over the closing window and QoS verdicts.
#[derive(Debug, Clone)]
pub struct UserQos {
    pub user: usize,
    pub slice: SliceId,
    pub throughput_bps: f64,
    pub mean_delay_ms: Option<f64>,
    pub pdr: f64,
    pub meets_rate: bool,
    pub meets_delay: bool,
}

impl UserQos {
    pub fn passes(&self) -> bool {
        self.meets_rate && self.meets_delay
    }
}

/// Run-level summary: provenance, aggregates, QoS verdicts, invariants.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub mode: Mode,
    pub seed: u64,
    pub config_hash: String,
    pub iterations: u64,
    pub total_ttis: u64,
    pub selectors: [Selector; 2],
    /// Order-sensitive digest of every channel gain drawn; equal digests
    /// across runs certify common random numbers.
    pub channel_fingerprint: u64,
    /// Mean step reward per slice over the whole run.
    pub mean_reward: [f64; 2],
    /// Mean step reward per slice over the final window.
    pub final_mean_reward: [f64; 2],
    pub final_window_steps: u64,
    /// Slice-aggregate served throughput over the final window.
    pub system_throughput_bps: [f64; 2],
    /// Packet-weighted mean delay per slice over the final window.
    pub mean_delay_ms: [Option<f64>; 2],
    /// Fraction of each slice's users meeting both QoS thresholds.
    pub qos_pass_fraction: [f64; 2],
    pub users: Vec<UserQos>,
    pub violations: Violations,
}

/// Everything a run produces, in memory; file emission is separate.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub reward_rows: Vec<RewardRow>,
    pub kpi_rows: Vec<KpiRow>,
    pub report_rows: Vec<ReportRow>,
    pub assoc_rows: Vec<AssocRow>,
    /// Delay of every completed packet, per slice, ms.
    pub delay_samples_ms: [Vec<f64>; 2],
    /// Per-user served throughput in each reporting window, per slice.
    pub throughput_samples_bps: [Vec<f64>; 2],
    pub summary: RunSummary,
}

struct Simulation<'a> {
    cfg: &'a SimConfig,
    plan: &'a RunPlan,
    lut: McsLut,
    selectors: [Selector; 2],
    ttis_per_step: u64,
    // Environment.
    mobility: MobilityModel,
    shadowing: ShadowingField,
    channel_rng: ChaCha8Rng,
    shadow_rng: ChaCha8Rng,
    mobility_rng: ChaCha8Rng,
    speeds: Vec<f64>,
    gains: ChannelGains,
    hasher: StreamHasher,
    // Traffic and queueing.
    buffers: Vec<UserBuffer>,
    arrived_bits: Vec<u64>,
    sent_bits: Vec<u64>,
    dropped_bits: Vec<u64>,
    // Scheduling state.
    pf: PfState,
    tau: TauState,
    serving: Vec<usize>,
    // Agents (absent for the baseline).
    agents: Option<[DqnAgent; 2]>,
    explore_rngs: [ChaCha8Rng; 2],
    replay_rngs: [ChaCha8Rng; 2],
    prev_state: [Option<Vec<f64>>; 2],
    prev_action: [Option<usize>; 2],
    weights: [WeightPair; 2],
    // Accounting.
    window_accums: Vec<UserAccum>,
    report_accums: Vec<UserAccum>,
    report_window_start: u64,
    report_index: u64,
    reward_rows: Vec<RewardRow>,
    kpi_rows: Vec<KpiRow>,
    report_rows: Vec<ReportRow>,
    assoc_rows: Vec<AssocRow>,
    delay_samples: [Vec<f64>; 2],
    tput_samples: [Vec<f64>; 2],
    violations: Violations,
}

impl<'a> Simulation<'a> {
    fn new(cfg: &'a SimConfig, plan: &'a RunPlan) -> Result<Self, SimError> {
        let lut = match &cfg.mcs_lut_path {
            Some(path) => McsLut::from_file(Path::new(path))?,
            None => McsLut::builtin(),
        };
        let selectors = resolve_selectors(cfg, plan.algorithm)?;
        let num_users = cfg.users.len();
        let num_orus = cfg.orus.len();

        let mut mobility_rng = named_stream(plan.seed, stream::MOBILITY);
        let mobility = MobilityModel::new_uniform(num_users, cfg.area_m, &mut mobility_rng);
        let shadowing = ShadowingField::new(
            num_users,
            num_orus,
            cfg.shadowing_sigma_db,
            cfg.shadowing_period_ttis,
        );

        let agents = if plan.algorithm.uses_weights() && plan.mode != Mode::Baseline {
            let mut built = Vec::with_capacity(2);
            for slice in SliceId::ALL {
                let k = cfg.users_of(slice).len();
                let state_len = crate::dqn::state_len(num_orus, k);
                let label = slice.as_char();
                let init_label = match slice {
                    SliceId::Embb => stream::AGENT_INIT_E,
                    SliceId::Urllc => stream::AGENT_INIT_U,
                };
                let mut init_rng = named_stream(plan.seed, init_label);
                let mut agent = DqnAgent::new(label, state_len, &cfg.agent, &mut init_rng);
                if plan.mode == Mode::Eval {
                    let paths = plan.checkpoints.as_ref().ok_or(SimError::Checkpoint {
                        path: String::from("<unset>"),
                        reason: String::from("eval mode requires trained parameters"),
                    })?;
                    let ck = Checkpoint::load(&paths[slice.index()])?;
                    agent.restore(&ck)?;
                    agent.set_epsilon(0.0);
                }
                built.push(agent);
            }
            let mut it = built.into_iter();
            Some([it.next().unwrap(), it.next().unwrap()])
        } else {
            None
        };

        Ok(Simulation {
            cfg,
            plan,
            lut,
            selectors,
            ttis_per_step: cfg.run.ttis_per_step,
            mobility,
            shadowing,
            channel_rng: named_stream(plan.seed, stream::CHANNEL),
            shadow_rng: named_stream(plan.seed, stream::SHADOWING),
            mobility_rng,
            speeds: cfg.users.iter().map(|u| u.speed_mps).collect(),
            gains: ChannelGains::from_raw(vec![0.0; num_users * num_orus], num_orus),
            hasher: StreamHasher::new(),
            buffers: vec![UserBuffer::new(); num_users],
            arrived_bits: vec![0; num_users],
            sent_bits: vec![0; num_users],
            dropped_bits: vec![0; num_users],
            pf: PfState::new(num_users),
            tau: TauState::new(num_orus, cfg.assoc.tau_cap),
            serving: vec![0; num_users],
            agents,
            explore_rngs: [
                named_stream(plan.seed, stream::EXPLORE_E),
                named_stream(plan.seed, stream::EXPLORE_U),
            ],
            replay_rngs: [
                named_stream(plan.seed, stream::REPLAY_E),
                named_stream(plan.seed, stream::REPLAY_U),
            ],
            prev_state: [None, None],
            prev_action: [None, None],
            weights: [WeightPair { w1: 0.0, w2: 0.0 }; 2],
            window_accums: vec![UserAccum::new(); num_users],
            report_accums: vec![UserAccum::new(); num_users],
            report_window_start: 0,
            report_index: 0,
            reward_rows: Vec::new(),
            kpi_rows: Vec::new(),
            report_rows: Vec::new(),
            assoc_rows: Vec::new(),
            delay_samples: [Vec::new(), Vec::new()],
            tput_samples: [Vec::new(), Vec::new()],
            violations: Violations::default(),
        })
    }

    fn area_diag_m(&self) -> f64 {
        let [w, h] = self.cfg.area_m;
        (w * w + h * h).sqrt()
    }

    /// (1) Move users, redraw slow fading on schedule, draw fast fading.
    fn channel_phase(&mut self, tti: u64) {
        self.mobility
            .step(&self.speeds, TTI_MS * 1e-3, &mut self.mobility_rng);
        self.shadowing.maybe_redraw(tti, &mut self.shadow_rng);
        self.gains = draw_channel(
            self.mobility.positions(),
            &self.cfg.orus,
            &self.cfg.pathloss,
            &self.shadowing,
            &mut self.channel_rng,
        );
        self.hasher.write_slice(self.gains.as_slice());
    }

    /// (2) Periodic arrivals, then deadline expiry.
    fn traffic_phase(&mut self, tti: u64) {
        for (u, spec) in self.cfg.users.iter().enumerate() {
            for t_ms in arrival_times_ms(tti, spec.arrival_interval_us) {
                self.buffers[u].push(Packet::new(u, spec.packet_bits, t_ms));
                self.arrived_bits[u] += spec.packet_bits;
            }
            for packet in self.buffers[u].drop_expired(tti, spec.d_max_ms) {
                self.dropped_bits[u] += packet.size_bits;
                self.window_accums[u].record_drop();
                self.report_accums[u].record_drop();
            }
        }
    }

    fn build_snapshot(&self, slice: SliceId) -> NetworkSnapshot {
        let orus = &self.cfg.orus;
        let noise = self.cfg.noise_mw;
        let users = self
            .cfg
            .users_of(slice)
            .iter()
            .map(|&u| {
                let pos = self.mobility.positions()[u];
                let mut gain_db = Vec::with_capacity(orus.len());
                let mut snr_db = Vec::with_capacity(orus.len());
                let mut prb_bits = Vec::with_capacity(orus.len());
                let mut dist = Vec::with_capacity(orus.len());
                for (m, oru) in orus.iter().enumerate() {
                    gain_db.push(self.gains.db(u, m));
                    snr_db.push(self.gains.snr_db(u, m, orus, noise));
                    let sinr = self.gains.sinr_db(u, m, orus, noise);
                    prb_bits.push(bits_per_prb(self.lut.select(sinr)));
                    dist.push(distance_3d(pos, oru));
                }
                SnapUser {
                    id: u,
                    backlog_bits: self.buffers[u].backlog_bits(),
                    packet_count: self.buffers[u].len() as u32,
                    gain_db,
                    snr_db,
                    prb_bits,
                    distance_m: dist,
                }
            })
            .collect();
        let budget = self.cfg.budget(slice);
        NetworkSnapshot {
            num_orus: orus.len(),
            users,
            budget_prbs: budget.prb_count,
            network_budget: self.cfg.assoc.network_budget,
            fronthaul_cap_bits: budget.fronthaul_cap_bps.map(|bps| bps * 1e-3),
            tau_global: self.tau.global().to_vec(),
            tau_cap: self.cfg.assoc.tau_cap,
            scoring: self.cfg.assoc.scoring,
            enumeration_cap: self.cfg.assoc.enumeration_cap,
            area_diag_m: self.area_diag_m(),
            pf: self.pf.clone(),
        }
    }

    /// Close step `step` for `slice`: per-user KPI rows and the slice reward.
    fn close_step_window(&mut self, step: u64, slice: SliceId) -> f64 {
        let users = self.cfg.users_of(slice);
        let spec = &self.cfg.users[users[0]];
        let windows: Vec<KpiWindow> = users
            .iter()
            .map(|&u| self.window_accums[u].finalize(self.ttis_per_step))
            .collect();
        let r = reward(&windows, spec.r_min_bps, spec.d_max_ms, self.cfg.alpha[slice.index()]);
        for (&u, kpi) in users.iter().zip(windows) {
            self.kpi_rows.push(KpiRow {
                step,
                slice,
                user: u,
                kpi,
            });
            self.window_accums[u] = UserAccum::new();
        }
        let idx = (step * 2 + slice.index() as u64) as usize;
        self.reward_rows[idx].reward = r;
        r
    }

    /// (3) Agent boundary `i`: close the elapsed window, learn, act, commit.
    fn agent_boundary(&mut self, i: u64) -> Result<(), SimError> {
        for slice in SliceId::ALL {
            let sidx = slice.index();
            let snap = self.build_snapshot(slice);
            let state = self
                .agents
                .as_ref()
                .map(|_| build_state(&snap, &self.cfg.agent));

            let mut loss = None;
            if i > 0 {
                let r = self.close_step_window(i - 1, slice);
                if self.plan.mode == Mode::Train {
                    if let Some(agents) = &mut self.agents {
                        let agent = &mut agents[sidx];
                        let prev_s = self.prev_state[sidx].take().expect("previous state");
                        let prev_a = self.prev_action[sidx].expect("previous action");
                        agent.push_transition(Transition {
                            state: prev_s,
                            action: prev_a,
                            reward: r,
                            next_state: state.clone().expect("agent state"),
                        });
                        if agent.warmed_up() {
                            match agent.train_step(&mut self.replay_rngs[sidx]) {
                                Ok(l) => loss = Some(l),
                                Err(e) => {
                                    self.write_checkpoints()?;
                                    return Err(e);
                                }
                            }
                        }
                    }
                }
            }

            let (epsilon, action) = if let Some(agents) = &mut self.agents {
                let agent = &mut agents[sidx];
                let st = state.as_ref().expect("agent state");
                let eps = agent.epsilon();
                let a = agent.select_action(st, &mut self.explore_rngs[sidx]);
                if self.plan.mode == Mode::Train {
                    agent.decay_epsilon();
                }
                (eps, Some(a))
            } else {
                (0.0, None)
            };
            let weights = match action {
                Some(a) => action_to_weights(a, self.cfg.agent.weight_grid)?,
                None => WeightPair { w1: 0.0, w2: 0.0 },
            };
            self.weights[sidx] = weights;
            self.prev_state[sidx] = state;
            self.prev_action[sidx] = action;

            let (matrix, score) = match self.selectors[sidx] {
                Selector::Exhaustive => {
                    let (m, winner) = iqra_select(weights, &snap)?;
                    (m, winner.ad)
                }
                Selector::Linear => {
                    let (m, scores) = liqra_select(weights, &snap);
                    (m, scores.iter().sum())
                }
                Selector::StrongestLink => {
                    let (m, snrs) = max_snr_select(&snap);
                    (m, snrs.iter().sum())
                }
            };
            let serving = matrix.serving_vector().to_vec();
            let users = self.cfg.users_of(slice);
            let one_hot_ok = serving.len() == users.len()
                && serving.iter().all(|&m| m < self.cfg.orus.len());
            if !one_hot_ok {
                self.violations.one_hot += 1;
            }
            for (local, &u) in users.iter().enumerate() {
                self.serving[u] = serving[local];
            }
            self.assoc_rows.push(AssocRow {
                step: i,
                slice,
                w1: weights.w1,
                w2: weights.w2,
                score,
                serving,
            });
            self.reward_rows.push(RewardRow {
                step: i,
                slice,
                epsilon,
                action,
                w1: weights.w1,
                w2: weights.w2,
                reward: 0.0,
                loss,
                sw100: 0.0,
            });
        }

        if self.plan.mode == Mode::Train
            && self.plan.out_dir.is_some()
            && i > 0
            && i % self.cfg.run.checkpoint_interval_steps == 0
        {
            self.write_checkpoints()?;
        }
        Ok(())
    }

    fn demands_for(&self, users: &[usize], unit: Option<usize>) -> Vec<UserDemand> {
        let orus = &self.cfg.orus;
        let noise = self.cfg.noise_mw;
        let mut demands = Vec::new();
        for &u in users {
            let m = self.serving[u];
            if let Some(only) = unit {
                if m != only {
                    continue;
                }
            }
            let backlog = self.buffers[u].backlog_bits();
            if backlog == 0 {
                continue;
            }
            let sinr = self.gains.sinr_db(u, m, orus, noise);
            let pb = bits_per_prb(self.lut.select(sinr));
            demands.push(UserDemand {
                user: u,
                backlog_bits: backlog,
                prb_bits: pb,
                prbs_required: prbs_required(backlog, pb),
            });
        }
        demands
    }

    /// (4)–(6) Schedule, transmit, account KPIs, commit congestion state.
    fn schedule_and_transmit(&mut self, tti: u64) -> Result<(), SimError> {
        let num_orus = self.cfg.orus.len();
        let mut buffered = vec![0u64; num_orus];
        for (u, buf) in self.buffers.iter().enumerate() {
            buffered[self.serving[u]] += buf.backlog_bits();
        }
        let mut transmitted = vec![0u64; num_orus];
        let mut tti_sent = vec![0u64; self.cfg.users.len()];

        for slice in SliceId::ALL {
            let users = self.cfg.users_of(slice);
            let budget = self.cfg.budget(slice).prb_count;
            let mut grants: Vec<Grant> = Vec::new();
            if self.cfg.assoc.network_budget {
                let demands = self.demands_for(users, None);
                let g = schedule(&demands, budget, &self.pf);
                if g.iter().map(|gr| gr.prbs).sum::<u32>() > budget {
                    self.violations.prb_budget += 1;
                }
                grants.extend(g);
            } else {
                for m in 0..num_orus {
                    let demands = self.demands_for(users, Some(m));
                    if demands.is_empty() {
                        continue;
                    }
                    let g = schedule(&demands, budget, &self.pf);
                    if g.iter().map(|gr| gr.prbs).sum::<u32>() > budget {
                        self.violations.prb_budget += 1;
                    }
                    grants.extend(g);
                }
            }

            for grant in grants {
                let u = grant.user;
                let m = self.serving[u];
                let sinr_lin = self
                    .gains
                    .sinr_linear(u, m, &self.cfg.orus, self.cfg.noise_mw);
                let entry = self.lut.select(10.0 * sinr_lin.log10());
                let link_ber = crate::phy::ber(sinr_lin, entry.modulation);
                let outcome = self.buffers[u].transmit(grant.bits, tti);
                self.sent_bits[u] += outcome.bits_sent;
                tti_sent[u] += outcome.bits_sent;
                transmitted[m] += outcome.bits_sent;
                self.window_accums[u].record_tx(outcome.bits_sent, link_ber);
                self.report_accums[u].record_tx(outcome.bits_sent, link_ber);
                for packet in outcome.completed {
                    let delay = packet_delay_ms(&packet)?;
                    self.window_accums[u].record_completion(delay);
                    self.report_accums[u].record_completion(delay);
                    self.delay_samples[slice.index()].push(delay);
                }
            }
        }

        for u in 0..self.cfg.users.len() {
            self.pf.update(u, tti_sent[u]);
        }
        self.tau.commit(&buffered, &transmitted);
        Ok(())
    }

    /// Per-TTI bit conservation: everything that arrived is either sent,
    /// dropped, or still buffered.
    fn conservation_check(&mut self) {
        for (u, buf) in self.buffers.iter().enumerate() {
            if self.arrived_bits[u] != self.sent_bits[u] + self.dropped_bits[u] + buf.backlog_bits()
            {
                self.violations.bit_conservation += 1;
            }
        }
    }

    /// Close a reporting window at its boundary (or at the end of the run).
    fn report_tick(&mut self, tti: u64, total_ttis: u64) {
        let window = self.cfg.run.report_window_ttis;
        let at_boundary = (tti + 1) % window == 0;
        let at_end = tti + 1 == total_ttis;
        if !at_boundary && !at_end {
            return;
        }
        let elapsed = tti + 1 - self.report_window_start;
        if elapsed == 0 {
            return;
        }
        for slice in SliceId::ALL {
            for &u in self.cfg.users_of(slice) {
                let kpi = self.report_accums[u].finalize(elapsed);
                self.tput_samples[slice.index()].push(kpi.throughput_bps);
                self.report_rows.push(ReportRow {
                    window: self.report_index,
                    slice,
                    user: u,
                    kpi,
                });
                self.report_accums[u] = UserAccum::new();
            }
        }
        self.report_window_start = tti + 1;
        self.report_index += 1;
    }

    fn write_checkpoints(&self) -> Result<(), SimError> {
        let Some(dir) = &self.plan.out_dir else {
            return Ok(());
        };
        std::fs::create_dir_all(dir)?;
        if let Some(agents) = &self.agents {
            for slice in SliceId::ALL {
                agents[slice.index()]
                    .checkpoint()
                    .save(&checkpoint_path(dir, slice))?;
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<RunResult, SimError> {
        let iterations = self.cfg.run.iterations;
        for slice in SliceId::ALL {
            self.close_step_window(iterations - 1, slice);
        }
        if self.plan.mode == Mode::Train {
            self.write_checkpoints()?;
        }

        // Trailing sliding-window reward means, per slice.
        for slice in SliceId::ALL {
            let sidx = slice.index() as u64;
            let rewards: Vec<f64> = (0..iterations)
                .map(|s| self.reward_rows[(s * 2 + sidx) as usize].reward)
                .collect();
            let mut acc = 0.0;
            for (s, &r) in rewards.iter().enumerate() {
                acc += r;
                if s >= 100 {
                    acc -= rewards[s - 100];
                }
                let len = (s + 1).min(100) as f64;
                self.reward_rows[(s as u64 * 2 + sidx) as usize].sw100 = acc / len;
            }
        }

        let summary = self.summarize();
        Ok(RunResult {
            reward_rows: self.reward_rows,
            kpi_rows: self.kpi_rows,
            report_rows: self.report_rows,
            assoc_rows: self.assoc_rows,
            delay_samples_ms: self.delay_samples,
            throughput_samples_bps: self.tput_samples,
            summary,
        })
    }

    fn summarize(&self) -> RunSummary {
        let iterations = self.cfg.run.iterations;
        let window_steps = FINAL_WINDOW_STEPS.min(iterations);
        let first_step = iterations - window_steps;
        let window_s = (window_steps * self.ttis_per_step) as f64 * TTI_MS * 1e-3;

        let mut mean_reward = [0.0; 2];
        let mut final_mean_reward = [0.0; 2];
        for slice in SliceId::ALL {
            let sidx = slice.index();
            let rewards: Vec<f64> = (0..iterations)
                .map(|s| self.reward_rows[(s * 2 + sidx as u64) as usize].reward)
                .collect();
            mean_reward[sidx] = rewards.iter().sum::<f64>() / rewards.len() as f64;
            let tail = &rewards[first_step as usize..];
            final_mean_reward[sidx] = tail.iter().sum::<f64>() / tail.len() as f64;
        }

        // Fold per-step KPI rows over the final window into per-user totals.
        let num_users = self.cfg.users.len();
        let mut served = vec![0u64; num_users];
        let mut delay_sum = vec![0.0f64; num_users];
        let mut completed = vec![0u64; num_users];
        let mut dropped = vec![0u64; num_users];
        for row in &self.kpi_rows {
            if row.step < first_step {
                continue;
            }
            served[row.user] += row.kpi.served_bits;
            completed[row.user] += row.kpi.completed;
            dropped[row.user] += row.kpi.dropped;
            if let Some(d) = row.kpi.mean_delay_ms {
                delay_sum[row.user] += d * row.kpi.completed as f64;
            }
        }

        let mut users = Vec::with_capacity(num_users);
        let mut system_tput = [0.0; 2];
        let mut slice_delay_sum = [0.0; 2];
        let mut slice_completed = [0u64; 2];
        let mut pass_counts = [0usize; 2];
        for slice in SliceId::ALL {
            let sidx = slice.index();
            for &u in self.cfg.users_of(slice) {
                let spec = &self.cfg.users[u];
                let tput = served[u] as f64 / window_s;
                let delay = if completed[u] > 0 {
                    Some(delay_sum[u] / completed[u] as f64)
                } else {
                    None
                };
                let decided = completed[u] + dropped[u];
                let pdr = if decided > 0 {
                    dropped[u] as f64 / decided as f64
                } else {
                    0.0
                };
                let qos = UserQos {
                    user: u,
                    slice,
                    throughput_bps: tput,
                    mean_delay_ms: delay,
                    pdr,
                    meets_rate: tput >= spec.r_min_bps,
                    meets_delay: delay.map_or(false, |d| d <= spec.d_max_ms),
                };
                system_tput[sidx] += tput;
                slice_delay_sum[sidx] += delay_sum[u];
                slice_completed[sidx] += completed[u];
                if qos.passes() {
                    pass_counts[sidx] += 1;
                }
                users.push(qos);
            }
        }
        let mut qos_pass_fraction = [0.0; 2];
        let mut mean_delay_ms = [None, None];
        for slice in SliceId::ALL {
            let sidx = slice.index();
            let k = self.cfg.users_of(slice).len();
            qos_pass_fraction[sidx] = pass_counts[sidx] as f64 / k as f64;
            if slice_completed[sidx] > 0 {
                mean_delay_ms[sidx] = Some(slice_delay_sum[sidx] / slice_completed[sidx] as f64);
            }
        }

        RunSummary {
            algorithm: self.plan.algorithm,
            mode: self.plan.mode,
            seed: self.plan.seed,
            config_hash: self.cfg.config_hash.clone(),
            iterations,
            total_ttis: iterations * self.ttis_per_step,
            selectors: self.selectors,
            channel_fingerprint: self.hasher.finish(),
            mean_reward,
            final_mean_reward,
            final_window_steps: window_steps,
            system_throughput_bps: system_tput,
            mean_delay_ms,
            qos_pass_fraction,
            users,
            violations: self.violations,
        }
    }
}

/// Executes one complete run. All randomness derives from the plan's seed
/// through named streams, so a (config, plan) pair fully determines the
/// result. Training checkpoints are written when the plan names an output
/// directory, including a last-good dump if training aborts on a non-finite
/// loss.
pub fn run(cfg: &SimConfig, plan: &RunPlan) -> Result<RunResult, SimError> {
    let mut sim = Simulation::new(cfg, plan)?;
    let total_ttis = cfg.run.iterations * cfg.run.ttis_per_step;
    for tti in 0..total_ttis {
        sim.channel_phase(tti);
        sim.traffic_phase(tti);
        if tti % sim.ttis_per_step == 0 {
            sim.agent_boundary(tti / sim.ttis_per_step)?;
        }
        sim.schedule_and_transmit(tti)?;
        sim.conservation_check();
        sim.report_tick(tti, total_ttis);
    }
    sim.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn small_config() -> SimConfig {
        let text = r#"
            [slice.embb]
            users = 2
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
            hidden = [16, 16]
            batch_size = 8
            warmup_transitions = 16
            replay_capacity = 500

            [run]
            iterations = 25
            ttis_per_step = 10
            report_window_ttis = 50
            checkpoint_interval_steps = 10
        "#;
        parse_config(text, "test").unwrap()
    }

    fn wide_urllc(fallback: bool) -> SimConfig {
        let text = format!(
            r#"
            [slice.urllc]
            users = 10
            r_min_mbps = 3.8
            d_max_ms = 2.0
            packet_bytes = 480
            arrival_interval_us = 1000
            prb_budget = 15
            alpha = 0.4

            [association]
            fallback_linear = {fallback}
            "#
        );
        parse_config(&text, "test").unwrap()
    }

    #[test]
    fn selector_resolution_honors_cap_and_fallback() {
        let cfg = parse_config("", "test").unwrap();
        // Default scenario: 4^5 = 1024 candidates per slice fits the cap.
        let s = resolve_selectors(&cfg, Algorithm::Iqra).unwrap();
        assert_eq!(s, [Selector::Exhaustive, Selector::Exhaustive]);
        assert_eq!(
            resolve_selectors(&cfg, Algorithm::Liqra).unwrap(),
            [Selector::Linear, Selector::Linear]
        );
        assert_eq!(
            resolve_selectors(&cfg, Algorithm::MaxSnr).unwrap(),
            [Selector::StrongestLink, Selector::StrongestLink]
        );

        // 4^10 = 1,048,576 blows the cap: fall back per slice, or refuse.
        let wide = wide_urllc(true);
        assert_eq!(
            resolve_selectors(&wide, Algorithm::Iqra).unwrap(),
            [Selector::Exhaustive, Selector::Linear]
        );
        let strict = wide_urllc(false);
        match resolve_selectors(&strict, Algorithm::Iqra) {
            Err(SimError::EnumerationCap { total, users, .. }) => {
                assert_eq!(total, 1_048_576);
                assert_eq!(users, 10);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn baseline_runs_without_agent_machinery() {
        let cfg = small_config();
        let result = run(&cfg, &RunPlan::baseline(7)).unwrap();
        assert_eq!(result.reward_rows.len(), 50);
        assert!(result.reward_rows.iter().all(|r| r.action.is_none()));
        assert!(result.reward_rows.iter().all(|r| r.loss.is_none()));
        assert_eq!(result.summary.violations.total(), 0);
        assert_eq!(
            result.summary.selectors,
            [Selector::StrongestLink, Selector::StrongestLink]
        );
        // Strongest-link choices are weight-free.
        assert!(result.assoc_rows.iter().all(|a| a.w1 == 0.0 && a.w2 == 0.0));
    }

    #[test]
    fn identical_plans_reproduce_bitwise() {
        let cfg = small_config();
        let plan = RunPlan::train(Algorithm::Liqra, 11);
        let a = run(&cfg, &plan).unwrap();
        let b = run(&cfg, &plan).unwrap();
        assert_eq!(a.reward_rows.len(), b.reward_rows.len());
        for (x, y) in a.reward_rows.iter().zip(&b.reward_rows) {
            assert_eq!(x.reward.to_bits(), y.reward.to_bits());
            assert_eq!(x.action, y.action);
            assert_eq!(x.epsilon.to_bits(), y.epsilon.to_bits());
        }
        for (x, y) in a.kpi_rows.iter().zip(&b.kpi_rows) {
            assert_eq!(x.kpi.served_bits, y.kpi.served_bits);
            assert_eq!(x.kpi.throughput_bps.to_bits(), y.kpi.throughput_bps.to_bits());
        }
        assert_eq!(
            a.summary.channel_fingerprint,
            b.summary.channel_fingerprint
        );
    }

    #[test]
    fn common_random_numbers_across_algorithms() {
        let cfg = small_config();
        let iqra = run(&cfg, &RunPlan::train(Algorithm::Iqra, 3)).unwrap();
        let liqra = run(&cfg, &RunPlan::train(Algorithm::Liqra, 3)).unwrap();
        let base = run(&cfg, &RunPlan::baseline(3)).unwrap();
        // Identical channel streams regardless of association decisions.
        assert_eq!(
            iqra.summary.channel_fingerprint,
            liqra.summary.channel_fingerprint
        );
        assert_eq!(
            iqra.summary.channel_fingerprint,
            base.summary.channel_fingerprint
        );
        // Different seed, different stream.
        let other = run(&cfg, &RunPlan::baseline(4)).unwrap();
        assert_ne!(
            iqra.summary.channel_fingerprint,
            other.summary.channel_fingerprint
        );
    }

    #[test]
    fn conservation_holds_across_modes() {
        let cfg = small_config();
        for plan in [
            RunPlan::train(Algorithm::Iqra, 5),
            RunPlan::train(Algorithm::Liqra, 5),
            RunPlan::baseline(5),
        ] {
            let result = run(&cfg, &plan).unwrap();
            assert_eq!(
                result.summary.violations,
                Violations::default(),
                "{}",
                plan.algorithm.name()
            );
        }
    }

    #[test]
    fn trace_shapes_match_run_plan() {
        let cfg = small_config();
        let result = run(&cfg, &RunPlan::train(Algorithm::Liqra, 2)).unwrap();
        // 25 steps x 2 slices.
        assert_eq!(result.reward_rows.len(), 50);
        assert_eq!(result.assoc_rows.len(), 50);
        // Per step per user.
        assert_eq!(result.kpi_rows.len(), 25 * 5);
        // 250 TTIs / 50-TTI reporting window = 5 windows x 5 users.
        assert_eq!(result.report_rows.len(), 25);
        assert_eq!(result.summary.users.len(), 5);
        // Throughput samples: one per user per window.
        assert_eq!(result.throughput_samples_bps[0].len(), 5 * 2);
        assert_eq!(result.throughput_samples_bps[1].len(), 5 * 3);
        // Every row of a slice shares that slice's serving-vector length.
        for row in &result.assoc_rows {
            let expected = cfg.users_of(row.slice).len();
            assert_eq!(row.serving.len(), expected);
        }
    }

    #[test]
    fn eval_mode_replays_greedy_policy_without_learning() {
        let cfg = small_config();
        let dir = tempfile::tempdir().unwrap();
        let mut train_plan = RunPlan::train(Algorithm::Liqra, 9);
        train_plan.out_dir = Some(dir.path().to_path_buf());
        run(&cfg, &train_plan).unwrap();
        let ckpts = [
            checkpoint_path(dir.path(), SliceId::Embb),
            checkpoint_path(dir.path(), SliceId::Urllc),
        ];
        assert!(ckpts[0].exists() && ckpts[1].exists());

        let plan = RunPlan::eval(Algorithm::Liqra, 9, ckpts);
        let a = run(&cfg, &plan).unwrap();
        let b = run(&cfg, &plan).unwrap();
        assert!(a.reward_rows.iter().all(|r| r.epsilon == 0.0));
        assert!(a.reward_rows.iter().all(|r| r.loss.is_none()));
        for (x, y) in a.reward_rows.iter().zip(&b.reward_rows) {
            assert_eq!(x.action, y.action);
            assert_eq!(x.reward.to_bits(), y.reward.to_bits());
        }
        assert_eq!(a.summary.violations.total(), 0);
    }

    #[test]
    fn eval_without_checkpoints_is_an_error() {
        let cfg = small_config();
        let plan = RunPlan {
            mode: Mode::Eval,
            algorithm: Algorithm::Liqra,
            seed: 1,
            out_dir: None,
            checkpoints: None,
        };
        assert!(matches!(
            run(&cfg, &plan),
            Err(SimError::Checkpoint { .. })
        ));
    }
}
