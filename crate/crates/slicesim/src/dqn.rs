//! Per-slice Q-learning agent: state encoding, the discrete weight-pair
//! action grid, the QoS-margin reward, experience replay, and the training
//! loop (squared temporal-difference loss, Adam, periodic target sync).
//!
//! Each slice runs one fully independent agent; nothing here is shared.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::association::{NetworkSnapshot, WeightPair};
use crate::config::AgentConfig;
use crate::error::SimError;
use crate::kpi::KpiWindow;
use crate::nn::{Adam, ForwardCache, QNetwork};

pub const CHECKPOINT_VERSION: u32 = 1;

/// State vector length for `num_orus` units and `num_users` slice users:
/// one gain block and one distance block of M×K each, plus K buffer levels.
pub fn state_len(num_orus: usize, num_users: usize) -> usize {
    2 * num_orus * num_users + num_users
}

/// Encodes a slice snapshot as the agent's observation.
///
/// Layout, in order: gains (unit-major, `num_orus` blocks of K users each),
/// then K normalized packet counts, then distances in the same unit-major
/// order. Gains in dB map affinely from [floor, ceil] onto [0, 1] and clamp
/// outside; packet counts saturate at the configured cap; distances divide
/// by the area diagonal (clamped, since the unit height can push the 3-D
/// distance slightly past it). Every element lands in [0, 1].
pub fn build_state(snap: &NetworkSnapshot, cfg: &AgentConfig) -> Vec<f64> {
    let k = snap.users.len();
    let mut state = Vec::with_capacity(state_len(snap.num_orus, k));
    let lo = cfg.state_gain_floor_db;
    let span = cfg.state_gain_ceil_db - lo;
    for m in 0..snap.num_orus {
        for user in &snap.users {
            state.push(((user.gain_db[m] - lo) / span).clamp(0.0, 1.0));
        }
    }
    for user in &snap.users {
        state.push((f64::from(user.packet_count) / f64::from(cfg.state_packet_cap)).min(1.0));
    }
    for m in 0..snap.num_orus {
        for user in &snap.users {
            state.push((user.distance_m[m] / snap.area_diag_m).clamp(0.0, 1.0));
        }
    }
    state
}

/// Decodes a flat action index into the weight pair
/// `((⌊a/N⌋+1)/N, ((a mod N)+1)/N)` on the N×N grid.
pub fn action_to_weights(action: usize, grid: u32) -> Result<WeightPair, SimError> {
    let n = grid as usize;
    if action >= n * n {
        return Err(SimError::ActionOutOfRange {
            action,
            actions: n * n,
        });
    }
    Ok(WeightPair {
        w1: (action / n + 1) as f64 / n as f64,
        w2: (action % n + 1) as f64 / n as f64,
    })
}

/// Inverse of [`action_to_weights`]; `None` when the pair is off the grid.
pub fn weights_to_action(weights: &WeightPair, grid: u32) -> Option<usize> {
    let n = f64::from(grid);
    let snap = |w: f64| -> Option<usize> {
        let idx = (w * n).round() - 1.0;
        let on_grid = idx >= 0.0 && idx < n && (w - (idx + 1.0) / n).abs() < 1e-9;
        on_grid.then_some(idx as usize)
    };
    Some(snap(weights.w1)? * grid as usize + snap(weights.w2)?)
}

/// Mean per-user QoS margin over a reporting window:
/// `[α·Σ (R_k − R_min)/R_min + (1−α)·Σ (d_max − d̄_k)/d_max] / K`.
/// A window with no completed packets counts as sitting at the deadline
/// (zero delay margin).
pub fn reward(windows: &[KpiWindow], r_min_bps: f64, d_max_ms: f64, alpha: f64) -> f64 {
    if windows.is_empty() {
        return 0.0;
    }
    let mut rate_margin = 0.0;
    let mut delay_margin = 0.0;
    for w in windows {
        rate_margin += (w.throughput_bps - r_min_bps) / r_min_bps;
        let mean_delay = w.mean_delay_ms.unwrap_or(d_max_ms);
        delay_margin += (d_max_ms - mean_delay) / d_max_ms;
    }
    (alpha * rate_margin + (1.0 - alpha) * delay_margin) / windows.len() as f64
}

/// Bootstrapped target `r + γ·max_a Q(s', a)`; the control task is
/// continuing, so there is no terminal cutoff.
pub fn td_target(reward: f64, gamma: f64, next_q: &[f64]) -> f64 {
    let best = next_q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    reward + gamma * best
}

/// Index of the largest entry, preferring the lowest index on exact ties.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// One step of experience: act in `state`, earn `reward`, land in `next_state`.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// Fixed-capacity ring of transitions with uniform without-replacement
/// batch sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    slots: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            slots: Vec::new(),
            next: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Appends, evicting the oldest entry once the ring is full.
    pub fn push(&mut self, transition: Transition) {
        if self.slots.len() < self.capacity {
            self.slots.push(transition);
        } else {
            self.slots[self.next] = transition;
            self.next = (self.next + 1) % self.capacity;
        }
    }

    pub fn get(&self, index: usize) -> &Transition {
        &self.slots[index]
    }

    /// Draws `batch` distinct slot indices uniformly.
    pub fn sample_indices<R: Rng>(
        &self,
        batch: usize,
        rng: &mut R,
    ) -> Result<Vec<usize>, SimError> {
        if self.slots.len() < batch {
            return Err(SimError::ReplayUnderfilled {
                have: self.slots.len(),
                need: batch,
            });
        }
        Ok(rand::seq::index::sample(rng, self.slots.len(), batch).into_vec())
    }
}

/// Mean squared TD loss over a batch and its gradient with respect to the
/// network parameters. `xs` holds `batch` stacked states; the gradient flows
/// only through the taken action's Q-value. Returns the loss; the gradient
/// lands in `grads`.
pub fn batch_loss_and_grads(
    net: &QNetwork,
    xs: &[f64],
    actions: &[usize],
    targets: &[f64],
    batch: usize,
    cache: &mut ForwardCache,
    grads: &mut Vec<f64>,
) -> f64 {
    net.forward_batch(xs, batch, cache);
    let out_len = net.output_len();
    let mut d_out = vec![0.0; batch * out_len];
    let mut loss = 0.0;
    {
        let q = cache.output();
        for j in 0..batch {
            let diff = q[j * out_len + actions[j]] - targets[j];
            loss += diff * diff;
            d_out[j * out_len + actions[j]] = 2.0 * diff / batch as f64;
        }
    }
    loss /= batch as f64;
    grads.clear();
    grads.resize(net.num_params(), 0.0);
    net.backward_batch(cache, &d_out, batch, grads);
    loss
}

/// Serialized agent state; JSON with exactly round-tripping floats.
/// The replay buffer is deliberately not persisted: a resumed run re-warms
/// before training again.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub dims: Vec<usize>,
    pub params: Vec<f64>,
    pub target_params: Vec<f64>,
    pub adam_m: Vec<f64>,
    pub adam_v: Vec<f64>,
    pub adam_t: u64,
    pub epsilon: f64,
    pub train_steps: u64,
    pub agent_steps: u64,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<(), SimError> {
        let err = |reason: String| SimError::Checkpoint {
            path: path.display().to_string(),
            reason,
        };
        let text = serde_json::to_string(self).map_err(|e| err(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let err = |reason: String| SimError::Checkpoint {
            path: path.display().to_string(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let ck: Checkpoint = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(err(format!(
                "unsupported checkpoint version {} (expected {})",
                ck.version, CHECKPOINT_VERSION
            )));
        }
        let n = QNetwork::param_count(&ck.dims);
        for (name, len) in [
            ("params", ck.params.len()),
            ("target_params", ck.target_params.len()),
            ("adam_m", ck.adam_m.len()),
            ("adam_v", ck.adam_v.len()),
        ] {
            if len != n {
                return Err(err(format!(
                    "{name} holds {len} values but the layer sizes require {n}"
                )));
            }
        }
        Ok(ck)
    }
}

/// One slice's learner: online net, frozen target, Adam state, replay ring,
/// and the ε-greedy exploration schedule.
pub struct DqnAgent {
    /// Single-character slice tag used in diagnostics ('E' / 'U').
    label: char,
    cfg: AgentConfig,
    net: QNetwork,
    target: QNetwork,
    adam: Adam,
    replay: ReplayBuffer,
    epsilon: f64,
    train_steps: u64,
    agent_steps: u64,
    cache: ForwardCache,
    target_cache: ForwardCache,
    grads: Vec<f64>,
}

impl DqnAgent {
    /// Fresh agent with seeded weight initialization; the target starts as
    /// an exact copy of the online net.
    pub fn new<R: Rng>(label: char, state_len: usize, cfg: &AgentConfig, rng: &mut R) -> Self {
        let mut dims = Vec::with_capacity(cfg.hidden.len() + 2);
        dims.push(state_len);
        dims.extend_from_slice(&cfg.hidden);
        dims.push((cfg.weight_grid as usize).pow(2));
        let net = QNetwork::new_seeded(&dims, rng);
        let target = net.clone();
        let adam = Adam::new(net.num_params(), cfg.learning_rate);
        DqnAgent {
            label,
            cfg: cfg.clone(),
            replay: ReplayBuffer::new(cfg.replay_capacity),
            epsilon: cfg.epsilon_start,
            train_steps: 0,
            agent_steps: 0,
            cache: ForwardCache::new(),
            target_cache: ForwardCache::new(),
            grads: vec![0.0; net.num_params()],
            net,
            target,
            adam,
        }
    }

    pub fn label(&self) -> char {
        self.label
    }

    pub fn num_actions(&self) -> usize {
        self.net.output_len()
    }

    pub fn state_len(&self) -> usize {
        self.net.input_len()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Forces the exploration rate (eval runs pin it to 0).
    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon;
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    pub fn agent_steps(&self) -> u64 {
        self.agent_steps
    }

    pub fn replay_len(&self) -> usize {
        self.replay.len()
    }

    /// Enough experience collected to start (or keep) training.
    pub fn warmed_up(&self) -> bool {
        self.replay.len() >= self.cfg.warmup_transitions
    }

    pub fn q_values(&self, state: &[f64]) -> Vec<f64> {
        self.net.forward(state)
    }

    /// ε-greedy draw: explore uniformly with probability ε, otherwise take
    /// the greedy action (ties to the lowest index). Does not decay ε; the
    /// caller decays once per agent step via [`DqnAgent::decay_epsilon`].
    pub fn select_action<R: Rng>(&mut self, state: &[f64], rng: &mut R) -> usize {
        self.agent_steps += 1;
        if self.epsilon > 0.0 && rng.gen::<f64>() < self.epsilon {
            rng.gen_range(0..self.num_actions())
        } else {
            argmax_lowest(&self.net.forward(state))
        }
    }

    /// Multiplicative schedule ε ← max(ε·decay, ε_min).
    pub fn decay_epsilon(&mut self) {
        self.epsilon = (self.epsilon * self.cfg.epsilon_decay).max(self.cfg.epsilon_min);
    }

    pub fn push_transition(&mut self, transition: Transition) {
        self.replay.push(transition);
    }

    /// Samples a batch, regresses taken-action Q-values onto bootstrapped
    /// targets, and applies one Adam step. Returns the batch loss. The
    /// target net refreshes every `target_sync_interval` train steps.
    pub fn train_step<R: Rng>(&mut self, rng: &mut R) -> Result<f64, SimError> {
        let batch = self.cfg.batch_size;
        let indices = self.replay.sample_indices(batch, rng)?;
        let state_len = self.net.input_len();
        let mut states = vec![0.0; batch * state_len];
        let mut next_states = vec![0.0; batch * state_len];
        let mut actions = vec![0usize; batch];
        let mut rewards = vec![0.0; batch];
        for (j, &i) in indices.iter().enumerate() {
            let t = self.replay.get(i);
            states[j * state_len..(j + 1) * state_len].copy_from_slice(&t.state);
            next_states[j * state_len..(j + 1) * state_len].copy_from_slice(&t.next_state);
            actions[j] = t.action;
            rewards[j] = t.reward;
        }

        self.target.forward_batch(&next_states, batch, &mut self.target_cache);
        let out_len = self.target.output_len();
        let next_q = self.target_cache.output();
        let targets: Vec<f64> = (0..batch)
            .map(|j| {
                td_target(
                    rewards[j],
                    self.cfg.gamma,
                    &next_q[j * out_len..(j + 1) * out_len],
                )
            })
            .collect();

        let loss = batch_loss_and_grads(
            &self.net,
            &states,
            &actions,
            &targets,
            batch,
            &mut self.cache,
            &mut self.grads,
        );
        if !loss.is_finite() {
            return Err(SimError::NonFiniteLoss {
                slice: self.label,
                step: self.train_steps + 1,
            });
        }
        self.adam.step(self.net.params_mut(), &self.grads);
        self.train_steps += 1;
        if self.train_steps % self.cfg.target_sync_interval == 0 {
            self.target.copy_from(&self.net);
        }
        Ok(loss)
    }

    /// Snapshot of everything needed to resume or evaluate.
    pub fn checkpoint(&self) -> Checkpoint {
        let (m, v, t) = self.adam.state();
        Checkpoint {
            version: CHECKPOINT_VERSION,
            dims: self.net.dims().to_vec(),
            params: self.net.params().to_vec(),
            target_params: self.target.params().to_vec(),
            adam_m: m.to_vec(),
            adam_v: v.to_vec(),
            adam_t: t,
            epsilon: self.epsilon,
            train_steps: self.train_steps,
            agent_steps: self.agent_steps,
        }
    }

    /// Installs a checkpoint; the layer sizes must match this agent's.
    pub fn restore(&mut self, ck: &Checkpoint) -> Result<(), SimError> {
        if ck.dims != self.net.dims() {
            return Err(SimError::Checkpoint {
                path: String::from("<memory>"),
                reason: format!(
                    "layer sizes {:?} do not match the configured {:?}",
                    ck.dims,
                    self.net.dims()
                ),
            });
        }
        self.net.set_params(&ck.params);
        self.target.set_params(&ck.target_params);
        self.adam.restore(ck.adam_m.clone(), ck.adam_v.clone(), ck.adam_t);
        self.epsilon = ck.epsilon;
        self.train_steps = ck.train_steps;
        self.agent_steps = ck.agent_steps;
        Ok(())
    }
}
