//! User-to-unit association: the queue-congestion metric, exhaustive weighted
//! candidate selection, the per-user linear selector, and the max-SNR
//! baseline.
//!
//! All selectors are pure functions over an immutable [`NetworkSnapshot`]:
//! they never touch live scheduler or congestion state. The engine commits
//! the chosen association and folds realized congestion observations into
//! [`TauState`] exactly once per TTI.

use crate::config::ScoringMode;
use crate::error::SimError;
use crate::net::{enumerate_associations, AssociationMatrix};
use crate::phy::prbs_required;
use crate::scheduler::{schedule, PfState, UserDemand};

/// Association trade-off weights chosen by the agent. Both lie on the grid
/// `{1/N, ..., N/N}`, so they are positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightPair {
    /// Weight of the resource (PRB or SNR) term.
    pub w1: f64,
    /// Weight of the congestion term.
    pub w2: f64,
}

/// Congestion metric for one unit in one TTI: buffered bits awaiting service
/// (after arrivals, before transmission) over bits actually transmitted.
/// An idle unit scores 0; a unit with demand but no service scores `cap`.
pub fn compute_tau(buffered_bits: u64, transmitted_bits: u64, cap: f64) -> f64 {
    if transmitted_bits > 0 {
        buffered_bits as f64 / transmitted_bits as f64
    } else if buffered_bits == 0 {
        0.0
    } else {
        cap
    }
}

/// Exponential half-averaging of the global congestion value.
pub fn update_tau_global(prev: f64, tau_now: f64) -> f64 {
    (tau_now + prev) / 2.0
}

/// Per-unit congestion state for one slice.
#[derive(Debug, Clone)]
pub struct TauState {
    global: Vec<f64>,
    last: Vec<f64>,
    cap: f64,
}

impl TauState {
    /// All-zero initial state.
    pub fn new(num_orus: usize, cap: f64) -> Self {
        TauState {
            global: vec![0.0; num_orus],
            last: vec![0.0; num_orus],
            cap,
        }
    }

    pub fn global(&self) -> &[f64] {
        &self.global
    }

    /// Most recent single-TTI observations.
    pub fn last(&self) -> &[f64] {
        &self.last
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Fold one TTI of realized per-unit counters into the global values.
    pub fn commit(&mut self, buffered_bits: &[u64], transmitted_bits: &[u64]) {
        assert_eq!(buffered_bits.len(), self.global.len());
        assert_eq!(transmitted_bits.len(), self.global.len());
        for m in 0..self.global.len() {
            let tau = compute_tau(buffered_bits[m], transmitted_bits[m], self.cap);
            self.last[m] = tau;
            self.global[m] = update_tau_global(self.global[m], tau);
        }
    }
}

/// One user's slice-local view at a selection instant.
#[derive(Debug, Clone)]
pub struct SnapUser {
    /// Global user id (used for PF averages and traces).
    pub id: usize,
    /// Untransmitted bits in this user's buffer, arrivals included.
    pub backlog_bits: u64,
    /// Queued packets (for the agent's buffer-state block).
    pub packet_count: u32,
    /// Raw channel power gain toward each unit, dB.
    pub gain_db: Vec<f64>,
    /// Interference-free SNR toward each unit, dB.
    pub snr_db: Vec<f64>,
    /// Bits one PRB carries from each unit at the MCS its SINR supports.
    pub prb_bits: Vec<u32>,
    /// 3-D distance to each unit, metres.
    pub distance_m: Vec<f64>,
}

/// Immutable slice-level state handed to the selectors.
#[derive(Debug, Clone)]
pub struct NetworkSnapshot {
    pub num_orus: usize,
    /// Slice users in ascending global-id order.
    pub users: Vec<SnapUser>,
    /// Slice PRB budget (per unit, or pooled when `network_budget`).
    pub budget_prbs: u32,
    /// Pool the PRB budget across units instead of per unit.
    pub network_budget: bool,
    /// Per-unit fronthaul ceiling in bits per TTI, if capped.
    pub fronthaul_cap_bits: Option<f64>,
    /// Committed global congestion value per unit.
    pub tau_global: Vec<f64>,
    /// Congestion value assigned when demand exists but nothing was served.
    pub tau_cap: f64,
    pub scoring: ScoringMode,
    /// Ceiling on exhaustive enumeration.
    pub enumeration_cap: u64,
    /// Diagonal of the deployment area, metres (distance normalizer).
    pub area_diag_m: f64,
    /// Served-rate averages (global user indexing) for hypothetical schedules.
    pub pf: PfState,
}

/// Full evaluation of one association candidate.
#[derive(Debug, Clone)]
pub struct CandidateScore {
    /// Position in lexicographic enumeration order.
    pub index: usize,
    /// Serving unit per slice-local user.
    pub serving: Vec<usize>,
    /// Score under raw weighting; under min-max scoring the selector
    /// re-scores candidates from the two term fields below.
    pub ad: f64,
    pub feasible: bool,
    /// Total PRBs the hypothetical schedule assigns (the resource term).
    pub prb_term: f64,
    /// Sum over users of the serving unit's estimated congestion (the
    /// congestion term; a unit serving two users counts twice).
    pub tau_term: f64,
    /// PRBs each user needs to clear its backlog at its candidate unit.
    pub prbs_required: Vec<u32>,
    /// PRBs each user would actually receive.
    pub prbs_assigned: Vec<u32>,
    /// Bits each user would transmit this TTI.
    pub tx_bits: Vec<u64>,
    /// Estimated next global congestion value per unit under this candidate.
    pub tau_est: Vec<f64>,
}

/// Evaluate one candidate: per-user MCS capacity at the candidate unit,
/// PRB demand, a hypothetical proportional-fair schedule, the resulting
/// per-unit congestion estimate, and the weighted score.
pub fn evaluate_candidate(
    serving: &[usize],
    index: usize,
    weights: WeightPair,
    snap: &NetworkSnapshot,
) -> CandidateScore {
    let n = snap.users.len();
    assert_eq!(serving.len(), n);
    let mut prbs_req = vec![0u32; n];
    let mut prbs_assigned = vec![0u32; n];
    let mut tx_bits = vec![0u64; n];

    let mut demands: Vec<UserDemand> = Vec::with_capacity(n);
    let mut grant_slots: Vec<usize> = Vec::with_capacity(n);
    if snap.network_budget {
        // One pooled schedule across the whole slice.
        for (k, user) in snap.users.iter().enumerate() {
            let m = serving[k];
            let prb_bits = user.prb_bits[m];
            prbs_req[k] = prbs_required(user.backlog_bits, prb_bits);
            demands.push(UserDemand {
                user: user.id,
                backlog_bits: user.backlog_bits,
                prb_bits,
                prbs_required: prbs_req[k],
            });
            grant_slots.push(k);
        }
        apply_grants(
            &schedule(&demands, snap.budget_prbs, &snap.pf),
            &demands,
            &grant_slots,
            &mut prbs_assigned,
            &mut tx_bits,
        );
    } else {
        for m in 0..snap.num_orus {
            demands.clear();
            grant_slots.clear();
            for (k, user) in snap.users.iter().enumerate() {
                if serving[k] != m {
                    continue;
                }
                let prb_bits = user.prb_bits[m];
                prbs_req[k] = prbs_required(user.backlog_bits, prb_bits);
                demands.push(UserDemand {
                    user: user.id,
                    backlog_bits: user.backlog_bits,
                    prb_bits,
                    prbs_required: prbs_req[k],
                });
                grant_slots.push(k);
            }
            if demands.is_empty() {
                continue;
            }
            apply_grants(
                &schedule(&demands, snap.budget_prbs, &snap.pf),
                &demands,
                &grant_slots,
                &mut prbs_assigned,
                &mut tx_bits,
            );
        }
    }

    // Per-unit counters and congestion estimate.
    let mut buffered = vec![0u64; snap.num_orus];
    let mut transmitted = vec![0u64; snap.num_orus];
    for (k, user) in snap.users.iter().enumerate() {
        buffered[serving[k]] += user.backlog_bits;
        transmitted[serving[k]] += tx_bits[k];
    }
    let tau_est: Vec<f64> = (0..snap.num_orus)
        .map(|m| {
            let tau_now = compute_tau(buffered[m], transmitted[m], snap.tau_cap);
            update_tau_global(snap.tau_global[m], tau_now)
        })
        .collect();

    let feasible = match snap.fronthaul_cap_bits {
        Some(cap) => transmitted.iter().all(|&bits| bits as f64 <= cap),
        None => true,
    };

    let prb_term = prbs_assigned.iter().map(|&p| p as f64).sum::<f64>();
    let tau_term = serving.iter().map(|&m| tau_est[m]).sum::<f64>();
    let ad = weights.w1 * prb_term - weights.w2 * tau_term;

    CandidateScore {
        index,
        serving: serving.to_vec(),
        ad,
        feasible,
        prb_term,
        tau_term,
        prbs_required: prbs_req,
        prbs_assigned,
        tx_bits,
        tau_est,
    }
}

fn apply_grants(
    grants: &[crate::scheduler::Grant],
    demands: &[UserDemand],
    slots: &[usize],
    prbs_assigned: &mut [u32],
    tx_bits: &mut [u64],
) {
    for g in grants {
        let pos = demands
            .iter()
            .position(|d| d.user == g.user)
            .expect("grant refers to a demand");
        prbs_assigned[slots[pos]] = g.prbs;
        tx_bits[slots[pos]] = g.bits;
    }
}

/// Exhaustive selection: evaluate every candidate and return the feasible one
/// with the highest score, ties to the lowest candidate index.
pub fn iqra_select(
    weights: WeightPair,
    snap: &NetworkSnapshot,
) -> Result<(AssociationMatrix, CandidateScore), SimError> {
    let candidates = enumerate_associations(snap.users.len(), snap.num_orus, snap.enumeration_cap)?;
    let scores: Vec<CandidateScore> = candidates
        .iter()
        .enumerate()
        .map(|(i, serving)| evaluate_candidate(serving, i, weights, snap))
        .collect();

    let winner = match snap.scoring {
        ScoringMode::Raw => scores
            .iter()
            .filter(|s| s.feasible)
            .max_by(|a, b| a.ad.partial_cmp(&b.ad).unwrap().then(b.index.cmp(&a.index))),
        ScoringMode::MinMax => {
            let feasible: Vec<&CandidateScore> = scores.iter().filter(|s| s.feasible).collect();
            let bounds = |f: fn(&CandidateScore) -> f64| {
                let lo = feasible.iter().map(|s| f(s)).fold(f64::INFINITY, f64::min);
                let hi = feasible
                    .iter()
                    .map(|s| f(s))
                    .fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            };
            let (p_lo, p_hi) = bounds(|s| s.prb_term);
            let (t_lo, t_hi) = bounds(|s| s.tau_term);
            feasible
                .iter()
                .copied()
                .max_by(|a, b| {
                    let score = |s: &CandidateScore| {
                        weights.w1 * min_max(s.prb_term, p_lo, p_hi)
                            - weights.w2 * min_max(s.tau_term, t_lo, t_hi)
                    };
                    score(a)
                        .partial_cmp(&score(b))
                        .unwrap()
                        .then(b.index.cmp(&a.index))
                })
        }
    };

    let Some(winner) = winner else {
        return Err(SimError::NoFeasibleCandidate);
    };
    let matrix = AssociationMatrix::from_vector(winner.serving.clone(), snap.num_orus)?;
    Ok((matrix, winner.clone()))
}

/// Min-max rescaling to [0, 1]; a degenerate range maps to 0 so the term
/// drops out of the score.
fn min_max(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}

/// Linear selection: each user independently picks the unit maximizing
/// `w1 * snr_term - w2 * congestion_term`, ties to the lowest unit id.
/// Returns the matrix and the per-user best scores.
pub fn liqra_select(weights: WeightPair, snap: &NetworkSnapshot) -> (AssociationMatrix, Vec<f64>) {
    let tau = &snap.tau_global;
    let (t_lo, t_hi) = tau
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let mut serving = Vec::with_capacity(snap.users.len());
    let mut best_scores = Vec::with_capacity(snap.users.len());
    for user in &snap.users {
        let (s_lo, s_hi) = user
            .snr_db
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let mut best_m = 0usize;
        let mut best = f64::NEG_INFINITY;
        for m in 0..snap.num_orus {
            let score = match snap.scoring {
                ScoringMode::Raw => weights.w1 * user.snr_db[m] - weights.w2 * tau[m],
                ScoringMode::MinMax => {
                    weights.w1 * min_max(user.snr_db[m], s_lo, s_hi)
                        - weights.w2 * min_max(tau[m], t_lo, t_hi)
                }
            };
            if score > best {
                best = score;
                best_m = m;
            }
        }
        serving.push(best_m);
        best_scores.push(best);
    }
    let matrix =
        AssociationMatrix::from_vector(serving, snap.num_orus).expect("indices in range");
    (matrix, best_scores)
}

/// Baseline: each user picks the unit with the strongest SNR, ties to the
/// lowest unit id. Returns the matrix and the per-user best SNRs (dB).
pub fn max_snr_select(snap: &NetworkSnapshot) -> (AssociationMatrix, Vec<f64>) {
    let mut serving = Vec::with_capacity(snap.users.len());
    let mut best_snrs = Vec::with_capacity(snap.users.len());
    for user in &snap.users {
        let mut best_m = 0usize;
        let mut best = f64::NEG_INFINITY;
        for m in 0..snap.num_orus {
            if user.snr_db[m] > best {
                best = user.snr_db[m];
                best_m = m;
            }
        }
        serving.push(best_m);
        best_snrs.push(best);
    }
    let matrix =
        AssociationMatrix::from_vector(serving, snap.num_orus).expect("indices in range");
    (matrix, best_snrs)
}
