//! Proportional-fair PRB scheduling within one (radio unit, slice) cell.
//!
//! PRBs are handed out one at a time to the user maximizing
//! `instantaneous_rate / (average_rate + bits_granted_this_tti / tti)`,
//! so allocations self-balance within a TTI instead of dumping the whole
//! budget on a single head-of-line user.

use crate::phy::TTI_MS;

/// EMA smoothing factor for the long-run rate average.
pub const PF_EMA_BETA: f64 = 0.01;
/// Floor (bit/s) applied to the rate average; also the initial value.
pub const PF_RATE_FLOOR_BPS: f64 = 1e3;

/// Scheduling input for one attached user.
#[derive(Debug, Clone, Copy)]
pub struct UserDemand {
    pub user: usize,
    /// Untransmitted bits waiting in this user's buffer.
    pub backlog_bits: u64,
    /// Bits one PRB carries for this user at its current MCS.
    pub prb_bits: u32,
    /// PRBs needed to clear the backlog (ceiling of backlog / prb_bits).
    pub prbs_required: u32,
}

/// PRBs and bits granted to one user in one TTI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grant {
    pub user: usize,
    pub prbs: u32,
    pub bits: u64,
}

/// Long-run served-rate averages, indexed by global user id.
#[derive(Debug, Clone)]
pub struct PfState {
    avg_rate_bps: Vec<f64>,
}

impl PfState {
    pub fn new(num_users: usize) -> Self {
        PfState {
            avg_rate_bps: vec![PF_RATE_FLOOR_BPS; num_users],
        }
    }

    pub fn avg_rate_bps(&self, user: usize) -> f64 {
        self.avg_rate_bps[user]
    }

    /// Fold one TTI of served bits into the average. Call for every user every
    /// TTI, served or not; the floor keeps starved users schedulable.
    pub fn update(&mut self, user: usize, served_bits: u64) {
        let served_rate = served_bits as f64 / (TTI_MS * 1e-3);
        let next = (1.0 - PF_EMA_BETA) * self.avg_rate_bps[user] + PF_EMA_BETA * served_rate;
        self.avg_rate_bps[user] = next.max(PF_RATE_FLOOR_BPS);
    }
}

/// Allocate up to `budget_prbs` among `demands`, one PRB per round.
///
/// Users never receive more PRBs than their backlog needs, and the scheduler
/// is work-conserving: PRBs are left over only when no demand remains. Ties on
/// the PF metric break toward the lowest user id. Returns one grant per user
/// that received PRBs, in the order demands were given.
pub fn schedule(demands: &[UserDemand], budget_prbs: u32, pf: &PfState) -> Vec<Grant> {
    let tti_s = TTI_MS * 1e-3;
    let n = demands.len();
    let mut granted_prbs = vec![0u32; n];
    let mut granted_bits = vec![0u64; n];

    for _ in 0..budget_prbs {
        let mut best: Option<(usize, f64)> = None;
        for (i, d) in demands.iter().enumerate() {
            if granted_prbs[i] >= d.prbs_required || granted_bits[i] >= d.backlog_bits {
                continue;
            }
            let inst_rate = d.prb_bits as f64 / tti_s;
            let metric = inst_rate / (pf.avg_rate_bps(d.user) + granted_bits[i] as f64 / tti_s);
            let better = match best {
                None => true,
                Some((j, best_metric)) => {
                    metric > best_metric
                        || (metric == best_metric && d.user < demands[j].user)
                }
            };
            if better {
                best = Some((i, metric));
            }
        }
        let Some((winner, _)) = best else {
            break; // no demand left; remaining PRBs stay idle
        };
        let d = &demands[winner];
        granted_prbs[winner] += 1;
        let marginal = (d.backlog_bits - granted_bits[winner]).min(d.prb_bits as u64);
        granted_bits[winner] += marginal;
    }

    demands
        .iter()
        .enumerate()
        .filter(|(i, _)| granted_prbs[*i] > 0)
        .map(|(i, d)| Grant {
            user: d.user,
            prbs: granted_prbs[i],
            bits: granted_bits[i],
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn demand(user: usize, backlog_bits: u64, prb_bits: u32) -> UserDemand {
        UserDemand {
            user,
            backlog_bits,
            prb_bits,
            prbs_required: backlog_bits.div_ceil(prb_bits as u64) as u32,
        }
    }

    #[test]
    fn equal_users_split_a_short_budget_evenly() {
        // Two identical users each needing 5 PRBs, but only 8 available:
        // within-TTI feedback alternates grants, landing on 4 and 4.
        let pf = PfState::new(2);
        let demands = [demand(0, 5 * 336, 336), demand(1, 5 * 336, 336)];
        let grants = schedule(&demands, 8, &pf);
        assert_eq!(grants.len(), 2);
        assert_eq!(grants[0], Grant { user: 0, prbs: 4, bits: 4 * 336 });
        assert_eq!(grants[1], Grant { user: 1, prbs: 4, bits: 4 * 336 });
    }

    #[test]
    fn ties_break_toward_lowest_user_id() {
        let pf = PfState::new(2);
        let demands = [demand(1, 336, 336), demand(0, 336, 336)];
        // Odd budget: the extra PRB goes to user 0 on the first pick.
        let grants = schedule(&demands, 1, &pf);
        assert_eq!(grants.len(), 1);
        assert_eq!(grants[0].user, 0);
    }

    #[test]
    fn grants_never_exceed_requirement() {
        let pf = PfState::new(2);
        let demands = [demand(0, 500, 336), demand(1, 100, 336)];
        let grants = schedule(&demands, 32, &pf);
        assert_eq!(grants[0], Grant { user: 0, prbs: 2, bits: 500 });
        assert_eq!(grants[1], Grant { user: 1, prbs: 1, bits: 100 });
    }

    #[test]
    fn empty_backlog_leaves_budget_idle() {
        let pf = PfState::new(1);
        assert!(schedule(&[demand(0, 0, 336)], 32, &pf).is_empty());
        assert!(schedule(&[], 32, &pf).is_empty());
    }

    #[test]
    fn starved_user_outranks_well_served_user()  {
        let mut pf = PfState::new(2);
        // User 0 has been served heavily; user 1 is fresh at the floor.
        for _ in 0..100 {
            pf.update(0, 10_000);
        }
        let demands = [demand(0, 10 * 336, 336), demand(1, 10 * 336, 336)];
        let grants = schedule(&demands, 10, &pf);
        let prbs_of = |u: usize| grants.iter().find(|g| g.user == u).map_or(0, |g| g.prbs);
        assert!(
            prbs_of(1) > prbs_of(0),
            "starved user should receive more PRBs ({} vs {})",
            prbs_of(1),
            prbs_of(0)
        );
    }

    #[test]
    fn mixed_mcs_favors_efficiency_at_equal_averages() {
        let pf = PfState::new(2);
        // Same backlog, but user 1 carries more bits per PRB; with equal
        // averages its metric starts higher.
        let demands = [demand(0, 3360, 168), demand(1, 3360, 336)];
        let grants = schedule(&demands, 6, &pf);
        let g0 = grants.iter().find(|g| g.user == 0).unwrap();
        let g1 = grants.iter().find(|g| g.user == 1).unwrap();
        assert!(g1.bits > g0.bits);
    }

    #[test]
    fn ema_update_tracks_served_rate() {
        let mut pf = PfState::new(1);
        assert_eq!(pf.avg_rate_bps(0), PF_RATE_FLOOR_BPS);
        // 1344 bits in one 1 ms TTI is 1.344 Mbit/s instantaneous.
        pf.update(0, 1344);
        assert_relative_eq!(pf.avg_rate_bps(0), 0.99 * 1e3 + 0.01 * 1.344e6);
        // Idle TTIs decay the average but never below the floor.
        for _ in 0..2000 {
            pf.update(0, 0);
        }
        assert_eq!(pf.avg_rate_bps(0), PF_RATE_FLOOR_BPS);
    }

    proptest! {
        /// Budget accounting: per-user caps, total caps, work conservation.
        #[test]
        fn schedule_respects_budget_and_demand(
            backlogs in proptest::collection::vec(0u64..20_000, 1..8),
            budget in 0u32..40,
            prb_bits in prop::sample::select(vec![100u32, 201, 336, 504, 672, 840]),
        ) {
            let pf = PfState::new(backlogs.len());
            let demands: Vec<UserDemand> = backlogs
                .iter()
                .enumerate()
                .map(|(u, &b)| demand(u, b, prb_bits))
                .collect();
            let grants = schedule(&demands, budget, &pf);

            let mut total_prbs = 0u32;
            for g in &grants {
                let d = demands.iter().find(|d| d.user == g.user).unwrap();
                prop_assert!(g.prbs <= d.prbs_required);
                prop_assert_eq!(g.bits, d.backlog_bits.min(g.prbs as u64 * prb_bits as u64));
                total_prbs += g.prbs;
            }
            prop_assert!(total_prbs <= budget);
            // Work conservation: either the budget is exhausted or all demand is met.
            let required: u32 = demands.iter().map(|d| d.prbs_required).sum();
            prop_assert_eq!(total_prbs, required.min(budget));
        }

        /// Same inputs always produce identical grants.
        #[test]
        fn schedule_is_deterministic(
            backlogs in proptest::collection::vec(1u64..20_000, 1..8),
            budget in 1u32..40,
        ) {
            let pf = PfState::new(backlogs.len());
            let demands: Vec<UserDemand> = backlogs
                .iter()
                .enumerate()
                .map(|(u, &b)| demand(u, b, 336))
                .collect();
            prop_assert_eq!(schedule(&demands, budget, &pf), schedule(&demands, budget, &pf));
        }
    }
}
