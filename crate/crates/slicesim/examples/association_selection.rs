//! Contrasts the three association selectors on one scripted snapshot:
//! exhaustive search over every assignment vector, the linear per-user
//! rule, and strongest-link. Also shows the smoothed congestion metric
//! that makes the first two queue-aware.

use slicesim::association::{
    compute_tau, iqra_select, liqra_select, max_snr_select, update_tau_global, NetworkSnapshot,
    SnapUser, WeightPair,
};
use slicesim::config::ScoringMode;
use slicesim::scheduler::PfState;

fn main() {
    // The congestion metric tau = buffered / transmitted, smoothed by
    // averaging with its previous value. A unit stuck at tau = 2 converges:
    println!("congestion smoothing from 0 with tau = 2 every TTI:");
    let mut tau_g = 0.0;
    print!("  {tau_g}");
    for _ in 0..4 {
        tau_g = update_tau_global(tau_g, compute_tau(8000, 4000, 100.0));
        print!(" -> {tau_g}");
    }
    println!("   (halfway to the instantaneous value each step)");

    // Two units; unit 0 has the stronger link for everyone but a long queue
    // history (high tau). Three users with 6000-bit backlogs.
    let tau_global = vec![8.0, 0.5];
    let users: Vec<SnapUser> = (0..3)
        .map(|id| SnapUser {
            id,
            backlog_bits: 6000,
            packet_count: 2,
            gain_db: vec![-95.0, -105.0],
            snr_db: vec![25.0, 15.0],
            prb_bits: vec![840, 504],
            distance_m: vec![30.0, 60.0],
        })
        .collect();
    let snap = NetworkSnapshot {
        num_orus: 2,
        users,
        budget_prbs: 10,
        network_budget: false,
        fronthaul_cap_bits: None,
        tau_global: tau_global.clone(),
        tau_cap: 100.0,
        scoring: ScoringMode::Raw,
        enumeration_cap: 50_000,
        area_diag_m: 141.42,
        pf: PfState::new(3),
    };
    println!("\nsnapshot: 3 users x 2 units, budget 10 PRBs/unit");
    println!("  unit 0: 840 bits/PRB for all, tau = {}", tau_global[0]);
    println!("  unit 1: 504 bits/PRB for all, tau = {}", tau_global[1]);

    let strongest = max_snr_select(&snap);
    println!("\nstrongest-link ignores queues: serving = {:?}", strongest.0.serving_vector());

    // Low congestion weight: the better PRB economics of unit 0 win.
    let w_rate = WeightPair { w1: 1.0, w2: 0.1 };
    // High congestion weight: unit 0's tau = 8 becomes prohibitive.
    let w_queue = WeightPair { w1: 0.1, w2: 1.0 };

    for (label, w) in [("rate-leaning", w_rate), ("queue-leaning", w_queue)] {
        let (m_ex, winner) = iqra_select(w, &snap).unwrap();
        let (m_lin, _) = liqra_select(w, &snap);
        println!("\nweights w1={} w2={} ({label}):", w.w1, w.w2);
        println!(
            "  exhaustive: serving = {:?}  score {:.3} (prb term {:.1}, tau term {:.1})",
            m_ex.serving_vector(),
            winner.ad,
            winner.prb_term,
            winner.tau_term
        );
        println!("  linear:     serving = {:?}", m_lin.serving_vector());
    }

    println!("\nthe exhaustive selector scores each candidate by simulating the");
    println!("PRB allocation it would trigger, something per-user rules cannot see:");
    let (_, winner) = iqra_select(w_rate, &snap).unwrap();
    println!(
        "  winning candidate: PRBs required per user {:?}, assigned {:?}",
        winner.prbs_required, winner.prbs_assigned
    );
    println!("  (users 0,1 share unit 0's 10-PRB budget; user 2 has unit 1 alone)");
}
