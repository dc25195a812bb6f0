//! Proportional-fair scheduling in isolation: PRBs go one at a time to the
//! user with the highest instantaneous-rate / average-rate ratio, averages
//! move by an exponential window, and starvation self-corrects.

use slicesim::scheduler::{schedule, PfState, UserDemand};

fn demand(user: usize, backlog_bits: u64, prb_bits: u32) -> UserDemand {
    UserDemand {
        user,
        backlog_bits,
        prb_bits,
        prbs_required: backlog_bits.div_ceil(prb_bits as u64) as u32,
    }
}

fn main() {
    // Two users on one unit: user 0 has a strong link (504 bits/PRB),
    // user 1 a weak one (100 bits/PRB). Budget: 8 PRBs per TTI.
    let mut pf = PfState::new(2);
    let budget = 8;

    println!("tti | grants (user: PRBs, bits)          | PF averages after update");
    for tti in 0..12 {
        let demands = vec![demand(0, 6000, 504), demand(1, 6000, 100)];
        let grants = schedule(&demands, budget, &pf);
        let mut served = [0u64; 2];
        let desc: Vec<String> = grants
            .iter()
            .map(|g| {
                served[g.user] = g.bits;
                format!("u{}: {} PRBs {} bits", g.user, g.prbs, g.bits)
            })
            .collect();
        for u in 0..2 {
            pf.update(u, served[u]);
        }
        println!(
            "{tti:>3} | {:<35} | u0 {:>9.1} u1 {:>9.1}",
            desc.join(", "),
            pf.avg_rate_bps(0),
            pf.avg_rate_bps(1)
        );
    }

    println!();
    println!("granted bits enter the denominator immediately, so each PRB award");
    println!("lowers that user's claim on the next one: the budget settles at an");
    println!("even PRB split while throughput stays proportional to link quality");
    println!("(the averages hold a steady ~5:1 ratio, matching 504 vs 100 bits).");

    // Equal links, equal demands: the tie rule gives the budget 4/4.
    let pf2 = PfState::new(2);
    let demands = vec![demand(0, 5 * 336, 336), demand(1, 5 * 336, 336)];
    let grants = schedule(&demands, 8, &pf2);
    println!("\nsymmetric case, budget 8, both need 5 PRBs:");
    for g in &grants {
        println!("  user {}: {} PRBs, {} bits", g.user, g.prbs, g.bits);
    }
    println!("no user ever receives more PRBs than its backlog requires.");
}
