//! Shows the link-adaptation chain: SINR picks a modulation-and-coding
//! entry, the entry fixes bits per PRB, and the PRB demand for a packet
//! follows by ceiling division. Also prints the bit-error probability the
//! KPI layer attaches to each transmission.

use slicesim::phy::{ber, bits_per_prb, prbs_required, McsLut, RE_PER_PRB};

fn main() {
    let lut = McsLut::builtin();

    println!("built-in table ({} resource elements per PRB):", RE_PER_PRB);
    println!("{:>12} {:>8} {:>6} {:>10} {:>10}", "min SINR dB", "mod", "rate", "bits/PRB", "BER@min");
    for e in lut.entries() {
        let sinr_lin = 10f64.powf(e.min_sinr_db / 10.0);
        let ber_at_min = if e.min_sinr_db.is_finite() {
            format!("{:.2e}", ber(sinr_lin, e.modulation))
        } else {
            "-".into()
        };
        println!(
            "{:>12} {:>8} {:>3}/{:<2} {:>10} {:>10}",
            e.min_sinr_db,
            e.modulation.name(),
            e.code_num,
            e.code_den,
            bits_per_prb(e),
            ber_at_min
        );
    }

    println!("\nselection sweeps the thresholds (floor row catches everything):");
    for sinr in [-5.0, 0.0, 1.0, 5.9, 6.0, 17.9, 24.0, 40.0] {
        let e = lut.select(sinr);
        println!(
            "  SINR {:>5.1} dB -> {} {}/{} ({} bits/PRB)",
            sinr,
            e.modulation.name(),
            e.code_num,
            e.code_den,
            bits_per_prb(e)
        );
    }

    println!("\nPRB demand for one low-latency packet (480 bytes = 3840 bits):");
    for sinr in [0.0, 6.0, 12.0, 24.0] {
        let e = lut.select(sinr);
        let pb = bits_per_prb(e);
        println!(
            "  at {:>4.1} dB: {} bits/PRB -> ceil(3840/{}) = {} PRBs",
            sinr,
            pb,
            pb,
            prbs_required(3840, pb)
        );
    }
}
