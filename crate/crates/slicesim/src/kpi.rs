//! KPI computation: per-packet delay decomposition, windowed per-user
//! aggregates (throughput, delay, BER, drop/success ratios), and ECCDF export
//! preparation.

use crate::error::SimError;
use crate::phy::{PROCESSING_DELAY_MS, TTI_MS};
use crate::traffic::Packet;

/// End-to-end delay of a completed packet, ms: queueing (arrival to first
/// transmission) + transmission (an integer number of TTIs) + the fixed
/// two-symbol processing term.
pub fn packet_delay_ms(p: &Packet) -> Result<f64, SimError> {
    let (Some(start), Some(end)) = (p.tx_start_ms, p.tx_end_ms) else {
        return Err(SimError::UndefinedDelay);
    };
    let d_que = start - p.arrival_ms;
    let d_tx = end - start;
    Ok(d_que + d_tx + PROCESSING_DELAY_MS)
}

/// Arithmetic mean of a delay set; `None` when no packet completed.
pub fn user_mean_delay(delays_ms: &[f64]) -> Option<f64> {
    if delays_ms.is_empty() {
        None
    } else {
        Some(delays_ms.iter().sum::<f64>() / delays_ms.len() as f64)
    }
}

/// Instantaneous throughput of one grant, bit/s: PRB capacity clipped to what
/// was actually buffered (no phantom throughput beyond queued data).
pub fn instantaneous_throughput_bps(prbs: u32, prb_bits: u32, buffered_bits: u64) -> f64 {
    let capacity = prbs as u64 * prb_bits as u64;
    capacity.min(buffered_bits) as f64 / (TTI_MS * 1e-3)
}

/// Streaming per-user accumulator over a window of TTIs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UserAccum {
    pub served_bits: u64,
    pub completed: u64,
    pub dropped: u64,
    delay_sum_ms: f64,
    ber_weighted: f64,
    ber_bits: u64,
}

impl UserAccum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record bits leaving the air interface this TTI with the BER of the
    /// serving link.
    pub fn record_tx(&mut self, bits: u64, ber: f64) {
        self.served_bits += bits;
        self.ber_weighted += ber * bits as f64;
        self.ber_bits += bits;
    }

    pub fn record_completion(&mut self, delay_ms: f64) {
        self.completed += 1;
        self.delay_sum_ms += delay_ms;
    }

    pub fn record_drop(&mut self) {
        self.dropped += 1;
    }

    /// Fold another accumulator (a disjoint TTI range) into this one.
    pub fn merge(&mut self, other: &UserAccum) {
        self.served_bits += other.served_bits;
        self.completed += other.completed;
        self.dropped += other.dropped;
        self.delay_sum_ms += other.delay_sum_ms;
        self.ber_weighted += other.ber_weighted;
        self.ber_bits += other.ber_bits;
    }

    /// Close the window and produce the per-user summary.
    pub fn finalize(&self, window_ttis: u64) -> KpiWindow {
        assert!(window_ttis >= 1);
        let window_s = window_ttis as f64 * TTI_MS * 1e-3;
        let decided = self.completed + self.dropped;
        let pdr = if decided > 0 {
            self.dropped as f64 / decided as f64
        } else {
            0.0
        };
        KpiWindow {
            window_ttis,
            throughput_bps: self.served_bits as f64 / window_s,
            mean_delay_ms: if self.completed > 0 {
                Some(self.delay_sum_ms / self.completed as f64)
            } else {
                None
            },
            mean_ber: if self.ber_bits > 0 {
                Some(self.ber_weighted / self.ber_bits as f64)
            } else {
                None
            },
            pdr,
            success_rate: 1.0 - pdr,
            completed: self.completed,
            dropped: self.dropped,
            served_bits: self.served_bits,
        }
    }
}

/// Per-user summary of one closed window.
#[derive(Debug, Clone, PartialEq)]
pub struct KpiWindow {
    pub window_ttis: u64,
    pub throughput_bps: f64,
    /// Mean delay over completed packets; `None` when none completed (the
    /// engine substitutes the slice deadline for reward purposes).
    pub mean_delay_ms: Option<f64>,
    /// Transmission-bit-weighted mean BER; `None` when nothing was sent.
    pub mean_ber: Option<f64>,
    pub pdr: f64,
    pub success_rate: f64,
    pub completed: u64,
    pub dropped: u64,
    pub served_bits: u64,
}

/// Sorted (value, complementary-CDF) pairs: after sorting ascending, the i-th
/// of n values (1-based) pairs with `1 - i/n`.
pub fn eccdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite metric values"));
    let n = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, 1.0 - (i + 1) as f64 / n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn completed_packet(arrival: f64, start: f64, end: f64) -> Packet {
        Packet {
            user: 0,
            size_bits: 1000,
            sent_bits: 1000,
            arrival_ms: arrival,
            tx_start_ms: Some(start),
            tx_end_ms: Some(end),
        }
    }

    #[test]
    fn delay_decomposition_examples() {
        // Arrival at 0, transmission starts at TTI 3 and spans two TTIs.
        let p = completed_packet(0.0, 3.0, 5.0);
        assert_relative_eq!(packet_delay_ms(&p).unwrap(), 5.142857142857143, epsilon = 1e-12);
        // Immediate single-TTI send.
        let p = completed_packet(1.0, 1.0, 2.0);
        assert_relative_eq!(packet_delay_ms(&p).unwrap(), 1.142857142857143, epsilon = 1e-12);
    }

    #[test]
    fn delay_requires_transmission_stamps() {
        let p = Packet::new(0, 1000, 0.0);
        assert!(matches!(packet_delay_ms(&p), Err(SimError::UndefinedDelay)));
    }

    #[test]
    fn mean_delay_basics() {
        assert_eq!(user_mean_delay(&[]), None);
        assert_eq!(user_mean_delay(&[2.0, 4.0]), Some(3.0));
        assert_eq!(user_mean_delay(&[7.5]), Some(7.5));
        assert_eq!(user_mean_delay(&[2.0; 9]), Some(2.0));
    }

    #[test]
    fn throughput_examples() {
        assert_relative_eq!(instantaneous_throughput_bps(13, 336, u64::MAX), 4.368e6);
        assert_eq!(instantaneous_throughput_bps(0, 336, 10_000), 0.0);
        // Capped by what was queued.
        assert_relative_eq!(instantaneous_throughput_bps(13, 336, 3840), 3.84e6);
    }

    #[test]
    fn window_aggregates_scripted_events() {
        let mut acc = UserAccum::new();
        // TTI 1: 672 bits at BER 1e-3; completes a packet with delay 1.1429.
        acc.record_tx(672, 1e-3);
        acc.record_completion(1.142857142857143);
        // TTI 2: 336 bits at BER 1e-2; one drop.
        acc.record_tx(336, 1e-2);
        acc.record_drop();
        let w = acc.finalize(10);
        assert_relative_eq!(w.throughput_bps, 1008.0 / 0.01);
        assert_relative_eq!(w.mean_delay_ms.unwrap(), 1.142857142857143);
        assert_relative_eq!(
            w.mean_ber.unwrap(),
            (1e-3 * 672.0 + 1e-2 * 336.0) / 1008.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(w.pdr, 0.5);
        assert_relative_eq!(w.success_rate, 0.5);
    }

    #[test]
    fn ratios_handle_empty_and_typical_windows() {
        let w = UserAccum::new().finalize(10);
        assert_eq!(w.pdr, 0.0);
        assert_eq!(w.success_rate, 1.0);
        assert_eq!(w.throughput_bps, 0.0);
        assert_eq!(w.mean_delay_ms, None);
        assert_eq!(w.mean_ber, None);

        let mut acc = UserAccum::new();
        for _ in 0..99 {
            acc.record_completion(2.0);
        }
        acc.record_drop();
        let w = acc.finalize(10);
        assert_relative_eq!(w.pdr, 0.01);
        assert_relative_eq!(w.success_rate, 0.99);
    }

    #[test]
    fn eccdf_of_three_values() {
        let rows = eccdf(&[2.0, 1.0, 3.0]);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].0, 1.0);
        assert_relative_eq!(rows[0].1, 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(rows[1].0, 2.0);
        assert_relative_eq!(rows[1].1, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(rows[2], (3.0, 0.0));
    }

    proptest! {
        /// pdr and success always partition, and adding a drop never lowers pdr.
        #[test]
        fn pdr_is_monotone_in_drops(completions in 0u64..50, drops in 0u64..50) {
            let mut acc = UserAccum::new();
            for _ in 0..completions {
                acc.record_completion(2.0);
            }
            for _ in 0..drops {
                acc.record_drop();
            }
            let w = acc.finalize(10);
            prop_assert!((w.pdr + w.success_rate - 1.0).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&w.pdr));
            acc.record_drop();
            prop_assert!(acc.finalize(10).pdr >= w.pdr);
        }

        /// Merging disjoint windows equals accumulating the union.
        #[test]
        fn window_merge_is_associative(
            a_tx in proptest::collection::vec((1u64..5000, 0.0f64..0.2), 0..10),
            b_tx in proptest::collection::vec((1u64..5000, 0.0f64..0.2), 0..10),
            a_done in 0u64..5,
            b_drop in 0u64..5,
        ) {
            let mut a = UserAccum::new();
            for &(bits, ber) in &a_tx {
                a.record_tx(bits, ber);
            }
            for _ in 0..a_done {
                a.record_completion(3.0);
            }
            let mut b = UserAccum::new();
            for &(bits, ber) in &b_tx {
                b.record_tx(bits, ber);
            }
            for _ in 0..b_drop {
                b.record_drop();
            }
            let mut merged = a.clone();
            merged.merge(&b);

            let mut union = UserAccum::new();
            for &(bits, ber) in a_tx.iter().chain(&b_tx) {
                union.record_tx(bits, ber);
            }
            for _ in 0..a_done {
                union.record_completion(3.0);
            }
            for _ in 0..b_drop {
                union.record_drop();
            }
            let mw = merged.finalize(20);
            let uw = union.finalize(20);
            prop_assert_eq!(mw.completed, uw.completed);
            prop_assert_eq!(mw.dropped, uw.dropped);
            prop_assert_eq!(mw.served_bits, uw.served_bits);
            prop_assert_eq!(mw.pdr, uw.pdr);
            prop_assert!((mw.throughput_bps - uw.throughput_bps).abs() < 1e-6);
            match (mw.mean_ber, uw.mean_ber) {
                (None, None) => {}
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                other => prop_assert!(false, "mismatched BER presence {other:?}"),
            }
        }

        /// The ECCDF is non-increasing, starts below 1, and ends at 0.
        #[test]
        fn eccdf_shape(values in proptest::collection::vec(-100.0f64..100.0, 1..50)) {
            let rows = eccdf(&values);
            prop_assert_eq!(rows.len(), values.len());
            for pair in rows.windows(2) {
                prop_assert!(pair[0].0 <= pair[1].0);
                prop_assert!(pair[0].1 >= pair[1].1);
            }
            prop_assert!(rows.last().unwrap().1.abs() < 1e-12);
        }
    }
}
