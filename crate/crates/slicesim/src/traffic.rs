//! Downlink traffic: deterministic periodic packet arrivals, per-user FIFO
//! buffers, deadline-based drops, and transmission bookkeeping.
//!
//! Arrival instants live on an exact microsecond grid. A packet whose arrival
//! time falls in `((tti-1) ms, tti ms]` becomes visible at the start of TTI
//! `tti`, so queueing delays are never negative.

use std::collections::VecDeque;

/// One downlink packet and its lifecycle timestamps (all in ms).
#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub user: usize,
    pub size_bits: u64,
    pub sent_bits: u64,
    pub arrival_ms: f64,
    /// Start of the TTI in which the first bit went out.
    pub tx_start_ms: Option<f64>,
    /// End of the TTI in which the last bit went out.
    pub tx_end_ms: Option<f64>,
}

impl Packet {
    pub fn new(user: usize, size_bits: u64, arrival_ms: f64) -> Self {
        Packet {
            user,
            size_bits,
            sent_bits: 0,
            arrival_ms,
            tx_start_ms: None,
            tx_end_ms: None,
        }
    }

    pub fn remaining_bits(&self) -> u64 {
        self.size_bits - self.sent_bits
    }
}

/// Arrival instants (ms) that become visible at the start of `tti` for a
/// periodic source with period `interval_us`: the multiples of the period in
/// `((tti-1) ms, tti ms]`, evaluated on the integer microsecond grid. TTI 0
/// carries the single arrival at t = 0.
pub fn arrival_times_ms(tti: u64, interval_us: u64) -> Vec<f64> {
    assert!(interval_us > 0, "arrival interval must be positive");
    if tti == 0 {
        return vec![0.0];
    }
    let lo_us = (tti - 1) * 1000;
    let hi_us = tti * 1000;
    let first = lo_us / interval_us + 1;
    let last = hi_us / interval_us;
    (first..=last)
        .map(|n| (n * interval_us) as f64 / 1000.0)
        .collect()
}

/// What a transmission opportunity produced for one user in one TTI.
#[derive(Debug, Default)]
pub struct TransmitOutcome {
    pub bits_sent: u64,
    pub completed: Vec<Packet>,
}

/// Per-user FIFO downlink buffer.
#[derive(Debug, Clone, Default)]
pub struct UserBuffer {
    queue: VecDeque<Packet>,
}

impl UserBuffer {
    pub fn new() -> Self {
        UserBuffer {
            queue: VecDeque::new(),
        }
    }

    pub fn push(&mut self, packet: Packet) {
        self.queue.push_back(packet);
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// Untransmitted bits across all queued packets.
    pub fn backlog_bits(&self) -> u64 {
        self.queue.iter().map(Packet::remaining_bits).sum()
    }

    pub fn packets(&self) -> impl Iterator<Item = &Packet> {
        self.queue.iter()
    }

    /// Drop packets whose age at the start of TTI `tti` strictly exceeds
    /// `d_max_ms`, except packets already in flight (some bits sent). Returns
    /// the dropped packets in queue order.
    pub fn drop_expired(&mut self, tti: u64, d_max_ms: f64) -> Vec<Packet> {
        let now_ms = tti as f64;
        let mut dropped = Vec::new();
        let mut kept = VecDeque::with_capacity(self.queue.len());
        for p in self.queue.drain(..) {
            let expired = p.sent_bits == 0 && now_ms - p.arrival_ms > d_max_ms;
            if expired {
                dropped.push(p);
            } else {
                kept.push_back(p);
            }
        }
        self.queue = kept;
        dropped
    }

    /// Send up to `budget_bits` from the head of the queue during TTI `tti`,
    /// stamping transmission start/end times and returning completed packets.
    pub fn transmit(&mut self, budget_bits: u64, tti: u64) -> TransmitOutcome {
        let mut out = TransmitOutcome::default();
        let mut budget = budget_bits;
        while budget > 0 {
            let Some(head) = self.queue.front_mut() else {
                break;
            };
            let take = head.remaining_bits().min(budget);
            if take == 0 {
                break;
            }
            if head.sent_bits == 0 {
                head.tx_start_ms = Some(tti as f64);
            }
            head.sent_bits += take;
            budget -= take;
            out.bits_sent += take;
            if head.remaining_bits() == 0 {
                let mut done = self.queue.pop_front().unwrap();
                done.tx_end_ms = Some((tti + 1) as f64);
                out.completed.push(done);
            }
        }
        out
    }
}
