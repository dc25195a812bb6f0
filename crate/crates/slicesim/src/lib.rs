//! Deterministic downlink simulator for a two-slice radio access network with
//! queue-aware user association and per-slice DQN weight tuning.
//!
//! A broadband slice and a low-latency slice share a small grid of radio
//! units. Every control interval, a selection algorithm re-associates users to
//! units using a weighted trade-off between PRB demand and a queueing
//! congestion metric; a per-slice DQN picks the trade-off weights from
//! observed channel and buffer state. Runs are deterministic for a given seed
//! and config, down to byte-identical output files.
//!
//! Start with the runnable examples, each demonstrating one layer:
//!
//! ```text
//! cargo run --example channel_model        # pathloss, shadowing, fading, SINR
//! cargo run --example link_adaptation      # MCS selection and PRB capacity
//! cargo run --example traffic_buffers      # arrivals, deadlines, conservation
//! cargo run --example pf_scheduler         # proportional-fair PRB allocation
//! cargo run --example association_selection# exhaustive vs linear vs max-SNR
//! cargo run --example dqn_bandit           # the learner on a toy problem
//! cargo run --example train_short          # a short end-to-end training run
//! cargo run --example compare_eccdf        # paired algorithm comparison
//! ```
//!
//! The same functionality is scriptable through the `slicesim` binary
//! (`train`, `eval`, `baseline`, `compare`).

pub mod association;
pub mod channel;
pub mod config;
pub mod dqn;
pub mod engine;
pub mod error;
pub mod kpi;
pub mod net;
pub mod nn;
pub mod output;
pub mod phy;
pub mod rng;
pub mod scheduler;
pub mod traffic;
