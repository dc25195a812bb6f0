//! Exercises the learner on the smallest problem that can validate it: a
//! one-state bandit with a known best action. Greedy-policy accuracy and
//! the falling exploration rate are printed as training progresses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slicesim::config::AgentConfig;
use slicesim::dqn::{DqnAgent, Transition};

fn main() {
    // 2x2 weight grid = 4 actions. Expected payouts make action 2 best.
    let payout = [0.3, 0.6, 1.0, 0.1];
    let cfg = AgentConfig {
        hidden: vec![16, 16],
        learning_rate: 1e-3,
        batch_size: 16,
        replay_capacity: 2000,
        warmup_transitions: 32,
        target_sync_interval: 50,
        gamma: 0.0, // one-state problem: no bootstrapping needed
        epsilon_start: 1.0,
        epsilon_decay: 0.99,
        epsilon_min: 0.01,
        weight_grid: 2,
        state_gain_floor_db: -160.0,
        state_gain_ceil_db: -40.0,
        state_packet_cap: 64,
    };
    let state = vec![1.0, 0.0, 0.5]; // arbitrary fixed observation
    let mut init = ChaCha8Rng::seed_from_u64(7);
    let mut explore = ChaCha8Rng::seed_from_u64(8);
    let mut replay = ChaCha8Rng::seed_from_u64(9);
    let mut env = ChaCha8Rng::seed_from_u64(10);
    let mut agent = DqnAgent::new('E', state.len(), &cfg, &mut init);

    println!("payouts per action: {payout:?} (best: action 2)");
    println!("{:>5} {:>9} {:>8} {:>26}", "step", "epsilon", "greedy", "Q-values");
    for step in 0..601 {
        let action = agent.select_action(&state, &mut explore);
        agent.decay_epsilon();
        // Noisy reward around the true payout keeps the problem honest.
        let reward = payout[action] + 0.05 * (env.gen::<f64>() - 0.5);
        agent.push_transition(Transition {
            state: state.clone(),
            action,
            reward,
            next_state: state.clone(),
        });
        if agent.warmed_up() {
            agent.train_step(&mut replay).unwrap();
        }
        if step % 100 == 0 {
            let q = agent.q_values(&state);
            let greedy = q
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            let qs: Vec<String> = q.iter().map(|v| format!("{v:6.3}")).collect();
            println!(
                "{step:>5} {:>9.4} {greedy:>8} {}",
                agent.epsilon(),
                qs.join(" ")
            );
        }
    }

    let q = agent.q_values(&state);
    let greedy = q.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    println!(
        "\nafter {} train steps the greedy action is {greedy} \
         (Q approximates each arm's mean payout).",
        agent.train_steps()
    );
}
