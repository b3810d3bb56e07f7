#![allow(dead_code)]

use mdpu::mdp::{for_each_stationary_policy, GroundMdp, Policy};
use mdpu::rng::{stream, Purpose};
use mdpu::sim::builders::random_ground;
use mdpu::{ActionId, StateId};
use rand::Rng as _;

pub fn random_mdp(seed: u64, n_states: usize, max_actions: u32) -> GroundMdp<f64> {
    let mut rng = stream(seed, 0, Purpose::Fixture);
    random_ground(&mut rng, n_states, max_actions)
}

/// Every state reaches every other under some action sequence.
pub fn strongly_connected(m: &GroundMdp<f64>) -> bool {
    let n = m.n_states();
    let mut reach = vec![vec![false; n]; n];
    for s in m.states() {
        reach[s.0][s.0] = true;
        for row in m.rows_at(s) {
            for o in &row.outcomes {
                if o.prob > 0.0 {
                    reach[s.0][o.next.0] = true;
                }
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    reach.iter().all(|r| r.iter().all(|&x| x))
}

pub fn random_time_indexed(m: &GroundMdp<f64>, horizon: usize, seed: u64) -> Policy {
    let mut rng = stream(seed, 1, Purpose::Fixture);
    let layers = (0..horizon)
        .map(|_| {
            m.states()
                .map(|s| {
                    let acts: Vec<ActionId> = m.actions_at(s).collect();
                    acts[rng.random_range(0..acts.len())]
                })
                .collect()
        })
        .collect();
    Policy::time_indexed(layers)
}

pub fn stationary_policies(m: &GroundMdp<f64>) -> Vec<Policy> {
    let mut out = Vec::new();
    for_each_stationary_policy(m, |p| out.push(p));
    out
}

pub fn s(i: usize) -> StateId {
    StateId(i)
}

pub fn a(i: u32) -> ActionId {
    ActionId(i)
}
