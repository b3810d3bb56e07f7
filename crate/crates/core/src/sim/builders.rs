//! Named instances used by tests, experiments and the CLI.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;
use thiserror::Error;

use crate::mdp::{ActionId, GroundMdp, StateId};
use crate::model::{DiscoverySchedule, MdpuInstance};
use crate::rng::Rng;

/// The explore action in every built-in instance. Ground actions start at 1.
pub const EXPLORE: ActionId = ActionId(0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("need at least one aware state")]
    NoStates,
    #[error("need at least one hidden action")]
    NoHiddenActions,
    #[error("low reward {r1} must be below R_max={r_max}")]
    RewardOrder { r1: f64, r_max: f64 },
    #[error("rewards must be nonnegative")]
    NegativeReward,
}

fn check_rewards(r1: f64, r_max: f64) -> Result<(), BuildError> {
    if !(r1 >= 0.0) {
        return Err(BuildError::NegativeReward);
    }
    if !(r1 < r_max) {
        return Err(BuildError::RewardOrder { r1, r_max });
    }
    Ok(())
}

/// One state, aware of `a1` (reward `r1`) but not of `a2` (reward `r2`),
/// with `D(j,t) = 1/(t+1)^2` and zero exploration rewards.
pub fn example41(r1: f64, r2: f64) -> Result<MdpuInstance, BuildError> {
    check_rewards(r1, r2)?;
    let m = GroundMdp::new(1)
        .with_outcome(0, 1, 0, 1.0, r1)
        .with_outcome(0, 2, 0, 1.0, r2);
    let g0 = BTreeMap::from([(StateId(0), BTreeSet::from([ActionId(1)]))]);
    let mut u = MdpuInstance::new(m, g0, EXPLORE, DiscoverySchedule::power_law());
    u.r_max = Some(r2);
    Ok(u)
}

/// The impossibility construction with one hidden action.
pub fn lower_bound_instance(s0_size: usize, r1: f64, r_max: f64) -> Result<MdpuInstance, BuildError> {
    lower_bound_instance_with(s0_size, 1, r1, r_max, DiscoverySchedule::power_law())
}

/// All states are aware of a single cycling action `a1` with reward `r1`.
/// State `s0` hides one action, a self-loop paying `r_max`; every other
/// state hides `hidden` actions, each leading to `s0` with reward `r_max`.
/// With one state this is [`example41`] under `schedule`.
pub fn lower_bound_instance_with(
    s0_size: usize,
    hidden: u32,
    r1: f64,
    r_max: f64,
    schedule: DiscoverySchedule,
) -> Result<MdpuInstance, BuildError> {
    if s0_size == 0 {
        return Err(BuildError::NoStates);
    }
    if hidden == 0 {
        return Err(BuildError::NoHiddenActions);
    }
    if s0_size == 1 {
        let mut u = example41(r1, r_max)?;
        u.schedule = schedule;
        return Ok(u);
    }
    check_rewards(r1, r_max)?;
    let mut m = GroundMdp::new(s0_size);
    for s in 0..s0_size {
        m = m.with_outcome(s, 1, (s + 1) % s0_size, 1.0, r1);
        if s == 0 {
            m = m.with_outcome(0, 2, 0, 1.0, r_max);
        } else {
            for a in 2..2 + hidden {
                m = m.with_outcome(s, a, 0, 1.0, r_max);
            }
        }
    }
    let g0 = (0..s0_size)
        .map(|s| (StateId(s), BTreeSet::from([ActionId(1)])))
        .collect();
    let mut u = MdpuInstance::new(m, g0, EXPLORE, schedule);
    u.r_max = Some(r_max);
    Ok(u)
}

/// Three states, at most three actions each, under `Constant(0.5)`.
///
/// The agent starts aware only of `s0` and its two poor actions. Good play
/// needs the hidden `a3` at `s0`, which leads to `s2`, where `a1` pays 1.
pub fn three_state_demo() -> MdpuInstance {
    let m = GroundMdp::new(3)
        .with_outcome(0, 1, 1, 1.0, 0.1)
        .with_outcome(0, 2, 0, 1.0, 0.05)
        .with_outcome(0, 3, 2, 1.0, 0.5)
        .with_outcome(1, 1, 0, 1.0, 0.1)
        .with_outcome(1, 2, 1, 1.0, 0.1)
        .with_outcome(2, 1, 2, 0.9, 1.0)
        .with_outcome(2, 1, 0, 0.1, 0.0)
        .with_outcome(2, 2, 1, 1.0, 0.0);
    let g0 = BTreeMap::from([(StateId(0), BTreeSet::from([ActionId(1), ActionId(2)]))]);
    let sched = DiscoverySchedule::constant(0.5).expect("valid probability");
    MdpuInstance::new(m, g0, EXPLORE, sched)
}

/// Random ground MDP on `n_states` states with `1..=max_actions` actions per
/// state, probabilities on a grid of tenths and rewards in `[0,1]` rounded
/// to hundredths.
pub fn random_ground(rng: &mut Rng, n_states: usize, max_actions: u32) -> GroundMdp<f64> {
    let mut m = GroundMdp::new(n_states);
    for s in 0..n_states {
        let n_actions = rng.random_range(1..=max_actions);
        for a in 1..=n_actions {
            // Split ten tenths among successors.
            let mut tenths = vec![0u32; n_states];
            for _ in 0..10 {
                tenths[rng.random_range(0..n_states)] += 1;
            }
            for (next, &k) in tenths.iter().enumerate() {
                if k > 0 {
                    let reward = f64::from(rng.random_range(0..=100u32)) / 100.0;
                    m.add_outcome(StateId(s), ActionId(a), StateId(next), f64::from(k) / 10.0, reward);
                }
            }
        }
    }
    m
}

/// Full-awareness instance over `m`: every state and action known at the
/// start, so exploring never discovers anything.
pub fn fully_aware(m: GroundMdp<f64>, schedule: DiscoverySchedule) -> MdpuInstance {
    let g0 = m.states().map(|s| (s, m.actions_at(s).collect())).collect();
    MdpuInstance::new(m, g0, EXPLORE, schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_mdpu;
    use crate::rng::{stream, Purpose};

    #[test]
    fn builders_are_valid() {
        let e = example41(1.0, 2.0).unwrap();
        assert!(validate_mdpu(&e).is_empty());
        assert_eq!(e.hidden_count(StateId(0)), 1);

        let one = lower_bound_instance(1, 1.0, 2.0).unwrap();
        assert_eq!(one.ground, e.ground);

        let two = lower_bound_instance(2, 1.0, 2.0).unwrap();
        assert!(validate_mdpu(&two).is_empty());
        assert_eq!(two.hidden_count(StateId(0)), 1);
        assert_eq!(two.hidden_count(StateId(1)), 1);
        let four = lower_bound_instance_with(4, 3, 0.5, 1.0, DiscoverySchedule::power_law()).unwrap();
        assert!(validate_mdpu(&four).is_empty());
        assert_eq!(four.hidden_count(StateId(0)), 1);
        assert_eq!(four.hidden_count(StateId(2)), 3);

        assert!(validate_mdpu(&three_state_demo()).is_empty());
        assert!(lower_bound_instance(2, 2.0, 1.0).is_err());
        assert!(lower_bound_instance(0, 0.0, 1.0).is_err());
    }

    #[test]
    fn random_grounds_are_valid() {
        let mut rng = stream(1, 0, Purpose::Fixture);
        for _ in 0..50 {
            let m = random_ground(&mut rng, 3, 3);
            assert!(crate::mdp::validate_mdp(&m).is_empty());
            let u = fully_aware(m, DiscoverySchedule::constant(0.5).unwrap());
            assert!(validate_mdpu(&u).is_empty());
        }
    }
}
