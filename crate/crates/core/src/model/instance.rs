//! MDPU instances: a ground MDP plus the decision maker's initial awareness,
//! the explore action and the discovery schedule.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::mdp::{validate_mdp, ActionId, GroundMdp, StateId, Violation};

use super::schedule::DiscoverySchedule;

#[derive(Debug, Clone)]
pub struct MdpuInstance {
    pub ground: GroundMdp<f64>,
    /// `S0`
    pub aware_states: BTreeSet<StateId>,
    /// `g0`, keyed by states of `S0`. A missing key means no aware action.
    pub aware_actions: BTreeMap<StateId, BTreeSet<ActionId>>,
    /// `a0`
    pub explore_action: ActionId,
    pub schedule: DiscoverySchedule,
    /// `R+(s)`, indexed by state.
    pub explore_reward_hit: Vec<f64>,
    /// `R-(s)`, indexed by state.
    pub explore_reward_miss: Vec<f64>,
    /// Declared upper bound on rewards, when known.
    pub r_max: Option<f64>,
}

/// What a decision maker knows before acting.
#[derive(Debug, Clone)]
pub struct Knowledge {
    pub aware_states: BTreeSet<StateId>,
    pub aware_actions: BTreeMap<StateId, BTreeSet<ActionId>>,
    pub explore_action: ActionId,
    pub schedule: DiscoverySchedule,
}

impl MdpuInstance {
    /// Instance with zero exploration rewards everywhere.
    pub fn new(
        ground: GroundMdp<f64>,
        aware_actions: BTreeMap<StateId, BTreeSet<ActionId>>,
        explore_action: ActionId,
        schedule: DiscoverySchedule,
    ) -> Self {
        let n = ground.n_states();
        Self {
            aware_states: aware_actions.keys().copied().collect(),
            ground,
            aware_actions,
            explore_action,
            schedule,
            explore_reward_hit: vec![0.0; n],
            explore_reward_miss: vec![0.0; n],
            r_max: None,
        }
    }

    pub fn aware_at(&self, s: StateId) -> impl Iterator<Item = ActionId> + '_ {
        self.aware_actions.get(&s).into_iter().flatten().copied()
    }

    /// `|A0|`, the number of distinct ground actions in `g0`.
    pub fn aware_action_count(&self) -> usize {
        self.aware_actions.values().flatten().collect::<BTreeSet<_>>().len()
    }

    /// `|A|` over the ground MDP, excluding `a0`.
    pub fn action_count(&self) -> usize {
        self.ground
            .states()
            .flat_map(|s| self.ground.actions_at(s))
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Number of ground actions at `s` not in `g0(s)`.
    pub fn hidden_count(&self, s: StateId) -> usize {
        self.ground
            .actions_at(s)
            .filter(|a| !self.aware_actions.get(&s).is_some_and(|g| g.contains(a)))
            .count()
    }

    pub fn knowledge(&self) -> Knowledge {
        Knowledge {
            aware_states: self.aware_states.clone(),
            aware_actions: self.aware_actions.clone(),
            explore_action: self.explore_action,
            schedule: self.schedule.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceViolation {
    Ground(Violation),
    NoAwareStates,
    AwareStateOutOfRange {
        state: StateId,
    },
    /// `g0` has an entry for a state outside `S0`.
    AwareActionsOutsideS0 {
        state: StateId,
    },
    AwareActionNotAvailable {
        state: StateId,
        action: ActionId,
    },
    ExploreActionInGround {
        state: StateId,
    },
    ExploreRewardLength {
        hit: usize,
        miss: usize,
        states: usize,
    },
    NegativeExploreReward {
        state: StateId,
        value: f64,
    },
    MissExceedsHit {
        state: StateId,
        miss: f64,
        hit: f64,
    },
    HitNotBelowRmax {
        state: StateId,
        hit: f64,
        r_max: f64,
    },
    GroundRewardAboveRmax {
        reward: f64,
        r_max: f64,
    },
}

impl fmt::Display for InstanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use InstanceViolation::*;
        match self {
            Ground(v) => write!(f, "{v}"),
            NoAwareStates => write!(f, "S0 is empty"),
            AwareStateOutOfRange { state } => write!(f, "aware state {state} is not a state of the MDP"),
            AwareActionsOutsideS0 { state } => write!(f, "g0 is defined at {state}, which is not in S0"),
            AwareActionNotAvailable { state, action } => {
                write!(f, "aware action {action} is not available at {state}")
            }
            ExploreActionInGround { state } => write!(f, "explore action is a ground action at {state}"),
            ExploreRewardLength { hit, miss, states } => {
                write!(f, "explore rewards have lengths {hit}/{miss}, expected {states}")
            }
            NegativeExploreReward { state, value } => write!(f, "{state}: negative explore reward {value}"),
            MissExceedsHit { state, miss, hit } => write!(f, "{state}: R-={miss} exceeds R+={hit}"),
            HitNotBelowRmax { state, hit, r_max } => write!(f, "{state}: R+={hit} is not below R_max={r_max}"),
            GroundRewardAboveRmax { reward, r_max } => {
                write!(f, "ground reward {reward} exceeds declared R_max={r_max}")
            }
        }
    }
}

/// Check every invariant of `u`, including those of its ground MDP.
pub fn validate_mdpu(u: &MdpuInstance) -> Vec<InstanceViolation> {
    use InstanceViolation::*;
    let m = &u.ground;
    let n = m.n_states();
    let mut out: Vec<InstanceViolation> = validate_mdp(m).into_iter().map(Ground).collect();

    if u.aware_states.is_empty() {
        out.push(NoAwareStates);
    }
    for &s in &u.aware_states {
        if s.0 >= n {
            out.push(AwareStateOutOfRange { state: s });
        }
    }
    for (&s, acts) in &u.aware_actions {
        if !u.aware_states.contains(&s) {
            out.push(AwareActionsOutsideS0 { state: s });
            continue;
        }
        if s.0 >= n {
            continue;
        }
        for &a in acts {
            if !m.has_action(s, a) {
                out.push(AwareActionNotAvailable { state: s, action: a });
            }
        }
    }
    for s in m.states() {
        if m.has_action(s, u.explore_action) {
            out.push(ExploreActionInGround { state: s });
        }
    }

    if u.explore_reward_hit.len() != n || u.explore_reward_miss.len() != n {
        out.push(ExploreRewardLength {
            hit: u.explore_reward_hit.len(),
            miss: u.explore_reward_miss.len(),
            states: n,
        });
    } else {
        for s in m.states() {
            let (hit, miss) = (u.explore_reward_hit[s.0], u.explore_reward_miss[s.0]);
            for value in [hit, miss] {
                if !(value >= 0.0) {
                    out.push(NegativeExploreReward { state: s, value });
                }
            }
            if miss > hit {
                out.push(MissExceedsHit { state: s, miss, hit });
            }
            if let Some(r_max) = u.r_max {
                if !(hit < r_max) {
                    out.push(HitNotBelowRmax { state: s, hit, r_max });
                }
            }
        }
    }
    if let (Some(r_max), Some(reward)) = (u.r_max, m.max_reward()) {
        if reward > r_max {
            out.push(GroundRewardAboveRmax { reward, r_max });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_state() -> MdpuInstance {
        let m = GroundMdp::new(1)
            .with_outcome(0, 1, 0, 1.0, 1.0)
            .with_outcome(0, 2, 0, 1.0, 2.0);
        let g0 = BTreeMap::from([(StateId(0), BTreeSet::from([ActionId(1)]))]);
        MdpuInstance::new(m, g0, ActionId(0), DiscoverySchedule::power_law())
    }

    #[test]
    fn valid_instance() {
        let u = one_state();
        assert!(validate_mdpu(&u).is_empty());
        assert_eq!(u.hidden_count(StateId(0)), 1);
        assert_eq!(u.aware_action_count(), 1);
        assert_eq!(u.action_count(), 2);
    }

    #[test]
    fn aware_action_must_exist() {
        let mut u = one_state();
        u.aware_actions.get_mut(&StateId(0)).unwrap().insert(ActionId(7));
        assert_eq!(
            validate_mdpu(&u),
            vec![InstanceViolation::AwareActionNotAvailable {
                state: StateId(0),
                action: ActionId(7)
            }]
        );
    }

    #[test]
    fn miss_above_hit() {
        let mut u = one_state();
        u.explore_reward_miss[0] = 0.5;
        assert!(matches!(
            validate_mdpu(&u)[..],
            [InstanceViolation::MissExceedsHit { .. }]
        ));
    }

    #[test]
    fn explore_action_collision_and_rmax() {
        let mut u = one_state();
        u.explore_action = ActionId(2);
        u.r_max = Some(1.5);
        let v = validate_mdpu(&u);
        assert!(v.contains(&InstanceViolation::ExploreActionInGround { state: StateId(0) }));
        assert!(v
            .iter()
            .any(|x| matches!(x, InstanceViolation::GroundRewardAboveRmax { .. })));

        let mut u = one_state();
        u.r_max = Some(2.0);
        u.explore_reward_hit[0] = 2.0;
        assert!(matches!(
            validate_mdpu(&u)[..],
            [InstanceViolation::HitNotBelowRmax { .. }]
        ));
    }

    #[test]
    fn ground_violations_are_included() {
        let mut u = one_state();
        u.ground = GroundMdp::new(1)
            .with_outcome(0, 1, 0, 0.9, 1.0)
            .with_outcome(0, 2, 0, 1.0, 2.0);
        assert!(matches!(
            validate_mdpu(&u)[..],
            [InstanceViolation::Ground(Violation::NotStochastic { .. })]
        ));
    }
}
