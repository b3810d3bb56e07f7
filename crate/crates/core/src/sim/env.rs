use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::Rng as _;
use thiserror::Error;

use crate::mdp::{ActionId, StateId};
use crate::model::{validate_mdpu, DiscoverySchedule, InstanceViolation, MdpuInstance, ScheduleError};
use crate::rng::{self, Purpose, Rng};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("start state {0} is not in S0")]
    StartNotAware(StateId),
    #[error("invalid instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidInstance(Vec<InstanceViolation>),
    #[error("action {action} is not known at {state}")]
    UnknownAction { state: StateId, action: ActionId },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Which states learn of an action discovered at one of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AwarenessScope {
    /// Only the state where it was discovered.
    #[default]
    PerState,
    /// Every known state offering it, and every state reached later.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvOptions {
    /// When false, the explore counter counts every explore at the state.
    pub reset_counter_on_discovery: bool,
    pub awareness: AwarenessScope,
}

impl Default for EnvOptions {
    fn default() -> Self {
        Self {
            reset_counter_on_discovery: true,
            awareness: AwarenessScope::PerState,
        }
    }
}

/// Master seed and replica index that name an environment's random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub seed: u64,
    pub replica: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub current_state: StateId,
    pub known_states: BTreeSet<StateId>,
    /// Known ground actions per known state. The explore action is always
    /// available in addition.
    pub known_actions: BTreeMap<StateId, BTreeSet<ActionId>>,
    /// Explores at each state since the last discovery there.
    pub explore_counter: BTreeMap<StateId, u64>,
    pub stream: StreamId,
    /// Position in the random stream, in 32-bit words.
    pub stream_position: u128,
    pub step_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub next_state: StateId,
    pub discovered_action: Option<ActionId>,
    pub discovered_state: Option<StateId>,
    pub was_explore: bool,
}

/// The agent-facing view of an environment. Nothing here exposes the
/// ground MDP, the hidden actions or the rewards of unplayed edges.
pub trait Environment {
    fn current_state(&self) -> StateId;
    fn explore_action(&self) -> ActionId;
    fn known_states(&self) -> &BTreeSet<StateId>;
    /// Known ground actions at `s`, `None` if `s` is not known.
    fn known_actions(&self, s: StateId) -> Option<&BTreeSet<ActionId>>;
    /// The discovery schedule is part of what the agent knows.
    fn schedule(&self) -> &DiscoverySchedule;
    fn step_count(&self) -> u64;
    fn stream(&self) -> StreamId;
    fn step(&mut self, a: ActionId) -> Result<StepOutcome, EnvError>;
}

/// Simulator for one run of an [`MdpuInstance`].
#[derive(Debug, Clone)]
pub struct Env {
    instance: Arc<MdpuInstance>,
    state: EnvState,
    rng: Rng,
    options: EnvOptions,
    globally_known: BTreeSet<ActionId>,
}

impl Env {
    pub fn reset(u: Arc<MdpuInstance>, start: StateId, seed: u64) -> Result<Self, EnvError> {
        Self::reset_replica(u, start, seed, 0, EnvOptions::default())
    }

    /// Reset on the environment stream of `replica` under `seed`.
    pub fn reset_replica(
        u: Arc<MdpuInstance>,
        start: StateId,
        seed: u64,
        replica: u64,
        options: EnvOptions,
    ) -> Result<Self, EnvError> {
        let violations = validate_mdpu(&u);
        if !violations.is_empty() {
            return Err(EnvError::InvalidInstance(violations));
        }
        Self::reset_unchecked(u, start, seed, replica, options)
    }

    /// Reset without revalidating `u`, for callers that reset the same
    /// validated instance many times.
    pub fn reset_unchecked(
        u: Arc<MdpuInstance>,
        start: StateId,
        seed: u64,
        replica: u64,
        options: EnvOptions,
    ) -> Result<Self, EnvError> {
        if !u.aware_states.contains(&start) {
            return Err(EnvError::StartNotAware(start));
        }
        let known_states = u.aware_states.clone();
        let mut known_actions: BTreeMap<StateId, BTreeSet<ActionId>> =
            known_states.iter().map(|&s| (s, u.aware_at(s).collect())).collect();
        let mut globally_known = BTreeSet::new();
        if options.awareness == AwarenessScope::Global {
            globally_known = known_actions.values().flatten().copied().collect();
            for (&s, acts) in known_actions.iter_mut() {
                acts.extend(u.ground.actions_at(s).filter(|a| globally_known.contains(a)));
            }
        }
        let explore_counter = known_states.iter().map(|&s| (s, 0)).collect();
        let rng = rng::stream(seed, replica, Purpose::Environment);
        Ok(Self {
            state: EnvState {
                current_state: start,
                known_states,
                known_actions,
                explore_counter,
                stream: StreamId { seed, replica },
                stream_position: rng.get_word_pos(),
                step_count: 0,
            },
            instance: u,
            rng,
            options,
            globally_known,
        })
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn options(&self) -> EnvOptions {
        self.options
    }

    fn learn_state(&mut self, s: StateId) {
        let acts = match self.options.awareness {
            AwarenessScope::PerState => BTreeSet::new(),
            AwarenessScope::Global => self
                .instance
                .ground
                .actions_at(s)
                .filter(|a| self.globally_known.contains(a))
                .collect(),
        };
        self.state.known_states.insert(s);
        self.state.known_actions.insert(s, acts);
        self.state.explore_counter.insert(s, 0);
    }

    fn learn_action(&mut self, s: StateId, a: ActionId) {
        self.state.known_actions.entry(s).or_default().insert(a);
        if self.options.awareness == AwarenessScope::Global {
            self.globally_known.insert(a);
            for (&other, acts) in self.state.known_actions.iter_mut() {
                if self.instance.ground.has_action(other, a) {
                    acts.insert(a);
                }
            }
        }
    }

    fn explore(&mut self, s: StateId) -> Result<StepOutcome, EnvError> {
        let u = Arc::clone(&self.instance);
        let known = &self.state.known_actions[&s];
        let hidden: Vec<ActionId> = u.ground.actions_at(s).filter(|a| !known.contains(a)).collect();
        let counter = self.state.explore_counter.get(&s).copied().unwrap_or(0);
        let p = u.schedule.d_eval(hidden.len() as u64, counter + 1)?;
        let draw: f64 = self.rng.random();
        let discovered = if draw < p {
            Some(hidden[self.rng.random_range(0..hidden.len())])
        } else {
            None
        };
        let next_counter = if discovered.is_some() && self.options.reset_counter_on_discovery {
            0
        } else {
            counter + 1
        };
        self.state.explore_counter.insert(s, next_counter);
        let reward = match discovered {
            Some(a) => {
                self.learn_action(s, a);
                u.explore_reward_hit[s.0]
            }
            None => u.explore_reward_miss[s.0],
        };
        Ok(StepOutcome {
            reward,
            next_state: s,
            discovered_action: discovered,
            discovered_state: None,
            was_explore: true,
        })
    }

    fn play(&mut self, s: StateId, a: ActionId) -> StepOutcome {
        let u = Arc::clone(&self.instance);
        let row = u.ground.row(s, a).expect("known actions exist in the ground MDP");
        let draw: f64 = self.rng.random();
        let mut acc = 0.0;
        let mut chosen = row.outcomes.last().expect("rows are nonempty");
        for o in &row.outcomes {
            acc += o.prob;
            if draw < acc {
                chosen = o;
                break;
            }
        }
        let next = chosen.next;
        let discovered_state = if self.state.known_states.contains(&next) {
            None
        } else {
            self.learn_state(next);
            Some(next)
        };
        self.state.current_state = next;
        StepOutcome {
            reward: chosen.reward,
            next_state: next,
            discovered_action: None,
            discovered_state,
            was_explore: false,
        }
    }
}

impl Environment for Env {
    fn current_state(&self) -> StateId {
        self.state.current_state
    }

    fn explore_action(&self) -> ActionId {
        self.instance.explore_action
    }

    fn known_states(&self) -> &BTreeSet<StateId> {
        &self.state.known_states
    }

    fn known_actions(&self, s: StateId) -> Option<&BTreeSet<ActionId>> {
        self.state.known_actions.get(&s)
    }

    fn schedule(&self) -> &DiscoverySchedule {
        &self.instance.schedule
    }

    fn step_count(&self) -> u64 {
        self.state.step_count
    }

    fn stream(&self) -> StreamId {
        self.state.stream
    }

    fn step(&mut self, a: ActionId) -> Result<StepOutcome, EnvError> {
        let s = self.state.current_state;
        let outcome = if a == self.instance.explore_action {
            self.explore(s)?
        } else if self.state.known_actions[&s].contains(&a) {
            self.play(s, a)
        } else {
            return Err(EnvError::UnknownAction { state: s, action: a });
        };
        self.state.step_count += 1;
        self.state.stream_position = self.rng.get_word_pos();
        Ok(outcome)
    }
}

/// Wrapper that checks, on every step, that the agent only plays actions
/// it could have observed as known, and counts accesses.
#[derive(Debug)]
pub struct AuditedEnv<E> {
    inner: E,
    pub steps: u64,
    pub violations: Vec<String>,
}

impl<E: Environment> AuditedEnv<E> {
    pub fn new(inner: E) -> Self {
        Self {
            inner,
            steps: 0,
            violations: Vec::new(),
        }
    }

    pub fn into_inner(self) -> E {
        self.inner
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }
}

impl<E: Environment> Environment for AuditedEnv<E> {
    fn current_state(&self) -> StateId {
        self.inner.current_state()
    }

    fn explore_action(&self) -> ActionId {
        self.inner.explore_action()
    }

    fn known_states(&self) -> &BTreeSet<StateId> {
        self.inner.known_states()
    }

    fn known_actions(&self, s: StateId) -> Option<&BTreeSet<ActionId>> {
        self.inner.known_actions(s)
    }

    fn schedule(&self) -> &DiscoverySchedule {
        self.inner.schedule()
    }

    fn step_count(&self) -> u64 {
        self.inner.step_count()
    }

    fn stream(&self) -> StreamId {
        self.inner.stream()
    }

    fn step(&mut self, a: ActionId) -> Result<StepOutcome, EnvError> {
        let s = self.inner.current_state();
        let known = a == self.inner.explore_action() || self.inner.known_actions(s).is_some_and(|k| k.contains(&a));
        if !known {
            self.violations
                .push(format!("step {}: {a} played at {s} while unknown", self.steps));
        }
        let before = self.inner.known_states().len();
        let out = self.inner.step(a)?;
        if self.inner.known_states().len() < before {
            self.violations
                .push(format!("step {}: known states shrank", self.steps));
        }
        self.steps += 1;
        Ok(out)
    }
}
