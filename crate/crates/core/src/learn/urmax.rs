//! URMAX with fixed parameter guesses.

use serde::Serialize;
use thiserror::Error;

use crate::mdp::{optimal_t_step_policy, ActionId, ActionRow, Policy, SolveError, StateId, ValueReport};
use crate::sim::{EnvError, Environment, StepOutcome};

use super::estimate::{InducedModel, ModelEstimate};
use super::thresholds::{ConfigError, LearnerConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnerError {
    #[error("environment refused a learner action: {0}")]
    Env(#[from] EnvError),
    #[error("planning failed: {0}")]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Inconsistency {
    RewardExceeded {
        state: StateId,
        action: ActionId,
        reward: f64,
        r_max: f64,
    },
    TooManyActions {
        state: StateId,
        action: Option<ActionId>,
        count: usize,
        k: u64,
    },
    TooManyStates {
        state: StateId,
        count: usize,
        n: u64,
    },
}

impl Inconsistency {
    pub fn label(&self) -> &'static str {
        match self {
            Inconsistency::RewardExceeded { .. } => "reward_exceeded",
            Inconsistency::TooManyActions { .. } => "too_many_actions",
            Inconsistency::TooManyStates { .. } => "too_many_states",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerOutcome {
    PolicyComputed,
    Inconsistency(Inconsistency),
    /// The step budget ran out before every pair became known.
    StepBudgetExhausted,
}

impl InnerOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            InnerOutcome::PolicyComputed => "policy_computed",
            InnerOutcome::Inconsistency(i) => i.label(),
            InnerOutcome::StepBudgetExhausted => "step_budget_exhausted",
        }
    }
}

/// A time-indexed policy over the learner's model, addressed by
/// environment state.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedPolicy {
    pub policy: Policy,
    pub states: Vec<StateId>,
    pub explore: ActionId,
}

impl LearnedPolicy {
    fn from_model(model: &InducedModel, policy: Policy, explore: ActionId) -> Self {
        Self {
            policy,
            states: model.states.clone(),
            explore,
        }
    }

    pub fn horizon(&self) -> usize {
        self.policy.layers().len()
    }

    /// Action at offset `t` (taken modulo the horizon), `None` for states
    /// the model did not contain.
    pub fn action(&self, t: usize, s: StateId) -> Option<ActionId> {
        let i = self.states.binary_search(&s).ok()?;
        Some(self.policy.action_cyclic(t, StateId(i)))
    }

    /// Same, falling back to the lowest known action (or `a0`) at states new
    /// to the policy.
    pub fn action_or_fallback<E: Environment + ?Sized>(&self, t: usize, env: &E) -> ActionId {
        let s = env.current_state();
        self.action(t, s).unwrap_or_else(|| {
            env.known_actions(s)
                .and_then(|k| k.iter().next().copied())
                .unwrap_or(self.explore)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub outcome: InnerOutcome,
    /// Plan over the final model; absent only when an inconsistency was
    /// found before the first plan.
    pub policy: Option<LearnedPolicy>,
    pub steps: u64,
    pub explore_steps: u64,
    pub reward_sum: f64,
    pub promotions: u64,
    pub retirements: u64,
    pub plans: u64,
    pub states_known: usize,
    pub actions_known: usize,
}

/// Inspection hooks for tests and diagnostics.
pub trait InnerObserver {
    fn on_plan(&mut self, _model: &ModelEstimate, _induced: &InducedModel, _values: &ValueReport<f64>) {}
    fn on_promotion(&mut self, _s: StateId, _a: ActionId, _row: &ActionRow<f64>) {}
    fn on_step(&mut self, _s: StateId, _a: ActionId, _outcome: &StepOutcome, _model: &ModelEstimate) {}
}

impl InnerObserver for () {}

fn census(est: &ModelEstimate, cfg: &LearnerConfig, at: StateId, action: Option<ActionId>) -> Option<Inconsistency> {
    if est.state_count() as u64 > cfg.n {
        return Some(Inconsistency::TooManyStates {
            state: at,
            count: est.state_count(),
            n: cfg.n,
        });
    }
    if est.action_count() as u64 > cfg.k {
        return Some(Inconsistency::TooManyActions {
            state: at,
            action,
            count: est.action_count(),
            k: cfg.k,
        });
    }
    None
}

fn plan(est: &ModelEstimate, horizon: usize) -> Result<(InducedModel, Policy, ValueReport<f64>), SolveError> {
    let model = est.induced();
    let (policy, values) = optimal_t_step_policy(&model.mdp, horizon)?;
    Ok((model, policy, values))
}

/// Run URMAX with the guesses in `cfg` until every pair is known, an
/// inconsistency is found, or `step_budget` steps have been taken.
pub fn urmax_inner<E, O>(
    env: &mut E,
    cfg: &LearnerConfig,
    k0: u64,
    k1: u64,
    step_budget: u64,
    observer: &mut O,
) -> Result<RunReport, LearnerError>
where
    E: Environment + ?Sized,
    O: InnerObserver + ?Sized,
{
    let explore = env.explore_action();
    let mut est = ModelEstimate::new(explore, cfg.r_max, k1, k0);
    est.sync(env);
    let mut report = RunReport {
        outcome: InnerOutcome::PolicyComputed,
        policy: None,
        steps: 0,
        explore_steps: 0,
        reward_sum: 0.0,
        promotions: 0,
        retirements: 0,
        plans: 0,
        states_known: 0,
        actions_known: 0,
    };
    let finish = |mut report: RunReport, est: &ModelEstimate, outcome| {
        report.outcome = outcome;
        report.states_known = est.state_count();
        report.actions_known = est.action_count();
        report
    };

    if let Some(inc) = census(&est, cfg, env.current_state(), None) {
        return Ok(finish(report, &est, InnerOutcome::Inconsistency(inc)));
    }

    loop {
        let (model, policy, values) = plan(&est, cfg.t)?;
        report.plans += 1;
        observer.on_plan(&est, &model, &values);
        let learned = LearnedPolicy::from_model(&model, policy, explore);
        if est.is_complete() {
            report.policy = Some(learned);
            return Ok(finish(report, &est, InnerOutcome::PolicyComputed));
        }
        if report.steps >= step_budget {
            report.policy = Some(learned);
            return Ok(finish(report, &est, InnerOutcome::StepBudgetExhausted));
        }

        for t in 0..cfg.t {
            if report.steps >= step_budget {
                break;
            }
            let s = env.current_state();
            let a = learned.action(t, s).expect("model covers every known state");
            let outcome = env.step(a)?;
            report.steps += 1;
            report.reward_sum += outcome.reward;
            let mut changed = false;

            if a == explore {
                report.explore_steps += 1;
                if est.record_explore(s, outcome.discovered_action.is_some()) {
                    report.retirements += 1;
                    changed = true;
                }
            } else {
                if outcome.reward > cfg.r_max {
                    report.policy = Some(learned);
                    let inc = Inconsistency::RewardExceeded {
                        state: s,
                        action: a,
                        reward: outcome.reward,
                        r_max: cfg.r_max,
                    };
                    return Ok(finish(report, &est, InnerOutcome::Inconsistency(inc)));
                }
                if est.record(s, a, outcome.next_state, outcome.reward) {
                    report.promotions += 1;
                    changed = true;
                    let idx = est.induced();
                    let row = est.pair(s, a).expect("recorded").empirical_row(a, &idx.index);
                    observer.on_promotion(s, a, &row);
                }
            }
            if outcome.discovered_action.is_some() || outcome.discovered_state.is_some() {
                est.sync(env);
                changed = true;
            }
            observer.on_step(s, a, &outcome, &est);
            if let Some(inc) = census(&est, cfg, outcome.next_state, outcome.discovered_action) {
                report.policy = Some(learned);
                return Ok(finish(report, &est, InnerOutcome::Inconsistency(inc)));
            }
            if changed {
                break;
            }
        }
    }
}
