use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::mdp::{ActionId, StateId};
use crate::model::{CompensatedSum, DiscoverySchedule, MdpuInstance, ScheduleError};

use super::env::{Env, EnvError, EnvOptions, Environment, StepOutcome, StreamId};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub step: u64,
    pub state: StateId,
    pub action: ActionId,
    pub outcome: StepOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub stream: StreamId,
    pub start: StateId,
    pub steps: Vec<TraceStep>,
}

pub const TRACE_CSV_HEADER: &str = "step,state,action,reward,next_state,discovered_action,discovered_state";

impl Trace {
    pub fn new(stream: StreamId, start: StateId) -> Self {
        Self {
            stream,
            start,
            steps: Vec::new(),
        }
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionId> + '_ {
        self.steps.iter().map(|s| s.action)
    }

    pub fn total_reward(&self) -> f64 {
        let mut sum = CompensatedSum::default();
        self.steps.iter().for_each(|s| sum.add(s.outcome.reward));
        sum.value()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.steps.len() + 1));
        out.push_str(TRACE_CSV_HEADER);
        out.push('\n');
        for s in &self.steps {
            let o = &s.outcome;
            let da = o.discovered_action.map(|a| a.to_string()).unwrap_or_default();
            let ds = o.discovered_state.map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.step, s.state, s.action, o.reward, o.next_state, da, ds
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceParseError {
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
    #[error("missing or wrong header")]
    Header,
}

fn parse_prefixed(field: &str, prefix: char) -> Option<u64> {
    field.strip_prefix(prefix)?.parse().ok()
}

/// Read back the action column of a trace CSV.
pub fn parse_trace_actions(csv: &str) -> Result<Vec<ActionId>, TraceParseError> {
    let mut lines = csv.lines();
    if lines.next() != Some(TRACE_CSV_HEADER) {
        return Err(TraceParseError::Header);
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let field = l.split(',').nth(2).ok_or_else(|| TraceParseError::Line {
                line: i + 2,
                reason: "too few columns".into(),
            })?;
            parse_prefixed(field, 'a')
                .and_then(|a| u32::try_from(a).ok())
                .map(ActionId)
                .ok_or_else(|| TraceParseError::Line {
                    line: i + 2,
                    reason: format!("bad action {field:?}"),
                })
        })
        .collect()
}

/// A policy over observations. `act` sees only what the environment trait
/// exposes.
pub trait Agent {
    fn act(&mut self, env: &dyn Environment) -> ActionId;
    fn observe(&mut self, _step: &TraceStep) {}
}

impl<F: FnMut(&dyn Environment) -> ActionId> Agent for F {
    fn act(&mut self, env: &dyn Environment) -> ActionId {
        self(env)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("run aborted after {} steps: {error}", trace.steps.len())]
pub struct RunAborted {
    pub error: EnvError,
    /// Every step completed before the failure.
    pub trace: Trace,
}

pub fn run_agent<E: Environment, A: Agent + ?Sized>(
    env: &mut E,
    agent: &mut A,
    max_steps: u64,
) -> Result<Trace, RunAborted> {
    let mut trace = Trace::new(env.stream(), env.current_state());
    for _ in 0..max_steps {
        let state = env.current_state();
        let action = agent.act(env);
        match env.step(action) {
            Ok(outcome) => {
                let step = TraceStep {
                    step: trace.steps.len() as u64,
                    state,
                    action,
                    outcome,
                };
                agent.observe(&step);
                trace.steps.push(step);
            }
            Err(error) => return Err(RunAborted { error, trace }),
        }
    }
    Ok(trace)
}

/// Re-run the actions of `trace` from a fresh reset on the same stream.
pub fn replay(u: Arc<MdpuInstance>, trace: &Trace, options: EnvOptions) -> Result<Trace, RunAborted> {
    let recorded: Vec<ActionId> = trace.actions().collect();
    replay_actions(u, trace.start, trace.stream, &recorded, options)
}

pub fn replay_actions(
    u: Arc<MdpuInstance>,
    start: StateId,
    stream: StreamId,
    actions: &[ActionId],
    options: EnvOptions,
) -> Result<Trace, RunAborted> {
    let mut env = Env::reset_replica(u, start, stream.seed, stream.replica, options).map_err(|error| RunAborted {
        error,
        trace: Trace::new(stream, start),
    })?;
    let mut it = actions.iter().copied();
    let mut agent = |_: &dyn Environment| it.next().expect("bounded by max_steps");
    run_agent(&mut env, &mut agent, actions.len() as u64)
}

/// Environment wrapper that appends every step to a [`Trace`].
#[derive(Debug)]
pub struct RecordingEnv<E> {
    inner: E,
    trace: Trace,
}

impl<E: Environment> RecordingEnv<E> {
    pub fn new(inner: E) -> Self {
        let trace = Trace::new(inner.stream(), inner.current_state());
        Self { inner, trace }
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_parts(self) -> (E, Trace) {
        (self.inner, self.trace)
    }
}

impl<E: Environment> Environment for RecordingEnv<E> {
    fn current_state(&self) -> StateId {
        self.inner.current_state()
    }

    fn explore_action(&self) -> ActionId {
        self.inner.explore_action()
    }

    fn known_states(&self) -> &std::collections::BTreeSet<StateId> {
        self.inner.known_states()
    }

    fn known_actions(&self, s: StateId) -> Option<&std::collections::BTreeSet<ActionId>> {
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
        let state = self.inner.current_state();
        let outcome = self.inner.step(a)?;
        self.trace.steps.push(TraceStep {
            step: self.trace.steps.len() as u64,
            state,
            action: a,
            outcome: outcome.clone(),
        });
        Ok(outcome)
    }
}

/// `prod_{t'=1}^t (1 - D(j,t'))`: the chance that `t` explores from a zeroed
/// counter all fail.
pub fn nondiscovery_prob(sched: &DiscoverySchedule, j: u64, t: u64) -> Result<f64, ScheduleError> {
    Ok(nondiscovery_profile(sched, j, t)?.last().copied().unwrap_or(1.0))
}

/// `nondiscovery_prob(sched, j, t)` for every `t` in `1..=t_max`.
pub fn nondiscovery_profile(sched: &DiscoverySchedule, j: u64, t_max: u64) -> Result<Vec<f64>, ScheduleError> {
    if t_max == 0 {
        return Err(ScheduleError::ZeroTime);
    }
    // Sum the logs so a million factors do not accumulate rounding error.
    let mut log = CompensatedSum::default();
    let mut out = Vec::with_capacity(t_max as usize);
    for t in 1..=t_max {
        log.add((-sched.d_eval(j, t)?).ln_1p());
        out.push(log.value().exp());
    }
    Ok(out)
}
