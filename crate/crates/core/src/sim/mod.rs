//! The hidden-action environment and run recording.

pub mod builders;
mod env;
mod trace;

pub use env::{AuditedEnv, AwarenessScope, Env, EnvError, EnvOptions, EnvState, Environment, StepOutcome, StreamId};
pub use trace::{
    nondiscovery_prob, nondiscovery_profile, parse_trace_actions, replay, replay_actions, run_agent, Agent,
    RecordingEnv, RunAborted, Trace, TraceParseError, TraceStep, TRACE_CSV_HEADER,
};
