//! URMAX: an R-MAX learner for environments with hidden actions, with
//! fixed parameter guesses and with the escalation loop.

mod estimate;
mod lemma51;
mod outer;
mod thresholds;
mod urmax;

pub use estimate::{InducedModel, ModelEstimate, PairStats};
pub use lemma51::{lemma51_check, lemma51_check_hidden, Lemma51Error, Lemma51Report};
pub use outer::{OuterError, OuterOptions, PhaseRecord, UrmaxOuter, PHASE_CSV_HEADER};
pub use thresholds::{k1, k1_at, k2_k3, rmax_k1, ConfigError, LearnerConfig, PhaseThresholds, Thresholds};
pub use urmax::{urmax_inner, Inconsistency, InnerObserver, InnerOutcome, LearnedPolicy, LearnerError, RunReport};
