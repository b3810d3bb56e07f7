//! A laboratory for Markov decision processes with unawareness of actions.
//!
//! * [`mdp`]: exact solvers for small finite MDPs.
//! * [`model`]: the MDPU instance, discovery schedules, `K0` and the
//!   learnability classifier.
//! * [`sim`]: the agent-facing environment that hides undiscovered actions.
//! * [`learn`]: the URMAX learner and its escalation loop.
//! * [`harness`]: configuration, seeded experiments and CSV reports.

pub mod harness;
pub mod learn;
pub mod mdp;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod sim;

pub use num_rational::Rational64;

pub use mdp::{ActionId, Policy, StateId};
pub use scalar::{Real, Scalar};

/// Double-precision MDP, the type used by the simulator and learner.
pub type Mdp = mdp::GroundMdp<f64>;
/// Single-precision MDP.
pub type Mdp32 = mdp::GroundMdp<f32>;
/// Exact rational MDP for backward induction.
pub type ExactMdp = mdp::GroundMdp<Rational64>;
pub type ValueReport = mdp::ValueReport<f64>;
pub type ExactValueReport = mdp::ValueReport<Rational64>;
