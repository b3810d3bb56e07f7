//! Finite MDPs: representation, validation, finite-horizon and long-run
//! solvers, and the `Opt(M, ε, T)` oracle.
//!
//! Everything here is generic over the scalar type. Backward induction only
//! needs [`Scalar`](crate::scalar::Scalar) and so runs on exact rationals;
//! the long-run solvers need [`Real`](crate::scalar::Real).

mod finite;
mod longrun;
mod model;
mod policy;

use thiserror::Error;

pub use finite::{optimal_t_step_policy, t_step_values};
pub use longrun::{
    best_stationary_gain, for_each_stationary_policy, long_run_values, mixing_time, opt_value, optimal_mixing_time,
    LongRunOptions, MixingTime, OptBest, OptOptions, OptReport,
};
pub use model::{validate_mdp, ActionId, ActionRow, GroundMdp, Outcome, StateId, Violation};
pub use policy::{Horizon, Policy};

use crate::scalar::Scalar;

/// Per-start values of a policy together with their minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueReport<T> {
    pub per_start_value: Vec<T>,
    pub min_value: T,
    pub horizon_used: usize,
}

impl<T: Scalar> ValueReport<T> {
    pub(crate) fn from_values(per_start_value: Vec<T>, horizon_used: usize) -> Self {
        let min_value = per_start_value
            .iter()
            .copied()
            .fold(None, |acc: Option<T>, v| match acc {
                Some(m) if m <= v => Some(m),
                _ => Some(v),
            })
            .unwrap_or_else(T::zero);
        Self {
            per_start_value,
            min_value,
            horizon_used,
        }
    }

    pub fn value_at(&self, s: StateId) -> T {
        self.per_start_value[s.0]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("mdp is invalid: {} violation(s), first: {}", .0.len(), .0[0])]
    InvalidMdp(Vec<Violation>),
    #[error("policy plays {action} at {state}, which is not offered there")]
    ActionNotAvailable { state: StateId, action: ActionId },
    #[error("policy covers {found} states, mdp has {expected}")]
    PolicyShape { expected: usize, found: usize },
    #[error("policy horizon {policy} is shorter than the requested {requested} steps")]
    PolicyTooShort { policy: usize, requested: usize },
    #[error("long-run evaluation needs a stationary policy")]
    NotStationary,
    #[error("long-run average did not converge by horizon {horizon}")]
    NotConverged {
        horizon: usize,
        previous: Vec<f64>,
        last: Vec<f64>,
    },
    #[error("{policies} stationary policies exceed the enumeration bound {bound}")]
    EnumerationBound { policies: u128, bound: u128 },
}
