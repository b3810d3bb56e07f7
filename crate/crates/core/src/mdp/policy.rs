use super::model::{ActionId, GroundMdp, StateId};
use super::SolveError;
use crate::scalar::Scalar;

/// How long a policy's time index runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Finite(usize),
    Stationary,
}

/// A deterministic Markov policy, either stationary or indexed by the time
/// step `t < horizon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    horizon: Horizon,
    // choice[t][s]; a single layer when stationary.
    choice: Vec<Vec<ActionId>>,
}

impl Policy {
    pub fn stationary(choice: Vec<ActionId>) -> Self {
        Self {
            horizon: Horizon::Stationary,
            choice: vec![choice],
        }
    }

    /// `layers[t][s]` is the action at time `t` in state `s`.
    pub fn time_indexed(layers: Vec<Vec<ActionId>>) -> Self {
        assert!(!layers.is_empty(), "time-indexed policy needs at least one layer");
        Self {
            horizon: Horizon::Finite(layers.len()),
            choice: layers,
        }
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn is_stationary(&self) -> bool {
        self.horizon == Horizon::Stationary
    }

    pub fn n_states(&self) -> usize {
        self.choice[0].len()
    }

    /// Action at time `t` in state `s`. Panics if `t` is past a finite horizon.
    pub fn action(&self, t: usize, s: StateId) -> ActionId {
        match self.horizon {
            Horizon::Stationary => self.choice[0][s.0],
            Horizon::Finite(h) => {
                assert!(t < h, "time index {t} beyond policy horizon {h}");
                self.choice[t][s.0]
            }
        }
    }

    /// Action when the policy is replayed in blocks of its own horizon.
    pub fn action_cyclic(&self, t: usize, s: StateId) -> ActionId {
        match self.horizon {
            Horizon::Stationary => self.choice[0][s.0],
            Horizon::Finite(h) => self.choice[t % h][s.0],
        }
    }

    /// The first layer as a stationary policy.
    pub fn first_layer(&self) -> Policy {
        Policy::stationary(self.choice[0].clone())
    }

    pub fn layers(&self) -> &[Vec<ActionId>] {
        &self.choice
    }

    /// Check that every choice is offered by `m` at its state.
    pub fn check_against<T: Scalar>(&self, m: &GroundMdp<T>) -> Result<(), SolveError> {
        for layer in &self.choice {
            if layer.len() != m.n_states() {
                return Err(SolveError::PolicyShape {
                    expected: m.n_states(),
                    found: layer.len(),
                });
            }
            for (s, &a) in layer.iter().enumerate() {
                if !m.has_action(StateId(s), a) {
                    return Err(SolveError::ActionNotAvailable {
                        state: StateId(s),
                        action: a,
                    });
                }
            }
        }
        Ok(())
    }
}
