use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Index of a state in a [`GroundMdp`]. States are `0..n_states`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub usize);

/// Action identifier. Actions are global labels; each state offers a subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(pub u32);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

/// One `(s', P(s,s',a), R(s,s',a))` entry of a transition row.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T> {
    pub next: StateId,
    pub prob: T,
    pub reward: T,
}

/// Sparse transition row for a single `(s, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionRow<T> {
    pub action: ActionId,
    pub outcomes: Vec<Outcome<T>>,
}

impl<T: Scalar> ActionRow<T> {
    pub fn prob_sum(&self) -> T {
        self.outcomes.iter().fold(T::zero(), |acc, o| acc + o.prob)
    }

    /// Expected one-step reward `sum_s' P(s,s',a) R(s,s',a)`.
    pub fn expected_reward(&self) -> T {
        self.outcomes.iter().fold(T::zero(), |acc, o| acc + o.prob * o.reward)
    }
}

/// A finite MDP with state-dependent action sets.
///
/// Rows at each state are kept sorted by action id, which is also the
/// tie-break order used by the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundMdp<T> {
    rows: Vec<Vec<ActionRow<T>>>,
}

impl<T: Scalar> GroundMdp<T> {
    /// An MDP with `n_states` states and no actions yet.
    pub fn new(n_states: usize) -> Self {
        Self {
            rows: (0..n_states).map(|_| Vec::new()).collect(),
        }
    }

    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.rows.len()).map(StateId)
    }

    /// Append an outcome to row `(s, a)`, creating the row if needed.
    pub fn add_outcome(&mut self, s: StateId, a: ActionId, next: StateId, prob: T, reward: T) -> &mut Self {
        let rows = &mut self.rows[s.0];
        let idx = match rows.binary_search_by_key(&a, |r| r.action) {
            Ok(i) => i,
            Err(i) => {
                rows.insert(
                    i,
                    ActionRow {
                        action: a,
                        outcomes: Vec::new(),
                    },
                );
                i
            }
        };
        rows[idx].outcomes.push(Outcome { next, prob, reward });
        self
    }

    /// Chaining form of [`add_outcome`](Self::add_outcome).
    pub fn with_outcome(mut self, s: usize, a: u32, next: usize, prob: T, reward: T) -> Self {
        self.add_outcome(StateId(s), ActionId(a), StateId(next), prob, reward);
        self
    }

    /// Replace (or insert) the whole row for `(s, a)`.
    pub fn set_row(&mut self, s: StateId, row: ActionRow<T>) {
        let rows = &mut self.rows[s.0];
        match rows.binary_search_by_key(&row.action, |r| r.action) {
            Ok(i) => rows[i] = row,
            Err(i) => rows.insert(i, row),
        }
    }

    pub fn rows_at(&self, s: StateId) -> &[ActionRow<T>] {
        &self.rows[s.0]
    }

    pub fn actions_at(&self, s: StateId) -> impl Iterator<Item = ActionId> + '_ {
        self.rows[s.0].iter().map(|r| r.action)
    }

    pub fn has_action(&self, s: StateId, a: ActionId) -> bool {
        self.row(s, a).is_some()
    }

    pub fn row(&self, s: StateId, a: ActionId) -> Option<&ActionRow<T>> {
        let rows = self.rows.get(s.0)?;
        rows.binary_search_by_key(&a, |r| r.action).ok().map(|i| &rows[i])
    }

    /// `P(s, s', a)`; zero when the pair or outcome is absent.
    pub fn transition(&self, s: StateId, next: StateId, a: ActionId) -> T {
        self.row(s, a).map_or(T::zero(), |r| {
            r.outcomes
                .iter()
                .filter(|o| o.next == next)
                .fold(T::zero(), |acc, o| acc + o.prob)
        })
    }

    /// `R(s, s', a)` for the first matching outcome, if any.
    pub fn reward(&self, s: StateId, next: StateId, a: ActionId) -> Option<T> {
        self.row(s, a)?
            .outcomes
            .iter()
            .find(|o| o.next == next)
            .map(|o| o.reward)
    }

    /// Product of action-set sizes, saturating at `u128::MAX`.
    pub fn stationary_policy_count(&self) -> u128 {
        self.rows
            .iter()
            .fold(1u128, |acc, r| acc.saturating_mul(r.len() as u128))
    }

    /// Largest reward on any edge.
    pub fn max_reward(&self) -> Option<T> {
        self.rows
            .iter()
            .flatten()
            .flat_map(|r| r.outcomes.iter().map(|o| o.reward))
            .fold(None, |acc: Option<T>, r| match acc {
                Some(m) if m >= r => Some(m),
                _ => Some(r),
            })
    }

    /// Multiply every reward by `factor`.
    pub fn scale_rewards(&mut self, factor: T) {
        for o in self.rows.iter_mut().flatten().flat_map(|r| r.outcomes.iter_mut()) {
            o.reward *= factor;
        }
    }

    /// Divide every row by its probability sum. Rows summing to zero are left
    /// alone. Never called implicitly.
    pub fn renormalize(&mut self) {
        for row in self.rows.iter_mut().flatten() {
            let sum = row.prob_sum();
            if sum > T::zero() {
                for o in &mut row.outcomes {
                    o.prob /= sum;
                }
            }
        }
    }

    /// Convert every number with `f`.
    pub fn map_scalar<U: Scalar>(&self, mut f: impl FnMut(T) -> U) -> GroundMdp<U> {
        GroundMdp {
            rows: self
                .rows
                .iter()
                .map(|rows| {
                    rows.iter()
                        .map(|r| ActionRow {
                            action: r.action,
                            outcomes: r
                                .outcomes
                                .iter()
                                .map(|o| Outcome {
                                    next: o.next,
                                    prob: f(o.prob),
                                    reward: f(o.reward),
                                })
                                .collect(),
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// A single failed check reported by [`validate_mdp`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoActions {
        state: StateId,
    },
    NotStochastic {
        state: StateId,
        action: ActionId,
        sum: f64,
    },
    ProbabilityOutOfRange {
        state: StateId,
        action: ActionId,
        next: StateId,
        prob: f64,
    },
    NegativeReward {
        state: StateId,
        action: ActionId,
        next: StateId,
        reward: f64,
    },
    NextStateOutOfRange {
        state: StateId,
        action: ActionId,
        next: StateId,
    },
    DuplicateOutcome {
        state: StateId,
        action: ActionId,
        next: StateId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoActions { state } => write!(f, "{state}: empty action set"),
            Violation::NotStochastic { state, action, sum } => {
                write!(
                    f,
                    "({state},{action}): transition probabilities sum to {sum}, expected 1"
                )
            }
            Violation::ProbabilityOutOfRange {
                state,
                action,
                next,
                prob,
            } => {
                write!(f, "({state},{action})->{next}: probability {prob} outside [0,1]")
            }
            Violation::NegativeReward {
                state,
                action,
                next,
                reward,
            } => {
                write!(f, "({state},{action})->{next}: negative reward {reward}")
            }
            Violation::NextStateOutOfRange { state, action, next } => {
                write!(f, "({state},{action}): successor {next} does not exist")
            }
            Violation::DuplicateOutcome { state, action, next } => {
                write!(f, "({state},{action}): successor {next} listed twice")
            }
        }
    }
}

/// Check every structural invariant of `m`. An empty vector means valid.
pub fn validate_mdp<T: Scalar>(m: &GroundMdp<T>) -> Vec<Violation> {
    let mut out = Vec::new();
    let tol = T::stochastic_tolerance();
    for s in m.states() {
        let rows = m.rows_at(s);
        if rows.is_empty() {
            out.push(Violation::NoActions { state: s });
        }
        for row in rows {
            let a = row.action;
            let mut seen = Vec::with_capacity(row.outcomes.len());
            for o in &row.outcomes {
                if o.next.0 >= m.n_states() {
                    out.push(Violation::NextStateOutOfRange {
                        state: s,
                        action: a,
                        next: o.next,
                    });
                }
                if seen.contains(&o.next) {
                    out.push(Violation::DuplicateOutcome {
                        state: s,
                        action: a,
                        next: o.next,
                    });
                }
                seen.push(o.next);
                // Written so that NaN fails.
                if !(o.prob >= T::zero() - tol && o.prob <= T::one() + tol) {
                    out.push(Violation::ProbabilityOutOfRange {
                        state: s,
                        action: a,
                        next: o.next,
                        prob: o.prob.to_f64_lossy(),
                    });
                }
                if !(o.reward >= T::zero()) {
                    out.push(Violation::NegativeReward {
                        state: s,
                        action: a,
                        next: o.next,
                        reward: o.reward.to_f64_lossy(),
                    });
                }
            }
            let sum = row.prob_sum();
            if !((sum - T::one()).abs() <= tol) {
                out.push(Violation::NotStochastic {
                    state: s,
                    action: a,
                    sum: sum.to_f64_lossy(),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn identity_mdp_is_valid() {
        let m = GroundMdp::new(1).with_outcome(0, 1, 0, 1.0, 0.0);
        assert!(validate_mdp(&m).is_empty());
    }

    #[test]
    fn short_row_names_the_pair() {
        let m = GroundMdp::new(2)
            .with_outcome(0, 1, 0, 0.5, 0.0)
            .with_outcome(0, 1, 1, 0.4, 0.0)
            .with_outcome(1, 1, 1, 1.0, 0.0);
        let v = validate_mdp(&m);
        assert_eq!(v.len(), 1);
        match &v[0] {
            Violation::NotStochastic { state, action, sum } => {
                assert_eq!((*state, *action), (StateId(0), ActionId(1)));
                assert!((sum - 0.9).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_reward_is_flagged() {
        let m = GroundMdp::new(1).with_outcome(0, 1, 0, 1.0, -1.0);
        let v = validate_mdp(&m);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::NegativeReward { .. }));
    }

    #[test]
    fn empty_action_set_and_bad_successor() {
        let m = GroundMdp::new(2).with_outcome(0, 3, 5, 1.0, 0.0);
        let v = validate_mdp(&m);
        assert!(v.contains(&Violation::NoActions { state: StateId(1) }));
        assert!(v.iter().any(|x| matches!(x, Violation::NextStateOutOfRange { .. })));
    }

    #[test]
    fn within_tolerance_is_accepted_but_not_repaired() {
        let m = GroundMdp::new(1).with_outcome(0, 1, 0, 1.0 + 5e-10, 0.0);
        assert!(validate_mdp(&m).is_empty());
        assert_eq!(m.transition(StateId(0), StateId(0), ActionId(1)), 1.0 + 5e-10);
    }

    #[test]
    fn renormalize_is_explicit() {
        let mut m = GroundMdp::new(2)
            .with_outcome(0, 1, 0, 0.45, 0.0)
            .with_outcome(0, 1, 1, 0.45, 0.0)
            .with_outcome(1, 1, 1, 1.0, 0.0);
        assert_eq!(validate_mdp(&m).len(), 1);
        m.renormalize();
        assert!(validate_mdp(&m).is_empty());
    }

    #[test]
    fn rational_rows_are_checked_exactly() {
        let third = Rational64::new(1, 3);
        let m = GroundMdp::new(3)
            .with_outcome(0, 1, 0, third, Rational64::from_integer(0))
            .with_outcome(0, 1, 1, third, Rational64::from_integer(0))
            .with_outcome(0, 1, 2, third, Rational64::from_integer(0))
            .with_outcome(1, 1, 1, Rational64::from_integer(1), Rational64::from_integer(0))
            .with_outcome(2, 1, 2, Rational64::from_integer(1), Rational64::from_integer(0));
        assert!(validate_mdp(&m).is_empty());
    }

    #[test]
    fn rows_stay_sorted_by_action() {
        let m = GroundMdp::new(1)
            .with_outcome(0, 7, 0, 1.0, 0.0)
            .with_outcome(0, 2, 0, 1.0, 0.0)
            .with_outcome(0, 4, 0, 1.0, 0.0);
        let acts: Vec<_> = m.actions_at(StateId(0)).map(|a| a.0).collect();
        assert_eq!(acts, vec![2, 4, 7]);
        assert_eq!(m.stationary_policy_count(), 3);
    }
}
