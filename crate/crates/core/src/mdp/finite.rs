//! Exact finite-horizon evaluation and control by backward induction.

use super::model::{validate_mdp, ActionId, ActionRow, GroundMdp, StateId};
use super::policy::{Horizon, Policy};
use super::{SolveError, ValueReport};
use crate::scalar::Scalar;

/// `sum_s' P(s,s',a) (R(s,s',a) + next[s'])`
#[inline]
pub(crate) fn backup<T: Scalar>(row: &ActionRow<T>, next: &[T]) -> T {
    row.outcomes
        .iter()
        .fold(T::zero(), |acc, o| acc + o.prob * (o.reward + next[o.next.0]))
}

fn ensure_valid<T: Scalar>(m: &GroundMdp<T>) -> Result<(), SolveError> {
    let violations = validate_mdp(m);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(SolveError::InvalidMdp(violations))
    }
}

/// Average reward per step of running `pi` for `horizon` steps from each
/// start state: `U_M(s, pi, T)`.
pub fn t_step_values<T: Scalar>(m: &GroundMdp<T>, pi: &Policy, horizon: usize) -> Result<ValueReport<T>, SolveError> {
    if horizon == 0 {
        return Err(SolveError::ZeroHorizon);
    }
    if let Horizon::Finite(h) = pi.horizon() {
        if h < horizon {
            return Err(SolveError::PolicyTooShort {
                policy: h,
                requested: horizon,
            });
        }
    }
    pi.check_against(m)?;

    let n = m.n_states();
    let mut next = vec![T::zero(); n];
    let mut cur = vec![T::zero(); n];
    for t in (0..horizon).rev() {
        for s in 0..n {
            let a = pi.action(t, StateId(s));
            // check_against guarantees presence.
            let row = m.row(StateId(s), a).expect("policy action present");
            cur[s] = backup(row, &next);
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let denom = T::from_count(horizon);
    Ok(ValueReport::from_values(
        next.into_iter().map(|v| v / denom).collect(),
        horizon,
    ))
}

/// Time-indexed policy maximizing the expected `horizon`-step total reward
/// from every start state, with the per-start averages it attains.
///
/// Ties go to the lowest action id.
pub fn optimal_t_step_policy<T: Scalar>(
    m: &GroundMdp<T>,
    horizon: usize,
) -> Result<(Policy, ValueReport<T>), SolveError> {
    if horizon == 0 {
        return Err(SolveError::ZeroHorizon);
    }
    ensure_valid(m)?;

    let n = m.n_states();
    let mut layers: Vec<Vec<ActionId>> = vec![Vec::new(); horizon];
    let mut next = vec![T::zero(); n];
    let mut cur = vec![T::zero(); n];
    for t in (0..horizon).rev() {
        let mut layer = Vec::with_capacity(n);
        for s in 0..n {
            let mut best: Option<(ActionId, T)> = None;
            for row in m.rows_at(StateId(s)) {
                let q = backup(row, &next);
                match best {
                    Some((_, b)) if !(q > b) => {}
                    _ => best = Some((row.action, q)),
                }
            }
            let (a, q) = best.expect("validated: nonempty action set");
            layer.push(a);
            cur[s] = q;
        }
        layers[t] = layer;
        std::mem::swap(&mut cur, &mut next);
    }
    let denom = T::from_count(horizon);
    let report = ValueReport::from_values(next.into_iter().map(|v| v / denom).collect(), horizon);
    Ok((Policy::time_indexed(layers), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    /// s0 -> s1 at reward 0, s1 -> s1 at reward 1.
    fn chain() -> GroundMdp<Rational64> {
        GroundMdp::new(2)
            .with_outcome(0, 1, 1, r(1, 1), r(0, 1))
            .with_outcome(1, 1, 1, r(1, 1), r(1, 1))
    }

    #[test]
    fn constant_reward_loop() {
        let m = GroundMdp::new(1).with_outcome(0, 1, 0, 1.0, 5.0);
        let pi = Policy::stationary(vec![ActionId(1)]);
        for t in [1, 2, 17] {
            let rep = t_step_values(&m, &pi, t).unwrap();
            assert_eq!(rep.per_start_value, vec![5.0]);
            assert_eq!(rep.min_value, 5.0);
        }
    }

    #[test]
    fn chain_three_steps_is_exact() {
        let pi = Policy::stationary(vec![ActionId(1), ActionId(1)]);
        let rep = t_step_values(&chain(), &pi, 3).unwrap();
        assert_eq!(rep.per_start_value, vec![r(2, 3), r(1, 1)]);
        assert_eq!(rep.min_value, r(2, 3));
        assert_eq!(rep.horizon_used, 3);
    }

    #[test]
    fn chain_optimum_at_ten() {
        let (_, rep) = optimal_t_step_policy(&chain(), 10).unwrap();
        assert_eq!(rep.per_start_value[0], r(9, 10));
    }

    #[test]
    fn pointwise_argmax_and_tie_break() {
        let m = GroundMdp::new(1)
            .with_outcome(0, 1, 0, 1.0, 1.0)
            .with_outcome(0, 2, 0, 1.0, 2.0);
        let (pi, rep) = optimal_t_step_policy(&m, 4).unwrap();
        assert!(pi.layers().iter().all(|l| l[0] == ActionId(2)));
        assert_eq!(rep.per_start_value, vec![2.0]);

        let tie = GroundMdp::new(1)
            .with_outcome(0, 3, 0, 1.0, 2.0)
            .with_outcome(0, 5, 0, 1.0, 2.0);
        let (pi, _) = optimal_t_step_policy(&tie, 3).unwrap();
        assert!(pi.layers().iter().all(|l| l[0] == ActionId(3)));
    }

    #[test]
    fn optimistic_dummy_model_pays_rmax_everywhere() {
        // Every action of every state routes to the dummy (index 2) at R_max.
        let rmax = 3.5;
        let mut m = GroundMdp::new(3);
        for s in 0..3 {
            for a in 1..=2 {
                m.add_outcome(StateId(s), ActionId(a), StateId(2), 1.0, rmax);
            }
        }
        let (_, rep) = optimal_t_step_policy(&m, 6).unwrap();
        assert_eq!(rep.per_start_value, vec![rmax; 3]);
    }

    #[test]
    fn unknown_action_in_policy_is_rejected() {
        let m = GroundMdp::new(1).with_outcome(0, 1, 0, 1.0, 1.0);
        let pi = Policy::stationary(vec![ActionId(9)]);
        assert!(matches!(
            t_step_values(&m, &pi, 2),
            Err(SolveError::ActionNotAvailable { .. })
        ));
        assert!(matches!(
            t_step_values(&m, &Policy::stationary(vec![ActionId(1)]), 0),
            Err(SolveError::ZeroHorizon)
        ));
    }

    #[test]
    fn finite_policy_shorter_than_request() {
        let m = GroundMdp::new(1).with_outcome(0, 1, 0, 1.0, 1.0);
        let pi = Policy::time_indexed(vec![vec![ActionId(1)]; 2]);
        assert!(t_step_values(&m, &pi, 2).is_ok());
        assert!(matches!(
            t_step_values(&m, &pi, 3),
            Err(SolveError::PolicyTooShort { .. })
        ));
    }

    #[test]
    fn single_precision_agrees() {
        let m = GroundMdp::new(2)
            .with_outcome(0, 1, 1, 1.0f32, 0.0)
            .with_outcome(1, 1, 1, 1.0f32, 1.0);
        let (_, rep) = optimal_t_step_policy(&m, 10).unwrap();
        assert!((rep.per_start_value[0] - 0.9).abs() < 1e-6);
    }
}
