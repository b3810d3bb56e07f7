//! Long-run average reward, ε-return mixing times and the `Opt(M, ε, T)`
//! oracle over stationary deterministic policies.
//!
//! Long-run values come from Cesàro averages `V_t / t` at doubling horizons.
//! Each pair of consecutive averages is combined into the Richardson estimate
//! `2 V_t/t - V_{t/2}/(t/2)`, which cancels the `c/t` bias term of a
//! converging chain, and the estimates are iterated until two in a row agree.

use super::finite::backup;
use super::model::{validate_mdp, ActionId, GroundMdp, StateId};
use super::policy::Policy;
use super::{SolveError, ValueReport};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongRunOptions {
    /// Successive estimates must differ by less than this (sup norm).
    pub tolerance: f64,
    /// No convergence is declared before this horizon.
    pub min_horizon: usize,
    /// Largest horizon evaluated.
    pub max_horizon: usize,
}

impl Default for LongRunOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            min_horizon: 256,
            max_horizon: 1 << 20,
        }
    }
}

/// Result of [`mixing_time`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixingTime {
    Steps(usize),
    ExceedsCap,
}

impl MixingTime {
    pub fn steps(self) -> Option<usize> {
        match self {
            MixingTime::Steps(t) => Some(t),
            MixingTime::ExceedsCap => None,
        }
    }
}

fn require_stationary(pi: &Policy) -> Result<(), SolveError> {
    if pi.is_stationary() {
        Ok(())
    } else {
        Err(SolveError::NotStationary)
    }
}

/// Runs the stationary recursion `V_t = r_pi + P_pi V_{t-1}` and hands each
/// `(t, V_t)` to `visit` until it returns `false` or `horizon` is reached.
fn stationary_totals<T: Real>(
    m: &GroundMdp<T>,
    pi: &Policy,
    horizon: usize,
    mut visit: impl FnMut(usize, &[T]) -> bool,
) {
    let n = m.n_states();
    let rows: Vec<_> = (0..n)
        .map(|s| {
            m.row(StateId(s), pi.action(0, StateId(s)))
                .expect("policy checked against mdp")
        })
        .collect();
    let mut prev = vec![T::zero(); n];
    let mut cur = vec![T::zero(); n];
    for t in 1..=horizon {
        for (s, row) in rows.iter().enumerate() {
            cur[s] = backup(row, &prev);
        }
        if !visit(t, &cur) {
            return;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
}

/// `U_M(s, pi)` for every start state and `U_M(pi)` as the minimum.
pub fn long_run_values<T: Real>(
    m: &GroundMdp<T>,
    pi: &Policy,
    opts: &LongRunOptions,
) -> Result<ValueReport<T>, SolveError> {
    require_stationary(pi)?;
    pi.check_against(m)?;
    long_run_unchecked(m, pi, opts)
}

fn long_run_unchecked<T: Real>(
    m: &GroundMdp<T>,
    pi: &Policy,
    opts: &LongRunOptions,
) -> Result<ValueReport<T>, SolveError> {
    let n = m.n_states();
    let two = T::one() + T::one();
    let tol = T::from_f64_lossy(opts.tolerance);
    let max_horizon = opts.max_horizon.max(4);

    let mut last_avg: Option<Vec<T>> = None;
    let mut last_est: Option<Vec<T>> = None;
    let mut outcome: Option<Result<ValueReport<T>, SolveError>> = None;

    stationary_totals(m, pi, max_horizon, |t, totals| {
        if !t.is_power_of_two() {
            return true;
        }
        let tt = T::from_count(t);
        let avg: Vec<T> = totals.iter().map(|&v| v / tt).collect();
        if let Some(prev_avg) = &last_avg {
            let est: Vec<T> = (0..n).map(|s| two * avg[s] - prev_avg[s]).collect();
            if let Some(prev_est) = &last_est {
                let diff = (0..n)
                    .map(|s| (est[s] - prev_est[s]).abs())
                    .fold(T::zero(), |a, b| if b > a { b } else { a });
                if t >= opts.min_horizon && diff < tol {
                    outcome = Some(Ok(ValueReport::from_values(est, t)));
                    return false;
                }
                if 2 * t > max_horizon {
                    outcome = Some(Err(SolveError::NotConverged {
                        horizon: t,
                        previous: prev_est.iter().map(|v| v.to_f64_lossy()).collect(),
                        last: est.iter().map(|v| v.to_f64_lossy()).collect(),
                    }));
                    return false;
                }
            }
            last_est = Some(est);
        }
        last_avg = Some(avg);
        true
    });
    outcome.expect("loop ends at a power of two not above the cap")
}

/// Least `T <= cap` such that `U_M(s, pi, t) >= U_M(pi) - eps` for every
/// state and every `t` in `T..=cap`. The tail past `cap` rests on the
/// convergence of [`long_run_values`].
pub fn mixing_time<T: Real>(
    m: &GroundMdp<T>,
    pi: &Policy,
    eps: T,
    cap: usize,
    opts: &LongRunOptions,
) -> Result<MixingTime, SolveError> {
    let lr = long_run_values(m, pi, opts)?;
    Ok(mixing_time_given(m, pi, lr.min_value, eps, cap))
}

pub(crate) fn mixing_time_given<T: Real>(
    m: &GroundMdp<T>,
    pi: &Policy,
    long_run_min: T,
    eps: T,
    cap: usize,
) -> MixingTime {
    if cap == 0 {
        return MixingTime::ExceedsCap;
    }
    let threshold = long_run_min - eps - T::comparison_slack();
    let mut last_fail = 0usize;
    stationary_totals(m, pi, cap, |t, totals| {
        let tt = T::from_count(t);
        if totals.iter().any(|&v| v / tt < threshold) {
            last_fail = t;
        }
        true
    });
    if last_fail >= cap {
        MixingTime::ExceedsCap
    } else {
        MixingTime::Steps(last_fail + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptOptions {
    /// Refuse when the number of stationary policies exceeds this.
    pub enumeration_bound: u128,
    pub long_run: LongRunOptions,
}

impl Default for OptOptions {
    fn default() -> Self {
        Self {
            enumeration_bound: 1_000_000,
            long_run: LongRunOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptBest<T> {
    pub value: T,
    pub policy: Policy,
    pub mixing_time: usize,
}

/// Output of [`opt_value`]. `best` is `None` when no enumerated policy mixes
/// within the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct OptReport<T> {
    pub best: Option<OptBest<T>>,
    pub evaluated: usize,
    /// Policies skipped because their long-run average did not converge.
    pub unconverged: usize,
}

impl<T: Copy> OptReport<T> {
    pub fn value(&self) -> Option<T> {
        self.best.as_ref().map(|b| b.value)
    }
}

/// Visits every stationary deterministic policy in lexicographic order of
/// action ids.
pub fn for_each_stationary_policy<T: Real>(m: &GroundMdp<T>, mut f: impl FnMut(Policy)) {
    let sets: Vec<Vec<ActionId>> = m.states().map(|s| m.actions_at(s).collect()).collect();
    if sets.iter().any(|s| s.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; sets.len()];
    loop {
        f(Policy::stationary(
            idx.iter().zip(&sets).map(|(&i, set)| set[i]).collect(),
        ));
        // Odometer with the last state varying fastest.
        let mut pos = sets.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < sets[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn check_enumerable<T: Real>(m: &GroundMdp<T>, opts: &OptOptions) -> Result<(), SolveError> {
    let violations = validate_mdp(m);
    if !violations.is_empty() {
        return Err(SolveError::InvalidMdp(violations));
    }
    let count = m.stationary_policy_count();
    if count > opts.enumeration_bound {
        return Err(SolveError::EnumerationBound {
            policies: count,
            bound: opts.enumeration_bound,
        });
    }
    Ok(())
}

/// `Opt(M, eps, T)`: the best `U_M(pi)` over stationary deterministic
/// policies whose ε-return mixing time is at most `horizon`.
///
/// History-dependent policies are not enumerated.
pub fn opt_value<T: Real>(
    m: &GroundMdp<T>,
    eps: T,
    horizon: usize,
    opts: &OptOptions,
) -> Result<OptReport<T>, SolveError> {
    check_enumerable(m, opts)?;
    let mut report = OptReport {
        best: None,
        evaluated: 0,
        unconverged: 0,
    };
    for_each_stationary_policy(m, |pi| {
        report.evaluated += 1;
        let lr = match long_run_unchecked(m, &pi, &opts.long_run) {
            Ok(lr) => lr,
            Err(_) => {
                report.unconverged += 1;
                return;
            }
        };
        let cap = horizon.max(lr.horizon_used);
        if let MixingTime::Steps(tau) = mixing_time_given(m, &pi, lr.min_value, eps, cap) {
            if tau <= horizon {
                let better = report.best.as_ref().is_none_or(|b| lr.min_value > b.value);
                if better {
                    report.best = Some(OptBest {
                        value: lr.min_value,
                        policy: pi,
                        mixing_time: tau,
                    });
                }
            }
        }
    });
    Ok(report)
}

/// Stationary policy with the largest `U_M(pi)`, ignoring mixing time.
pub fn best_stationary_gain<T: Real>(
    m: &GroundMdp<T>,
    opts: &OptOptions,
) -> Result<(Policy, ValueReport<T>), SolveError> {
    check_enumerable(m, opts)?;
    let mut best: Option<(Policy, ValueReport<T>)> = None;
    let mut failure = None;
    for_each_stationary_policy(m, |pi| match long_run_unchecked(m, &pi, &opts.long_run) {
        Ok(lr) => {
            if best.as_ref().is_none_or(|(_, b)| lr.min_value > b.min_value) {
                best = Some((pi, lr));
            }
        }
        Err(e) => failure = Some(e),
    });
    best.ok_or_else(|| failure.unwrap_or(SolveError::ZeroHorizon))
}

/// ε-return mixing time of the best-gain stationary policy, used as `T_M`.
pub fn optimal_mixing_time<T: Real>(
    m: &GroundMdp<T>,
    eps: T,
    cap: usize,
    opts: &OptOptions,
) -> Result<(Policy, ValueReport<T>, MixingTime), SolveError> {
    let (pi, lr) = best_stationary_gain(m, opts)?;
    let mix = mixing_time_given(m, &pi, lr.min_value, eps, cap);
    Ok((pi, lr, mix))
}
