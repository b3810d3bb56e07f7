//! The escalation loop: run URMAX with growing guesses for `|S|`, `|A|`,
//! `R_max` and `T`, exploiting after each consistent phase.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{k0_with, K0Options, K0};
use crate::sim::Environment;

use super::thresholds::{LearnerConfig, PhaseThresholds, Thresholds};
use super::urmax::{urmax_inner, InnerOutcome, LearnedPolicy, LearnerError, RunReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterOptions {
    pub eps: f64,
    pub delta: f64,
    pub thresholds: Thresholds,
    pub max_phases: u32,
    /// Stop once this many steps have been taken in total.
    pub max_total_steps: u64,
    /// Steps allowed to each inner run.
    pub inner_step_budget: u64,
    pub k0: K0Options,
}

impl OuterOptions {
    pub fn new(eps: f64, delta: f64) -> Self {
        Self {
            eps,
            delta,
            thresholds: Thresholds::formula(),
            max_phases: 10,
            max_total_steps: u64::MAX,
            inner_step_budget: u64::MAX,
            k0: K0Options::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OuterError {
    #[error("phase {phase}: no finite K0 for this schedule ({k0:?}); the partial sums of D(1,t) stay below ln(4N/delta), so no learner can guarantee near-optimal play")]
    Unlearnable { phase: u32, k0: K0 },
    #[error("phase {phase}: K0 search stopped at the probe cap ({k0:?})")]
    K0Cap { phase: u32, k0: K0 },
    #[error("phase {phase}: {source}")]
    Learner { phase: u32, source: LearnerError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecord {
    pub phase: u32,
    pub cfg: LearnerConfig,
    pub thresholds: PhaseThresholds,
    pub inner: RunReport,
    pub exploit_steps: u64,
    pub exploit_avg_reward: Option<f64>,
    /// Environment step count at the end of the phase.
    pub total_steps: u64,
}

pub const PHASE_CSV_HEADER: &str = "phase,N,k,R_max_guess,T,K0,K1,K2,K3,inner_steps,outcome,exploit_avg_reward";

impl PhaseRecord {
    pub fn csv_row(&self) -> String {
        let th = &self.thresholds;
        let avg = self.exploit_avg_reward.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::new();
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.phase,
            self.cfg.n,
            self.cfg.k,
            self.cfg.r_max,
            self.cfg.t,
            th.k0,
            th.k1,
            th.k2,
            th.k3,
            self.inner.steps,
            self.inner.outcome.label(),
            avg
        );
        out
    }
}

/// Iterator over the phases of URMAX on one continuing environment.
pub struct UrmaxOuter<E> {
    env: E,
    opts: OuterOptions,
    cfg: LearnerConfig,
    phase: u32,
    done: bool,
}

impl<E: Environment> UrmaxOuter<E> {
    /// The first phase uses `N = |S0|`, `k = |A0|`, `R_max = 1`, `T = 1`.
    pub fn new(env: E, opts: OuterOptions) -> Self {
        let n = env.known_states().len() as u64;
        let k = env
            .known_states()
            .iter()
            .flat_map(|&s| env.known_actions(s).into_iter().flatten())
            .collect::<std::collections::BTreeSet<_>>()
            .len() as u64;
        let cfg = LearnerConfig {
            n,
            k,
            r_max: 1.0,
            t: 1,
            eps: opts.eps,
            delta: opts.delta,
            start: env.current_state(),
        };
        Self {
            env,
            opts,
            cfg,
            phase: 0,
            done: false,
        }
    }

    pub fn env(&self) -> &E {
        &self.env
    }

    pub fn into_env(self) -> E {
        self.env
    }

    fn exploit(&mut self, policy: &LearnedPolicy, steps: u64) -> Result<(u64, f64), LearnerError> {
        let mut sum = 0.0;
        let mut taken = 0;
        let room = self.opts.max_total_steps.saturating_sub(self.env.step_count());
        for t in 0..steps.min(room) {
            let a = policy.action_or_fallback(t as usize, &self.env);
            sum += self.env.step(a)?.reward;
            taken += 1;
        }
        Ok((taken, sum))
    }

    fn run_phase(&mut self) -> Result<PhaseRecord, OuterError> {
        let phase = self.phase;
        self.cfg.start = self.env.current_state();
        let cfg = self.cfg;
        let k0 = match k0_with(self.env.schedule(), cfg.n, cfg.delta, &self.opts.k0) {
            Ok(K0::Finite(m)) => m,
            Ok(k0 @ K0::NoFinite { .. }) => return Err(OuterError::Unlearnable { phase, k0 }),
            Ok(k0 @ K0::CapExceeded { .. }) => return Err(OuterError::K0Cap { phase, k0 }),
            Err(e) => {
                return Err(OuterError::Learner {
                    phase,
                    source: LearnerError::Env(e.into()),
                })
            }
        };
        let thresholds = self.opts.thresholds.for_phase(&cfg, k0);
        let room = self.opts.max_total_steps.saturating_sub(self.env.step_count());
        let budget = self.opts.inner_step_budget.min(room);
        let learner = |source| OuterError::Learner { phase, source };
        let inner = urmax_inner(&mut self.env, &cfg, k0, thresholds.k1, budget, &mut ()).map_err(learner)?;

        let (exploit_steps, exploit_avg_reward) = match (&inner.outcome, &inner.policy) {
            (InnerOutcome::Inconsistency(_), _) | (_, None) => (0, None),
            (_, Some(policy)) => {
                let policy = policy.clone();
                let (n, sum) = self.exploit(&policy, thresholds.exploit_steps).map_err(learner)?;
                (n, (n > 0).then(|| sum / n as f64))
            }
        };
        Ok(PhaseRecord {
            phase,
            cfg,
            thresholds,
            inner,
            exploit_steps,
            exploit_avg_reward,
            total_steps: self.env.step_count(),
        })
    }
}

impl<E: Environment> Iterator for UrmaxOuter<E> {
    type Item = Result<PhaseRecord, OuterError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done || self.phase >= self.opts.max_phases || self.env.step_count() >= self.opts.max_total_steps {
            return None;
        }
        let out = self.run_phase();
        match out {
            Ok(_) => {
                self.phase += 1;
                self.cfg.n += 1;
                self.cfg.k += 1;
                self.cfg.r_max += 1.0;
                self.cfg.t += 1;
            }
            Err(_) => self.done = true,
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mdp::StateId;
    use crate::sim::builders::{example41, three_state_demo};
    use crate::sim::Env;

    #[test]
    fn power_law_is_refused_at_once() {
        let u = Arc::new(example41(1.0, 2.0).unwrap());
        let env = Env::reset(u, StateId(0), 0).unwrap();
        let mut outer = UrmaxOuter::new(env, OuterOptions::new(0.2, 0.1));
        assert!(matches!(
            outer.next(),
            Some(Err(OuterError::Unlearnable { phase: 0, .. }))
        ));
        assert!(outer.next().is_none());
    }

    #[test]
    fn first_phase_and_escalation() {
        let u = Arc::new(three_state_demo());
        let env = Env::reset(u, StateId(0), 4).unwrap();
        let mut opts = OuterOptions::new(0.2, 0.1);
        opts.thresholds = Thresholds::capped(20, 200);
        opts.max_phases = 4;
        let phases: Vec<PhaseRecord> = UrmaxOuter::new(env, opts).map(|p| p.unwrap()).collect();
        assert_eq!(phases.len(), 4);
        let first = &phases[0].cfg;
        assert_eq!((first.n, first.k, first.r_max, first.t), (1, 2, 1.0, 1));
        for w in phases.windows(2) {
            let (a, b) = (&w[0].cfg, &w[1].cfg);
            assert_eq!((b.n, b.k, b.r_max, b.t), (a.n + 1, a.k + 1, a.r_max + 1.0, a.t + 1));
        }
        for p in &phases {
            let row = p.csv_row();
            assert_eq!(row.split(',').count(), PHASE_CSV_HEADER.split(',').count());
            if matches!(p.inner.outcome, InnerOutcome::Inconsistency(_)) {
                assert_eq!(p.exploit_steps, 0);
                assert!(p.exploit_avg_reward.is_none());
            }
        }
    }
}
