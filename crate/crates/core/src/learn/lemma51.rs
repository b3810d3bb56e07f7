//! Empirical check that `K0` explores find a hidden action with
//! probability at least `1 - delta/(4N)`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::mdp::{ActionId, GroundMdp, StateId};
use crate::model::{k0, DiscoverySchedule, MdpuInstance, ScheduleError, K0};
use crate::sim::builders::EXPLORE;
use crate::sim::{nondiscovery_prob, Env, EnvError, EnvOptions, Environment};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Lemma51Error {
    #[error("no finite K0: {0:?}")]
    NoK0(K0),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("need at least one replica")]
    NoReplicas,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma51Report {
    pub k0: u64,
    pub hidden: u64,
    pub replicas: u64,
    pub discoveries: u64,
    pub frequency: f64,
    /// `1 - prod_{t<=K0} (1 - D(j,t))`.
    pub closed_form: f64,
    /// `1 - delta/(4N)`.
    pub threshold: f64,
    /// Standard error of the frequency under the closed form.
    pub std_error: f64,
    pub within_3se: bool,
    pub meets_threshold: bool,
}

fn single_state(hidden: u32, schedule: DiscoverySchedule) -> MdpuInstance {
    let mut m = GroundMdp::new(1).with_outcome(0, 1, 0, 1.0, 0.0);
    for a in 0..hidden {
        m = m.with_outcome(0, 2 + a, 0, 1.0, 0.0);
    }
    let g0 = BTreeMap::from([(StateId(0), BTreeSet::from([ActionId(1)]))]);
    MdpuInstance::new(m, g0, EXPLORE, schedule)
}

/// Play `a0` `K0` times from a zeroed counter at a state hiding one action,
/// over `replicas` independent streams.
pub fn lemma51_check(
    sched: &DiscoverySchedule,
    n: u64,
    delta: f64,
    replicas: u64,
    seed: u64,
) -> Result<Lemma51Report, Lemma51Error> {
    lemma51_check_hidden(sched, n, delta, replicas, 1, seed)
}

pub fn lemma51_check_hidden(
    sched: &DiscoverySchedule,
    n: u64,
    delta: f64,
    replicas: u64,
    hidden: u32,
    seed: u64,
) -> Result<Lemma51Report, Lemma51Error> {
    if replicas == 0 {
        return Err(Lemma51Error::NoReplicas);
    }
    let k0 = match k0(sched, n, delta)? {
        K0::Finite(m) => m,
        other => return Err(Lemma51Error::NoK0(other)),
    };
    let u = Arc::new(single_state(hidden, sched.clone()));
    Env::reset(Arc::clone(&u), StateId(0), seed)?;

    let hits: Result<Vec<bool>, EnvError> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut env = Env::reset_unchecked(Arc::clone(&u), StateId(0), seed, r, EnvOptions::default())?;
            for _ in 0..k0 {
                if env.step(EXPLORE)?.discovered_action.is_some() {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect();
    let discoveries = hits?.into_iter().filter(|&h| h).count() as u64;

    let closed_form = 1.0 - nondiscovery_prob(sched, u64::from(hidden), k0)?;
    let frequency = discoveries as f64 / replicas as f64;
    let std_error = (closed_form * (1.0 - closed_form) / replicas as f64).sqrt();
    let threshold = 1.0 - delta / (4.0 * n as f64);
    Ok(Lemma51Report {
        k0,
        hidden: u64::from(hidden),
        replicas,
        discoveries,
        frequency,
        closed_form,
        threshold,
        std_error,
        within_3se: (frequency - closed_form).abs() <= 3.0 * std_error,
        meets_threshold: frequency >= threshold,
    })
}
