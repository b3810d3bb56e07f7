//! Learner parameters and the visit/exploitation thresholds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mdp::StateId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    /// Guess for `|S|`.
    pub n: u64,
    /// Guess for `|A|`.
    pub k: u64,
    pub r_max: f64,
    /// Guess for the ε-return mixing time.
    pub t: usize,
    pub eps: f64,
    pub delta: f64,
    pub start: StateId,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("eps must be positive, got {0}")]
    Eps(f64),
    #[error("delta must lie in (0,1), got {0}")]
    Delta(f64),
    #[error("N={n} is below the {aware} aware states")]
    N { n: u64, aware: usize },
    #[error("k={k} is below the {aware} aware actions")]
    K { k: u64, aware: usize },
    #[error("T must be at least 1")]
    T,
    #[error("R_max must be positive, got {0}")]
    RMax(f64),
}

impl LearnerConfig {
    pub fn check(&self, aware_states: usize, aware_actions: usize) -> Result<(), ConfigError> {
        if !(self.eps > 0.0) {
            return Err(ConfigError::Eps(self.eps));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ConfigError::Delta(self.delta));
        }
        if self.n < aware_states as u64 {
            return Err(ConfigError::N {
                n: self.n,
                aware: aware_states,
            });
        }
        if self.k < aware_actions as u64 {
            return Err(ConfigError::K {
                k: self.k,
                aware: aware_actions,
            });
        }
        if self.t == 0 {
            return Err(ConfigError::T);
        }
        if !(self.r_max > 0.0) {
            return Err(ConfigError::RMax(self.r_max));
        }
        Ok(())
    }
}

/// `ceil(x)`, except that values within a relative 1e-9 of an integer snap
/// to it, so `12/0.2` gives 60 rather than 61.
fn ceil_snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

fn to_u64(x: f64) -> u64 {
    // `as` saturates at u64::MAX.
    x as u64
}

fn cube(x: f64) -> u128 {
    (x as u128).saturating_pow(3)
}

/// `K1(T) = max(ceil(4 N T R_max / eps)^3, ceil(8 ln^3(8 N k / delta))) + 1`
pub fn k1_at(cfg: &LearnerConfig, t: usize) -> u64 {
    let first = cube(ceil_snap(4.0 * cfg.n as f64 * t as f64 * cfg.r_max / cfg.eps));
    let second = ceil_snap(8.0 * (8.0 * cfg.n as f64 * cfg.k as f64 / cfg.delta).ln().powi(3)) as u128;
    u64::try_from(first.max(second).saturating_add(1)).unwrap_or(u64::MAX)
}

pub fn k1(cfg: &LearnerConfig) -> u64 {
    k1_at(cfg, cfg.t)
}

/// The original R-MAX constant
/// `max(ceil(4|S| T R_max/eps)^3, ceil(-6 ln^3(delta / (6 |S| |A|^2)))) + 1`,
/// kept for comparison only.
pub fn rmax_k1(n_states: u64, n_actions: u64, r_max: f64, t: usize, eps: f64, delta: f64) -> u64 {
    let first = cube(ceil_snap(4.0 * n_states as f64 * t as f64 * r_max / eps));
    let inner = delta / (6.0 * n_states as f64 * (n_actions as f64).powi(2));
    let second = ceil_snap(-6.0 * inner.ln().powi(3)) as u128;
    u64::try_from(first.max(second).saturating_add(1)).unwrap_or(u64::MAX)
}

/// `(K2, K3)`, the two exploitation lengths.
///
/// The typeset formula is `K2 = 2(Nk max(K1(T+1), K0))^{3/2} R_max/eps`;
/// the exponent is read as applying to the whole product `Nk max(..)`.
/// `K3 = (2 R_max + 1) max(ceil(2 R_max/eps)^3, 8 ln(4/delta)^3) / eps`.
pub fn k2_k3(cfg: &LearnerConfig, k0: u64) -> (u64, u64) {
    let base = (cfg.n * cfg.k) as f64 * (k1_at(cfg, cfg.t + 1).max(k0) as f64);
    let k2 = ceil_snap(2.0 * base.powf(1.5) * cfg.r_max / cfg.eps);
    let first = ceil_snap(2.0 * cfg.r_max / cfg.eps).powi(3);
    let second = 8.0 * (4.0 / cfg.delta).ln().powi(3);
    let k3 = ceil_snap((2.0 * cfg.r_max + 1.0) * first.max(second) / cfg.eps);
    (to_u64(k2), to_u64(k3))
}

/// How the thresholds are applied. The formula values grow as the cube of
/// `N T R_max / eps` and are out of reach for simulation beyond the first
/// phase, so runs may cap them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub k1_cap: Option<u64>,
    /// Cap on the exploitation length `K2 + K3`.
    pub exploit_cap: Option<u64>,
}

/// Thresholds in effect for one phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PhaseThresholds {
    pub k0: u64,
    pub k1: u64,
    pub k2: u64,
    pub k3: u64,
    /// Formula values before capping.
    pub k1_formula: u64,
    pub k2_formula: u64,
    pub k3_formula: u64,
    pub exploit_steps: u64,
}

impl Thresholds {
    pub fn formula() -> Self {
        Self::default()
    }

    pub fn capped(k1: u64, exploit: u64) -> Self {
        Self {
            k1_cap: Some(k1),
            exploit_cap: Some(exploit),
        }
    }

    pub fn k1(&self, cfg: &LearnerConfig) -> u64 {
        let f = k1(cfg);
        self.k1_cap.map_or(f, |c| f.min(c))
    }

    pub fn for_phase(&self, cfg: &LearnerConfig, k0: u64) -> PhaseThresholds {
        let k1_formula = k1(cfg);
        let (k2_formula, k3_formula) = k2_k3(cfg, k0);
        let total = k2_formula.saturating_add(k3_formula);
        let exploit_steps = self.exploit_cap.map_or(total, |c| total.min(c));
        // When capped, split the budget between K2 and K3 in proportion.
        let (k2, k3) = if exploit_steps == total {
            (k2_formula, k3_formula)
        } else {
            let k2 = (exploit_steps as f64 * k2_formula as f64 / total as f64).round() as u64;
            (k2, exploit_steps - k2)
        };
        PhaseThresholds {
            k0,
            k1: self.k1(cfg),
            k2,
            k3,
            k1_formula,
            k2_formula,
            k3_formula,
            exploit_steps,
        }
    }
}
