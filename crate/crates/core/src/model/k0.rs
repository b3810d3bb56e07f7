//! The explore-saturation threshold
//! `K0 = min { M : sum_{t=1}^M D(1,t) >= ln(4N/delta) }`.

use super::schedule::{CompensatedSum, DiscoverySchedule, GrowthTag, ScheduleError, ScheduleKind, POWER_LAW_SUM};

/// Partial sums gaining less than this over the last three doublings are
/// treated as stalled.
pub const STALL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K0Options {
    /// Largest `M` probed.
    pub probe_cap: u64,
}

impl Default for K0Options {
    fn default() -> Self {
        Self { probe_cap: 1 << 24 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoK0Reason {
    /// The series provably sums to less than the target.
    ConvergentBelowTarget { limit: f64 },
    /// The probe cap was reached with the partial sums no longer growing.
    Stalled { partial_sum: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum K0 {
    Finite(u64),
    NoFinite {
        target: f64,
        reason: NoK0Reason,
    },
    /// The sums were still growing when the probe cap was reached.
    CapExceeded {
        target: f64,
        cap: u64,
        partial_sum: f64,
    },
}

impl K0 {
    pub fn finite(self) -> Option<u64> {
        match self {
            K0::Finite(m) => Some(m),
            _ => None,
        }
    }
}

/// `ln(4N/delta)`
pub fn k0_target(n: u64, delta: f64) -> Result<f64, ScheduleError> {
    if n == 0 || !(delta > 0.0 && delta < 1.0) {
        return Err(ScheduleError::BadK0Arguments { n, delta });
    }
    Ok((4.0 * n as f64 / delta).ln())
}

pub fn k0(sched: &DiscoverySchedule, n: u64, delta: f64) -> Result<K0, ScheduleError> {
    k0_with(sched, n, delta, &K0Options::default())
}

pub fn k0_with(sched: &DiscoverySchedule, n: u64, delta: f64, opts: &K0Options) -> Result<K0, ScheduleError> {
    let target = k0_target(n, delta)?;

    // Closed-form refusals.
    match sched.kind() {
        ScheduleKind::PowerLaw if POWER_LAW_SUM < target => {
            return Ok(K0::NoFinite {
                target,
                reason: NoK0Reason::ConvergentBelowTarget { limit: POWER_LAW_SUM },
            })
        }
        ScheduleKind::Constant(p) if *p == 0.0 => {
            return Ok(K0::NoFinite {
                target,
                reason: NoK0Reason::ConvergentBelowTarget { limit: 0.0 },
            })
        }
        ScheduleKind::Table(v) if *v.last().expect("nonempty") == 0.0 => {
            let mut s = CompensatedSum::default();
            v.iter().for_each(|&x| s.add(x));
            if s.value() < target {
                return Ok(K0::NoFinite {
                    target,
                    reason: NoK0Reason::ConvergentBelowTarget { limit: s.value() },
                });
            }
        }
        _ => {}
    }

    let mut sum = CompensatedSum::default();
    // Partial sums at powers of two, for the stall test.
    let mut at_pow2: Vec<f64> = Vec::new();
    for m in 1..=opts.probe_cap {
        sum.add(sched.d1(m)?);
        if sum.value() >= target {
            return Ok(K0::Finite(m));
        }
        if m.is_power_of_two() {
            at_pow2.push(sum.value());
        }
    }

    let partial_sum = sum.value();
    let stalled = at_pow2.len() >= 4 && {
        let k = at_pow2.len();
        at_pow2[k - 1] - at_pow2[k - 4] < STALL_TOLERANCE
    };
    if sched.analytic_tag() == Some(GrowthTag::Convergent) || stalled {
        Ok(K0::NoFinite {
            target,
            reason: NoK0Reason::Stalled { partial_sum },
        })
    } else {
        Ok(K0::CapExceeded {
            target,
            cap: opts.probe_cap,
            partial_sum,
        })
    }
}
