//! Declared growth bounds `f` on `sum_{t<=T} D(1,t)` and the time bounds
//! obtained from their inverses.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("{y} is outside the image of f on [1, inf), which starts at {f1}")]
    OutsideCodomain { y: f64, f1: f64 },
    #[error("bound function needs m1 > 0, got {0}")]
    NonIncreasing(f64),
    #[error("c must lie in (0,1), got {0}")]
    BadC(f64),
    #[error("delta must lie in (0,1), got {0}")]
    BadDelta(f64),
    #[error("N must be at least 1")]
    BadN,
}

/// Increasing function `f: [1, inf) -> R`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum BoundFn {
    /// `m1 ln T + m2`
    Log { m1: f64, m2: f64 },
    /// `m1 ln(ln T + 1) + m2`
    LogLog { m1: f64, m2: f64 },
    /// `m1 T + m2`
    Linear { m1: f64, m2: f64 },
}

impl BoundFn {
    pub fn identity() -> Self {
        BoundFn::Linear { m1: 1.0, m2: 0.0 }
    }

    fn slope(&self) -> f64 {
        match *self {
            BoundFn::Log { m1, .. } | BoundFn::LogLog { m1, .. } | BoundFn::Linear { m1, .. } => m1,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            BoundFn::Log { m1, m2 } => m1 * t.ln() + m2,
            BoundFn::LogLog { m1, m2 } => m1 * (t.ln() + 1.0).ln() + m2,
            BoundFn::Linear { m1, m2 } => m1 * t + m2,
        }
    }

    /// `f^{-1}(y)`, defined for `y >= f(1)`.
    pub fn inverse(&self, y: f64) -> Result<f64, BoundError> {
        let m1 = self.slope();
        if !(m1 > 0.0) {
            return Err(BoundError::NonIncreasing(m1));
        }
        let f1 = self.eval(1.0);
        if !y.is_finite() || y < f1 {
            return Err(BoundError::OutsideCodomain { y, f1 });
        }
        Ok(match *self {
            BoundFn::Log { m1, m2 } => ((y - m2) / m1).exp(),
            BoundFn::LogLog { m1, m2 } => (((y - m2) / m1).exp() - 1.0).exp(),
            BoundFn::Linear { m1, m2 } => (y - m2) / m1,
        })
    }
}

/// Which side of the partial sums `f` bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    /// `sum_{t<=T} D(1,t) >= f(T)`
    Lower,
    /// `sum_{t<=T} D(1,t) <= f(T)`
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DeclaredBound {
    pub f: BoundFn,
    pub side: BoundSide,
}

impl DeclaredBound {
    pub fn lower(f: BoundFn) -> Self {
        Self {
            f,
            side: BoundSide::Lower,
        }
    }

    pub fn upper(f: BoundFn) -> Self {
        Self {
            f,
            side: BoundSide::Upper,
        }
    }

    /// `c ln T - c ln 2`, a lower bound on `sum_{t<=T} c/(t+1)` from
    /// `sum_{t=1}^T 1/(t+1) >= ln((T+2)/2)`.
    pub fn harmonic_lower(c: f64) -> Self {
        Self::lower(BoundFn::Log {
            m1: c,
            m2: -c * std::f64::consts::LN_2,
        })
    }
}

/// Time bounds obtained by inverting a declared `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinvBounds {
    /// `f^{-1}(c ln(1/delta) / ln(1/(1-c)))`: no learner can succeed with
    /// probability `1 - delta` in less time than this.
    pub time_lower_bound: f64,
    /// `f^{-1}(ln(4N/delta))`, an upper bound on `K0` when `f` is a lower
    /// bound on the partial sums.
    pub k0_upper_bound: Option<f64>,
}

pub fn finv_lower_bound(f: &BoundFn, c: f64, delta: f64, n: Option<u64>) -> Result<FinvBounds, BoundError> {
    if !(c > 0.0 && c < 1.0) {
        return Err(BoundError::BadC(c));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BoundError::BadDelta(delta));
    }
    let target = c * (1.0 / delta).ln() / (1.0 / (1.0 - c)).ln();
    let time_lower_bound = f.inverse(target)?;
    let k0_upper_bound = match n {
        Some(0) => return Err(BoundError::BadN),
        Some(n) => Some(k0_bound(f, n, delta)?),
        None => None,
    };
    Ok(FinvBounds {
        time_lower_bound,
        k0_upper_bound,
    })
}

/// `f^{-1}(ln(4N/delta))`.
pub fn k0_bound(f: &BoundFn, n: u64, delta: f64) -> Result<f64, BoundError> {
    if n == 0 {
        return Err(BoundError::BadN);
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BoundError::BadDelta(delta));
    }
    f.inverse((4.0 * n as f64 / delta).ln())
}
