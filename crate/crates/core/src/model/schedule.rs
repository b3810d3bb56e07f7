//! Discovery schedules `D(j, t)`: the probability that the explore action
//! reveals a new action when `j` actions remain undiscovered and it has
//! already failed `t - 1` times since the last discovery.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use super::bound::{BoundFn, BoundSide, DeclaredBound};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("time index must be at least 1")]
    ZeroTime,
    #[error("invalid schedule parameter: {0}")]
    InvalidParameter(String),
    #[error("custom schedule `{name}` returned {value} at t={t}, outside [0,1]")]
    OutOfRange { name: String, t: u64, value: f64 },
    #[error("malformed schedule spec `{spec}`: {reason}")]
    Malformed { spec: String, reason: String },
    #[error("K0 needs N >= 1 and delta in (0,1), got N={n}, delta={delta}")]
    BadK0Arguments { n: u64, delta: f64 },
}

/// How the sum `sum_t D(1, t)` grows, when known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthTag {
    /// The series has a finite sum.
    Convergent,
    /// Partial sums are at least `m1 ln T + m2` for some `m1 > 0`.
    AtLeastLog,
    /// Partial sums grow like `m1 ln(ln T + 1) + m2`.
    LogLog,
    /// Divergent at a rate not covered by the other tags.
    Divergent,
}

type CustomFn = dyn Fn(u64) -> f64 + Send + Sync;

/// Opaque `D(1, t)` evaluator.
#[derive(Clone)]
pub struct CustomSchedule {
    pub name: String,
    pub tag: Option<GrowthTag>,
    eval: Arc<CustomFn>,
}

impl CustomSchedule {
    pub fn new(
        name: impl Into<String>,
        tag: Option<GrowthTag>,
        eval: impl Fn(u64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            tag,
            eval: Arc::new(eval),
        }
    }
}

impl fmt::Debug for CustomSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomSchedule")
            .field("name", &self.name)
            .field("tag", &self.tag)
            .finish_non_exhaustive()
    }
}

/// The base curve `D(1, t)`.
#[derive(Debug, Clone)]
pub enum ScheduleKind {
    Constant(f64),
    /// `1/(t+1)^2`
    PowerLaw,
    /// `c/(t+1)`
    Harmonic(f64),
    /// `c/((t+1) ln(t+2))`
    LogLog(f64),
    /// Explicit values for `t = 1..=len`, repeating the last one afterwards.
    Table(Vec<f64>),
    Custom(CustomSchedule),
}

/// Rule lifting `D(1, t)` to `D(j, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JLift {
    /// `1 - (1 - D(1,t))^j`: each missing action is found independently.
    #[default]
    Independent,
    /// `D(j,t) = D(1,t)` for every `j >= 1`.
    Flat,
}

#[derive(Debug, Clone)]
pub struct DiscoverySchedule {
    kind: ScheduleKind,
    pub lift: JLift,
    pub bound: Option<DeclaredBound>,
}

/// `sum_{t>=1} 1/(t+1)^2 = pi^2/6 - 1`
pub const POWER_LAW_SUM: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0 - 1.0;

impl DiscoverySchedule {
    pub fn new(kind: ScheduleKind) -> Result<Self, ScheduleError> {
        let bad = |m: String| Err(ScheduleError::InvalidParameter(m));
        match &kind {
            ScheduleKind::Constant(p) if !(0.0..=1.0).contains(p) => {
                return bad(format!("constant p={p} not in [0,1]"))
            }
            ScheduleKind::Harmonic(c) if !(*c > 0.0 && *c <= 2.0) => {
                return bad(format!("harmonic c={c} not in (0,2]"))
            }
            ScheduleKind::LogLog(c) if !(*c > 0.0 && *c <= 2.0 * 3f64.ln()) => {
                return bad(format!("loglog c={c} not in (0, 2 ln 3]"))
            }
            ScheduleKind::Table(v) if v.is_empty() => return bad("empty table".into()),
            ScheduleKind::Table(v) if v.iter().any(|p| !(0.0..=1.0).contains(p)) => {
                return bad("table entries must lie in [0,1]".into())
            }
            _ => {}
        }
        Ok(Self {
            kind,
            lift: JLift::default(),
            bound: None,
        })
    }

    pub fn constant(p: f64) -> Result<Self, ScheduleError> {
        Self::new(ScheduleKind::Constant(p))
    }

    pub fn power_law() -> Self {
        Self::new(ScheduleKind::PowerLaw).expect("no parameters")
    }

    pub fn harmonic(c: f64) -> Result<Self, ScheduleError> {
        Self::new(ScheduleKind::Harmonic(c))
    }

    pub fn log_log(c: f64) -> Result<Self, ScheduleError> {
        Self::new(ScheduleKind::LogLog(c))
    }

    pub fn table(values: Vec<f64>) -> Result<Self, ScheduleError> {
        Self::new(ScheduleKind::Table(values))
    }

    pub fn custom(c: CustomSchedule) -> Self {
        Self::new(ScheduleKind::Custom(c)).expect("custom schedules are checked on evaluation")
    }

    pub fn with_lift(mut self, lift: JLift) -> Self {
        self.lift = lift;
        self
    }

    pub fn with_bound(mut self, bound: DeclaredBound) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    /// Lower and upper bounds `f` on `sum_{t<=T} D(1,t)`: the declared bound
    /// for its side, otherwise one known in closed form for the kind.
    pub fn bounds(&self) -> (Option<BoundFn>, Option<BoundFn>) {
        let ln2 = std::f64::consts::LN_2;
        let (mut lower, mut upper) = match self.kind {
            ScheduleKind::Constant(p) if p > 0.0 => {
                let f = BoundFn::Linear { m1: p, m2: 0.0 };
                (Some(f), Some(f))
            }
            // ln((T+2)/2) <= sum 1/(t+1) <= ln(T+1) <= ln T + ln 2
            ScheduleKind::Harmonic(c) => (
                Some(BoundFn::Log { m1: c, m2: -c * ln2 }),
                Some(BoundFn::Log { m1: c, m2: c * ln2 }),
            ),
            // First term plus the integral of 1/((x+1) ln(x+1)) over [1,T],
            // with ln(T+1) <= ln T + 1.
            ScheduleKind::LogLog(c) => (
                None,
                Some(BoundFn::LogLog {
                    m1: c,
                    m2: c / (2.0 * 3f64.ln()) - c * ln2.ln(),
                }),
            ),
            _ => (None, None),
        };
        if let Some(b) = self.bound {
            match b.side {
                BoundSide::Lower => lower = Some(b.f),
                BoundSide::Upper => upper = Some(b.f),
            }
        }
        (lower, upper)
    }

    /// Growth of `sum_t D(1,t)` known without sampling.
    pub fn analytic_tag(&self) -> Option<GrowthTag> {
        match &self.kind {
            ScheduleKind::Constant(p) if *p > 0.0 => Some(GrowthTag::AtLeastLog),
            ScheduleKind::Constant(_) => Some(GrowthTag::Convergent),
            ScheduleKind::PowerLaw => Some(GrowthTag::Convergent),
            ScheduleKind::Harmonic(_) => Some(GrowthTag::AtLeastLog),
            ScheduleKind::LogLog(_) => Some(GrowthTag::LogLog),
            ScheduleKind::Table(v) => Some(if *v.last().expect("nonempty") > 0.0 {
                GrowthTag::AtLeastLog
            } else {
                GrowthTag::Convergent
            }),
            ScheduleKind::Custom(c) => c.tag,
        }
    }

    /// `D(1, t)`.
    pub fn d1(&self, t: u64) -> Result<f64, ScheduleError> {
        if t == 0 {
            return Err(ScheduleError::ZeroTime);
        }
        let x = (t + 1) as f64;
        Ok(match &self.kind {
            ScheduleKind::Constant(p) => *p,
            ScheduleKind::PowerLaw => 1.0 / (x * x),
            ScheduleKind::Harmonic(c) => c / x,
            ScheduleKind::LogLog(c) => c / (x * (x + 1.0).ln()),
            ScheduleKind::Table(v) => {
                let i = usize::try_from(t - 1).unwrap_or(usize::MAX).min(v.len() - 1);
                v[i]
            }
            ScheduleKind::Custom(c) => {
                let value = (c.eval)(t);
                if !(0.0..=1.0).contains(&value) {
                    return Err(ScheduleError::OutOfRange {
                        name: c.name.clone(),
                        t,
                        value,
                    });
                }
                value
            }
        })
    }

    /// `D(j, t)`; zero when nothing is left to discover.
    pub fn d_eval(&self, j: u64, t: u64) -> Result<f64, ScheduleError> {
        let d = self.d1(t)?;
        if j == 0 {
            return Ok(0.0);
        }
        if j == 1 {
            return Ok(d);
        }
        Ok(match self.lift {
            JLift::Flat => d,
            // -expm1(j ln(1-d)) keeps precision for small d, where
            // 1 - (1-d)^j would round to zero.
            JLift::Independent => (-(j as f64 * (-d).ln_1p()).exp_m1()).clamp(d, 1.0),
        })
    }

    /// `sum_{t=1}^{horizon} D(j, t)`, accumulated in ascending `t`.
    pub fn partial_sum(&self, j: u64, horizon: u64) -> Result<f64, ScheduleError> {
        let mut acc = CompensatedSum::default();
        for t in 1..=horizon {
            acc.add(self.d_eval(j, t)?);
        }
        Ok(acc.value())
    }
}

impl fmt::Display for DiscoverySchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ScheduleKind::Constant(p) => write!(f, "constant:{p}"),
            ScheduleKind::PowerLaw => write!(f, "powerlaw"),
            ScheduleKind::Harmonic(c) => write!(f, "harmonic:{c}"),
            ScheduleKind::LogLog(c) => write!(f, "loglog:{c}"),
            ScheduleKind::Table(v) => {
                let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "table:[{}]", items.join(","))
            }
            ScheduleKind::Custom(c) => write!(f, "custom:{}", c.name),
        }
    }
}

impl FromStr for DiscoverySchedule {
    type Err = ScheduleError;

    /// `constant:p | powerlaw | harmonic:c | loglog:c | table:[p1,p2,...]`
    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let malformed = |reason: &str| ScheduleError::Malformed {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let s = spec.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (s, None),
        };
        let number = |a: Option<&str>| -> Result<f64, ScheduleError> {
            let a = a.ok_or_else(|| malformed("missing parameter"))?;
            a.parse::<f64>().map_err(|_| malformed("parameter is not a number"))
        };
        let annotate = |e: ScheduleError| match e {
            ScheduleError::InvalidParameter(r) => malformed(&r),
            other => other,
        };
        match head {
            "constant" => Self::constant(number(arg)?).map_err(annotate),
            "powerlaw" if arg.is_none() => Ok(Self::power_law()),
            "powerlaw" => Err(malformed("powerlaw takes no parameter")),
            "harmonic" => Self::harmonic(number(arg)?).map_err(annotate),
            "loglog" => Self::log_log(number(arg)?).map_err(annotate),
            "table" => {
                let body = arg
                    .and_then(|a| a.strip_prefix('['))
                    .and_then(|a| a.strip_suffix(']'))
                    .ok_or_else(|| malformed("table values must be written [p1,p2,...]"))?;
                let values = body
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| malformed("table entry is not a number"))?;
                Self::table(values).map_err(annotate)
            }
            _ => Err(malformed("unknown schedule kind")),
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
