//! Learnability classification of a discovery schedule from the growth of
//! `sum_{t<=T} D(1,t)`.
//!
//! A convergent series with `D(1,t) < 1` everywhere cannot be learned; a
//! divergent one can, in polynomial time when the sums grow at least like
//! `ln T` and in exponential time when they grow like `ln(ln T + 1)`.

use serde::Serialize;

use super::schedule::{CompensatedSum, DiscoverySchedule, GrowthTag, ScheduleKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Learnability {
    Unlearnable,
    LearnableExponential,
    LearnablePolynomial,
    LearnableUnclassifiedRate,
    Unknown,
}

impl Learnability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Learnability::Unlearnable => "unlearnable",
            Learnability::LearnableExponential => "learnable_exponential",
            Learnability::LearnablePolynomial => "learnable_polynomial",
            Learnability::LearnableUnclassifiedRate => "learnable_unclassified_rate",
            Learnability::Unknown => "unknown",
        }
    }
}

/// Ordinary least-squares fit `S ~ intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Residual sum of squares.
    pub rss: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    LinearFit { slope, intercept, rss }
}

/// Numerical growth diagnosis for schedules without a usable tag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericGrowth {
    /// `S(2^max) - S(2^(max-3))`.
    pub tail_gain: f64,
    /// Whether the per-doubling gains never shrink over the probe window.
    pub gains_nondecreasing: bool,
    pub ln_fit: LinearFit,
    pub lnln_fit: LinearFit,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    /// `(T, sum_{t<=T} D(1,t))` at each probe horizon.
    pub partial_sums: Vec<(u64, f64)>,
    /// `sup_t D(1,t)` over every probed `t`.
    pub sup_d1: f64,
    /// The uniform bound `c < 1` on `D(1,t)`, absent when the supremum is 1.
    pub uniform_bound_c: Option<f64>,
    pub analytic_tag: Option<GrowthTag>,
    pub numeric: Option<NumericGrowth>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnabilityVerdict {
    pub class: Learnability,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    /// Probe horizons are `2^min_exp ..= 2^max_exp`.
    pub min_exp: u32,
    pub max_exp: u32,
    /// Gain over the last three doublings below which the series counts as
    /// convergent.
    pub convergence_tolerance: f64,
    /// Required ratio between the losing and winning residuals.
    pub fit_margin: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            min_exp: 10,
            max_exp: 24,
            convergence_tolerance: 1e-6,
            fit_margin: 10.0,
        }
    }
}

const J_NOTE: &str = "only the j=1 criteria are applied; the regime for j>1 undiscovered actions is not classified";

fn probe(sched: &DiscoverySchedule, opts: &ClassifyOptions) -> Result<(Vec<(u64, f64)>, f64), String> {
    let x = |t: u64| (t + 1) as f64;
    Ok(match sched.kind() {
        ScheduleKind::Constant(p) => probe_with(opts, |_| *p),
        ScheduleKind::PowerLaw => probe_with(opts, |t| 1.0 / (x(t) * x(t))),
        ScheduleKind::Harmonic(c) => probe_with(opts, |t| c / x(t)),
        ScheduleKind::LogLog(c) => probe_with(opts, |t| c / (x(t) * (x(t) + 1.0).ln())),
        ScheduleKind::Table(v) => probe_with(opts, |t| {
            v[usize::try_from(t - 1).unwrap_or(usize::MAX).min(v.len() - 1)]
        }),
        ScheduleKind::Custom(_) => {
            let mut err = None;
            let out = probe_with(opts, |t| match sched.d1(t) {
                Ok(d) => d,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            });
            if let Some(e) = err {
                return Err(e.to_string());
            }
            out
        }
    })
}

fn probe_with(opts: &ClassifyOptions, mut d1: impl FnMut(u64) -> f64) -> (Vec<(u64, f64)>, f64) {
    // Four interleaved accumulators keep the compensated additions independent.
    let mut lanes = [CompensatedSum::default(); 4];
    let mut sup = [0.0f64; 4];
    let mut probes = Vec::new();
    let mut t = 1u64;
    for e in 0..=opts.max_exp {
        let end = 1u64 << e;
        while t + 3 <= end {
            for (i, lane) in lanes.iter_mut().enumerate() {
                let d = d1(t + i as u64);
                sup[i] = sup[i].max(d);
                lane.add(d);
            }
            t += 4;
        }
        while t <= end {
            let d = d1(t);
            sup[0] = sup[0].max(d);
            lanes[0].add(d);
            t += 1;
        }
        if e >= opts.min_exp {
            let mut total = CompensatedSum::default();
            for lane in &lanes {
                total.add(lane.value());
            }
            probes.push((end, total.value()));
        }
    }
    (probes, sup.iter().fold(0.0, |a, &b| a.max(b)))
}

fn verdict_from_tag(tag: GrowthTag, sup: f64, notes: &mut Vec<String>) -> Learnability {
    match tag {
        GrowthTag::Convergent if sup < 1.0 => Learnability::Unlearnable,
        GrowthTag::Convergent => {
            notes.push("series converges but D(1,t)=1 for some t, so the impossibility condition fails".into());
            Learnability::Unknown
        }
        GrowthTag::AtLeastLog => Learnability::LearnablePolynomial,
        GrowthTag::LogLog => Learnability::LearnableExponential,
        GrowthTag::Divergent => Learnability::LearnableUnclassifiedRate,
    }
}

fn numeric_growth(probes: &[(u64, f64)], opts: &ClassifyOptions) -> (Option<GrowthTag>, NumericGrowth) {
    let sums: Vec<f64> = probes.iter().map(|p| p.1).collect();
    let k = sums.len();
    let tail_gain = if k >= 4 { sums[k - 1] - sums[k - 4] } else { f64::NAN };
    let gains: Vec<f64> = sums.windows(2).map(|w| w[1] - w[0]).collect();
    let gains_nondecreasing = gains.windows(2).all(|g| g[1] >= g[0] * (1.0 - 1e-9) - 1e-12);
    let ln_x: Vec<f64> = probes.iter().map(|p| (p.0 as f64).ln()).collect();
    let lnln_x: Vec<f64> = ln_x.iter().map(|x| (x + 1.0).ln()).collect();
    let ln_fit = least_squares(&ln_x, &sums);
    let lnln_fit = least_squares(&lnln_x, &sums);

    let (tag, description) = if tail_gain < opts.convergence_tolerance {
        (
            Some(GrowthTag::Convergent),
            format!("last three doublings add {tail_gain:.3e}"),
        )
    } else if gains_nondecreasing {
        (
            Some(GrowthTag::AtLeastLog),
            format!(
                "gain per doubling never shrinks (last {:.6}), so growth is at least logarithmic",
                gains[gains.len() - 1]
            ),
        )
    } else if ln_fit.slope > 0.0 && ln_fit.rss * opts.fit_margin < lnln_fit.rss {
        (
            Some(GrowthTag::AtLeastLog),
            format!("fits m1 ln T + m2 with m1={:.6}", ln_fit.slope),
        )
    } else if lnln_fit.slope > 0.0 && lnln_fit.rss * opts.fit_margin < ln_fit.rss {
        (
            Some(GrowthTag::LogLog),
            format!("fits m1 ln(ln T + 1) + m2 with m1={:.6}", lnln_fit.slope),
        )
    } else {
        (
            None,
            format!(
                "inconclusive: rss(ln)={:.3e}, rss(lnln)={:.3e}",
                ln_fit.rss, lnln_fit.rss
            ),
        )
    };
    (
        tag,
        NumericGrowth {
            tail_gain,
            gains_nondecreasing,
            ln_fit,
            lnln_fit,
            description,
        },
    )
}

fn classify_inner(sched: &DiscoverySchedule, opts: &ClassifyOptions, use_tag: bool) -> LearnabilityVerdict {
    let mut notes = vec![J_NOTE.to_string()];
    let (partial_sums, sup_d1) = match probe(sched, opts) {
        Ok(x) => x,
        Err(e) => {
            notes.push(format!("evaluation failed: {e}"));
            return LearnabilityVerdict {
                class: Learnability::Unknown,
                evidence: Evidence {
                    partial_sums: Vec::new(),
                    sup_d1: f64::NAN,
                    uniform_bound_c: None,
                    analytic_tag: None,
                    numeric: None,
                    notes,
                },
            };
        }
    };
    let uniform_bound_c = (sup_d1 < 1.0).then_some(sup_d1);
    if uniform_bound_c.is_none() {
        notes.push("sup D(1,t) = 1: no uniform bound c < 1, time lower bound not reported".into());
    }
    let analytic_tag = if use_tag { sched.analytic_tag() } else { None };

    let (class, numeric) = match analytic_tag {
        Some(tag) => (verdict_from_tag(tag, sup_d1, &mut notes), None),
        None => {
            let (tag, growth) = numeric_growth(&partial_sums, opts);
            let class = match tag {
                Some(tag) => verdict_from_tag(tag, sup_d1, &mut notes),
                None => Learnability::Unknown,
            };
            (class, Some(growth))
        }
    };
    LearnabilityVerdict {
        class,
        evidence: Evidence {
            partial_sums,
            sup_d1,
            uniform_bound_c,
            analytic_tag,
            numeric,
            notes,
        },
    }
}

/// Classify using the schedule's analytic tag when it has one, otherwise
/// numerically.
pub fn classify_schedule(sched: &DiscoverySchedule) -> LearnabilityVerdict {
    classify_inner(sched, &ClassifyOptions::default(), true)
}

pub fn classify_schedule_with(sched: &DiscoverySchedule, opts: &ClassifyOptions) -> LearnabilityVerdict {
    classify_inner(sched, opts, true)
}

/// Classify from sampled partial sums alone, ignoring any tag.
pub fn classify_numerically(sched: &DiscoverySchedule, opts: &ClassifyOptions) -> LearnabilityVerdict {
    classify_inner(sched, opts, false)
}
