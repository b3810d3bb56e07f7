//! The experiment kinds behind `mdpu run`.
//!
//! Replicas run in parallel but results are collected by replica index,
//! so every CSV depends only on the config and the seed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::learn::{
    lemma51_check_hidden, Lemma51Error, OuterError, OuterOptions, PhaseRecord, UrmaxOuter, PHASE_CSV_HEADER,
};
use crate::mdp::{opt_value, optimal_mixing_time, optimal_t_step_policy, OptOptions, Policy, SolveError, StateId};
use crate::model::{
    classify_schedule, finv_lower_bound, k0, k0_bound, validate_mdpu, DiscoverySchedule, LearnabilityVerdict,
    MdpuInstance, K0,
};
use crate::sim::{nondiscovery_profile, Env, EnvError, Environment, RecordingEnv, Trace};

use super::config::{ExperimentConfig, ExperimentKind};
use super::svg::{line_chart, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// A statistical check missed its band.
    Fail,
    /// A downstream component declined the task, e.g. an unlearnable
    /// schedule.
    Refused,
    /// The instance failed validation.
    Invalid,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Invalid => 2,
            Status::Refused => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Refused => "REFUSED",
            Status::Invalid => "INVALID",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub status: Status,
    pub summary: String,
    /// The metrics CSV first, then auxiliary files.
    pub artifacts: Vec<Artifact>,
}

impl Report {
    fn new(experiment: ExperimentKind, status: Status, summary: String, csv: String) -> Self {
        Self {
            experiment,
            status,
            summary,
            artifacts: vec![Artifact {
                name: format!("{}.csv", experiment.name()),
                contents: csv,
            }],
        }
    }

    fn attach(&mut self, name: &str, contents: String) {
        self.artifacts.push(Artifact {
            name: name.to_string(),
            contents,
        });
    }

    pub fn csv(&self) -> &str {
        &self.artifacts[0].contents
    }

    pub fn artifact(&self, name: &str) -> Option<&str> {
        self.artifacts
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.contents.as_str())
    }

    /// Write every artifact and `summary.txt` into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for a in &self.artifacts {
            std::fs::write(dir.join(&a.name), &a.contents)?;
        }
        std::fs::write(dir.join("summary.txt"), &self.summary)
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("environment: {0}")]
    Env(#[from] EnvError),
    #[error("solver: {0}")]
    Solve(#[from] SolveError),
    #[error("{0}")]
    Internal(String),
}

/// Quote a CSV field when it holds a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt_f64(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn policy_string(p: &Policy) -> String {
    p.layers()[0]
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    match cfg.experiment {
        ExperimentKind::Validate => validate(cfg),
        ExperimentKind::Solve => solve(cfg),
        ExperimentKind::Classify => classify(cfg),
        ExperimentKind::Example41 => example41(cfg),
        ExperimentKind::Lemma51 => lemma51(cfg),
        ExperimentKind::UrmaxConverge => urmax_converge(cfg),
        ExperimentKind::Sweep => sweep(cfg),
    }
}

fn instance(cfg: &ExperimentConfig) -> Result<MdpuInstance, HarnessError> {
    cfg.build_instance()
        .ok_or_else(|| HarnessError::Internal(format!("{} needs an instance", cfg.experiment.name())))
}

fn invalid_report(kind: ExperimentKind, u: &MdpuInstance) -> Option<Report> {
    let v = validate_mdpu(u);
    if v.is_empty() {
        return None;
    }
    let mut csv = String::from("item,value\n");
    let mut summary = format!("{}: instance is invalid\n", kind.name());
    for x in &v {
        let _ = writeln!(csv, "violation,{}", csv_field(&x.to_string()));
        let _ = writeln!(summary, "  {x}");
    }
    Some(Report::new(kind, Status::Invalid, summary, csv))
}

fn start_state(u: &MdpuInstance) -> StateId {
    *u.aware_states
        .iter()
        .next()
        .expect("validated instance has an aware state")
}

fn validate(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let u = instance(cfg)?;
    if let Some(r) = invalid_report(cfg.experiment, &u) {
        return Ok(r);
    }
    let hidden: usize = u.ground.states().map(|s| u.hidden_count(s)).sum();
    let rows = [
        ("states", u.ground.n_states().to_string()),
        ("aware_states", u.aware_states.len().to_string()),
        ("actions", u.action_count().to_string()),
        ("aware_actions", u.aware_action_count().to_string()),
        ("hidden_pairs", hidden.to_string()),
        ("explore_action", u.explore_action.to_string()),
        ("schedule", u.schedule.to_string()),
        ("r_max", opt_f64(u.r_max)),
    ];
    let mut csv = String::from("item,value\n");
    let mut summary = String::from("validate: instance is valid\n");
    for (k, v) in rows {
        let _ = writeln!(csv, "{k},{}", csv_field(&v));
        let _ = writeln!(summary, "  {k}: {v}");
    }
    Ok(Report::new(cfg.experiment, Status::Pass, summary, csv))
}

const MIXING_CAP: usize = 100_000;

fn solve(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let u = instance(cfg)?;
    if let Some(r) = invalid_report(cfg.experiment, &u) {
        return Ok(r);
    }
    let m = &u.ground;
    let horizon = cfg.max_steps.unwrap_or(100) as usize;
    let opts = OptOptions::default();
    let (t_policy, t_values) = optimal_t_step_policy(m, horizon)?;
    let (gain_policy, gain, mix) = match optimal_mixing_time(m, cfg.eps, MIXING_CAP, &opts) {
        Ok(x) => x,
        Err(e @ SolveError::EnumerationBound { .. }) => {
            let msg = format!("solve: {e}\n");
            return Ok(Report::new(
                cfg.experiment,
                Status::Refused,
                msg,
                "metric,value\n".into(),
            ));
        }
        Err(e) => return Err(e.into()),
    };
    let t_m = mix.steps();
    let opt_tm = match t_m {
        Some(t) => opt_value(m, cfg.eps, t, &opts)?.value(),
        None => None,
    };
    let opt_h = opt_value(m, cfg.eps, horizon, &opts)?;

    let metrics: Vec<(&str, String)> = vec![
        ("horizon", horizon.to_string()),
        ("t_step_optimal_min_value", t_values.min_value.to_string()),
        ("best_gain", gain.min_value.to_string()),
        ("best_gain_policy", policy_string(&gain_policy)),
        ("T_M", t_m.map(|t| t.to_string()).unwrap_or_default()),
        ("opt_at_T_M", opt_f64(opt_tm)),
        ("opt_at_horizon", opt_f64(opt_h.value())),
        ("policies_evaluated", opt_h.evaluated.to_string()),
        ("policies_unconverged", opt_h.unconverged.to_string()),
    ];
    let mut csv = String::from("metric,value\n");
    let mut summary = format!("solve: ground MDP with {} states, eps={}\n", m.n_states(), cfg.eps);
    for (k, v) in &metrics {
        let _ = writeln!(csv, "{k},{}", csv_field(v));
        let _ = writeln!(summary, "  {k}: {v}");
    }
    let mut per_state = String::from("state,t_step_optimal_value,best_gain_value,first_action\n");
    for s in m.states() {
        let _ = writeln!(
            per_state,
            "{s},{},{},{}",
            t_values.value_at(s),
            gain.value_at(s),
            t_policy.action(0, s)
        );
    }
    let mut r = Report::new(cfg.experiment, Status::Pass, summary, csv);
    r.attach("states.csv", per_state);
    Ok(r)
}

fn verdict_row(spec: &str, v: &LearnabilityVerdict) -> String {
    let e = &v.evidence;
    format!(
        "{},{},{},{},{},{},{}",
        csv_field(spec),
        v.class.as_str(),
        e.sup_d1,
        opt_f64(e.uniform_bound_c),
        e.analytic_tag.map(|t| format!("{t:?}")).unwrap_or_default(),
        e.partial_sums.last().map(|p| p.1.to_string()).unwrap_or_default(),
        csv_field(&e.notes.join("; "))
    )
}

fn classify(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let mut csv = String::from("schedule,class,sup_d1,uniform_bound_c,analytic_tag,partial_sum_at_max_probe,notes\n");
    let mut summary = String::from("classify:\n");
    for spec in &cfg.schedules {
        let s: DiscoverySchedule = spec.parse().map_err(|e| HarnessError::Internal(format!("{e}")))?;
        let v = classify_schedule(&s);
        csv.push_str(&verdict_row(spec, &v));
        csv.push('\n');
        let _ = writeln!(summary, "  {spec}: {}", v.class.as_str());
    }
    Ok(Report::new(cfg.experiment, Status::Pass, summary, csv))
}

fn checkpoints(max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut decade = 1u64;
    'outer: loop {
        for m in [1, 2, 5] {
            let t = decade.saturating_mul(m);
            if t >= max {
                break 'outer;
            }
            out.push(t);
        }
        decade = decade.saturating_mul(10);
    }
    out.push(max);
    out
}

fn explore_trace(u: &Arc<MdpuInstance>, cfg: &ExperimentConfig, steps: u64) -> Result<Trace, HarnessError> {
    let env = Env::reset_unchecked(Arc::clone(u), start_state(u), cfg.seed, 0, cfg.env)?;
    let mut rec = RecordingEnv::new(env);
    let a0 = u.explore_action;
    for _ in 0..steps {
        rec.step(a0)?;
    }
    Ok(rec.into_parts().1)
}

fn example41(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let u = instance(cfg)?;
    if let Some(r) = invalid_report(cfg.experiment, &u) {
        return Ok(r);
    }
    let u = Arc::new(u);
    let start = start_state(&u);
    let steps = cfg.max_steps.unwrap_or(1000);
    let a0 = u.explore_action;
    let j = u.hidden_count(start) as u64;

    // First discovery time per replica, `None` when every explore failed.
    let first: Vec<Option<u64>> = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| {
            let mut env = Env::reset_unchecked(Arc::clone(&u), start, cfg.seed, r, cfg.env)?;
            for t in 1..=steps {
                if env.step(a0)?.discovered_action.is_some() {
                    return Ok(Some(t));
                }
            }
            Ok(None)
        })
        .collect::<Result<_, EnvError>>()?;

    let profile = nondiscovery_profile(&u.schedule, j, steps).map_err(|e| HarnessError::Internal(e.to_string()))?;
    let mut sorted: Vec<u64> = first.iter().flatten().copied().collect();
    sorted.sort_unstable();
    let n = cfg.replicas as f64;

    let mut csv = String::from("t,replicas,never_discovered,frequency,closed_form,std_error,z,within_band\n");
    let mut emp = Vec::new();
    let mut closed = Vec::new();
    let mut last_ok = true;
    let mut last_line = String::new();
    for t in checkpoints(steps) {
        let discovered = sorted.partition_point(|&x| x <= t) as u64;
        let never = cfg.replicas - discovered;
        let freq = never as f64 / n;
        let p = profile[(t - 1) as usize];
        let se = (p * (1.0 - p) / n).sqrt();
        let z = if se > 0.0 {
            (freq - p) / se
        } else if freq == p {
            0.0
        } else {
            f64::INFINITY
        };
        let ok = z.abs() <= cfg.se_band;
        let _ = writeln!(csv, "{t},{},{never},{freq},{p},{se},{z},{ok}", cfg.replicas);
        emp.push((t as f64, freq));
        closed.push((t as f64, p));
        last_ok = ok;
        last_line = format!("t={t}: never-discover frequency {freq} vs closed form {p} (se {se}, z {z:.3})");
    }

    let mut hist = String::from("first_discovery_t,replicas\n");
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for t in &sorted {
        *counts.entry(*t).or_default() += 1;
    }
    for (t, c) in &counts {
        let _ = writeln!(hist, "{t},{c}");
    }
    let _ = writeln!(hist, "never,{}", cfg.replicas - sorted.len() as u64);

    let status = if last_ok { Status::Pass } else { Status::Fail };
    let summary = format!(
        "example41: {} replicas of explore-forever for {steps} steps, {j} hidden action(s)\n  {last_line}\n  status: {} (band {} se)\n",
        cfg.replicas,
        status.label(),
        cfg.se_band
    );
    let mut r = Report::new(cfg.experiment, status, summary, csv);
    r.attach("first_discovery.csv", hist);
    r.attach("trace.csv", explore_trace(&u, cfg, steps)?.to_csv());
    if cfg.output.svg {
        let series = [Series::new("empirical", emp), Series::new("closed form", closed)];
        r.attach(
            "example41.svg",
            line_chart("Never-discover frequency", "explores t", "frequency", &series, true),
        );
    }
    Ok(r)
}

fn lemma51(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let sched = cfg.schedule_value().expect("filled by parse_config");
    let spec = cfg.schedule.clone().unwrap_or_default();
    let n = cfg.n.unwrap_or(2);
    let header = "schedule,N,delta,K0,hidden,replicas,discoveries,frequency,closed_form,threshold,std_error,within_band,meets_threshold\n";
    let rep = match lemma51_check_hidden(&sched, n, cfg.delta, cfg.replicas, 1, cfg.seed) {
        Ok(r) => r,
        Err(e @ Lemma51Error::NoK0(_)) => {
            let summary = format!("lemma51: {spec}: {e}\n");
            return Ok(Report::new(cfg.experiment, Status::Refused, summary, header.into()));
        }
        Err(e) => return Err(HarnessError::Internal(e.to_string())),
    };
    let within = (rep.frequency - rep.closed_form).abs() <= cfg.se_band * rep.std_error;
    let mut csv = String::from(header);
    let _ = writeln!(
        csv,
        "{},{n},{},{},{},{},{},{},{},{},{},{within},{}",
        csv_field(&spec),
        cfg.delta,
        rep.k0,
        rep.hidden,
        rep.replicas,
        rep.discoveries,
        rep.frequency,
        rep.closed_form,
        rep.threshold,
        rep.std_error,
        rep.meets_threshold
    );
    let status = if within && rep.meets_threshold {
        Status::Pass
    } else {
        Status::Fail
    };
    let summary = format!(
        "lemma51: {spec}, N={n}, delta={}: K0={}\n  discovery frequency {} over {} replicas\n  closed form {} (se {}), threshold 1-delta/4N = {}\n  status: {}\n",
        cfg.delta,
        rep.k0,
        rep.frequency,
        rep.replicas,
        rep.closed_form,
        rep.std_error,
        rep.threshold,
        status.label()
    );
    Ok(Report::new(cfg.experiment, status, summary, csv))
}

struct ReplicaRun {
    phases: Vec<PhaseRecord>,
    refusal: Option<OuterError>,
    total_steps: u64,
}

fn drive<E: Environment>(env: E, opts: OuterOptions) -> (ReplicaRun, E) {
    let mut outer = UrmaxOuter::new(env, opts);
    let mut phases = Vec::new();
    let mut refusal = None;
    for p in outer.by_ref() {
        match p {
            Ok(p) => phases.push(p),
            Err(e) => refusal = Some(e),
        }
    }
    let env = outer.into_env();
    let run = ReplicaRun {
        phases,
        refusal,
        total_steps: env.step_count(),
    };
    (run, env)
}

/// Average reward of the last exploitation window.
pub fn trailing_average(phases: &[PhaseRecord]) -> Option<f64> {
    phases.iter().rev().find_map(|p| p.exploit_avg_reward)
}

fn urmax_converge(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let u = instance(cfg)?;
    if let Some(r) = invalid_report(cfg.experiment, &u) {
        return Ok(r);
    }
    let u = Arc::new(u);
    let start = start_state(&u);
    let solver = OptOptions::default();
    let (_, gain, mix) = optimal_mixing_time(&u.ground, cfg.eps, MIXING_CAP, &solver)?;
    let Some(t_m) = mix.steps() else {
        let summary = format!("urmax-converge: the best-gain policy does not mix within {MIXING_CAP} steps\n");
        return Ok(Report::new(cfg.experiment, Status::Refused, summary, String::new()));
    };
    let opt = opt_value(&u.ground, cfg.eps, t_m, &solver)?
        .value()
        .unwrap_or(gain.min_value);
    let target = opt - 2.0 * cfg.eps;

    let mut opts = OuterOptions::new(cfg.eps, cfg.delta);
    opts.thresholds = cfg.thresholds.unwrap_or_default();
    opts.max_phases = cfg.max_phases.unwrap_or(7);
    opts.inner_step_budget = cfg.inner_step_budget.unwrap_or(u64::MAX);

    let reset = |r: u64| Env::reset_unchecked(Arc::clone(&u), start, cfg.seed, r, cfg.env);
    let (first, recorded) = drive(RecordingEnv::new(reset(0)?), opts);
    let trace = recorded.into_parts().1;
    let rest: Vec<ReplicaRun> = (1..cfg.replicas)
        .into_par_iter()
        .map(|r| reset(r).map(|env| drive(env, opts).0))
        .collect::<Result<_, EnvError>>()?;
    let runs: Vec<ReplicaRun> = std::iter::once(first).chain(rest).collect();

    if let Some(e) = runs.iter().find_map(|r| r.refusal.as_ref()) {
        match e {
            OuterError::Unlearnable { .. } | OuterError::K0Cap { .. } => {
                let summary = format!("urmax-converge: {e}\n");
                return Ok(Report::new(cfg.experiment, Status::Refused, summary, String::new()));
            }
            OuterError::Learner { .. } => return Err(HarnessError::Internal(e.to_string())),
        }
    }

    let mut csv = String::from(
        "replica,phases,final_N,final_k,final_R_max_guess,final_T,total_steps,trailing_avg_reward,target,passed\n",
    );
    let mut phases_csv = format!("replica,{PHASE_CSV_HEADER}\n");
    let mut passes = 0u64;
    for (i, run) in runs.iter().enumerate() {
        let avg = trailing_average(&run.phases);
        let passed = avg.is_some_and(|a| a >= target);
        passes += u64::from(passed);
        let last = run.phases.last().map(|p| p.cfg);
        let _ = writeln!(
            csv,
            "{i},{},{},{},{},{},{},{},{target},{passed}",
            run.phases.len(),
            last.map(|c| c.n.to_string()).unwrap_or_default(),
            last.map(|c| c.k.to_string()).unwrap_or_default(),
            last.map(|c| c.r_max.to_string()).unwrap_or_default(),
            last.map(|c| c.t.to_string()).unwrap_or_default(),
            run.total_steps,
            opt_f64(avg)
        );
        for p in &run.phases {
            let _ = writeln!(phases_csv, "{i},{}", p.csv_row());
        }
    }
    let fraction = passes as f64 / cfg.replicas as f64;
    let required = cfg.required_fraction.unwrap_or(0.9);
    let status = if fraction >= required {
        Status::Pass
    } else {
        Status::Fail
    };
    let summary = format!(
        "urmax-converge: {} replicas, eps={}, delta={}, {} phases\n  oracle: T_M={t_m}, Opt(M,eps,T_M)={opt}, target Opt-2eps={target}\n  {passes}/{} replicas reached the target ({fraction}, required {required})\n  status: {}\n",
        cfg.replicas,
        cfg.eps,
        cfg.delta,
        opts.max_phases,
        cfg.replicas,
        status.label()
    );
    let mut r = Report::new(cfg.experiment, status, summary, csv);
    if cfg.output.svg {
        let pts: Vec<(f64, f64)> = runs[0]
            .phases
            .iter()
            .filter_map(|p| p.exploit_avg_reward.map(|a| (p.phase as f64, a)))
            .collect();
        let n = runs[0].phases.len().max(1) as f64;
        let series = [
            Series::new("replica 0 exploit average", pts),
            Series::new("Opt - 2 eps", vec![(0.0, target), (n - 1.0, target)]),
        ];
        r.attach(
            "urmax-converge.svg",
            line_chart(
                "Exploitation reward by phase",
                "phase",
                "average reward",
                &series,
                false,
            ),
        );
    }
    r.attach("phases.csv", phases_csv);
    r.attach("trace.csv", trace.to_csv());
    Ok(r)
}

fn k0_cell(k: &K0) -> String {
    match k {
        K0::Finite(m) => m.to_string(),
        K0::NoFinite { .. } => "none".into(),
        K0::CapExceeded { .. } => "cap".into(),
    }
}

fn sweep(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let grid = cfg.grid.clone().unwrap_or_default();
    let base_sched = cfg.schedule.clone().unwrap_or_else(|| "constant:0.5".into());
    let or = |v: &Vec<String>, d: String| if v.is_empty() { vec![d] } else { v.clone() };
    let schedules = or(&grid.schedule, base_sched);
    let deltas = if grid.delta.is_empty() {
        vec![cfg.delta]
    } else {
        grid.delta.clone()
    };
    let ns = if grid.n.is_empty() {
        vec![cfg.n.unwrap_or(2)]
    } else {
        grid.n.clone()
    };
    let epss = if grid.eps.is_empty() {
        vec![cfg.eps]
    } else {
        grid.eps.clone()
    };

    let parsed: Vec<DiscoverySchedule> = schedules
        .iter()
        .map(|s| s.parse().map_err(|e| HarnessError::Internal(format!("{s}: {e}"))))
        .collect::<Result<_, _>>()?;
    let verdicts: Vec<LearnabilityVerdict> = parsed.par_iter().map(classify_schedule).collect();

    let mut csv = String::from("schedule,delta,N,eps,K0,class,sup_d1,finv_time_lower_bound,k0_upper_bound\n");
    // Curves of K0 against the first varied numeric axis, one per schedule.
    let mut curves: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let x_axis = if grid.delta.len() > 1 {
        Some("1/delta")
    } else if grid.n.len() > 1 {
        Some("N")
    } else if grid.eps.len() > 1 {
        Some("eps")
    } else {
        None
    };
    for ((spec, sched), verdict) in schedules.iter().zip(&parsed).zip(&verdicts) {
        let (lower, upper) = sched.bounds();
        let c = verdict.evidence.uniform_bound_c;
        for &delta in &deltas {
            for &n in &ns {
                for &eps in &epss {
                    let kk = k0(sched, n, delta).map_err(|e| HarnessError::Internal(e.to_string()))?;
                    let time_lb = match (&upper, c) {
                        (Some(f), Some(c)) => finv_lower_bound(f, c, delta, None).ok().map(|b| b.time_lower_bound),
                        _ => None,
                    };
                    let k0_ub = lower.as_ref().and_then(|f| k0_bound(f, n, delta).ok());
                    let _ = writeln!(
                        csv,
                        "{},{delta},{n},{eps},{},{},{},{},{}",
                        csv_field(spec),
                        k0_cell(&kk),
                        verdict.class.as_str(),
                        verdict.evidence.sup_d1,
                        opt_f64(time_lb),
                        opt_f64(k0_ub)
                    );
                    if let (Some(axis), Some(m)) = (x_axis, kk.finite()) {
                        let x = match axis {
                            "1/delta" => 1.0 / delta,
                            "N" => n as f64,
                            _ => eps,
                        };
                        curves.entry(spec.clone()).or_default().push((x, m as f64));
                    }
                }
            }
        }
    }
    let summary = format!(
        "sweep: {} cells over {} schedule(s)\n{}",
        grid.cells(),
        schedules.len(),
        schedules
            .iter()
            .zip(&verdicts)
            .map(|(s, v)| format!("  {s}: {}\n", v.class.as_str()))
            .collect::<String>()
    );
    let mut r = Report::new(cfg.experiment, Status::Pass, summary, csv);
    if let (true, Some(axis)) = (cfg.output.svg, x_axis) {
        let series: Vec<Series> = curves.into_iter().map(|(k, v)| Series::new(k, v)).collect();
        r.attach(
            "sweep.svg",
            line_chart("K0 across the grid", axis, "K0", &series, axis == "1/delta"),
        );
    }
    Ok(r)
}
