//! Experiment configuration: a versioned JSON document.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::learn::Thresholds;
use crate::mdp::{ActionId, GroundMdp, StateId};
use crate::model::{DiscoverySchedule, MdpuInstance};
use crate::rng::{stream, Purpose};
use crate::sim::builders::{self, BuildError};
use crate::sim::EnvOptions;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Validate,
    Solve,
    Classify,
    Example41,
    Lemma51,
    UrmaxConverge,
    Sweep,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Validate => "validate",
            ExperimentKind::Solve => "solve",
            ExperimentKind::Classify => "classify",
            ExperimentKind::Example41 => "example41",
            ExperimentKind::Lemma51 => "lemma51",
            ExperimentKind::UrmaxConverge => "urmax-converge",
            ExperimentKind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub state: usize,
    pub action: u32,
    pub next: usize,
    pub prob: f64,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Awareness {
    pub state: usize,
    pub actions: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    Example41 {
        r1: f64,
        r2: f64,
    },
    LowerBound {
        s0_size: usize,
        hidden: u32,
        r1: f64,
        r_max: f64,
    },
    ThreeStateDemo,
    /// Fully aware random MDP drawn from the fixture stream of `seed`.
    Random {
        states: usize,
        max_actions: u32,
        seed: u64,
    },
    Explicit {
        states: usize,
        edges: Vec<Edge>,
        aware: Vec<Awareness>,
        explore_action: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        explore_reward_hit: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        explore_reward_miss: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r_max: Option<f64>,
    },
}

impl InstanceSpec {
    /// Build the instance. `schedule` replaces the builder's own schedule.
    pub fn build(&self, schedule: Option<&DiscoverySchedule>) -> Result<MdpuInstance, BuildError> {
        let mut u = match self {
            InstanceSpec::Example41 { r1, r2 } => builders::example41(*r1, *r2)?,
            InstanceSpec::LowerBound {
                s0_size,
                hidden,
                r1,
                r_max,
            } => builders::lower_bound_instance_with(*s0_size, *hidden, *r1, *r_max, DiscoverySchedule::power_law())?,
            InstanceSpec::ThreeStateDemo => builders::three_state_demo(),
            InstanceSpec::Random {
                states,
                max_actions,
                seed,
            } => {
                if *states == 0 {
                    return Err(BuildError::NoStates);
                }
                let mut rng = stream(*seed, 0, Purpose::Fixture);
                let m = builders::random_ground(&mut rng, *states, (*max_actions).max(1));
                builders::fully_aware(m, DiscoverySchedule::constant(0.5).expect("valid"))
            }
            InstanceSpec::Explicit {
                states,
                edges,
                aware,
                explore_action,
                explore_reward_hit,
                explore_reward_miss,
                r_max,
            } => {
                let mut m = GroundMdp::new(*states);
                for e in edges {
                    m.add_outcome(StateId(e.state), ActionId(e.action), StateId(e.next), e.prob, e.reward);
                }
                let g0: BTreeMap<StateId, BTreeSet<ActionId>> = aware
                    .iter()
                    .map(|a| (StateId(a.state), a.actions.iter().map(|&x| ActionId(x)).collect()))
                    .collect();
                let mut u = MdpuInstance::new(m, g0, ActionId(*explore_action), DiscoverySchedule::power_law());
                if let Some(h) = explore_reward_hit {
                    u.explore_reward_hit = h.clone();
                }
                if let Some(h) = explore_reward_miss {
                    u.explore_reward_miss = h.clone();
                }
                u.r_max = *r_max;
                u
            }
        };
        if let Some(s) = schedule {
            u.schedule = s.clone();
        }
        Ok(u)
    }
}

/// Grid for `sweep`. Empty axes keep the base value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub schedule: Vec<String>,
    pub delta: Vec<f64>,
    pub n: Vec<u64>,
    pub eps: Vec<f64>,
}

impl GridSpec {
    pub fn axes(&self) -> usize {
        [
            self.schedule.is_empty(),
            self.delta.is_empty(),
            self.n.is_empty(),
            self.eps.is_empty(),
        ]
        .iter()
        .filter(|e| !**e)
        .count()
    }

    pub fn cells(&self) -> usize {
        [self.schedule.len(), self.delta.len(), self.n.len(), self.eps.len()]
            .iter()
            .map(|&l| l.max(1))
            .product()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    pub svg: bool,
}

/// Parsed configuration. After [`parse_config`] every optional field that
/// the experiment uses holds a concrete value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub experiment: ExperimentKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceSpec>,
    /// Schedule spec such as `constant:0.5`; overrides the instance's own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<String>,
    /// Schedules for `classify`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedules: Vec<String>,
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// `N` for `lemma51` and `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    /// Steps per replica for `example41`, horizon for `solve`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_phases: Option<u32>,
    /// Step budget of each inner URMAX run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_step_budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Thresholds>,
    #[serde(default)]
    pub env: EnvOptions,
    /// Width of the statistical acceptance band, in standard errors.
    #[serde(default = "default_se_band")]
    pub se_band: f64,
    /// Share of replicas that must succeed in `urmax-converge`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub required_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_grid_cap")]
    pub grid_cap: usize,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_replicas() -> u64 {
    1000
}
fn default_eps() -> f64 {
    0.2
}
fn default_delta() -> f64 {
    0.1
}
fn default_se_band() -> f64 {
    3.0
}
fn default_grid_cap() -> usize {
    10_000
}

/// Default thresholds for learner experiments: the formula values are
/// out of reach beyond the first phase.
pub fn default_learner_thresholds() -> Thresholds {
    Thresholds::capped(30, 2000)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", lines.join("\n"))
    }
}

impl std::error::Error for ConfigErrors {}

fn issue(path: &str, message: impl Into<String>) -> ConfigIssue {
    ConfigIssue {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Canonical form of a schedule spec.
fn canonical_schedule(path: &str, spec: &str, issues: &mut Vec<ConfigIssue>) -> String {
    match spec.parse::<DiscoverySchedule>() {
        Ok(s) => s.to_string(),
        Err(e) => {
            issues.push(issue(path, e.to_string()));
            spec.to_string()
        }
    }
}

/// Parse, fill defaults for the chosen experiment and validate.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigErrors(vec![issue(&path, e.into_inner().to_string())])
    })?;
    let mut issues = Vec::new();

    if cfg.schema != SCHEMA_VERSION {
        issues.push(issue(
            "schema",
            format!("unsupported schema version {}, expected {SCHEMA_VERSION}", cfg.schema),
        ));
    }
    if cfg.replicas == 0 {
        issues.push(issue("replicas", "must be at least 1"));
    }
    if !(cfg.eps > 0.0) {
        issues.push(issue("eps", "must be positive"));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        issues.push(issue("delta", "must lie in (0,1)"));
    }
    if !(cfg.se_band > 0.0) {
        issues.push(issue("se_band", "must be positive"));
    }
    if let Some(s) = cfg.schedule.take() {
        cfg.schedule = Some(canonical_schedule("schedule", &s, &mut issues));
    }
    let schedules = std::mem::take(&mut cfg.schedules);
    cfg.schedules = schedules
        .iter()
        .enumerate()
        .map(|(i, s)| canonical_schedule(&format!("schedules[{i}]"), s, &mut issues))
        .collect();

    use ExperimentKind::*;
    match cfg.experiment {
        Validate | Solve => {
            cfg.instance.get_or_insert(InstanceSpec::Example41 { r1: 1.0, r2: 2.0 });
            if cfg.experiment == Solve {
                cfg.max_steps.get_or_insert(100);
            }
        }
        Classify => {
            if cfg.schedules.is_empty() {
                cfg.schedules = match &cfg.schedule {
                    Some(s) => vec![s.clone()],
                    None => ["powerlaw", "constant:0.5", "harmonic:1", "loglog:1"]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                };
            }
        }
        Example41 => {
            cfg.instance.get_or_insert(InstanceSpec::Example41 { r1: 1.0, r2: 2.0 });
            cfg.max_steps.get_or_insert(1000);
        }
        Lemma51 => {
            cfg.schedule.get_or_insert_with(|| "constant:0.5".into());
            cfg.n.get_or_insert(2);
        }
        UrmaxConverge => {
            cfg.instance.get_or_insert(InstanceSpec::ThreeStateDemo);
            cfg.max_phases.get_or_insert(7);
            cfg.inner_step_budget.get_or_insert(100_000);
            cfg.thresholds.get_or_insert_with(default_learner_thresholds);
            cfg.required_fraction.get_or_insert(0.9);
        }
        Sweep => {
            cfg.schedule.get_or_insert_with(|| "constant:0.5".into());
            cfg.n.get_or_insert(2);
            match &mut cfg.grid {
                None => issues.push(issue("grid", "sweep needs a grid")),
                Some(g) => {
                    let axes = g.axes();
                    if axes == 0 {
                        issues.push(issue("grid", "grid is empty"));
                    } else if axes > 2 {
                        issues.push(issue(
                            "grid",
                            format!("grid varies {axes} parameters, at most 2 allowed"),
                        ));
                    }
                    if g.cells() > cfg.grid_cap {
                        issues.push(issue(
                            "grid",
                            format!("{} cells exceed grid_cap={}", g.cells(), cfg.grid_cap),
                        ));
                    }
                    let specs = std::mem::take(&mut g.schedule);
                    g.schedule = specs
                        .iter()
                        .enumerate()
                        .map(|(i, s)| canonical_schedule(&format!("grid.schedule[{i}]"), s, &mut issues))
                        .collect();
                    for (i, d) in g.delta.iter().enumerate() {
                        if !(*d > 0.0 && *d < 1.0) {
                            issues.push(issue(&format!("grid.delta[{i}]"), "must lie in (0,1)"));
                        }
                    }
                    for (i, n) in g.n.iter().enumerate() {
                        if *n == 0 {
                            issues.push(issue(&format!("grid.n[{i}]"), "must be at least 1"));
                        }
                    }
                    for (i, e) in g.eps.iter().enumerate() {
                        if !(*e > 0.0) {
                            issues.push(issue(&format!("grid.eps[{i}]"), "must be positive"));
                        }
                    }
                }
            }
        }
    }
    if cfg.n == Some(0) {
        issues.push(issue("n", "must be at least 1"));
    }
    if cfg.max_steps == Some(0) {
        issues.push(issue("max_steps", "must be at least 1"));
    }
    if let Some(f) = cfg.required_fraction {
        if !(0.0..=1.0).contains(&f) {
            issues.push(issue("required_fraction", "must lie in [0,1]"));
        }
    }
    if let Some(inst) = &cfg.instance {
        let sched = cfg.schedule.as_deref().and_then(|s| s.parse().ok());
        if let Err(e) = inst.build(sched.as_ref()) {
            issues.push(issue("instance", e.to_string()));
        }
    }

    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(issues))
    }
}

/// Pretty JSON, the form echoed by the CLI. Parsing it yields `cfg` again.
pub fn emit_config(cfg: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

impl ExperimentConfig {
    pub fn schedule_value(&self) -> Option<DiscoverySchedule> {
        self.schedule
            .as_deref()
            .map(|s| s.parse().expect("validated at parse time"))
    }

    pub fn build_instance(&self) -> Option<MdpuInstance> {
        let sched = self.schedule_value();
        self.instance
            .as_ref()
            .map(|i| i.build(sched.as_ref()).expect("validated at parse time"))
    }
}
