//! Acceptance suite. Each criterion prints one PASS or FAIL line; the
//! process fails if any criterion does.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{random_mdp, stationary_policies, strongly_connected};
use mdpu::harness::{parse_config, run_experiment, Report, Status};
use mdpu::learn::{lemma51_check, urmax_inner, LearnerConfig};
use mdpu::mdp::{opt_value, optimal_mixing_time, t_step_values, GroundMdp, OptOptions, Policy};
use mdpu::model::{
    classify_numerically, classify_schedule, k0, k0_bound, k0_target, ClassifyOptions, DeclaredBound,
    DiscoverySchedule, Learnability, K0,
};
use mdpu::sim::builders::{fully_aware, three_state_demo, EXPLORE};
use mdpu::sim::{nondiscovery_profile, Env, EnvOptions};
use mdpu::{ActionId, Mdp, StateId};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn field(row: &str, col: usize) -> &str {
    row.split(',').nth(col).unwrap_or("")
}

/// Criterion 1: the telescoping product `(t+2)/(2(t+1))`.
fn example41_closed_form() -> Outcome {
    let profile = nondiscovery_profile(&DiscoverySchedule::power_law(), 1, 1_000_000).unwrap();
    let mut worst = 0f64;
    let mut above_half = true;
    for (i, &p) in profile.iter().enumerate() {
        let t = (i + 1) as f64;
        worst = worst.max((p - (t + 2.0) / (2.0 * (t + 1.0))).abs());
        above_half &= p > 0.5;
    }
    outcome(
        worst <= 1e-9 && above_half,
        format!("max |error| {worst:.3e} over t<=1e6, all > 1/2: {above_half}"),
    )
}

/// Criterion 2: explore-forever Monte Carlo against the closed form.
fn example41_monte_carlo() -> Outcome {
    let cfg = parse_config(
        r#"{"schema":1,"experiment":"example41","seed":20240101,"replicas":100000,"max_steps":1000,"se_band":4}"#,
    )
    .unwrap();
    let report = run_experiment(&cfg).unwrap();
    let last = report.csv().lines().last().unwrap();
    let freq: f64 = field(last, 3).parse().unwrap();
    let closed: f64 = field(last, 4).parse().unwrap();
    let se: f64 = field(last, 5).parse().unwrap();
    let oracle = 1002.0 / 2002.0;
    let ok = report.status == Status::Pass && (closed - oracle).abs() < 1e-12 && (freq - oracle).abs() <= 4.0 * se;
    outcome(
        ok,
        format!(
            "frequency {freq} vs {oracle:.6} (se {se:.2e}, z {:.2})",
            (freq - oracle) / se
        ),
    )
}

/// Criterion 3: `K0` and the discovery frequency within `K0` explores.
fn lemma51() -> Outcome {
    let cases = [(0.2, 4u64, 0.2, 22u64, 0.9926), (0.5, 2, 0.1, 9, 0.9980)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, &(p, n, delta, want_k0, approx)) in cases.iter().enumerate() {
        let s = DiscoverySchedule::constant(p).unwrap();
        // Direct count: least m with m*p >= ln(4N/delta).
        let target = k0_target(n, delta).unwrap();
        let direct = (1..).find(|&m| m as f64 * p >= target).unwrap();
        let rep = lemma51_check(&s, n, delta, 100_000, 77 + i as u64).unwrap();
        let geometric = 1.0 - (1.0 - p).powi(want_k0 as i32);
        let case_ok = rep.k0 == want_k0
            && direct == want_k0
            && (rep.closed_form - geometric).abs() < 1e-12
            && (geometric - approx).abs() < 5e-5
            && rep.frequency >= 1.0 - delta / (4.0 * n as f64)
            && (rep.frequency - geometric).abs() <= 3.0 * rep.std_error;
        ok &= case_ok;
        parts.push(format!(
            "const {p}: K0={} freq={} closed={geometric:.4}",
            rep.k0, rep.frequency
        ));
    }
    outcome(ok, parts.join("; "))
}

/// Criterion 4: URMAX with escalation on the 3-state instance.
fn urmax_convergence() -> Outcome {
    let u = three_state_demo();
    let shape_ok = u.ground.n_states() == 3
        && u.ground.states().all(|s| u.ground.actions_at(s).count() <= 3)
        && u.schedule.to_string() == "constant:0.5";
    let cfg = parse_config(
        r#"{"schema":1,"experiment":"urmax-converge","seed":4242,"replicas":200,"eps":0.2,"delta":0.1,
            "instance":{"builder":"three_state_demo"},"schedule":"constant:0.5","required_fraction":0.9}"#,
    )
    .unwrap();
    let report = run_experiment(&cfg).unwrap();
    let passed = report.csv().lines().skip(1).filter(|l| l.ends_with(",true")).count();
    let line = report.summary.lines().nth(1).unwrap_or("").trim().to_string();
    outcome(
        shape_ok && report.status == Status::Pass && passed >= 180,
        format!("{passed}/200 seeds reached Opt-2eps; {line}"),
    )
}

fn with_explore_loops(m: &Mdp) -> Mdp {
    let mut out = m.clone();
    for s in m.states() {
        out.add_outcome(s, EXPLORE, s, 1.0, 0.0);
    }
    out
}

/// Criterion 5: with nothing hidden, URMAX is RMAX.
fn rmax_reduction() -> Outcome {
    let eps = 0.2;
    let mut instances = Vec::new();
    let mut seed = 0u64;
    while instances.len() < 20 {
        let n = 2 + (seed % 2) as usize;
        let m = random_mdp(1000 + seed, n, 2);
        seed += 1;
        if strongly_connected(&m) {
            instances.push(m);
        }
    }
    let solver = OptOptions::default();
    let (mut runs, mut good) = (0, 0);
    for (i, m) in instances.iter().enumerate() {
        let (_, _, mix) = optimal_mixing_time(m, eps, 10_000, &solver).unwrap();
        let t_m = mix.steps().unwrap().max(1);
        let opt = opt_value(m, eps, t_m, &solver).unwrap().value().unwrap();
        let k = m
            .states()
            .flat_map(|s| m.actions_at(s))
            .collect::<std::collections::BTreeSet<_>>()
            .len() as u64;
        let cfg = LearnerConfig {
            n: m.n_states() as u64,
            k,
            r_max: m.max_reward().unwrap().max(1.0),
            t: t_m,
            eps,
            delta: 0.1,
            start: StateId(0),
        };
        let u = Arc::new(fully_aware(m.clone(), DiscoverySchedule::constant(0.5).unwrap()));
        let eval = with_explore_loops(m);
        for r in 0..5u64 {
            let mut env =
                Env::reset_replica(Arc::clone(&u), StateId(0), 500 + i as u64, r, EnvOptions::default()).unwrap();
            let rep = urmax_inner(&mut env, &cfg, 5, 200, 2_000_000, &mut ()).unwrap();
            let learned = rep.policy.unwrap();
            let layers: Vec<Vec<ActionId>> = (0..t_m)
                .map(|t| m.states().map(|s| learned.action(t, s).unwrap()).collect())
                .collect();
            let v = t_step_values(&eval, &Policy::time_indexed(layers), t_m).unwrap();
            runs += 1;
            if v.min_value >= opt - eps {
                good += 1;
            }
        }
    }
    let frac = good as f64 / runs as f64;
    outcome(
        frac >= 0.95,
        format!("{good}/{runs} runs within eps of Opt on 20 instances"),
    )
}

/// Criterion 6: the classifier on the built-in schedules and tables.
fn classifier_suite() -> Outcome {
    let start = Instant::now();
    let s = |x: &str| x.parse::<DiscoverySchedule>().unwrap();
    let cases = [
        (s("powerlaw"), Learnability::Unlearnable),
        (s("constant:0.5"), Learnability::LearnablePolynomial),
        (s("harmonic:1"), Learnability::LearnablePolynomial),
        (s("loglog:1"), Learnability::LearnableExponential),
    ];
    let mut ok = cases.iter().all(|(sc, want)| classify_schedule(sc).class == *want);
    let tables = [
        (s("table:[0.5,0.25]"), Learnability::LearnablePolynomial),
        (s("table:[0.9,0.3,0.1]"), Learnability::LearnablePolynomial),
        (s("table:[0.5,0]"), Learnability::Unlearnable),
    ];
    for (sc, want) in &tables {
        let tagged = classify_schedule(sc).class;
        let numeric = classify_numerically(sc, &ClassifyOptions::default()).class;
        ok &= tagged == *want && numeric == *want;
    }
    let elapsed = start.elapsed();
    outcome(
        ok && elapsed < Duration::from_secs(1),
        format!("7 schedules classified in {:.3} s", elapsed.as_secs_f64()),
    )
}

/// Criterion 7: `K0 <= f^{-1}(ln(4N/delta))` for the harmonic lower bound.
fn k0_sandwich() -> Outcome {
    let c = 1.0;
    let bound = DeclaredBound::harmonic_lower(c);
    let s = DiscoverySchedule::harmonic(c).unwrap().with_bound(bound);
    let (lower, upper) = s.bounds();
    let (lower, upper) = (lower.unwrap(), upper.unwrap());
    let mut ok = lower == bound.f;
    let mut cells = Vec::new();
    for n in [1u64, 4, 16] {
        for delta in [0.1, 0.01, 0.001] {
            let m = match k0(&s, n, delta).unwrap() {
                K0::Finite(m) => m as f64,
                _ => f64::INFINITY,
            };
            let hi = k0_bound(&lower, n, delta).unwrap();
            // The closed-form upper bound on the sums gives the other side.
            let lo = k0_bound(&upper, n, delta).unwrap();
            ok &= m <= hi && m >= lo.floor();
            cells.push(format!("{m}<={hi:.0}"));
        }
    }
    outcome(ok, format!("3x3 grid: {}", cells.join(" ")))
}

/// Cesàro limit of a 1- or 2-state chain.
fn limit_matrix(p: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if p.len() == 1 {
        return vec![vec![1.0]];
    }
    let (a, b) = (p[0][1], p[1][0]);
    if a + b == 0.0 {
        vec![vec![1.0, 0.0], vec![0.0, 1.0]]
    } else {
        let row = vec![b / (a + b), a / (a + b)];
        vec![row.clone(), row]
    }
}

/// Independent `Opt(M, eps, T)`: closed-form gains and forward propagation
/// of the state distribution.
fn brute_force_opt(m: &Mdp, eps: f64, horizon: usize, cap: usize) -> Option<f64> {
    let n = m.n_states();
    let mut best: Option<f64> = None;
    for pi in stationary_policies(m) {
        let mut p = vec![vec![0.0; n]; n];
        let mut r = vec![0.0; n];
        for s in m.states() {
            let row = m.row(s, pi.action(0, s)).unwrap();
            for o in &row.outcomes {
                p[s.0][o.next.0] += o.prob;
                r[s.0] += o.prob * o.reward;
            }
        }
        let lim = limit_matrix(&p);
        let gains: Vec<f64> = (0..n).map(|s| (0..n).map(|j| lim[s][j] * r[j]).sum()).collect();
        let gain = gains.iter().copied().fold(f64::INFINITY, f64::min);
        // T-step averages from every start, for T up to cap.
        let mut dist: Vec<Vec<f64>> = (0..n)
            .map(|s| (0..n).map(|j| f64::from(u8::from(s == j))).collect())
            .collect();
        let mut totals = vec![0.0; n];
        let mut last_fail = 0;
        for t in 1..=cap {
            for s in 0..n {
                totals[s] += (0..n).map(|j| dist[s][j] * r[j]).sum::<f64>();
                let next: Vec<f64> = (0..n).map(|k| (0..n).map(|j| dist[s][j] * p[j][k]).sum()).collect();
                dist[s] = next;
            }
            if totals.iter().any(|&v| v / (t as f64) < gain - eps - 1e-9) {
                last_fail = t;
            }
        }
        let mixing = last_fail + 1;
        if mixing <= horizon && best.is_none_or(|b| gain > b) {
            best = Some(gain);
        }
    }
    best
}

fn fixtures() -> Vec<Mdp> {
    let mut out = vec![
        GroundMdp::new(1)
            .with_outcome(0, 1, 0, 1.0, 0.3)
            .with_outcome(0, 2, 0, 1.0, 0.7),
        // Periodic under a1.
        GroundMdp::new(2)
            .with_outcome(0, 1, 1, 1.0, 1.0)
            .with_outcome(1, 1, 0, 1.0, 0.0)
            .with_outcome(1, 2, 1, 1.0, 0.4),
        // Two absorbing states.
        GroundMdp::new(2)
            .with_outcome(0, 1, 0, 1.0, 0.2)
            .with_outcome(0, 2, 1, 0.5, 0.0)
            .with_outcome(0, 2, 0, 0.5, 0.0)
            .with_outcome(1, 1, 1, 1.0, 0.9),
        // Slow mixing.
        GroundMdp::new(2)
            .with_outcome(0, 1, 0, 0.95, 0.0)
            .with_outcome(0, 1, 1, 0.05, 0.0)
            .with_outcome(1, 1, 1, 0.9, 1.0)
            .with_outcome(1, 1, 0, 0.1, 1.0)
            .with_outcome(1, 2, 0, 1.0, 0.5),
    ];
    for seed in 0..40 {
        out.push(random_mdp(seed, 1 + (seed % 2) as usize, 2));
    }
    out
}

/// Criterion 8: `opt_value` against an independent oracle.
fn oracle_equivalence() -> Outcome {
    let solver = OptOptions::default();
    let mut worst = 0f64;
    let mut mismatched = 0;
    let mut checked = 0;
    for m in fixtures() {
        for eps in [0.05, 0.2] {
            for horizon in [1usize, 3, 10, 50, 400] {
                let ours = opt_value(&m, eps, horizon, &solver).unwrap().value();
                let theirs = brute_force_opt(&m, eps, horizon, 4096.max(horizon));
                checked += 1;
                match (ours, theirs) {
                    (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
                    (None, None) => {}
                    _ => mismatched += 1,
                }
            }
        }
    }
    outcome(
        worst <= 1e-6 && mismatched == 0,
        format!("{checked} (instance, eps, T) cases, max |diff| {worst:.2e}, {mismatched} existence mismatches"),
    )
}

fn rerun_identical(text: &str) -> bool {
    let cfg = parse_config(text).unwrap();
    let a: Report = run_experiment(&cfg).unwrap();
    let b: Report = run_experiment(&cfg).unwrap();
    a.artifacts == b.artifacts && a.summary == b.summary
}

/// Criterion 9: every experiment kind reruns byte for byte.
fn determinism() -> Outcome {
    let configs = [
        r#"{"schema":1,"experiment":"validate","seed":1,"instance":{"builder":"random","states":3,"max_actions":3,"seed":5}}"#,
        r#"{"schema":1,"experiment":"solve","seed":1,"instance":{"builder":"three_state_demo"}}"#,
        r#"{"schema":1,"experiment":"classify","seed":1,"schedules":["powerlaw","table:[0.5,0.25]"]}"#,
        r#"{"schema":1,"experiment":"example41","seed":3,"replicas":5000,"max_steps":300,"output":{"svg":true}}"#,
        r#"{"schema":1,"experiment":"lemma51","seed":3,"replicas":5000,"schedule":"constant:0.2","n":4,"delta":0.2}"#,
        r#"{"schema":1,"experiment":"urmax-converge","seed":3,"replicas":20,"output":{"svg":true}}"#,
        r#"{"schema":1,"experiment":"sweep","seed":3,"grid":{"schedule":["constant:0.5","harmonic:1"],"n":[1,2,4]},"output":{"svg":true}}"#,
    ];
    let same = configs.iter().filter(|c| rerun_identical(c)).count();
    outcome(
        same == configs.len(),
        format!("{same}/{} experiment kinds byte-identical on rerun", configs.len()),
    )
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("1 example41 closed form", Duration::from_secs(5), example41_closed_form),
        (
            "2 example41 monte carlo",
            Duration::from_secs(60),
            example41_monte_carlo,
        ),
        ("3 K0 discovery frequency", Duration::from_secs(60), lemma51),
        ("4 URMAX convergence", Duration::from_secs(600), urmax_convergence),
        ("5 RMAX reduction", Duration::from_secs(600), rmax_reduction),
        ("6 classifier suite", Duration::from_secs(1), classifier_suite),
        ("7 K0 sandwich", Duration::from_secs(60), k0_sandwich),
        ("8 oracle equivalence", Duration::from_secs(600), oracle_equivalence),
        ("9 determinism", Duration::from_secs(600), determinism),
    ];
    let mut failures = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed <= limit;
        failures += usize::from(!pass);
        println!(
            "{} criterion {name}: {} [{:.2} s, limit {} s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} passed, {failures} failed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
