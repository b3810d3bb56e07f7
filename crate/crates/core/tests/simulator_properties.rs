mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use common::*;
use mdpu::learn::{urmax_inner, LearnerConfig};
use mdpu::model::{DiscoverySchedule, MdpuInstance};
use mdpu::rng::{stream, Purpose, Rng};
use mdpu::sim::builders::{example41, fully_aware, lower_bound_instance_with, three_state_demo, EXPLORE};
use mdpu::sim::{run_agent, AuditedEnv, AwarenessScope, Env, EnvOptions, Environment, Trace};
use mdpu::{ActionId, StateId};
use proptest::prelude::*;
use rand::Rng as _;

fn random_agent(rng: &mut Rng) -> impl FnMut(&dyn Environment) -> ActionId + '_ {
    move |e: &dyn Environment| {
        let known: Vec<ActionId> = e.known_actions(e.current_state()).unwrap().iter().copied().collect();
        let i = rng.random_range(0..=known.len());
        if i == known.len() {
            e.explore_action()
        } else {
            known[i]
        }
    }
}

fn random_run(u: &Arc<MdpuInstance>, seed: u64, steps: u64, opts: EnvOptions) -> Trace {
    let mut env = Env::reset_replica(Arc::clone(u), StateId(0), seed, 0, opts).unwrap();
    let mut rng = stream(seed, 0, Purpose::Agent);
    let mut agent = random_agent(&mut rng);
    run_agent(&mut env, &mut agent, steps).unwrap()
}

fn instances() -> Vec<Arc<MdpuInstance>> {
    vec![
        Arc::new(example41(1.0, 2.0).unwrap()),
        Arc::new(three_state_demo()),
        Arc::new(lower_bound_instance_with(3, 2, 0.5, 1.0, DiscoverySchedule::constant(0.3).unwrap()).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn same_seed_same_trace(seed in any::<u64>(), which in 0usize..3) {
        let u = &instances()[which];
        let a = random_run(u, seed, 300, EnvOptions::default());
        let b = random_run(u, seed, 300, EnvOptions::default());
        prop_assert_eq!(a.to_csv(), b.to_csv());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn awareness_only_grows_and_counters_follow_the_law(seed in any::<u64>(), which in 0usize..3, global in any::<bool>()) {
        let u = &instances()[which];
        let opts = EnvOptions {
            awareness: if global { AwarenessScope::Global } else { AwarenessScope::PerState },
            ..EnvOptions::default()
        };
        let mut env = Env::reset_replica(Arc::clone(u), StateId(0), seed, 0, opts).unwrap();
        let mut rng = stream(seed, 0, Purpose::Agent);
        let mut agent = random_agent(&mut rng);
        let mut expected: BTreeMap<StateId, u64> = BTreeMap::new();
        for _ in 0..400 {
            let before = env.state().clone();
            let s = env.current_state();
            let a = agent(&env);
            let out = env.step(a).unwrap();
            let after = env.state();
            prop_assert!(before.known_states.is_subset(&after.known_states));
            for (st, acts) in &before.known_actions {
                prop_assert!(acts.is_subset(&after.known_actions[st]));
            }
            if a == EXPLORE {
                prop_assert_eq!(out.next_state, s);
                let c = expected.entry(s).or_insert(0);
                *c = if out.discovered_action.is_some() { 0 } else { *c + 1 };
            } else if let Some(d) = out.discovered_state {
                expected.insert(d, 0);
            }
            for (st, c) in &expected {
                prop_assert_eq!(after.explore_counter[st], *c);
            }
            if let Some(d) = out.discovered_action {
                prop_assert!(!before.known_actions[&s].contains(&d));
                prop_assert!(u.ground.has_action(s, d));
            }
        }
    }
}

#[test]
fn learner_sees_only_the_firewall() {
    let u = Arc::new(three_state_demo());
    for seed in 0..10 {
        let env = Env::reset(Arc::clone(&u), StateId(0), seed).unwrap();
        let mut audited = AuditedEnv::new(env);
        let cfg = LearnerConfig {
            n: 3,
            k: 3,
            r_max: 1.0,
            t: 4,
            eps: 0.2,
            delta: 0.1,
            start: StateId(0),
        };
        urmax_inner(&mut audited, &cfg, 9, 20, 50_000, &mut ()).unwrap();
        assert!(audited.violations.is_empty(), "{:?}", audited.violations);
        assert!(audited.steps > 0);
    }
}

#[test]
fn sampled_transitions_follow_the_model() {
    for seed in 0..6u64 {
        let m = random_mdp(seed, 3, 2);
        let u = Arc::new(fully_aware(m.clone(), DiscoverySchedule::constant(0.5).unwrap()));
        for st in m.states() {
            for row in m.rows_at(st) {
                let replicas = 4000u64;
                let mut counts: BTreeMap<StateId, u64> = BTreeMap::new();
                let mut reward_ok = true;
                for r in 0..replicas {
                    let mut env = Env::reset_replica(Arc::clone(&u), st, seed, r, EnvOptions::default()).unwrap();
                    let out = env.step(row.action).unwrap();
                    *counts.entry(out.next_state).or_default() += 1;
                    reward_ok &= m.reward(st, out.next_state, row.action) == Some(out.reward);
                }
                assert!(reward_ok);
                for o in &row.outcomes {
                    let p = o.prob;
                    let freq = counts.get(&o.next).copied().unwrap_or(0) as f64 / replicas as f64;
                    let se = (p * (1.0 - p) / replicas as f64).sqrt();
                    assert!(
                        (freq - p).abs() <= 4.0 * se + 1e-12,
                        "{st} {} -> {}: {freq} vs {p}",
                        row.action,
                        o.next
                    );
                }
                assert!(counts.keys().all(|k| row.outcomes.iter().any(|o| o.next == *k)));
            }
        }
    }
}

#[test]
fn first_explore_discovers_at_the_lifted_rate() {
    let sched = DiscoverySchedule::constant(0.3).unwrap();
    let u = Arc::new(lower_bound_instance_with(2, 3, 0.5, 1.0, sched.clone()).unwrap());
    // s1 hides three actions.
    let j = u.hidden_count(s(1)) as u64;
    assert_eq!(j, 3);
    let p = sched.d_eval(j, 1).unwrap();
    let replicas = 20_000u64;
    let hits = (0..replicas)
        .filter(|&r| {
            let mut env = Env::reset_replica(Arc::clone(&u), s(1), 9, r, EnvOptions::default()).unwrap();
            env.step(EXPLORE).unwrap().discovered_action.is_some()
        })
        .count() as f64;
    let freq = hits / replicas as f64;
    let se = (p * (1.0 - p) / replicas as f64).sqrt();
    assert!((freq - p).abs() <= 4.0 * se, "{freq} vs {p}");
}

#[test]
fn replicas_use_disjoint_streams() {
    let u = Arc::new(three_state_demo());
    let a = random_run(&u, 5, 200, EnvOptions::default());
    let mut env = Env::reset_replica(Arc::clone(&u), s(0), 5, 1, EnvOptions::default()).unwrap();
    let mut it = a.actions();
    let mut agent = |_: &dyn Environment| it.next().unwrap();
    // Same actions, different stream: the outcomes differ somewhere.
    let b = run_agent(&mut env, &mut agent, 200);
    match b {
        Ok(b) => assert_ne!(a.steps, b.steps),
        Err(aborted) => assert!(aborted.trace.steps.len() < 200),
    }
}
