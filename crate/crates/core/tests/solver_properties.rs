mod common;

use std::sync::Arc;

use common::*;
use mdpu::mdp::{
    long_run_values, mixing_time, opt_value, optimal_t_step_policy, t_step_values, LongRunOptions, MixingTime,
    OptOptions, Policy,
};
use mdpu::model::DiscoverySchedule;
use mdpu::sim::builders::fully_aware;
use mdpu::sim::{Env, Environment};
use mdpu::{ExactMdp, Rational64};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reward_scaling_keeps_the_argmax(seed in any::<u64>(), n in 1usize..=3, k in 1u32..=3, h in 1usize..=12,
                                       exp in -2i32..=3) {
        let m = random_mdp(seed, n, k);
        let c = 2f64.powi(exp);
        let mut scaled = m.clone();
        scaled.scale_rewards(c);
        let (p1, v1) = optimal_t_step_policy(&m, h).unwrap();
        let (p2, v2) = optimal_t_step_policy(&scaled, h).unwrap();
        prop_assert_eq!(p1, p2);
        for (x, y) in v1.per_start_value.iter().zip(&v2.per_start_value) {
            prop_assert_eq!(x * c, *y);
        }
    }

    #[test]
    fn exact_and_float_backward_induction_agree(seed in any::<u64>(), n in 1usize..=3, h in 1usize..=8) {
        let m = random_mdp(seed, n, 2);
        let exact: ExactMdp = m.map_scalar(|x| {
            Rational64::new((x * 100.0).round() as i64, 100)
        });
        let (pf, vf) = optimal_t_step_policy(&m, h).unwrap();
        let (_, ve) = optimal_t_step_policy(&exact, h).unwrap();
        for (f, e) in vf.per_start_value.iter().zip(&ve.per_start_value) {
            let e = *e.numer() as f64 / *e.denom() as f64;
            prop_assert!((f - e).abs() < 1e-9);
        }
        // The exact values of the float argmax are optimal too.
        let ve2 = t_step_values(&exact, &pf, h).unwrap();
        prop_assert_eq!(ve2.per_start_value, ve.per_start_value);
    }

    #[test]
    fn opt_is_monotone_in_the_horizon(seed in any::<u64>(), n in 1usize..=3) {
        let m = random_mdp(seed, n, 2);
        let opts = OptOptions::default();
        let mut prev = f64::NEG_INFINITY;
        for t in [1usize, 2, 4, 8, 16, 64] {
            if let Some(v) = opt_value(&m, 0.1, t, &opts).unwrap().value() {
                prop_assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn mixing_time_is_monotone_in_eps(seed in any::<u64>(), n in 1usize..=3) {
        let m = random_mdp(seed, n, 2);
        let lr = LongRunOptions::default();
        for pi in stationary_policies(&m) {
            let mut prev = usize::MAX;
            for eps in [0.01, 0.05, 0.1, 0.2, 0.5] {
                let steps = match mixing_time(&m, &pi, eps, 4096, &lr).unwrap() {
                    MixingTime::Steps(t) => t,
                    MixingTime::ExceedsCap => usize::MAX,
                };
                prop_assert!(steps <= prev, "eps {} gave {} after {}", eps, steps, prev);
                prev = steps;
            }
        }
    }
}

#[test]
fn optimal_policy_dominates_arbitrary_policies() {
    // 200 instances with 20 random time-indexed policies each.
    for seed in 0..200u64 {
        let n = 1 + (seed % 3) as usize;
        let m = random_mdp(seed, n, 3);
        let h = 1 + (seed % 10) as usize;
        let (_, best) = optimal_t_step_policy(&m, h).unwrap();
        for j in 0..20 {
            let pi = random_time_indexed(&m, h, seed * 100 + j);
            let v = t_step_values(&m, &pi, h).unwrap();
            for st in m.states() {
                assert!(
                    v.value_at(st) <= best.value_at(st) + 1e-12,
                    "seed {seed} policy {j} state {st}"
                );
            }
        }
    }
}

fn monte_carlo(m: &mdpu::Mdp, pi: &Policy, horizon: usize, replicas: u64, seed: u64) -> (f64, f64) {
    let u = Arc::new(fully_aware(m.clone(), DiscoverySchedule::constant(0.5).unwrap()));
    let mut sum = 0.0;
    let mut sq = 0.0;
    for r in 0..replicas {
        let mut env = Env::reset_replica(Arc::clone(&u), s(0), seed, r, Default::default()).unwrap();
        let mut total = 0.0;
        for t in 0..horizon {
            let st = env.current_state();
            total += env.step(pi.action(t, st)).unwrap().reward;
        }
        let avg = total / horizon as f64;
        sum += avg;
        sq += avg * avg;
    }
    let n = replicas as f64;
    let mean = sum / n;
    let var = (sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

#[test]
fn simulated_returns_match_exact_values() {
    for seed in 0..16u64 {
        let m = random_mdp(seed, 3, 2);
        let pi = random_time_indexed(&m, 10, seed);
        let exact = t_step_values(&m, &pi, 10).unwrap().value_at(s(0));
        let (mean, se) = monte_carlo(&m, &pi, 10, 4000, seed);
        assert!(
            (mean - exact).abs() <= 4.0 * se + 1e-12,
            "seed {seed}: {mean} vs {exact} (se {se})"
        );
    }
}

#[test]
fn long_run_value_matches_long_simulation() {
    let mut checked = 0;
    for seed in 0..8u64 {
        let m = random_mdp(seed, 2, 2);
        if !strongly_connected(&m) {
            continue;
        }
        for pi in stationary_policies(&m) {
            let Ok(lr) = long_run_values(&m, &pi, &LongRunOptions::default()) else {
                continue;
            };
            let (mean, se) = monte_carlo(&m, &pi, 2000, 200, seed);
            let exact_t = t_step_values(&m, &pi, 2000).unwrap().value_at(s(0));
            assert!((mean - exact_t).abs() <= 4.0 * se + 1e-12);
            assert!((exact_t - lr.value_at(s(0))).abs() < 5e-3, "seed {seed}");
            checked += 1;
        }
    }
    assert!(checked >= 4, "only {checked} policies checked");
}
