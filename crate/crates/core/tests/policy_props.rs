use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prophetlab_core::benchmarks::expected_max;
use prophetlab_core::generators::{random_instance, random_small_instance};
use prophetlab_core::kertz::{solve_beta, DEFAULT_GRID};
use prophetlab_core::policies::{
    decompose, run_restricted_small, run_time_policy, single_threshold_baseline, small_prophets_policy,
    SmallnessMode,
};
use prophetlab_core::sim::{run_stateless, sample_timestamps};
use prophetlab_core::{benchmarks::backward_induction, Distribution, Instance, KertzSolution};

fn sol() -> KertzSolution {
    KertzSolution::solve(solve_beta(1e-10).unwrap(), DEFAULT_GRID).unwrap()
}

#[test]
fn timestamps_are_uniform() {
    let mut all: Vec<f64> = (0..200).flat_map(|s| sample_timestamps(50, s)).collect();
    all.sort_by(f64::total_cmp);
    let n = all.len() as f64;
    let d = all
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).max((i + 1) as f64 / n - x))
        .fold(0.0, f64::max);
    // Kolmogorov critical value at the 1% level
    assert!(d * n.sqrt() < 1.628, "KS statistic {}", d * n.sqrt());
}

#[test]
fn decomposition_is_monotone() {
    let mut r = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let n = r.gen_range(2..=30);
        let inst = random_instance(&mut r, n, 4, 10.0);
        for mode in [SmallnessMode::EpsSmall, SmallnessMode::EpsTSmall] {
            let eps = r.gen_range(0.01..0.4);
            let mut last = f64::INFINITY;
            for k in 0..=n {
                let d = decompose(&inst, eps, k, mode).unwrap();
                assert!(d.t_star <= last);
                assert!(d.big_indices.len() <= k);
                last = d.t_star;
            }
            let lo = decompose(&inst, eps, 0, mode).unwrap();
            let hi = decompose(&inst, (eps + 0.05).min(0.49), 0, mode).unwrap();
            for (a, b) in lo.critical.iter().zip(&hi.critical) {
                assert!(b <= a);
            }
        }
    }
}

#[test]
fn simulated_values_stay_below_max() {
    let s = sol();
    let mut r = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..5 {
        let inst = random_small_instance(&mut r, 200, 0.05, 3, 10.0);
        let max = expected_max(&inst).unwrap();
        let pol = small_prophets_policy(&inst, 0.05, &s).unwrap();
        let res = run_time_policy(&inst, &pol, 50_000, seed);
        assert!(res.mean <= max + 3.0 * res.half_width_95);
        let (base, _) = single_threshold_baseline(&inst, 50_000, seed).unwrap();
        assert!(base.mean <= max + 3.0 * base.half_width_95);
        let order: Vec<usize> = (0..inst.len()).collect();
        let bi = backward_induction(&inst, &order).unwrap();
        let st = run_stateless(&inst, &bi, 50_000, seed);
        assert!(st.mean <= max + 3.0 * st.half_width_95);
        assert!((st.mean - bi.value).abs() <= 4.0 * st.half_width_95);
    }
}

fn restricted_gap(base: Distribution, n: usize, eps: f64, trials: u64) -> (f64, f64, u64, u64) {
    let s = sol();
    let inst = Instance::iid(base.power_cdf(n as u32).unwrap(), n).unwrap();
    let max = expected_max(&inst).unwrap();
    let free = run_time_policy(&inst, &small_prophets_policy(&inst, eps, &s).unwrap(), trials, 0);
    let rr = run_restricted_small(&inst, eps, &s, trials, 0).unwrap();
    let gap = (free.mean - rr.result.mean) / max;
    let ci = 2.0 * (free.half_width_95 + rr.result.half_width_95) / max;
    (gap, ci, rr.max_stop_index, rr.stop_limit)
}

#[test]
fn restricted_rule_respects_its_stop_limit_and_loses_little() {
    let eps = 0.05;
    // loss stays within 2 eps MAX on a two-atom law with a heavy zero
    let (gap, ci, stop, limit) =
        restricted_gap(Distribution::new([(0.0, 0.25), (1.0, 0.75)]).unwrap(), 1500, eps, 200_000);
    assert!(stop <= limit);
    assert!(gap <= 2.0 * eps + ci, "gap {gap}");
    let (gap, ci, stop, limit) =
        restricted_gap(Distribution::new([(0.0, 0.05), (1.0, 0.95)]).unwrap(), 1500, eps, 200_000);
    assert!(stop <= limit);
    assert!(gap <= 0.05 + ci, "gap {gap}");
}

#[test]
fn restricted_rule_needs_enough_variables() {
    let base = Distribution::new([(0.0, 0.25), (1.0, 0.75)]).unwrap();
    let inst = Instance::iid(base.power_cdf(500).unwrap(), 500).unwrap();
    assert!(run_restricted_small(&inst, 0.05, &sol(), 10, 0).is_err());
}
