use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prophetlab_core::benchmarks::{
    backward_induction, eval_policy, expected_kth_max, expected_max, opt_free_order, opt_random_order, utility,
};
use prophetlab_core::generators::{frequent_instance, random_instance};
use prophetlab_core::StatelessPolicy;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn dominance_chain() {
    let mut r = rng(1);
    for _ in 0..60 {
        let n = r.gen_range(1..=12);
        let inst = random_instance(&mut r, n, 4, 10.0);
        let max = expected_max(&inst).unwrap();
        let (free, order) = opt_free_order(&inst).unwrap();
        let random = opt_random_order(&inst).unwrap();
        assert!(free <= max + 1e-9);
        assert!(random <= free + 1e-9);
        // the optimal order with optimal thresholds attains the free-order value
        let bi = backward_induction(&inst, &order).unwrap();
        assert!((bi.value - free).abs() <= 1e-9);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let thresholds = (0..n).map(|_| r.gen_range(0.0..10.0)).collect();
        let any = StatelessPolicy::new(&inst, perm, thresholds).unwrap();
        assert!(any.value <= free + 1e-9);
    }
}

#[test]
fn kth_max_is_nonincreasing() {
    let mut r = rng(2);
    for _ in 0..50 {
        let n = r.gen_range(1..=15);
        let inst = random_instance(&mut r, n, 4, 10.0);
        let vals: Vec<f64> = (1..=n).map(|k| expected_kth_max(&inst, k).unwrap()).collect();
        assert!((vals[0] - expected_max(&inst).unwrap()).abs() <= 1e-12 * vals[0].max(1.0));
        assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
}

#[test]
fn backward_induction_beats_perturbations() {
    let mut r = rng(3);
    for _ in 0..200 {
        let n = r.gen_range(1..=10);
        let inst = random_instance(&mut r, n, 4, 10.0);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut r);
        let bi = backward_induction(&inst, &order).unwrap();
        let perturbed = bi.thresholds.iter().map(|t| (t + r.gen_range(-2.0..2.0)).max(0.0)).collect();
        let p = StatelessPolicy::new(&inst, order, perturbed).unwrap();
        assert!(p.value <= bi.value + 1e-9);
        assert!((utility(&bi.lambdas, &bi.ps) - bi.value).abs() <= 1e-12);
    }
}

#[test]
fn adjacent_swap_toward_larger_lambda_helps() {
    let mut r = rng(4);
    let mut checked = 0;
    while checked < 1000 {
        let n = r.gen_range(2..=8);
        let inst = random_instance(&mut r, n, 4, 10.0);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut r);
        let thresholds: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..8.0)).collect();
        let pol = StatelessPolicy::new(&inst, order.clone(), thresholds.clone()).unwrap();
        let pos = r.gen_range(0..n - 1);
        if pol.lambdas[pos] >= pol.lambdas[pos + 1] {
            continue;
        }
        order.swap(pos, pos + 1);
        let swapped = StatelessPolicy::new(&inst, order, thresholds).unwrap();
        assert!(swapped.value >= pol.value - 1e-9);
        assert!((eval_policy(&inst, &swapped).unwrap() - swapped.value).abs() <= 1e-12);
        checked += 1;
    }
}

#[test]
fn frequent_subsets_keep_most_of_max() {
    let mut r = rng(5);
    for (distinct, m) in [(1, 10), (2, 5), (3, 3), (2, 4), (5, 2)] {
        let inst = frequent_instance(&mut r, distinct, m, 3);
        let n = inst.len();
        let full = expected_max(&inst).unwrap();
        for mask in 1u32..(1 << n) {
            let keep: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let k = n - keep.len();
            let sub = expected_max(&inst.subset(&keep).unwrap()).unwrap();
            assert!(sub >= (1.0 - k as f64 / m as f64) * full - 1e-12);
        }
    }
}
