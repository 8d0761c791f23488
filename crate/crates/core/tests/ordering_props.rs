use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prophetlab_core::benchmarks::{backward_induction, eval_policy, opt_free_order};
use prophetlab_core::generators::{random_instance, random_small_instance};
use prophetlab_core::ordering::{
    build_grid, build_tables, coupled_value, default_reps, induced_policy, integral_objective, objective,
    order_general, order_small, round_assignment, solve_cp, AssignmentTables,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_point(r: &mut ChaCha8Rng, t: &AssignmentTables) -> Vec<f64> {
    let mut z = Vec::with_capacity(t.n * t.width);
    for _ in 0..t.n {
        let row: Vec<f64> = (0..t.width).map(|_| r.gen_range(0.01..1.0)).collect();
        let s: f64 = row.iter().sum();
        z.extend(row.into_iter().map(|v| v / s));
    }
    z
}

fn for_each_assignment(n: usize, width: usize, mut f: impl FnMut(&[usize])) {
    let mut cols = vec![0usize; n];
    loop {
        f(&cols);
        let mut i = 0;
        while i < n {
            cols[i] += 1;
            if cols[i] < width {
                break;
            }
            cols[i] = 0;
            i += 1;
        }
        if i == n {
            return;
        }
    }
}

#[test]
fn relaxation_bounds_every_integral_assignment() {
    let mut r = rng(1);
    for it in 0..30 {
        let n = 1 + it % 6;
        let inst = random_instance(&mut r, n, 4, 10.0);
        let eps = [0.25, 0.34, 0.5][it % 3];
        let t = build_tables(&inst, &build_grid(&inst, eps).unwrap());
        let cp = solve_cp(&t, None).unwrap();
        assert!(!cp.hit_cap);
        let mut best = 0.0f64;
        for_each_assignment(n, t.width, |c| best = best.max(integral_objective(&t, c)));
        assert!(best <= cp.objective + 1e-6, "{best} > {}", cp.objective);
        if n == 1 {
            // a single row's integral optimum is its best threshold; mixing a
            // column with p = 0 into the row can push the relaxation above it
            let single = (0..t.width).map(|j| t.lambda(0, j) * (1.0 - t.p(0, j))).fold(0.0, f64::max);
            assert!((best - single).abs() <= 1e-12 * single.max(1.0));
            assert!(cp.objective >= single - 1e-9);
        }
    }
}

#[test]
fn relaxed_objective_is_concave() {
    let mut r = rng(2);
    let mut checked = 0;
    while checked < 1000 {
        let n = r.gen_range(1..=8);
        let inst = random_instance(&mut r, n, 4, 10.0);
        let t = build_tables(&inst, &build_grid(&inst, 0.2).unwrap());
        for _ in 0..20 {
            let a = random_point(&mut r, &t);
            let b = random_point(&mut r, &t);
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let (fa, fb, fm) = (objective(&t, &a, None), objective(&t, &b, None), objective(&t, &mid, None));
            assert!(fm >= 0.5 * (fa + fb) - 1e-9);
            checked += 1;
        }
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let mut r = rng(3);
    for _ in 0..100 {
        let n = r.gen_range(1..=6);
        let inst = random_instance(&mut r, n, 4, 10.0);
        let t = build_tables(&inst, &build_grid(&inst, 0.25).unwrap());
        let z = random_point(&mut r, &t);
        let mut g = vec![0.0; z.len()];
        objective(&t, &z, Some(&mut g));
        let h = 1e-6;
        for m in 0..z.len() {
            let mut up = z.clone();
            let mut down = z.clone();
            up[m] += h;
            down[m] -= h;
            let fd = (objective(&t, &up, None) - objective(&t, &down, None)) / (2.0 * h);
            assert!((fd - g[m]).abs() <= 1e-5 * g[m].abs().max(1.0), "{fd} vs {}", g[m]);
        }
    }
}

#[test]
fn integral_objective_is_the_policy_value() {
    let mut r = rng(4);
    for _ in 0..500 {
        let n = r.gen_range(1..=10);
        let inst = random_instance(&mut r, n, 4, 10.0);
        let t = build_tables(&inst, &build_grid(&inst, r.gen_range(0.05..0.5)).unwrap());
        let cols: Vec<usize> = (0..n).map(|_| r.gen_range(0..t.width)).collect();
        let pol = induced_policy(&t, &cols);
        let exact = eval_policy(&inst, &pol).unwrap();
        assert!((exact - integral_objective(&t, &cols)).abs() <= 1e-12);
    }
}

#[test]
fn virtual_copies_lose_at_most_their_share() {
    let mut r = rng(5);
    for _ in 0..12 {
        let n = r.gen_range(1..=8);
        let inst = random_instance(&mut r, n, 3, 10.0);
        let (_, order) = opt_free_order(&inst).unwrap();
        let pol = backward_induction(&inst, &order).unwrap();
        for sub in 1u32..(1 << n) {
            let k = sub.count_ones() as usize;
            let members: Vec<usize> = (0..n).filter(|i| sub >> i & 1 == 1).collect();
            for size in 1..=k {
                let (mut total, mut count) = (0.0, 0);
                for pick in 1u32..(1 << k) {
                    if pick.count_ones() as usize != size {
                        continue;
                    }
                    let removed: Vec<usize> = (0..k).filter(|j| pick >> j & 1 == 1).map(|j| members[j]).collect();
                    total += coupled_value(&pol, &removed);
                    count += 1;
                }
                let bound = (1.0 - size as f64 / k as f64) * pol.value;
                assert!(total / count as f64 >= bound - 1e-9);
            }
        }
    }
}

#[test]
fn finer_grids_never_hurt_small_orderings() {
    let mut r = rng(6);
    for _ in 0..60 {
        let n = r.gen_range(1..=10);
        let inst = random_small_instance(&mut r, n, 0.05, 3, 10.0);
        let vals: Vec<f64> = [0.4, 0.2, 0.1, 0.05].iter().map(|&e| order_small(&inst, e).unwrap().value).collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{vals:?}");
    }
}

#[test]
fn small_orderings_against_the_oracle() {
    let mut r = rng(7);
    for _ in 0..50 {
        let n = r.gen_range(1..=10);
        let inst = random_small_instance(&mut r, n, 0.1, 4, 10.0);
        let pol = order_small(&inst, 0.1).unwrap();
        let (opt, _) = opt_free_order(&inst).unwrap();
        assert!(pol.value >= 0.5 * opt && pol.value <= opt + 1e-9);
        let levels = build_grid(&inst, 0.1).unwrap().levels;
        assert!(pol.thresholds.iter().all(|t| levels.iter().any(|l| (l - t).abs() <= 1e-15)));
    }
}

#[test]
fn rounding_keeps_most_of_the_relaxation() {
    let mut r = rng(8);
    let eps = 0.05;
    for seed in 0..50 {
        let inst = random_small_instance(&mut r, 30, eps, 3, 10.0);
        let t = build_tables(&inst, &build_grid(&inst, eps).unwrap());
        let z = solve_cp(&t, None).unwrap();
        let (zi, pol) = round_assignment(&t, &z, seed, default_reps(eps)).unwrap();
        assert!(zi.objective >= 0.85 * z.objective);
        assert_eq!(round_assignment(&t, &z, seed, default_reps(eps)).unwrap().1, pol);
    }
}

#[test]
fn general_orderings_against_the_oracle() {
    let mut r = rng(9);
    for seed in 0..15 {
        let n = r.gen_range(1..=8);
        let inst = random_instance(&mut r, n, 4, 10.0);
        let g = order_general(&inst, 0.1, seed).unwrap();
        let (opt, _) = opt_free_order(&inst).unwrap();
        assert!(g.policy.value >= 0.5 * opt && g.policy.value <= opt + 1e-9);
        assert!(g.constructed.value <= g.policy.value + 1e-12);
        assert_eq!(order_general(&inst, 0.1, seed).unwrap(), g);
    }
}

#[test]
fn solver_certifies_its_accuracy() {
    let mut r = rng(10);
    for it in 0..60 {
        let n = r.gen_range(1..=25);
        let inst = if it % 2 == 0 {
            random_instance(&mut r, n, 4, 10.0)
        } else {
            random_small_instance(&mut r, n, 0.05, 3, 10.0)
        };
        let t = build_tables(&inst, &build_grid(&inst, [0.05, 0.1, 0.25][it % 3]).unwrap());
        let z = solve_cp(&t, None).unwrap();
        assert!(!z.hit_cap);
        assert!(z.gap <= 1e-7 * z.objective, "gap {} at {}", z.gap, z.objective);
        for i in 0..n {
            assert!((z.row(i).iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            assert!(z.row(i).iter().all(|&v| v >= 0.0));
        }
    }
}
