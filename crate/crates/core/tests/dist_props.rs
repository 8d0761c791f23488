use proptest::prelude::*;

use prophetlab_core::benchmarks::expected_max;
use prophetlab_core::{Distribution, Instance};

fn law() -> impl Strategy<Value = Distribution> {
    prop::collection::vec((0.0f64..100.0, 0.01f64..1.0), 1..7).prop_map(|atoms| {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        Distribution::new(atoms.into_iter().map(|(v, m)| (v, m / total))).unwrap()
    })
}

fn mass(d: &Distribution) -> f64 {
    d.masses().iter().sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn splitting_preserves_expected_max(d in law(), n in 1usize..6, k in 1u32..11) {
        let whole = expected_max(&Instance::iid(d.clone(), n).unwrap()).unwrap();
        let split = expected_max(&Instance::iid(d.power_cdf(k).unwrap(), n * k as usize).unwrap()).unwrap();
        prop_assert!((whole - split).abs() <= 1e-12 * whole.abs().max(1.0));
    }

    #[test]
    fn quantile_and_cdf_are_adjoint(d in law(), u in 0.001f64..0.999) {
        for &x in d.values() {
            prop_assert!(d.quantile(d.cdf(x)).unwrap() <= x);
        }
        prop_assert!(d.cdf(d.quantile(u).unwrap()) >= u - 1e-12);
    }

    #[test]
    fn smallness_is_monotone(d in law(), eps in 0.0f64..1.0, de in 0.0f64..0.5, delta in 0.0f64..100.0, dd in 0.0f64..50.0) {
        if d.is_small(eps, delta) {
            prop_assert!(d.is_small((eps + de).min(1.0), delta + dd));
        }
    }

    #[test]
    fn residuals_shrink_with_shift(d in law(), t in 0.0f64..100.0, dt in 0.0f64..50.0) {
        let a = d.shift_residual(t).unwrap();
        let b = d.shift_residual(t + dt).unwrap();
        for &x in a.values().iter().chain(b.values()) {
            prop_assert!(a.cdf(x) <= b.cdf(x) + 1e-12);
        }
    }

    #[test]
    fn transforms_conserve_mass(d in law(), t in 0.0f64..100.0, w in 0.0f64..1.0, k in 1u32..20) {
        for out in [
            d.shift_residual(t).unwrap(),
            d.truncate_below(t).unwrap(),
            d.mix_with_zero(w).unwrap(),
            d.power_cdf(k).unwrap(),
        ] {
            prop_assert!((mass(&out) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn tail_stats_conventions(d in law(), t in 0.0f64..120.0) {
        let (lambda, p) = d.tail_stats(t);
        prop_assert!((0.0..=1.0).contains(&p));
        if p < 1.0 {
            prop_assert!(lambda >= t - 1e-9);
            prop_assert!((lambda * (1.0 - p) - d.partial_moment(t)).abs() <= 1e-9 * d.max_value().max(1.0));
        } else {
            prop_assert_eq!(lambda, 0.0);
        }
    }
}
