//! Random instance families used by tests, benchmarks and experiments.

use rand::Rng;

use crate::dist::{Distribution, Instance};

/// Law with `1..=max_support` atoms on `[0, scale)` and random masses.
pub fn random_distribution<R: Rng>(rng: &mut R, max_support: usize, scale: f64) -> Distribution {
    let s = rng.gen_range(1..=max_support.max(1));
    let atoms: Vec<(f64, f64)> = (0..s)
        .map(|_| (rng.gen_range(0.0..scale), rng.gen_range(0.05..1.0)))
        .collect();
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    Distribution::new(atoms.into_iter().map(|(v, m)| (v, m / total))).expect("valid atoms")
}

/// `n` independent draws of [`random_distribution`].
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, max_support: usize, scale: f64) -> Instance {
    Instance::new((0..n).map(|_| random_distribution(rng, max_support, scale)).collect()).expect("n >= 1")
}

/// Law with mass at least `1 - eps` on zero and up to `max_support` positive
/// atoms in `[scale/20, scale)`.
pub fn random_small_distribution<R: Rng>(rng: &mut R, eps: f64, max_support: usize, scale: f64) -> Distribution {
    let tail = rng.gen_range(0.2..=1.0) * eps;
    let s = rng.gen_range(1..=max_support.max(1));
    let atoms: Vec<(f64, f64)> = (0..s)
        .map(|_| (rng.gen_range(scale / 20.0..scale), rng.gen_range(0.05..1.0)))
        .collect();
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    let atoms = std::iter::once((0.0, 1.0 - tail)).chain(atoms.into_iter().map(|(v, m)| (v, tail * m / total)));
    Distribution::new(atoms).expect("valid atoms")
}

/// `n` independent `eps`-small variables.
pub fn random_small_instance<R: Rng>(rng: &mut R, n: usize, eps: f64, max_support: usize, scale: f64) -> Instance {
    Instance::new((0..n).map(|_| random_small_distribution(rng, eps, max_support, scale)).collect()).expect("n >= 1")
}

/// `small` variables that are `0.01`-small on `[0, 1]`, followed by
/// `outliers` point masses well above them.
pub fn mixed_instance<R: Rng>(rng: &mut R, small: usize, outliers: usize) -> Instance {
    let base = random_small_distribution(rng, 0.01, 3, 1.0);
    let mut vars = vec![base; small];
    for _ in 0..outliers {
        vars.push(Distribution::point(rng.gen_range(5.0..50.0)).expect("finite"));
    }
    Instance::new(vars).expect("nonempty")
}

/// `distinct` random laws, each repeated `m` times.
pub fn frequent_instance<R: Rng>(rng: &mut R, distinct: usize, m: usize, max_support: usize) -> Instance {
    let laws: Vec<Distribution> = (0..distinct).map(|_| random_distribution(rng, max_support, 1.0)).collect();
    let vars = laws.iter().flat_map(|d| std::iter::repeat(d.clone()).take(m)).collect();
    Instance::new(vars).expect("nonempty")
}
