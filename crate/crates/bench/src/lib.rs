//! Fixed benchmark inputs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prophetlab_core::generators::{random_instance, random_small_instance};
use prophetlab_core::{Distribution, Instance};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` random laws with at most four atoms each.
pub fn random(n: usize, seed: u64) -> Instance {
    random_instance(&mut rng(seed), n, 4, 10.0)
}

/// `n` random `eps`-small laws.
pub fn small(n: usize, eps: f64, seed: u64) -> Instance {
    random_small_instance(&mut rng(seed), n, eps, 3, 10.0)
}

/// `n` i.i.d. copies of the `n`-th root of a fair coin on {0, 1}.
pub fn split_coin(n: usize) -> Instance {
    let coin = Distribution::new([(0.0, 0.5), (1.0, 0.5)]).expect("valid law");
    Instance::iid(coin.power_cdf(n as u32).expect("valid root"), n).expect("nonempty")
}
