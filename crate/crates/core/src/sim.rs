//! Seeded Monte Carlo harness.
//!
//! Every trial draws from its own ChaCha8 position keyed by
//! `(seed, stream, trial)`, and trials are aggregated chunk by chunk in a
//! fixed order, so results do not depend on how many threads run them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::StatelessPolicy;
use crate::dist::Instance;

const CHUNK: u64 = 8192;

/// Point estimate with a 95% normal-approximation half width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub mean: f64,
    pub half_width_95: f64,
    pub trials: u64,
    pub seed: u64,
}

impl SimResult {
    pub fn lower(&self) -> f64 {
        self.mean - self.half_width_95
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width_95
    }
}

/// Generator positioned at the start of `trial` within `stream`.
pub fn trial_rng(seed: u64, stream: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos((trial as u128) << 32);
    rng
}

/// Uniform draw in `(0, 1]`.
#[inline]
pub fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

#[derive(Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    aux: u64,
}

impl Moments {
    const EMPTY: Moments = Moments {
        n: 0.0,
        mean: 0.0,
        m2: 0.0,
        aux: 0,
    };

    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return Moments { aux: self.aux.max(o.aux), ..o };
        }
        if o.n == 0.0 {
            return Moments { aux: self.aux.max(o.aux), ..self };
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
            aux: self.aux.max(o.aux),
        }
    }
}

/// Runs `trials` independent trials of `f` and reports the mean outcome.
///
/// `f` receives a generator positioned for the trial, per-chunk scratch state
/// built by `init`, and returns the trial's value together with an auxiliary
/// counter whose maximum over all trials is returned alongside.
pub fn monte_carlo_with<S, I, F>(trials: u64, seed: u64, stream: u64, init: I, f: F) -> (SimResult, u64)
where
    I: Fn() -> S + Sync,
    F: Fn(&mut ChaCha8Rng, &mut S) -> (f64, u64) + Sync,
{
    let trials = trials.max(1);
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut state = init();
            let mut rng = trial_rng(seed, stream, 0);
            let mut m = Moments::EMPTY;
            let start = c * CHUNK;
            for trial in start..(start + CHUNK).min(trials) {
                rng.set_word_pos((trial as u128) << 32);
                let (x, aux) = f(&mut rng, &mut state);
                m.push(x);
                m.aux = m.aux.max(aux);
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::EMPTY, Moments::merge);
    let var = if total.n > 1.0 { total.m2 / (total.n - 1.0) } else { 0.0 };
    (
        SimResult {
            mean: total.mean,
            half_width_95: 1.96 * (var / total.n).sqrt(),
            trials,
            seed,
        },
        total.aux,
    )
}

/// [`monte_carlo_with`] without scratch state or auxiliary counter.
pub fn monte_carlo<F>(trials: u64, seed: u64, stream: u64, f: F) -> SimResult
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    monte_carlo_with(trials, seed, stream, || (), |rng, _| (f(rng), 0)).0
}

/// `n` i.i.d. uniform timestamps, sorted ascending.
pub fn sample_timestamps(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = trial_rng(seed, streams::TIMESTAMPS, 0);
    let mut ts: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    ts.sort_by(f64::total_cmp);
    ts
}

/// Next order statistic of `remaining` more uniforms on `[prev, 1]`.
#[inline]
pub(crate) fn next_order_stat<R: Rng>(rng: &mut R, prev: f64, remaining: usize) -> f64 {
    let u: f64 = open_unit(rng);
    let t = 1.0 - (1.0 - prev) * u.powf(1.0 / remaining as f64);
    t.max(prev)
}

/// Stream identifiers, one per kind of experiment.
pub mod streams {
    pub const TIMESTAMPS: u64 = 1;
    pub const TIME_POLICY: u64 = 2;
    pub const STATELESS: u64 = 3;
    pub const BASELINE: u64 = 4;
    pub const IMPERFECT: u64 = 5;
    pub const RESTRICTED: u64 = 6;
    pub const ROUNDING: u64 = 7;
    pub const SUBSET: u64 = 8;
}

/// Simulates a stateless policy exactly: the stopping position is drawn from
/// the survival products and the accepted value from the conditional tail.
pub fn run_stateless(inst: &Instance, pol: &StatelessPolicy, trials: u64, seed: u64) -> SimResult {
    // survival[k] = Pr[no acceptance among positions 0..=k]
    let mut survival = Vec::with_capacity(pol.order.len());
    let mut s = 1.0;
    for &p in &pol.ps {
        s *= p;
        survival.push(s);
    }
    monte_carlo(trials, seed, streams::STATELESS, |rng| {
        let u: f64 = open_unit(rng);
        // first position whose survival drops below u
        let k = survival.partition_point(|&s| s >= u);
        if k == survival.len() {
            return 0.0;
        }
        let i = pol.order[k];
        inst.get(i)
            .sample_tail(pol.thresholds[i], open_unit(rng))
            .unwrap_or(0.0)
    })
}

/// Reference simulator for a stateless policy that walks the order and
/// samples every value. Slower than [`run_stateless`]; used as a cross-check.
pub fn run_stateless_sequential(inst: &Instance, pol: &StatelessPolicy, trials: u64, seed: u64) -> SimResult {
    monte_carlo(trials, seed, streams::STATELESS, |rng| {
        for &i in &pol.order {
            let x = inst.get(i).sample(open_unit(rng));
            if x >= pol.thresholds[i] {
                return x;
            }
        }
        0.0
    })
}
