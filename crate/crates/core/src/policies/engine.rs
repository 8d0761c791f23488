//! Shared simulator for arrival-order policies.
//!
//! A trial draws a uniformly random arrival order lazily (Fisher–Yates with
//! undo), so a trial that stops early costs only the arrivals it observed.
//! Phase one runs a time-based curve on the member variables; phase two,
//! after `cutoff` member arrivals, accepts the first value at least
//! `straggler`.

use rand::Rng;
use rand_distr::{Binomial, Distribution as _};

use crate::dist::Instance;
use crate::policies::time::TimePolicy;
use crate::sim::{monte_carlo_with, next_order_stat, open_unit, SimResult};

pub(crate) struct Schedule<'a> {
    /// Variables that arrive at all; the others are ignored entirely.
    pub pool: Vec<usize>,
    /// Indexed by variable: takes part in phase one.
    pub member: Vec<bool>,
    pub curve: Option<&'a TimePolicy>,
    /// Phase one compares `max(x - shift, 0)` against the curve.
    pub shift: f64,
    /// Never accept a zero shifted value in phase one.
    pub skip_zero: bool,
    /// Binomial thinning of timestamps for the restricted rule.
    pub restrict_eps: Option<f64>,
    /// Number of member arrivals handled by phase one.
    pub cutoff: usize,
    /// Phase-two acceptance level; infinite disables phase two.
    pub straggler: f64,
}

impl<'a> Schedule<'a> {
    pub fn single_phase(n: usize, curve: &'a TimePolicy) -> Self {
        Schedule {
            pool: (0..n).collect(),
            member: vec![true; n],
            curve: Some(curve),
            shift: 0.0,
            skip_zero: false,
            restrict_eps: None,
            cutoff: n,
            straggler: f64::INFINITY,
        }
    }

    /// Accept the first arrival from `pool` with value at least `level`.
    pub fn single_threshold(n: usize, pool: Vec<usize>, level: f64) -> Self {
        Schedule {
            pool,
            member: vec![false; n],
            curve: None,
            shift: 0.0,
            skip_zero: false,
            restrict_eps: None,
            cutoff: 0,
            straggler: level,
        }
    }
}

struct Scratch {
    perm: Vec<usize>,
    swaps: Vec<usize>,
}

/// Returns the estimate and the largest 1-based stopping position observed.
pub(crate) fn simulate(inst: &Instance, s: &Schedule<'_>, trials: u64, seed: u64, stream: u64) -> (SimResult, u64) {
    let m = s.pool.len();
    let n1 = s.pool.iter().filter(|&&i| s.member[i]).count();
    let binom = s.restrict_eps.map(|e| (e, Binomial::new(n1 as u64, (1.0 - 2.0 * e).max(0.0)).unwrap()));
    let phase_two = s.straggler.is_finite();
    let init = || Scratch {
        perm: s.pool.clone(),
        swaps: Vec::with_capacity(m),
    };
    monte_carlo_with(trials, seed, stream, init, |rng, sc| {
        let (ts_count, quit) = match binom {
            None => (n1, false),
            Some((e, b)) => {
                let r = b.sample(rng) as usize;
                if r as f64 > (1.0 - e) * n1 as f64 {
                    (0, true)
                } else {
                    (r, false)
                }
            }
        };
        let active = if quit { 0 } else { ts_count.min(s.cutoff) };
        let mut t = 0.0;
        let mut seen = 0usize;
        let mut out = (0.0, 0u64);
        for pos in 0..m {
            let j = rng.gen_range(pos..m);
            sc.perm.swap(pos, j);
            sc.swaps.push(j);
            let i = sc.perm[pos];
            if s.member[i] {
                seen += 1;
                if seen <= s.cutoff {
                    if seen <= active {
                        t = next_order_stat(rng, t, ts_count - (seen - 1));
                        let x = inst.get(i).sample(open_unit(rng));
                        let z = (x - s.shift).max(0.0);
                        let curve = s.curve.expect("phase one needs a curve");
                        if z >= curve.threshold(t)
                            && !(s.skip_zero && z <= 0.0)
                            && rng.gen::<f64>() < curve.accept_prob
                        {
                            out = (x, pos as u64 + 1);
                            break;
                        }
                    } else if !phase_two {
                        break;
                    }
                    continue;
                }
            } else if seen < s.cutoff {
                continue;
            }
            if !phase_two {
                break;
            }
            let x = inst.get(i).sample(open_unit(rng));
            if x >= s.straggler {
                out = (x, pos as u64 + 1);
                break;
            }
        }
        for pos in (0..sc.swaps.len()).rev() {
            let j = sc.swaps[pos];
            sc.perm.swap(pos, j);
        }
        sc.swaps.clear();
        out
    })
}
