//! Time-based threshold policies for small variables.

use serde::{Deserialize, Serialize};

use crate::benchmarks::max_cdf_table;
use crate::dist::Instance;
use crate::error::{Error, Result};
use crate::kertz::KertzSolution;
use crate::policies::engine::{simulate, Schedule};
use crate::sim::{streams, SimResult};

/// A nonincreasing, piecewise-constant threshold curve `r` on `[0, 1]`, with
/// an independent acceptance coin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimePolicy {
    /// Start times of the pieces, ascending, beginning at 0.
    knot_times: Vec<f64>,
    /// Threshold on each piece, nonincreasing.
    knot_values: Vec<f64>,
    pub accept_prob: f64,
    pub eps: f64,
    pub delta: f64,
}

impl TimePolicy {
    /// Builds a curve from `(start_time, threshold)` knots.
    pub fn new(knots: Vec<(f64, f64)>, accept_prob: f64, eps: f64, delta: f64) -> Result<Self> {
        if knots.is_empty() || knots[0].0 > 0.0 {
            return Err(Error::domain("threshold curve must start at t = 0"));
        }
        if knots.windows(2).any(|w| w[1].0 < w[0].0 || w[1].1 > w[0].1) {
            return Err(Error::domain("threshold curve must be nonincreasing in t"));
        }
        if !(accept_prob > 0.0 && accept_prob <= 1.0) {
            return Err(Error::domain(format!("acceptance probability {accept_prob} outside (0, 1]")));
        }
        let (knot_times, knot_values) = knots.into_iter().unzip();
        Ok(TimePolicy {
            knot_times,
            knot_values,
            accept_prob,
            eps,
            delta,
        })
    }

    /// The constant curve `r ≡ level`.
    pub fn constant(level: f64, accept_prob: f64) -> Result<Self> {
        Self::new(vec![(0.0, level)], accept_prob, 0.0, 0.0)
    }

    /// `r(t)`.
    #[inline]
    pub fn threshold(&self, t: f64) -> f64 {
        let k = self.knot_times.partition_point(|&s| s <= t);
        self.knot_values[k.saturating_sub(1)]
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.knot_times.iter().copied().zip(self.knot_values.iter().copied())
    }
}

/// Knots of `r(t) = F^{-1}(y(t))` where `F` is the c.d.f. of the maximum.
fn kertz_curve(inst: &Instance, sol: &KertzSolution) -> Result<Vec<(f64, f64)>> {
    let (grid, cdf) = max_cdf_table(inst)?;
    let mut knots = Vec::with_capacity(grid.len());
    for j in (0..grid.len()).rev() {
        // r(t) = grid[j] exactly when F(grid[j-1]) < y(t) <= F(grid[j]).
        let start = if j + 1 == grid.len() { 0.0 } else { sol.time_of(cdf[j]) };
        let start = knots.last().map_or(start, |&(s, _): &(f64, f64)| start.max(s));
        knots.push((start, grid[j]));
    }
    Ok(knots)
}

/// The small-prophets rule: accept an arrival at time `t` whose value is at
/// least `F^{-1}(y(t))`, with probability `(1 - eps)^2`.
pub fn small_prophets_policy(inst: &Instance, eps: f64, sol: &KertzSolution) -> Result<TimePolicy> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("eps = {eps} outside (0, 1)")));
    }
    let offending = inst.non_small(eps, 0.0);
    if !offending.is_empty() {
        return Err(Error::precondition(format!("variables are not {eps}-small"), offending));
    }
    TimePolicy::new(kertz_curve(inst, sol)?, (1.0 - eps) * (1.0 - eps), eps, 0.0)
}

/// Simulates `pol` under a uniformly random arrival order.
pub fn run_time_policy(inst: &Instance, pol: &TimePolicy, trials: u64, seed: u64) -> SimResult {
    let schedule = Schedule::single_phase(inst.len(), pol);
    simulate(inst, &schedule, trials, seed, streams::TIME_POLICY).0
}

/// Outcome of the restricted small-prophets rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedRun {
    pub result: SimResult,
    /// Largest 1-based arrival position at which any trial stopped.
    pub max_stop_index: u64,
    /// `ceil((1 - eps) n)`, the position the rule may never pass.
    pub stop_limit: u64,
    /// Smallest `delta` for which every variable is `(eps, delta)`-small.
    pub delta: f64,
}

/// The modified small-prophets rule that never looks past position
/// `(1 - eps) n`: only the first `R' ~ Binomial(n, 1 - 2 eps)` arrivals get
/// timestamps, and the rule gives up when `R' > (1 - eps) n`.
pub fn restricted_small_policy(inst: &Instance, eps: f64, sol: &KertzSolution) -> Result<(TimePolicy, f64)> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::domain(format!("eps = {eps} outside (0, 0.5)")));
    }
    let n = inst.len() as f64;
    let need = (1.0 / eps).ln() / (eps * eps);
    if n <= need {
        return Err(Error::precondition(
            format!("restricted rule needs n > eps^-2 ln(1/eps) = {need:.1}, got {n}"),
            vec![],
        ));
    }
    let delta = inst.variables().iter().map(|d| d.small_level(eps)).fold(0.0, f64::max);
    let thinned = inst.map(|d| d.truncate_below(delta)?.mix_with_zero(2.0 * eps))?;
    let mut pol = small_prophets_policy(&thinned, eps, sol)?;
    pol.delta = delta;
    Ok((pol, delta))
}

/// Simulates the restricted rule of [`restricted_small_policy`].
pub fn run_restricted_small(
    inst: &Instance,
    eps: f64,
    sol: &KertzSolution,
    trials: u64,
    seed: u64,
) -> Result<RestrictedRun> {
    let (pol, delta) = restricted_small_policy(inst, eps, sol)?;
    let n = inst.len();
    let mut schedule = Schedule::single_phase(n, &pol);
    schedule.restrict_eps = Some(eps);
    let (result, max_stop_index) = simulate(inst, &schedule, trials, seed, streams::RESTRICTED);
    Ok(RestrictedRun {
        result,
        max_stop_index,
        stop_limit: ((1.0 - eps) * n as f64 - 1e-9).ceil() as u64,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Distribution;
    use crate::kertz::{solve_beta, DEFAULT_GRID};

    fn sol() -> KertzSolution {
        KertzSolution::solve(solve_beta(1e-10).unwrap(), DEFAULT_GRID).unwrap()
    }

    fn instance_a() -> Instance {
        Instance::new(vec![
            Distribution::new([(0.0, 0.5), (1.0, 0.5)]).unwrap(),
            Distribution::point(0.6).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn curve_endpoints() {
        let d = Distribution::new([(0.0, 0.25), (1.0, 0.75)]).unwrap().power_cdf(50).unwrap();
        let inst = Instance::iid(d, 50).unwrap();
        let pol = small_prophets_policy(&inst, 0.05, &sol()).unwrap();
        assert_eq!(pol.threshold(0.0), 1.0);
        assert_eq!(pol.threshold(1.0), 0.0);
        assert!((pol.accept_prob - 0.9025).abs() < 1e-15);
    }

    #[test]
    fn not_small_is_rejected_with_indices() {
        let err = small_prophets_policy(&instance_a(), 0.1, &sol()).unwrap_err();
        assert_eq!(
            err,
            Error::Precondition {
                message: "variables are not 0.1-small".into(),
                indices: vec![0, 1]
            }
        );
    }

    #[test]
    fn zero_curve_takes_first_arrival() {
        let pol = TimePolicy::constant(0.0, 1.0).unwrap();
        let r = run_time_policy(&instance_a(), &pol, 200_000, 1);
        assert!((r.mean - 0.55).abs() < 3.0 * r.half_width_95, "{r:?}");
        let none = TimePolicy::constant(10.0, 1.0).unwrap();
        assert_eq!(run_time_policy(&instance_a(), &none, 1000, 1).mean, 0.0);
    }

    #[test]
    fn restricted_needs_many_variables() {
        let d = Distribution::new([(0.0, 0.99), (1.0, 0.01)]).unwrap();
        let inst = Instance::iid(d, 100).unwrap();
        assert!(matches!(
            restricted_small_policy(&inst, 0.05, &sol()),
            Err(Error::Precondition { .. })
        ));
    }
}
