//! Single posted threshold at the median of the maximum.

use crate::benchmarks::max_cdf_table;
use crate::dist::Instance;
use crate::error::Result;
use crate::policies::engine::{simulate, Schedule};
use crate::sim::{streams, SimResult};

/// Median of `max_i X_i`.
pub fn median_of_max(inst: &Instance) -> Result<f64> {
    let (grid, cdf) = max_cdf_table(inst)?;
    let k = cdf.partition_point(|&c| c < 0.5);
    Ok(grid[k.min(grid.len() - 1)])
}

/// Accepts the first arrival at or above the median of the maximum, under a
/// uniformly random order.
pub fn single_threshold_baseline(inst: &Instance, trials: u64, seed: u64) -> Result<(SimResult, f64)> {
    let level = median_of_max(inst)?;
    let schedule = Schedule::single_threshold(inst.len(), (0..inst.len()).collect(), level);
    Ok((simulate(inst, &schedule, trials, seed, streams::BASELINE).0, level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Distribution;

    #[test]
    fn point_masses_accept_first() {
        let inst = Instance::iid(Distribution::point(2.0).unwrap(), 5).unwrap();
        let (r, level) = single_threshold_baseline(&inst, 1000, 0).unwrap();
        assert_eq!(level, 2.0);
        assert_eq!(r.mean, 2.0);
    }

    #[test]
    fn deterministic() {
        let inst = Instance::new(vec![
            Distribution::new([(0.0, 0.5), (1.0, 0.5)]).unwrap(),
            Distribution::point(0.6).unwrap(),
        ])
        .unwrap();
        let a = single_threshold_baseline(&inst, 10_000, 4).unwrap();
        let b = single_threshold_baseline(&inst, 10_000, 4).unwrap();
        assert_eq!(a, b);
    }
}
