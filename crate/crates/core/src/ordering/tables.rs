//! Discretized thresholds and the `(λ, p)` tables over variables × levels.

use serde::{Deserialize, Serialize};

use crate::benchmarks::expected_max;
use crate::dist::Instance;
use crate::error::{Error, Result};

/// Thresholds `t_u = (1 - u eps)^+ MAX` for `u = 0..=c`, `c = ceil(1/eps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    pub eps: f64,
    pub c: usize,
    pub levels: Vec<f64>,
    pub max_value: f64,
}

/// `ceil(1/eps)`, robust to `1/eps` landing just above an integer.
pub fn level_count(eps: f64) -> usize {
    (1.0 / eps - 1e-9).ceil() as usize
}

pub fn build_grid(inst: &Instance, eps: f64) -> Result<ThresholdGrid> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::domain(format!("eps = {eps} outside (0, 0.5]")));
    }
    let max_value = expected_max(inst)?;
    Ok(grid_from_max(max_value, eps))
}

pub(crate) fn grid_from_max(max_value: f64, eps: f64) -> ThresholdGrid {
    let c = level_count(eps);
    let levels = (0..=c)
        .map(|u| (1.0 - u as f64 * eps).max(0.0) * max_value)
        .collect();
    ThresholdGrid {
        eps,
        c,
        levels,
        max_value,
    }
}

/// Exact `λ_{i,j} = E[X_i | X_i >= t_j]`, `p_{i,j} = Pr[X_i < t_j]`, and the
/// ranking of all pairs by `λ` descending, ties by `(i, j)` ascending.
#[derive(Debug, Clone)]
pub struct AssignmentTables {
    pub n: usize,
    /// Number of levels, `c + 1`.
    pub width: usize,
    pub levels: Vec<f64>,
    /// Row-major `n × width`.
    pub lambda: Vec<f64>,
    pub p: Vec<f64>,
    /// Flat indices `i * width + j` in ranking order.
    pub ranking: Vec<usize>,
    // In ranking order: λ_ℓ - λ_{ℓ+1} and the floored log p.
    pub(crate) delta: Vec<f64>,
    pub(crate) log_p: Vec<f64>,
    // Position of each flat index in the ranking.
    pub(crate) rank_of: Vec<usize>,
}

/// Floor applied to `p` inside logarithms.
pub const P_FLOOR: f64 = 1e-12;

impl AssignmentTables {
    pub fn new(inst: &Instance, levels: &[f64]) -> Self {
        let n = inst.len();
        let width = levels.len();
        let mut lambda = Vec::with_capacity(n * width);
        let mut p = Vec::with_capacity(n * width);
        for d in inst.variables() {
            for &t in levels {
                let (l, q) = d.tail_stats(t);
                lambda.push(l);
                p.push(q);
            }
        }
        let mut ranking: Vec<usize> = (0..n * width).collect();
        // Stable sort keeps (i, j) ascending among equal λ.
        ranking.sort_by(|&a, &b| lambda[b].total_cmp(&lambda[a]));
        let delta = (0..ranking.len())
            .map(|l| {
                let next = ranking.get(l + 1).map_or(0.0, |&m| lambda[m]);
                lambda[ranking[l]] - next
            })
            .collect();
        let log_p = ranking.iter().map(|&m| p[m].max(P_FLOOR).ln()).collect();
        let mut rank_of = vec![0; ranking.len()];
        for (l, &m) in ranking.iter().enumerate() {
            rank_of[m] = l;
        }
        AssignmentTables {
            n,
            width,
            levels: levels.to_vec(),
            lambda,
            p,
            ranking,
            delta,
            log_p,
            rank_of,
        }
    }

    pub fn from_grid(inst: &Instance, grid: &ThresholdGrid) -> Self {
        Self::new(inst, &grid.levels)
    }

    #[inline]
    pub fn lambda(&self, i: usize, j: usize) -> f64 {
        self.lambda[i * self.width + j]
    }

    #[inline]
    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.width + j]
    }
}

pub fn build_tables(inst: &Instance, grid: &ThresholdGrid) -> AssignmentTables {
    AssignmentTables::from_grid(inst, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Distribution;

    fn instance_a() -> Instance {
        Instance::new(vec![
            Distribution::new([(0.0, 0.5), (1.0, 0.5)]).unwrap(),
            Distribution::point(0.6).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn grid_examples() {
        let g = build_grid(&instance_a(), 0.25).unwrap();
        let want = [0.8, 0.6, 0.4, 0.2, 0.0];
        assert_eq!(g.c, 4);
        for (a, b) in g.levels.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let g = build_grid(&instance_a(), 0.5).unwrap();
        assert_eq!(g.levels.len(), 3);
        assert_eq!(g.levels[0], g.max_value);
        assert_eq!(level_count(0.1), 10);
    }

    #[test]
    fn table_entries_and_ranking() {
        let a = instance_a();
        let t = AssignmentTables::new(&a, &[0.8, 0.6, 0.0]);
        assert_eq!((t.lambda(0, 1), t.p(0, 1)), (1.0, 0.5));
        assert_eq!((t.lambda(0, 2), t.p(0, 2)), (0.5, 0.0));
        // point mass 0.6 cannot reach 0.8
        assert_eq!((t.lambda(1, 0), t.p(1, 0)), (0.0, 1.0));
        assert_eq!(t.ranking[0], 0);
        assert_eq!(*t.ranking.last().unwrap(), 3);
        for w in t.ranking.windows(2) {
            assert!(t.lambda[w[0]] >= t.lambda[w[1]]);
        }
    }
}
