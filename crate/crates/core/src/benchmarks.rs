//! Exact benchmark values: the prophet's expectation, order statistics,
//! subset-DP oracles for random and free order, and closed-form evaluation
//! of stateless threshold policies.

use serde::{Deserialize, Serialize};

use crate::dist::Instance;
use crate::error::{Error, Result};

/// Largest merged support accepted by the grid-based benchmarks.
pub const GRID_LIMIT: usize = 100_000;
/// Largest instance accepted by the subset dynamic programs.
pub const SUBSET_DP_LIMIT: usize = 20;

/// Merged support together with the c.d.f. of the maximum at each point.
pub fn max_cdf_table(inst: &Instance) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = checked_grid(inst)?;
    let classes = inst.frequency_classes();
    let laws: Vec<_> = classes.iter().map(|c| inst.get(c[0])).collect();
    let exps: Vec<i32> = classes.iter().map(|c| c.len() as i32).collect();
    let mut ptr = vec![0usize; laws.len()];
    let mut out = Vec::with_capacity(grid.len());
    for &v in &grid {
        let mut prod = 1.0;
        for (c, d) in laws.iter().enumerate() {
            let vals = d.values();
            while ptr[c] < vals.len() && vals[ptr[c]] <= v + crate::dist::MERGE_TOL {
                ptr[c] += 1;
            }
            let f = if ptr[c] == 0 { 0.0 } else { d.cdf(vals[ptr[c] - 1]) };
            prod *= f.powi(exps[c]);
        }
        out.push(prod);
    }
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    Ok((grid, out))
}

fn checked_grid(inst: &Instance) -> Result<Vec<f64>> {
    let grid = inst.merged_support();
    if grid.len() > GRID_LIMIT {
        return Err(Error::Capacity {
            what: "merged support size".into(),
            requested: grid.len() as u64,
            limit: GRID_LIMIT as u64,
        });
    }
    Ok(grid)
}

/// `E[max_i X_i]`.
pub fn expected_max(inst: &Instance) -> Result<f64> {
    let (grid, cdf) = max_cdf_table(inst)?;
    let mut e = grid[0];
    for j in 1..grid.len() {
        e += (grid[j] - grid[j - 1]) * (1.0 - cdf[j - 1]);
    }
    Ok(e)
}

/// Expectation of the `k`-th largest value (`k = 1` is the maximum).
pub fn expected_kth_max(inst: &Instance, k: usize) -> Result<f64> {
    let n = inst.len();
    if k == 0 || k > n {
        return Err(Error::domain(format!("k = {k} outside 1..={n}")));
    }
    let grid = checked_grid(inst)?;
    let mut dp = vec![0.0; k + 1];
    let mut e = 0.0;
    let mut prev = 0.0;
    for &v in &grid {
        // dp[c] = Pr[exactly c of the variables so far are >= v], capped at k.
        dp.iter_mut().for_each(|x| *x = 0.0);
        dp[0] = 1.0;
        for d in inst.variables() {
            let s = d.survival_weak(v);
            if s == 0.0 {
                continue;
            }
            dp[k] += dp[k - 1] * s;
            for c in (1..k).rev() {
                dp[c] = dp[c] * (1.0 - s) + dp[c - 1] * s;
            }
            dp[0] *= 1.0 - s;
        }
        e += (v - prev) * dp[k];
        prev = v;
    }
    Ok(e)
}

fn check_subset_capacity(n: usize) -> Result<()> {
    if n > SUBSET_DP_LIMIT {
        return Err(Error::Capacity {
            what: "subset DP instance size".into(),
            requested: n as u64,
            limit: SUBSET_DP_LIMIT as u64,
        });
    }
    Ok(())
}

/// Optimal expected reward when variables arrive in uniformly random order.
pub fn opt_random_order(inst: &Instance) -> Result<f64> {
    let n = inst.len();
    check_subset_capacity(n)?;
    let mut v = vec![0.0f64; 1 << n];
    for s in 1usize..(1 << n) {
        let mut acc = 0.0;
        let mut bits = s;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            acc += inst.get(i).expected_max_with(v[s & !(1 << i)]);
        }
        v[s] = acc / s.count_ones() as f64;
    }
    Ok(v[(1 << n) - 1])
}

/// Optimal expected reward when the inspection order may be chosen, with one
/// optimal order. Ties go to the lowest index.
pub fn opt_free_order(inst: &Instance) -> Result<(f64, Vec<usize>)> {
    let n = inst.len();
    check_subset_capacity(n)?;
    let mut v = vec![0.0f64; 1 << n];
    let mut choice = vec![0u8; 1 << n];
    for s in 1usize..(1 << n) {
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        let mut bits = s;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let val = inst.get(i).expected_max_with(v[s & !(1 << i)]);
            if val > best {
                best = val;
                arg = i;
            }
        }
        v[s] = best;
        choice[s] = arg as u8;
    }
    let mut order = Vec::with_capacity(n);
    let mut s = (1usize << n) - 1;
    while s != 0 {
        let i = choice[s] as usize;
        order.push(i);
        s &= !(1 << i);
    }
    Ok((v[(1 << n) - 1], order))
}

/// An inspection order with per-item acceptance thresholds. Item `i` is
/// accepted when `X_i >= thresholds[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatelessPolicy {
    pub order: Vec<usize>,
    /// Indexed by variable, not by position.
    pub thresholds: Vec<f64>,
    /// `E[X | X >= τ]` per position.
    pub lambdas: Vec<f64>,
    /// `Pr[X < τ]` per position.
    pub ps: Vec<f64>,
    pub value: f64,
}

fn check_order(n: usize, order: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::domain(format!("order has {} entries, expected {n}", order.len())));
    }
    for &i in order {
        if i >= n || seen[i] {
            return Err(Error::domain(format!("order is not a permutation of 0..{n}")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// `Σ_k λ_k (1 - p_k) Π_{j<k} p_j`.
pub fn utility(lambdas: &[f64], ps: &[f64]) -> f64 {
    let mut reach = 1.0;
    let mut u = 0.0;
    for (&l, &p) in lambdas.iter().zip(ps) {
        u += reach * l * (1.0 - p);
        reach *= p;
    }
    u
}

impl StatelessPolicy {
    /// Builds a policy from an order and per-item thresholds, evaluating it
    /// in closed form.
    pub fn new(inst: &Instance, order: Vec<usize>, thresholds: Vec<f64>) -> Result<Self> {
        check_order(inst.len(), &order)?;
        if thresholds.len() != inst.len() || thresholds.iter().any(|t| t.is_nan()) {
            return Err(Error::domain("one threshold per variable required"));
        }
        let (lambdas, ps): (Vec<f64>, Vec<f64>) =
            order.iter().map(|&i| inst.get(i).tail_stats(thresholds[i])).unzip();
        let value = utility(&lambdas, &ps);
        Ok(StatelessPolicy {
            order,
            thresholds,
            lambdas,
            ps,
            value,
        })
    }

    /// Threshold used at position `pos` of the order.
    pub fn threshold_at(&self, pos: usize) -> f64 {
        self.thresholds[self.order[pos]]
    }
}

/// Optimal thresholds for a fixed order: each threshold is the value of
/// continuing, and the last is 0.
pub fn backward_induction(inst: &Instance, order: &[usize]) -> Result<StatelessPolicy> {
    check_order(inst.len(), order)?;
    let mut thresholds = vec![0.0; inst.len()];
    let mut cont = 0.0;
    for &i in order.iter().rev() {
        thresholds[i] = cont;
        cont = inst.get(i).expected_max_with(cont);
    }
    StatelessPolicy::new(inst, order.to_vec(), thresholds)
}

/// Closed-form value of `pol` on `inst`.
pub fn eval_policy(inst: &Instance, pol: &StatelessPolicy) -> Result<f64> {
    Ok(StatelessPolicy::new(inst, pol.order.clone(), pol.thresholds.clone())?.value)
}
