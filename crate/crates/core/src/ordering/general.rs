//! Ordering for arbitrary instances: split off a few big variables, set a
//! random handful of them aside, solve the shifted residual instance with the
//! remaining big rows enumerated, and append the set-aside variables.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cp::{bound_cp, Assignment};
use super::rounding::{default_reps, induced_policy, open_last, round_indexed};
use super::tables::{grid_from_max, level_count, AssignmentTables};
use crate::benchmarks::{backward_induction, expected_max, StatelessPolicy};
use crate::dist::{Instance, MERGE_TOL};
use crate::error::{Error, Result};
use crate::policies::decompose::{decompose, SmallnessMode};
use crate::policies::removal_budget;
use crate::sim::{streams, trial_rng};

/// Most fixings of the big rows that may be enumerated.
pub const FIXING_CAP: u64 = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralOrdering {
    /// The constructed order with optimal thresholds for that order.
    pub policy: StatelessPolicy,
    /// The constructed order with its grid-derived thresholds.
    pub constructed: StatelessPolicy,
    pub eps: f64,
    /// Smallness level used by the decomposition; larger than `eps` when the
    /// enumeration cap forced a smaller `k`.
    pub eps_decomposition: f64,
    pub k_requested: usize,
    pub k: usize,
    pub t_star: f64,
    pub big: Vec<usize>,
    /// Big variables set aside and inspected last.
    pub removed: Vec<usize>,
    pub fixings_total: u64,
    pub fixings_solved: u64,
    pub k_adjusted: bool,
    /// Some relaxation stopped at the iteration cap.
    pub solver_hit_cap: bool,
}

/// Largest `k` with `width^k <= FIXING_CAP`.
fn k_cap(width: usize) -> usize {
    let mut k = 0;
    let mut count = 1u64;
    while count.saturating_mul(width as u64) <= FIXING_CAP {
        count *= width as u64;
        k += 1;
    }
    k
}

/// Picks the decomposition's smallness level and removal budget.
fn choose_k(eps: f64, width: usize) -> Result<(f64, usize, usize, bool)> {
    let want = removal_budget(eps, 1.0);
    let cap = k_cap(width);
    if want <= cap {
        return Ok((eps, want, want, false));
    }
    if cap == 0 {
        return Err(Error::Capacity {
            what: format!("fixings for k = {want}, c = {}", width - 1),
            requested: u64::MAX,
            limit: FIXING_CAP,
        });
    }
    const EPS_LIMIT: f64 = 0.49;
    if removal_budget(EPS_LIMIT, 1.0) > cap {
        return Ok((EPS_LIMIT, want, cap, true));
    }
    let (mut lo, mut hi) = (eps, EPS_LIMIT);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if removal_budget(mid, 1.0) <= cap {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((hi, want, removal_budget(hi, 1.0), true))
}

struct Search<'a> {
    tables: &'a AssignmentTables,
    rows: Vec<usize>,
    seed: u64,
    reps: usize,
    best: Option<(f64, u64, Vec<usize>)>,
    solved: u64,
    hit_cap: bool,
}

impl Search<'_> {
    fn index_of(&self, fixed: &[Option<usize>]) -> u64 {
        self.rows
            .iter()
            .fold(0u64, |acc, &i| acc * self.tables.width as u64 + fixed[i].unwrap_or(0) as u64)
    }

    // Depth-first over fixings of `rows`; a relaxation with fewer rows fixed
    // bounds every completion, so subtrees whose bound falls below the
    // incumbent are skipped.
    fn visit(&mut self, fixed: &mut Vec<Option<usize>>, depth: usize, warm: Option<&[f64]>) -> Result<()> {
        let z = bound_cp(self.tables, Some(fixed), warm)?;
        self.hit_cap |= z.hit_cap;
        let bound = z.objective + z.gap;
        if let Some((b, _, _)) = &self.best {
            if bound * (1.0 + 1e-12) < *b {
                return Ok(());
            }
        }
        if depth == self.rows.len() {
            self.leaf(&z, fixed)?;
            return Ok(());
        }
        let row = self.rows[depth];
        let mut cols: Vec<usize> = (0..self.tables.width).collect();
        let zr = z.row(row).to_vec();
        cols.sort_by(|&a, &b| zr[b].total_cmp(&zr[a]));
        for j in cols {
            fixed[row] = Some(j);
            self.visit(fixed, depth + 1, Some(&z.z))?;
        }
        fixed[row] = None;
        Ok(())
    }

    /// Searches every subtree below the first big row independently and in
    /// parallel; the winner is the best value, then the lowest fixing index.
    fn run(self, len: usize) -> Result<(Vec<usize>, u64, bool)> {
        let mut fixed = vec![None; len];
        if self.rows.is_empty() {
            let mut s = self;
            s.visit(&mut fixed, 0, None)?;
            let (_, _, cols) = s.best.expect("one fixing is solved");
            return Ok((cols, s.solved, s.hit_cap));
        }
        let root = bound_cp(self.tables, Some(&fixed), None)?;
        let row = self.rows[0];
        let parts: Vec<Result<Search>> = (0..self.tables.width)
            .into_par_iter()
            .map(|j| {
                let mut s = Search {
                    tables: self.tables,
                    rows: self.rows.clone(),
                    seed: self.seed,
                    reps: self.reps,
                    best: None,
                    solved: 0,
                    hit_cap: root.hit_cap,
                };
                let mut f = vec![None; len];
                f[row] = Some(j);
                s.visit(&mut f, 1, Some(&root.z))?;
                Ok(s)
            })
            .collect();
        let mut best: Option<(f64, u64, Vec<usize>)> = None;
        let (mut solved, mut hit_cap) = (0, false);
        for part in parts {
            let part = part?;
            solved += part.solved;
            hit_cap |= part.hit_cap;
            if let Some((v, i, c)) = part.best {
                let better = match &best {
                    None => true,
                    Some((b, bi, _)) => v > *b || (v == *b && i < *bi),
                };
                if better {
                    best = Some((v, i, c));
                }
            }
        }
        let (_, _, cols) = best.expect("one fixing is solved");
        Ok((cols, solved, hit_cap))
    }

    fn leaf(&mut self, z: &Assignment, fixed: &[Option<usize>]) -> Result<()> {
        self.solved += 1;
        let index = self.index_of(fixed);
        let (r, _) = round_indexed(self.tables, z, self.seed, self.reps, index)?;
        let v = r.objective;
        let better = match &self.best {
            None => true,
            Some((b, bi, _)) => v > *b || (v == *b && index < *bi),
        };
        if better {
            self.best = Some((v, index, r.columns().expect("rounded assignment is integral")));
        }
        Ok(())
    }
}

/// Ordering for an arbitrary instance.
pub fn order_general(inst: &Instance, eps: f64, seed: u64) -> Result<GeneralOrdering> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::domain(format!("eps = {eps} outside (0, 0.25]")));
    }
    let n = inst.len();
    let width = level_count(eps) + 1;
    let (eps_d, k_requested, k, k_adjusted) = choose_k(eps, width)?;
    let dec = decompose(inst, eps_d, k, SmallnessMode::EpsSmall)?;
    let t_star = dec.t_star;

    let removed: Vec<usize> = if t_star > 0.0 && !dec.big_indices.is_empty() {
        let r = ((eps * k as f64 - 1e-9).ceil() as usize).clamp(1, dec.big_indices.len());
        let mut rng = trial_rng(seed, streams::SUBSET, 0);
        let mut pick: Vec<usize> = sample(&mut rng, dec.big_indices.len(), r)
            .into_iter()
            .map(|j| dec.big_indices[j])
            .collect();
        pick.sort_unstable();
        pick
    } else {
        Vec::new()
    };
    let kept: Vec<usize> = (0..n).filter(|i| removed.binary_search(i).is_err()).collect();
    let residual = dec.residual_instance.subset(&kept)?;
    // local indices of big rows that are still present
    let rows: Vec<usize> = kept
        .iter()
        .enumerate()
        .filter(|(_, i)| dec.big_indices.binary_search(i).is_ok())
        .map(|(l, _)| l)
        .collect();

    let grid = grid_from_max(expected_max(&residual)?, eps);
    let tables = AssignmentTables::new(&residual, &grid.levels);
    let fixings_total = (width as u64).saturating_pow(rows.len() as u32);
    let search = Search {
        tables: &tables,
        rows,
        seed,
        reps: default_reps(eps),
        best: None,
        solved: 0,
        hit_cap: false,
    };
    let (cols, solved, hit_cap) = search.run(residual.len())?;
    let local = induced_policy(&tables, &cols);

    let constructed = if t_star == 0.0 {
        let pol = StatelessPolicy::new(
            inst,
            local.order.iter().map(|&l| kept[l]).collect(),
            local.thresholds.clone(),
        )?;
        open_last(inst, pol)?
    } else {
        let mut order: Vec<usize> = local.order.iter().map(|&l| kept[l]).collect();
        let mut thresholds = vec![t_star; n];
        for (l, &i) in kept.iter().enumerate() {
            let tau = local.thresholds[l];
            thresholds[i] = if tau > 0.0 { t_star + tau } else { first_above(inst, i, t_star) };
        }
        order.extend_from_slice(&removed);
        open_last(inst, StatelessPolicy::new(inst, order, thresholds)?)?
    };
    let policy = backward_induction(inst, &constructed.order)?;

    Ok(GeneralOrdering {
        policy,
        constructed,
        eps,
        eps_decomposition: eps_d,
        k_requested,
        k,
        t_star,
        big: dec.big_indices.clone(),
        removed,
        fixings_total,
        fixings_solved: solved,
        k_adjusted,
        solver_hit_cap: hit_cap,
    })
}

/// Threshold accepting exactly the values strictly above `t`.
fn first_above(inst: &Instance, i: usize, t: f64) -> f64 {
    let d = inst.get(i);
    d.values()
        .iter()
        .copied()
        .find(|&v| v - t > MERGE_TOL * t.abs().max(1.0))
        .unwrap_or(d.max_value() + 1.0)
}

/// Exact value of running `pol` while the variables in `removed` are replaced
/// by virtual copies: the walk is unchanged, but stopping on a virtual copy
/// pays nothing.
pub fn coupled_value(pol: &StatelessPolicy, removed: &[usize]) -> f64 {
    let mut reach = 1.0;
    let mut u = 0.0;
    for (pos, &i) in pol.order.iter().enumerate() {
        let (l, p) = (pol.lambdas[pos], pol.ps[pos]);
        if !removed.contains(&i) {
            u += reach * l * (1.0 - p);
        }
        reach *= p;
    }
    u
}
