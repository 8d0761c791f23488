//! Randomized rounding of fractional assignments and the small-variable
//! ordering pipeline.

use rand::Rng;

use super::cp::{integral_objective, solve_cp, Assignment};
use super::tables::{build_grid, build_tables, AssignmentTables};
use crate::benchmarks::StatelessPolicy;
use crate::dist::Instance;
use crate::error::{Error, Result};
use crate::sim::{streams, trial_rng};

/// Default number of rounding repetitions, `ceil(10/eps)`.
pub fn default_reps(eps: f64) -> usize {
    (10.0 / eps - 1e-9).ceil().max(1.0) as usize
}

/// λ-sorted policy induced by an integral assignment: item `i` gets threshold
/// `levels[columns[i]]` and items are ordered by the ranking of their pair.
pub fn induced_policy(tables: &AssignmentTables, columns: &[usize]) -> StatelessPolicy {
    let w = tables.width;
    let mut order = Vec::with_capacity(tables.n);
    let mut lambdas = Vec::with_capacity(tables.n);
    let mut ps = Vec::with_capacity(tables.n);
    for &m in &tables.ranking {
        let (i, j) = (m / w, m % w);
        if columns[i] == j {
            order.push(i);
            lambdas.push(tables.lambda[m]);
            ps.push(tables.p[m]);
        }
    }
    let thresholds = columns.iter().map(|&j| tables.levels[j]).collect();
    StatelessPolicy {
        order,
        thresholds,
        lambdas,
        ps,
        value: integral_objective(tables, columns),
    }
}

/// Samples one column per free row with probability `z_{i,j}`, `reps` times,
/// keeping the best by exact objective (first on ties). Fixed rows keep their
/// column.
pub fn round_assignment(
    tables: &AssignmentTables,
    z: &Assignment,
    seed: u64,
    reps: usize,
) -> Result<(Assignment, StatelessPolicy)> {
    round_indexed(tables, z, seed, reps, 0)
}

pub(crate) fn round_indexed(
    tables: &AssignmentTables,
    z: &Assignment,
    seed: u64,
    reps: usize,
    index: u64,
) -> Result<(Assignment, StatelessPolicy)> {
    if reps == 0 {
        return Err(Error::domain("reps must be at least 1"));
    }
    if z.n != tables.n || z.width != tables.width {
        return Err(Error::domain("assignment shape does not match tables"));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut cols = vec![0usize; z.n];
    for rep in 0..reps {
        let mut rng = trial_rng(seed, streams::ROUNDING, index * reps as u64 + rep as u64);
        for (i, c) in cols.iter_mut().enumerate() {
            *c = match z.fixed[i] {
                Some(j) => j,
                None => sample_row(z.row(i), rng.gen::<f64>()),
            };
        }
        let v = integral_objective(tables, &cols);
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, cols.clone()));
        }
    }
    let (_, cols) = best.expect("reps >= 1");
    let mut out = Assignment::integral(tables, &cols)?;
    out.fixed = z.fixed.clone();
    let pol = induced_policy(tables, &cols);
    Ok((out, pol))
}

fn sample_row(row: &[f64], u: f64) -> usize {
    let total: f64 = row.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (j, &p) in row.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = j;
        if target < acc {
            return j;
        }
    }
    last
}

/// Makes the last item accept anything. Never lowers the value.
pub(crate) fn open_last(inst: &Instance, pol: StatelessPolicy) -> Result<StatelessPolicy> {
    let mut thresholds = pol.thresholds;
    if let Some(&last) = pol.order.last() {
        thresholds[last] = 0.0;
    }
    StatelessPolicy::new(inst, pol.order, thresholds)
}

/// Ordering for instances whose variables are all `eps`-small.
pub fn order_small(inst: &Instance, eps: f64) -> Result<StatelessPolicy> {
    order_small_seeded(inst, eps, 0)
}

pub fn order_small_seeded(inst: &Instance, eps: f64, seed: u64) -> Result<StatelessPolicy> {
    let grid = build_grid(inst, eps)?;
    let bad = inst.non_small(eps, 0.0);
    if !bad.is_empty() {
        return Err(Error::precondition(format!("variables are not {eps}-small"), bad));
    }
    let tables = build_tables(inst, &grid);
    let z = solve_cp(&tables, None)?;
    let (_, pol) = round_assignment(&tables, &z, seed, default_reps(eps))?;
    open_last(inst, pol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::eval_policy;
    use crate::dist::Distribution;

    #[test]
    fn integral_input_is_unchanged() {
        let inst = Instance::new(vec![
            Distribution::new([(0.0, 0.5), (1.0, 0.5)]).unwrap(),
            Distribution::point(0.6).unwrap(),
        ])
        .unwrap();
        let t = AssignmentTables::new(&inst, &[0.8, 0.6, 0.4, 0.2, 0.0]);
        let z = Assignment::integral(&t, &[1, 4]).unwrap();
        let (r, pol) = round_assignment(&t, &z, 3, 7).unwrap();
        assert_eq!(r.columns().unwrap(), vec![1, 4]);
        assert_eq!(r.objective, z.objective);
        assert_eq!(pol.order, vec![0, 1]);
        assert!((eval_policy(&inst, &pol).unwrap() - pol.value).abs() < 1e-12);
    }

    #[test]
    fn single_variable_takes_its_mean() {
        let d = Distribution::new([(0.0, 0.95), (3.0, 0.05)]).unwrap();
        let inst = Instance::new(vec![d.clone()]).unwrap();
        let pol = order_small(&inst, 0.1).unwrap();
        assert!((pol.value - d.mean()).abs() < 1e-15);
    }

    #[test]
    fn rejects_big_variables() {
        let inst = Instance::new(vec![Distribution::point(1.0).unwrap()]).unwrap();
        assert!(matches!(order_small(&inst, 0.1), Err(Error::Precondition { .. })));
    }

    #[test]
    fn sampling_respects_zero_mass() {
        assert_eq!(sample_row(&[0.0, 1.0, 0.0], 0.999), 1);
        assert_eq!(sample_row(&[0.5, 0.0, 0.5], 0.25), 0);
        assert_eq!(sample_row(&[0.5, 0.0, 0.5], 0.75), 2);
    }
}
