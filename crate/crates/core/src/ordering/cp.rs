//! The concave assignment program over row simplices.
//!
//! Objective, in ranking order `ℓ = 1..N`:
//! `Σ_ℓ (λ_ℓ - λ_{ℓ+1}) (1 - Π_{ℓ' <= ℓ} p_{ℓ'}^{z_{ℓ'}})`.

use serde::{Deserialize, Serialize};

use nalgebra::{DMatrix, DVector};

use super::tables::AssignmentTables;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 100_000;
const STALL_WINDOW: usize = 50;
const STALL_TOL: f64 = 1e-9;
const GAP_TOL: f64 = 1e-9;
// Window of the non-monotone line search.
const MEMORY: usize = 10;

/// Fractional or integral assignment of one threshold level per variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub n: usize,
    pub width: usize,
    /// Row-major `n × width`.
    pub z: Vec<f64>,
    /// `fixed[i] = Some(j)` pins row `i` to column `j`.
    pub fixed: Vec<Option<usize>>,
    pub objective: f64,
    /// Frank-Wolfe duality gap at the returned point; an upper bound on the
    /// distance to the optimum.
    pub gap: f64,
    pub iterations: usize,
    /// Set when the iteration cap was reached before a stopping rule fired.
    pub hit_cap: bool,
}

impl Assignment {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.z[i * self.width..(i + 1) * self.width]
    }

    /// One-hot assignment from a column per row.
    pub fn integral(tables: &AssignmentTables, columns: &[usize]) -> Result<Self> {
        if columns.len() != tables.n || columns.iter().any(|&j| j >= tables.width) {
            return Err(Error::domain("one column in range per row required"));
        }
        let mut z = vec![0.0; tables.n * tables.width];
        for (i, &j) in columns.iter().enumerate() {
            z[i * tables.width + j] = 1.0;
        }
        let objective = integral_objective(tables, columns);
        Ok(Assignment {
            n: tables.n,
            width: tables.width,
            z,
            fixed: vec![None; tables.n],
            objective,
            gap: 0.0,
            iterations: 0,
            hit_cap: false,
        })
    }

    /// Column of each row if every row is one-hot.
    pub fn columns(&self) -> Option<Vec<usize>> {
        (0..self.n)
            .map(|i| {
                let row = self.row(i);
                let j = row.iter().position(|&v| v == 1.0)?;
                row.iter().enumerate().all(|(m, &v)| m == j || v == 0.0).then_some(j)
            })
            .collect()
    }
}

/// Exact objective of an integral assignment, walking the ranking and
/// dropping unselected pairs. Equals the value of the induced λ-sorted policy.
pub fn integral_objective(tables: &AssignmentTables, columns: &[usize]) -> f64 {
    let mut reach = 1.0;
    let mut u = 0.0;
    for &m in &tables.ranking {
        let (i, j) = (m / tables.width, m % tables.width);
        if columns[i] == j {
            u += reach * tables.lambda[m] * (1.0 - tables.p[m]);
            reach *= tables.p[m];
        }
    }
    u
}

/// Relaxed objective at `z`, writing the gradient into `grad` when given.
pub fn objective(tables: &AssignmentTables, z: &[f64], grad: Option<&mut [f64]>) -> f64 {
    evaluate(tables, z, grad, None)
}

// Also fills `suffix[l] = Σ_{l' >= l} Δ_l' P_l'` when asked; the Hessian is
// `-log p_a log p_b suffix[max(rank a, rank b)]`.
fn evaluate(tables: &AssignmentTables, z: &[f64], grad: Option<&mut [f64]>, suffix_out: Option<&mut Vec<f64>>) -> f64 {
    let len = tables.ranking.len();
    let want = grad.is_some() || suffix_out.is_some();
    let mut log_prod = 0.0;
    let mut value = 0.0;
    let mut prods = Vec::with_capacity(if want { len } else { 0 });
    for l in 0..len {
        log_prod += z[tables.ranking[l]] * tables.log_p[l];
        value -= tables.delta[l] * log_prod.exp_m1();
        if want {
            prods.push(log_prod.exp());
        }
    }
    if want {
        let mut sums = vec![0.0; len];
        let mut suffix = 0.0;
        for l in (0..len).rev() {
            suffix += tables.delta[l] * prods[l];
            sums[l] = suffix;
        }
        if let Some(g) = grad {
            for l in 0..len {
                g[tables.ranking[l]] = -tables.log_p[l] * sums[l];
            }
        }
        if let Some(out) = suffix_out {
            *out = sums;
        }
    }
    value
}

/// Euclidean projection of `v` onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        acc += x;
        let t = (acc - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
    // large inputs cost precision in the shift
    let sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= sum);
}

fn fw_gap(width: usize, z: &[f64], g: &[f64], free: &[usize]) -> f64 {
    free.iter()
        .map(|&i| {
            let (zr, gr) = (&z[i * width..(i + 1) * width], &g[i * width..(i + 1) * width]);
            let best = gr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let cur: f64 = zr.iter().zip(gr).map(|(a, b)| a * b).sum();
            best - cur
        })
        .sum()
}

/// Newton steps on the current support of each free row, with the row sums
/// held fixed. Returns the new objective.
fn polish(tables: &AssignmentTables, z: &mut [f64], free: &[usize]) -> f64 {
    let w = tables.width;
    let mut suffix = Vec::new();
    let mut g = vec![0.0; z.len()];
    let mut f = evaluate(tables, z, Some(&mut g), Some(&mut suffix));
    let mut trial = z.to_vec();
    for _ in 0..50 {
        let mut coords = Vec::new();
        let mut groups: Vec<(usize, usize)> = Vec::new();
        for &i in free {
            let start = coords.len();
            coords.extend((i * w..(i + 1) * w).filter(|&m| z[m] > 1e-14));
            if coords.len() - start < 2 {
                coords.truncate(start);
            } else {
                groups.push((start, coords.len()));
            }
        }
        if coords.is_empty() {
            break;
        }
        let q = coords.len();
        let dim = q + groups.len();
        let lp: Vec<f64> = coords.iter().map(|&m| tables.log_p[tables.rank_of[m]]).collect();
        let rk: Vec<usize> = coords.iter().map(|&m| tables.rank_of[m]).collect();
        let mut kkt = DMatrix::<f64>::zeros(dim, dim);
        let mut scale = 0.0f64;
        for a in 0..q {
            for b in 0..q {
                let h = -lp[a] * lp[b] * suffix[rk[a].max(rk[b])];
                kkt[(a, b)] = h;
            }
            scale = scale.max(kkt[(a, a)].abs());
        }
        for a in 0..q {
            kkt[(a, a)] -= 1e-12 * scale + 1e-300;
        }
        for (r, &(lo, hi)) in groups.iter().enumerate() {
            for a in lo..hi {
                kkt[(a, q + r)] = 1.0;
                kkt[(q + r, a)] = 1.0;
            }
        }
        let mut rhs = DVector::<f64>::zeros(dim);
        for a in 0..q {
            rhs[a] = -g[coords[a]];
        }
        let Some(sol) = kkt.lu().solve(&rhs) else { break };
        let mut d: Vec<f64> = (0..q).map(|a| sol[a]).collect();
        for &(lo, hi) in &groups {
            let mean = d[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
            d[lo..hi].iter_mut().for_each(|x| *x -= mean);
        }
        let slope: f64 = (0..q).map(|a| d[a] * g[coords[a]]).sum();
        if !(slope > 0.0) {
            break;
        }
        let mut t_max = 1.0f64;
        for a in 0..q {
            if d[a] < 0.0 {
                t_max = t_max.min(-z[coords[a]] / d[a]);
            }
        }
        let mut t = t_max;
        let mut accepted = None;
        for _ in 0..40 {
            trial.copy_from_slice(z);
            for a in 0..q {
                let v = z[coords[a]] + t * d[a];
                trial[coords[a]] = if v < 1e-15 { 0.0 } else { v };
            }
            for &(lo, _) in &groups {
                let i = coords[lo] / w;
                let row = &mut trial[i * w..(i + 1) * w];
                let sum: f64 = row.iter().sum();
                row.iter_mut().for_each(|x| *x /= sum);
            }
            let f_new = evaluate(tables, &trial, None, None);
            if f_new > f {
                accepted = Some(f_new);
                break;
            }
            t *= 0.5;
        }
        let Some(f_new) = accepted else { break };
        let gain = f_new - f;
        z.copy_from_slice(&trial);
        f = evaluate(tables, z, Some(&mut g), Some(&mut suffix));
        if gain <= 1e-15 * f.abs() {
            break;
        }
    }
    f
}

fn check_fixed(tables: &AssignmentTables, fixed: &[Option<usize>]) -> Result<()> {
    if fixed.len() != tables.n {
        return Err(Error::domain(format!("fixed map has {} rows, expected {}", fixed.len(), tables.n)));
    }
    if let Some(i) = fixed.iter().position(|f| matches!(f, Some(j) if *j >= tables.width)) {
        return Err(Error::domain(format!("fixed column for row {i} out of range")));
    }
    Ok(())
}

/// Maximizes the relaxed objective.
///
/// Spectral projected gradient ascent with a non-monotone line search runs
/// until the Frank-Wolfe gap certifies relative accuracy 1e-9, the objective
/// improves by less than 1e-9 (relative) over 50 iterations, or
/// [`MAX_ITERATIONS`] is reached. Newton steps on the support then refine the
/// point, and ascent resumes if the gap is still open.
pub fn solve_cp(tables: &AssignmentTables, fixed: Option<&[Option<usize>]>) -> Result<Assignment> {
    solve_cp_from(tables, fixed, None)
}

/// [`solve_cp`] started from `start` (rows are re-projected and fixed rows
/// overwritten).
pub fn solve_cp_from(
    tables: &AssignmentTables,
    fixed: Option<&[Option<usize>]>,
    start: Option<&[f64]>,
) -> Result<Assignment> {
    solve_inner(tables, fixed, start, true)
}

/// First-order ascent only; the returned `objective + gap` is still a valid
/// upper bound on the optimum.
pub(crate) fn bound_cp(
    tables: &AssignmentTables,
    fixed: Option<&[Option<usize>]>,
    start: Option<&[f64]>,
) -> Result<Assignment> {
    solve_inner(tables, fixed, start, false)
}

fn solve_inner(
    tables: &AssignmentTables,
    fixed: Option<&[Option<usize>]>,
    start: Option<&[f64]>,
    refine: bool,
) -> Result<Assignment> {
    let (n, w) = (tables.n, tables.width);
    let fixed: Vec<Option<usize>> = match fixed {
        Some(f) => {
            check_fixed(tables, f)?;
            f.to_vec()
        }
        None => vec![None; n],
    };
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    let mut z = match start {
        Some(s) if s.len() == n * w => s.to_vec(),
        _ => vec![1.0 / w as f64; n * w],
    };
    for i in 0..n {
        let row = &mut z[i * w..(i + 1) * w];
        match fixed[i] {
            Some(j) => row.iter_mut().enumerate().for_each(|(m, v)| *v = if m == j { 1.0 } else { 0.0 }),
            None => project_simplex(row),
        }
    }
    let mut run = ascend(tables, z, &free, MAX_ITERATIONS);
    if refine && !free.is_empty() {
        for _ in 0..4 {
            let mut z = run.z.clone();
            let f = polish(tables, &mut z, &free);
            if f < run.f {
                break;
            }
            let mut g = vec![0.0; n * w];
            objective(tables, &z, Some(&mut g));
            let gap = fw_gap(w, &z, &g, &free);
            let (iterations, hit_cap) = (run.iterations, run.hit_cap);
            run = Ascent { z, f, gap, iterations, hit_cap };
            if gap <= GAP_TOL * f.abs().max(1e-300) || hit_cap {
                break;
            }
            let more = ascend(tables, run.z.clone(), &free, MAX_ITERATIONS - iterations);
            let before = run.f;
            run = Ascent {
                iterations: iterations + more.iterations,
                hit_cap: more.hit_cap,
                ..if more.f >= run.f { more } else { run }
            };
            if run.f - before <= 1e-15 * run.f.abs() {
                break;
            }
        }
    }
    Ok(Assignment {
        n,
        width: w,
        z: run.z,
        fixed,
        objective: run.f,
        gap: run.gap.max(0.0),
        iterations: run.iterations,
        hit_cap: run.hit_cap,
    })
}

struct Ascent {
    z: Vec<f64>,
    f: f64,
    gap: f64,
    iterations: usize,
    hit_cap: bool,
}

fn ascend(tables: &AssignmentTables, mut z: Vec<f64>, free: &[usize], budget: usize) -> Ascent {
    let (n, w) = (tables.n, tables.width);
    let mut g = vec![0.0; n * w];
    let mut f = objective(tables, &z, Some(&mut g));
    let mut history = vec![f];
    let mut step = 1.0;
    let mut trial = z.clone();
    let mut g_new = vec![0.0; n * w];
    let mut gap = fw_gap(w, &z, &g, free);
    let mut iterations = 0;
    let mut hit_cap = false;

    let mut best = f;
    let mut best_z = z.clone();
    let mut best_gap = gap;
    let mut dir = vec![0.0; n * w];
    let mut cycle_start = f64::NEG_INFINITY;
    if !free.is_empty() {
        loop {
            if gap <= GAP_TOL * f.abs().max(1e-300) {
                break;
            }
            if iterations >= budget {
                hit_cap = true;
                break;
            }
            iterations += 1;
            // spectral projected direction, then a non-monotone search along it
            dir.iter_mut().for_each(|d| *d = 0.0);
            for &i in free {
                let row = &mut trial[i * w..(i + 1) * w];
                for m in 0..w {
                    row[m] = z[i * w + m] + step * g[i * w + m];
                }
                project_simplex(row);
                for m in 0..w {
                    dir[i * w + m] = row[m] - z[i * w + m];
                }
            }
            let slope: f64 = dir.iter().zip(&g).map(|(d, gg)| d * gg).sum();
            if !(slope > 0.0) {
                break;
            }
            let reference = history[history.len().saturating_sub(MEMORY)..]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            let mut t = 1.0;
            let mut f_new;
            let mut tries = 0;
            loop {
                for m in 0..n * w {
                    trial[m] = z[m] + t * dir[m];
                }
                f_new = objective(tables, &trial, Some(&mut g_new));
                if f_new >= reference + 1e-4 * t * slope || tries >= 60 {
                    break;
                }
                t *= 0.5;
                tries += 1;
            }
            if tries >= 60 && f_new < f {
                break;
            }
            let mut ss = 0.0;
            let mut sy = 0.0;
            for m in 0..n * w {
                let s = trial[m] - z[m];
                ss += s * s;
                sy -= s * (g_new[m] - g[m]);
            }
            step = if sy > 0.0 { (ss / sy).clamp(1e-10, 1e8) } else { 1e8 };
            std::mem::swap(&mut z, &mut trial);
            std::mem::swap(&mut g, &mut g_new);
            f = f_new;
            gap = fw_gap(w, &z, &g, free);
            if f > best {
                best = f;
                best_z.copy_from_slice(&z);
                best_gap = gap;
            }
            history.push(f);
            if history.len() > STALL_WINDOW {
                let old = history[..history.len() - STALL_WINDOW]
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
                if best - old <= STALL_TOL * best.abs() {
                    // a stalled cycle that gained nothing since the last restart ends the run
                    if best - cycle_start <= STALL_TOL * best.abs() {
                        break;
                    }
                    cycle_start = best;
                    z.copy_from_slice(&best_z);
                    f = objective(tables, &z, Some(&mut g));
                    step = 1.0;
                    history.clear();
                    history.push(f);
                }
            }
        }
    }
    Ascent {
        z: best_z,
        f: best,
        gap: best_gap,
        iterations,
        hit_cap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{Distribution, Instance};

    fn instance_a() -> Instance {
        Instance::new(vec![
            Distribution::new([(0.0, 0.5), (1.0, 0.5)]).unwrap(),
            Distribution::point(0.6).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn projection_lands_on_simplex() {
        let mut v = vec![0.4, -1.0, 2.0, 0.3];
        project_simplex(&mut v);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(v.iter().all(|&x| x >= 0.0));
        assert_eq!(v, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn integral_value_instance_a() {
        let t = AssignmentTables::new(&instance_a(), &[0.8, 0.6, 0.4, 0.2, 0.0]);
        assert!((integral_objective(&t, &[1, 4]) - 0.8).abs() < 1e-15);
        // point mass cannot reach 0.8, so it contributes nothing
        assert!((integral_objective(&t, &[4, 0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn solves_instance_a_to_opt() {
        let t = AssignmentTables::new(&instance_a(), &[0.8, 0.6, 0.4, 0.2, 0.0]);
        let a = solve_cp(&t, None).unwrap();
        assert!(!a.hit_cap);
        assert!(a.objective >= 0.8 - 1e-9);
        for i in 0..2 {
            assert!((a.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fixed_rows_stay_one_hot() {
        let t = AssignmentTables::new(&instance_a(), &[0.8, 0.6, 0.4, 0.2, 0.0]);
        let a = solve_cp(&t, Some(&[Some(4), None])).unwrap();
        assert_eq!(a.row(0), &[0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(solve_cp(&t, Some(&[Some(9), None])).is_err());
    }

    #[test]
    fn zero_instance_has_zero_objective() {
        let z = Instance::iid(Distribution::point(0.0).unwrap(), 3).unwrap();
        let t = AssignmentTables::new(&z, &[0.0, 0.0, 0.0]);
        let a = solve_cp(&t, None).unwrap();
        assert_eq!(a.objective, 0.0);
    }
}
