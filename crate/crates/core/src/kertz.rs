//! The Kertz constant β, the boundary-value curve y(t) and the worst-case
//! i.i.d. construction built from it.
//!
//! With `D(y) = (1/β - 1) + y (1 - ln y)`, β is the root of `∫₀¹ dy / D(y) = 1`
//! and y solves `y' = -D(y)`, `y(0) = 1`, `y(1) = 0`. The forward ODE is stiff
//! near `y = 0`, so the curve is tabulated through its inverse
//! `t(y) = ∫_y^1 du / D(u)` and interpolated with monotone Hermite cubics.

use crate::dist::{Distribution, Instance};
use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, gauss_legendre};

/// Default number of y-grid nodes.
pub const DEFAULT_GRID: usize = 4096;
/// Default number of t-points in the discretization of `F_q`.
pub const DEFAULT_FQ_POINTS: usize = 2048;

/// `D(y) = (1/β - 1) + y (1 - ln y)`, with the limit at `y = 0`.
pub fn kertz_denominator(beta: f64, y: f64) -> f64 {
    let tail = if y <= 0.0 { 0.0 } else { y * (1.0 - y.ln()) };
    (1.0 / beta - 1.0) + tail
}

/// `∫₀¹ dy / D(y)` by adaptive Simpson with absolute tolerance `quad_tol`.
pub fn kertz_integral(beta: f64, quad_tol: f64) -> f64 {
    let f = |y: f64| 1.0 / kertz_denominator(beta, y);
    // The integrand has an infinite slope at 0 from the y ln y term.
    adaptive_simpson(f, 0.0, 1e-3, 0.1 * quad_tol) + adaptive_simpson(f, 1e-3, 1.0, 0.9 * quad_tol)
}

/// Solves for β by bisection on `(0.5, 1)` so that the defining integral is
/// within `tol` of one.
pub fn solve_beta(tol: f64) -> Result<f64> {
    solve_beta_with(tol, 1e-3 * tol)
}

/// As [`solve_beta`] with an explicit quadrature tolerance.
pub fn solve_beta_with(tol: f64, quad_tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(Error::domain(format!("tolerance {tol} outside (0, 1e-4]")));
    }
    let g = |b: f64| kertz_integral(b, quad_tol) - 1.0;
    let (mut lo, mut hi) = (0.5, 1.0 - 1e-9);
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo < 0.0 && ghi > 0.0) {
        return Err(Error::Internal(format!(
            "root not bracketed: residuals {glo} and {ghi}"
        )));
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let r = g(mid);
        if r.abs() <= 0.01 * tol || hi - lo < 1e-15 {
            break;
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Tabulated solution of the Kertz boundary-value problem.
#[derive(Debug, Clone)]
pub struct KertzSolution {
    beta: f64,
    // Ascending in t, descending in y.
    ts: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
    // g[i] = ∫₀^{ys[i]} du / D(u)²
    g: Vec<f64>,
    tolerance: f64,
}

fn y_nodes(grid_size: usize) -> Vec<f64> {
    let third = grid_size / 3;
    let mut ys = Vec::with_capacity(grid_size + 2);
    ys.push(0.0);
    let (lo, edge) = (1e-14f64, 0.01f64);
    let ratio = (edge / lo).ln() / third as f64;
    for k in 0..third {
        ys.push(lo * (ratio * k as f64).exp());
    }
    let middle = grid_size - 2 * third;
    for k in 0..middle {
        ys.push(edge + (1.0 - 2.0 * edge) * k as f64 / middle as f64);
    }
    for k in (0..third).rev() {
        ys.push(1.0 - lo * (ratio * (k + 1) as f64).exp().min(edge / lo));
    }
    ys.push(1.0);
    ys.dedup();
    ys
}

impl KertzSolution {
    /// Tabulates y(t) from β on a y-grid of `grid_size` nodes.
    pub fn solve(beta: f64, grid_size: usize) -> Result<Self> {
        if grid_size < 100 {
            return Err(Error::domain(format!("grid size {grid_size} below 100")));
        }
        if !(beta > 0.5 && beta < 1.0) {
            return Err(Error::domain(format!("beta {beta} outside (0.5, 1)")));
        }
        let d = |y: f64| kertz_denominator(beta, y);
        let ynodes = y_nodes(grid_size);
        let m = ynodes.len();

        // t at each y node, accumulated downward from y = 1 where t = 0.
        let mut t_of_y = vec![0.0; m];
        for k in (0..m - 1).rev() {
            let piece = gauss_legendre(|u| 1.0 / d(u), ynodes[k], ynodes[k + 1]);
            t_of_y[k] = t_of_y[k + 1] + piece;
        }
        let mut g = vec![0.0; m];
        for k in 1..m {
            g[k] = g[k - 1] + gauss_legendre(|u| 1.0 / (d(u) * d(u)), ynodes[k - 1], ynodes[k]);
        }

        let ts: Vec<f64> = t_of_y.iter().rev().copied().collect();
        let ys: Vec<f64> = ynodes.iter().rev().copied().collect();
        let g: Vec<f64> = g.into_iter().rev().collect();
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Internal("t(y) table is not strictly monotone".into()));
        }
        let slopes = ys.iter().map(|&y| -d(y)).collect();
        let tolerance = (ts[m - 1] - 1.0).abs().max(1e-12);
        Ok(KertzSolution {
            beta,
            ts,
            ys,
            slopes,
            g,
            tolerance,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Distance of the tabulated `t(0)` from 1.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn grid_len(&self) -> usize {
        self.ts.len()
    }

    /// The tabulated `(t, y, y')` nodes.
    pub fn grid(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.ts.len()).map(|i| (self.ts[i], self.ys[i], self.slopes[i]))
    }

    /// `D(y)` for this β.
    pub fn denominator(&self, y: f64) -> f64 {
        kertz_denominator(self.beta, y)
    }

    /// y(t), clamped to `[0, 1]` outside the table.
    pub fn y(&self, t: f64) -> f64 {
        let last = self.ts.len() - 1;
        if t <= 0.0 {
            return 1.0;
        }
        if t >= self.ts[last] {
            return 0.0;
        }
        let k = self.ts.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (self.ts[k], self.ts[k + 1]);
        let (y0, y1) = (self.ys[k], self.ys[k + 1]);
        let h = t1 - t0;
        let secant = (y1 - y0) / h;
        // Fritsch–Carlson limiter on the exact slopes.
        let (mut m0, mut m1) = (self.slopes[k], self.slopes[k + 1]);
        let (a, b) = (m0 / secant, m1 / secant);
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m0 = tau * a * secant;
            m1 = tau * b * secant;
        }
        let x = (t - t0) / h;
        let (x2, x3) = (x * x, x * x * x);
        let h00 = 2.0 * x3 - 3.0 * x2 + 1.0;
        let h10 = x3 - 2.0 * x2 + x;
        let h01 = -2.0 * x3 + 3.0 * x2;
        let h11 = x3 - x2;
        (h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1).clamp(0.0, 1.0)
    }

    /// y'(t) from the ODE right-hand side.
    pub fn y_prime(&self, t: f64) -> f64 {
        -self.denominator(self.y(t))
    }

    /// Index of the y-node interval containing `y`, as `(upper, lower)` table
    /// positions with `ys[upper] >= y >= ys[lower]`.
    fn bracket_y(&self, y: f64) -> (usize, usize) {
        // ys descending
        let k = self.ys.partition_point(|&v| v > y);
        let k = k.clamp(1, self.ys.len() - 1);
        (k - 1, k)
    }

    /// The time at which the curve reaches `y`, i.e. `t(y) = ∫_y^1 du / D(u)`.
    pub fn time_of(&self, y: f64) -> f64 {
        if y >= 1.0 {
            return 0.0;
        }
        if y <= 0.0 {
            return self.ts[self.ts.len() - 1];
        }
        let (up, _) = self.bracket_y(y);
        let d = |u: f64| 1.0 / self.denominator(u);
        self.ts[up] + gauss_legendre(d, y, self.ys[up])
    }

    /// `∫₀^y du / D(u)²`.
    fn g_of_y(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let y = y.min(1.0);
        let (_, low) = self.bracket_y(y);
        let f = |u: f64| {
            let v = self.denominator(u);
            1.0 / (v * v)
        };
        self.g[low] + gauss_legendre(f, self.ys[low], y)
    }

    /// Worst-case parameters for the cutoff `q`.
    pub fn optimal_rate(&self, q: f64) -> Result<WorstCaseParams> {
        if !(q > 0.0 && q < 0.5) {
            return Err(Error::domain(format!("q = {q} outside (0, 0.5)")));
        }
        if q < 4.0 * self.ts[1] {
            return Err(Error::Resolution(format!(
                "q = {q} is below the first grid cells; raise the grid size"
            )));
        }
        let p = self.y(q);
        let r_q = self.g_of_y(p);
        let h = 1.0 / (self.y_prime(q) * p.ln()) + r_q;
        if !(h > r_q) {
            return Err(Error::Internal(format!(
                "H = {h} does not exceed r*(q) = {r_q} at q = {q}"
            )));
        }
        let samples = 1024;
        let r_star_grid = (0..=samples)
            .map(|i| {
                let t = i as f64 / samples as f64;
                let r = if t <= q { h } else { self.g_of_y(self.y(t)) };
                (t, r)
            })
            .collect();
        Ok(WorstCaseParams {
            q,
            p,
            h,
            r_q,
            r_star_grid,
        })
    }

    /// `r*(t)` for the cutoff stored in `params`.
    pub fn r_star(&self, params: &WorstCaseParams, t: f64) -> f64 {
        if t <= params.q {
            params.h
        } else {
            self.g_of_y(self.y(t))
        }
    }

    /// Discretized `F_q`: atoms at `r*(t_k)` with c.d.f. `y(t_k)` for `points`
    /// uniform `t_k` in `[q, 1]`, plus the atom of mass `1 - p` at `H`.
    pub fn worst_case_cdf(&self, params: &WorstCaseParams, points: usize) -> Result<Distribution> {
        if points < 2 {
            return Err(Error::domain("F_q needs at least two grid points"));
        }
        let step = (1.0 - params.q) / (points - 1) as f64;
        // Walk from t = 1 (x = 0) up to t = q (x = r*(q)).
        let mut atoms = Vec::with_capacity(points + 1);
        let mut prev_cum = 0.0;
        for i in (0..points).rev() {
            let t = if i == 0 { params.q } else { params.q + step * i as f64 };
            let y = if i == 0 { params.p } else { self.y(t) };
            let x = if i == 0 { params.r_q } else { self.r_star(params, t) };
            let m = y - prev_cum;
            if m > 0.0 {
                atoms.push((x, m));
                prev_cum = y;
            }
        }
        atoms.push((params.h, 1.0 - params.p));
        Ok(Distribution::new(atoms)?.with_label(format!("F_q(q={})", params.q)))
    }

    /// `n` i.i.d. copies of `F_q^{1/n}`.
    pub fn worst_case_instance(&self, q: f64, n: usize) -> Result<Instance> {
        if n == 0 {
            return Err(Error::domain("n must be at least 1"));
        }
        let params = self.optimal_rate(q)?;
        let fq = self.worst_case_cdf(&params, DEFAULT_FQ_POINTS)?;
        Instance::iid(fq.power_cdf(n as u32)?, n)
    }
}

/// The worst-case objects for a cutoff `q`.
#[derive(Debug, Clone)]
pub struct WorstCaseParams {
    pub q: f64,
    /// `y(q)`
    pub p: f64,
    pub h: f64,
    /// `r*(q⁺)`
    pub r_q: f64,
    pub r_star_grid: Vec<(f64, f64)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sol() -> KertzSolution {
        KertzSolution::solve(solve_beta(1e-10).unwrap(), DEFAULT_GRID).unwrap()
    }

    #[test]
    fn beta_residual() {
        let b = solve_beta(1e-8).unwrap();
        assert!((kertz_integral(b, 1e-13) - 1.0).abs() <= 1e-8);
        assert!((b - 0.745).abs() < 1e-3);
    }

    #[test]
    fn beta_stable_under_refinement() {
        let a = solve_beta_with(1e-8, 1e-11).unwrap();
        let b = solve_beta_with(1e-8, 1e-13).unwrap();
        assert!((a - b).abs() <= 1e-7);
    }

    #[test]
    fn boundary_values_and_initial_slope() {
        let s = sol();
        assert!((s.y(0.0) - 1.0).abs() < 1e-6);
        assert!(s.y(1.0).abs() < 1e-6);
        assert!((s.y_prime(0.0) + 1.0 / s.beta()).abs() < 1e-9);
    }

    #[test]
    fn time_of_inverts_y() {
        let s = sol();
        for &t in &[0.01, 0.2, 0.5, 0.9, 0.999] {
            assert!((s.time_of(s.y(t)) - t).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn optimal_rate_basic_shape() {
        let s = sol();
        let w = s.optimal_rate(0.2).unwrap();
        assert!(s.r_star(&w, 1.0).abs() < 1e-9);
        assert!(w.h > w.r_q);
        assert!(w.r_star_grid.windows(2).all(|p| p[1].1 <= p[0].1 + 1e-12));
        assert!(s.optimal_rate(0.6).is_err());
    }

    #[test]
    fn fq_top_atom() {
        let s = sol();
        let w = s.optimal_rate(0.2).unwrap();
        let f = s.worst_case_cdf(&w, DEFAULT_FQ_POINTS).unwrap();
        assert!((f.cdf_strict(w.h) - w.p).abs() < 1e-12);
        assert!((f.masses().last().unwrap() - (1.0 - w.p)).abs() < 1e-12);
        assert!(f.cdf(0.0) < 1e-3);
    }
}
