//! Discrete distributions on the nonnegative reals and the transforms used by
//! the policies: powers of the c.d.f., residual shifts and truncations.

use crate::error::{Error, Result};

/// Atoms closer than this are merged on construction.
pub const MERGE_TOL: f64 = 1e-12;
/// Allowed deviation of the total mass from 1 before construction fails.
pub const MASS_TOL: f64 = 1e-9;
/// Default quantile-grid size used when discretizing parametric laws.
pub const DEFAULT_DISCRETIZATION: usize = 10_000;

/// A finite discrete distribution with sorted, strictly increasing atoms.
///
/// Prefix and suffix sums are cached so that `cdf`, `quantile` and
/// `tail_stats` are exact and logarithmic in the support size.
#[derive(Debug, Clone)]
pub struct Distribution {
    values: Vec<f64>,
    masses: Vec<f64>,
    // cum[i] = Pr[X <= values[i]]
    cum: Vec<f64>,
    // tail_mass[i] = Pr[X >= values[i]], tail_moment[i] = E[X 1{X >= values[i]}]
    tail_mass: Vec<f64>,
    tail_moment: Vec<f64>,
    label: String,
}

impl Distribution {
    /// Builds a distribution from `(value, mass)` pairs in any order.
    ///
    /// Values must be finite and nonnegative, masses nonnegative, and the
    /// total within [`MASS_TOL`] of one; the masses are then renormalized.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::domain("distribution needs at least one atom"));
        }
        for (i, &(v, m)) in atoms.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::domain(format!("atom {i}: value {v} is not a finite nonnegative number")));
            }
            if !m.is_finite() || m < 0.0 {
                return Err(Error::domain(format!("atom {i}: mass {m} is not a finite nonnegative number")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::domain(format!("masses sum to {total}, expected 1")));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut masses: Vec<f64> = Vec::with_capacity(atoms.len());
        for (v, m) in atoms {
            if m == 0.0 {
                continue;
            }
            match values.last() {
                Some(&last) if v - last <= MERGE_TOL => *masses.last_mut().unwrap() += m,
                _ => {
                    values.push(v);
                    masses.push(m);
                }
            }
        }
        if values.is_empty() {
            return Err(Error::domain("all atoms have zero mass"));
        }
        let total: f64 = masses.iter().sum();
        for m in &mut masses {
            *m /= total;
        }
        Ok(Self::from_sorted(values, masses))
    }

    fn from_sorted(values: Vec<f64>, masses: Vec<f64>) -> Self {
        let n = values.len();
        let mut cum = Vec::with_capacity(n);
        let mut acc = 0.0;
        for &m in &masses {
            acc += m;
            cum.push(acc.min(1.0));
        }
        cum[n - 1] = 1.0;
        let mut tail_mass = vec![0.0; n];
        let mut tail_moment = vec![0.0; n];
        let (mut tm, mut tx) = (0.0, 0.0);
        for i in (0..n).rev() {
            tm += masses[i];
            tx += masses[i] * values[i];
            tail_mass[i] = tm.min(1.0);
            tail_moment[i] = tx;
        }
        Distribution {
            values,
            masses,
            cum,
            tail_mass,
            tail_moment,
            label: String::new(),
        }
    }

    /// Point mass at `c`.
    pub fn point(c: f64) -> Result<Self> {
        Self::new([(c, 1.0)])
    }

    /// Attaches a free-form label.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Atom locations, strictly increasing.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Atom masses, aligned with [`values`](Self::values).
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Iterator over `(value, mass)` pairs.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.masses.iter().copied())
    }

    pub fn support_size(&self) -> usize {
        self.values.len()
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }

    pub fn max_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.tail_moment[0]
    }

    /// `Pr[X <= x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v <= x);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    /// `Pr[X < x]`.
    pub fn cdf_strict(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v < x);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    /// `Pr[X > x]`, computed from suffix sums rather than `1 - cdf`.
    pub fn survival(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v <= x);
        self.tail_mass.get(k).copied().unwrap_or(0.0)
    }

    /// `Pr[X >= x]`.
    pub fn survival_weak(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v < x);
        self.tail_mass.get(k).copied().unwrap_or(0.0)
    }

    /// `E[X 1{X >= x}]`.
    pub fn partial_moment(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v < x);
        self.tail_moment.get(k).copied().unwrap_or(0.0)
    }

    /// Generalized inverse: the smallest atom whose c.d.f. reaches `u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::domain(format!("quantile level {u} outside [0, 1]")));
        }
        let k = self.cum.partition_point(|&c| c < u);
        Ok(self.values[k.min(self.values.len() - 1)])
    }

    /// Inverse-transform sample for a uniform `u` in `(0, 1]`.
    #[inline]
    pub fn sample(&self, u: f64) -> f64 {
        let k = self.cum.partition_point(|&c| c < u);
        self.values[k.min(self.values.len() - 1)]
    }

    /// Sample of `X` conditioned on `X >= t`, from a uniform `u` in `(0, 1]`.
    /// Returns `None` when the tail is empty.
    pub fn sample_tail(&self, t: f64, u: f64) -> Option<f64> {
        let k = self.values.partition_point(|&v| v < t);
        if k == self.values.len() {
            return None;
        }
        let below = if k == 0 { 0.0 } else { self.cum[k - 1] };
        Some(self.values[k.max(self.cum.partition_point(|&c| c < below + u * (1.0 - below)))
            .min(self.values.len() - 1)])
    }

    /// `(E[X | X >= t], Pr[X < t])`, with `(0, 1)` when the tail is empty.
    pub fn tail_stats(&self, t: f64) -> (f64, f64) {
        let k = self.values.partition_point(|&v| v < t);
        if k == self.values.len() {
            return (0.0, 1.0);
        }
        let p = if k == 0 { 0.0 } else { self.cum[k - 1] };
        (self.tail_moment[k] / self.tail_mass[k], p)
    }

    /// True iff at most `eps` of the mass lies strictly above `delta`.
    ///
    /// Atoms within the merge tolerance of `delta` count as at `delta`.
    pub fn is_small(&self, eps: f64, delta: f64) -> bool {
        self.survival(delta + MERGE_TOL * delta.abs().max(1.0)) <= eps + 1e-12
    }

    /// Smallest atom `a` with `Pr[X > a] <= eps`, the least `delta` for which
    /// the law is `(eps, delta)`-small.
    pub fn small_level(&self, eps: f64) -> f64 {
        let k = self.values.partition_point(|&v| self.survival(v) > eps + 1e-12);
        self.values[k.min(self.values.len() - 1)]
    }

    /// `E[max(X, v)]`.
    pub fn expected_max_with(&self, v: f64) -> f64 {
        let k = self.values.partition_point(|&x| x < v);
        if k == self.values.len() {
            return v;
        }
        let below = if k == 0 { 0.0 } else { self.cum[k - 1] };
        v * below + self.tail_moment[k]
    }

    /// The law whose c.d.f. is `F^(1/k)`; `k` i.i.d. copies have maximum
    /// distributed as `self`.
    pub fn power_cdf(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("power_cdf needs k >= 1"));
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let inv = 1.0 / k as f64;
        let mut values = Vec::with_capacity(self.values.len());
        let mut masses = Vec::with_capacity(self.values.len());
        let mut prev = 0.0;
        for (i, &c) in self.cum.iter().enumerate() {
            let cur = if i + 1 == self.cum.len() { 1.0 } else { c.powf(inv) };
            let m = cur - prev;
            if m > 0.0 {
                values.push(self.values[i]);
                masses.push(m);
            }
            prev = cur;
        }
        Ok(Self::from_sorted(values, masses).with_label(self.label.clone()))
    }

    /// Law of `max(X, t) - t`.
    pub fn shift_residual(&self, t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("shift {t} must be nonnegative")));
        }
        if t == 0.0 {
            return Ok(self.clone());
        }
        self.map_values(|v| (v - t).max(0.0))
    }

    /// Law of `X 1{X > delta}`.
    pub fn truncate_below(&self, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(Error::domain(format!("truncation level {delta} must be nonnegative")));
        }
        self.map_values(|v| if v <= delta { 0.0 } else { v })
    }

    /// Mixture `w * delta_0 + (1 - w) * X`.
    pub fn mix_with_zero(&self, w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::domain(format!("mixture weight {w} outside [0, 1]")));
        }
        let atoms = std::iter::once((0.0, w)).chain(self.atoms().map(|(v, m)| (v, m * (1.0 - w))));
        Ok(Self::new(atoms)?.with_label(self.label.clone()))
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let d = Self::new(self.atoms().map(|(v, m)| (f(v), m)))?;
        Ok(d.with_label(self.label.clone()))
    }

    /// Atom-wise equality within `tol` on both values and masses.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.values.len() == other.values.len()
            && self
                .atoms()
                .zip(other.atoms())
                .all(|(a, b)| (a.0 - b.0).abs() <= tol && (a.1 - b.1).abs() <= tol)
    }
}

impl PartialEq for Distribution {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, MERGE_TOL)
    }
}

/// Continuous laws accepted as input; every exact algorithm works on their
/// quantile discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Parametric {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
}

impl Parametric {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b) {
            return Err(Error::domain(format!("uniform needs 0 <= a < b, got [{a}, {b}]")));
        }
        Ok(Parametric::Uniform { a, b })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::domain(format!("exponential rate {rate} must be positive")));
        }
        Ok(Parametric::Exponential { rate })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Parametric::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Parametric::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::domain(format!("quantile level {u} outside [0, 1]")));
        }
        Ok(match *self {
            Parametric::Uniform { a, b } => a + u * (b - a),
            Parametric::Exponential { rate } => -(-u).ln_1p() / rate,
        })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Parametric::Uniform { a, b } => 0.5 * (a + b),
            Parametric::Exponential { rate } => 1.0 / rate,
        }
    }

    /// Equal-mass discretization at the midpoints `(i + 1/2) / points`.
    pub fn discretize(&self, points: usize) -> Result<Distribution> {
        if points == 0 {
            return Err(Error::domain("discretization needs at least one point"));
        }
        let w = 1.0 / points as f64;
        let atoms = (0..points).map(|i| (self.quantile((i as f64 + 0.5) * w).unwrap(), w));
        Distribution::new(atoms)
    }
}

/// An ordered collection of independent variables.
#[derive(Debug, Clone)]
pub struct Instance {
    variables: Vec<Distribution>,
    classes: Vec<Vec<usize>>,
}

impl Instance {
    pub fn new(variables: Vec<Distribution>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::domain("instance needs at least one variable"));
        }
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for (i, d) in variables.iter().enumerate() {
            match classes.iter_mut().find(|c| variables[c[0]] == *d) {
                Some(c) => c.push(i),
                None => classes.push(vec![i]),
            }
        }
        Ok(Instance { variables, classes })
    }

    /// `n` i.i.d. copies of `d`.
    pub fn iid(d: Distribution, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("instance needs at least one variable"));
        }
        Ok(Instance {
            variables: vec![d; n],
            classes: vec![(0..n).collect()],
        })
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Distribution] {
        &self.variables
    }

    pub fn get(&self, i: usize) -> &Distribution {
        &self.variables[i]
    }

    /// Partition of indices by equal distribution, in order of first
    /// appearance.
    pub fn frequency_classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    /// Size of the smallest frequency class.
    pub fn min_frequency(&self) -> usize {
        self.classes.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Sub-instance on `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| self.variables[i].clone()).collect())
    }

    /// Applies `f` to every variable.
    pub fn map(&self, f: impl Fn(&Distribution) -> Result<Distribution>) -> Result<Self> {
        Self::new(self.variables.iter().map(f).collect::<Result<Vec<_>>>()?)
    }

    /// Sorted union of all atom locations.
    pub fn merged_support(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.variables.iter().flat_map(|d| d.values().iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL);
        all
    }

    /// c.d.f. of the maximum, `prod_i F_i(x)`.
    pub fn product_cdf(&self, x: f64) -> f64 {
        self.classes
            .iter()
            .map(|c| self.variables[c[0]].cdf(x).powi(c.len() as i32))
            .product()
    }

    /// Indices whose variable is not `(eps, delta)`-small.
    pub fn non_small(&self, eps: f64, delta: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| !self.variables[i].is_small(eps, delta))
            .collect()
    }
}
