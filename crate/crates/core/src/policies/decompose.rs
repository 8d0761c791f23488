//! Big/small decomposition: the smallest shift `t*` after which all but `k`
//! residuals `max(X_i, t*) - t*` are small.

use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, Instance};
use crate::error::{Error, Result};

/// Smallness criterion applied to the residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmallnessMode {
    /// `Z_i(t)` is `(eps, eps t)`-small.
    EpsTSmall,
    /// `Pr[Z_i(t) > 0] <= eps`.
    EpsSmall,
}

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub t_star: f64,
    /// Ascending.
    pub big_indices: Vec<usize>,
    /// Residual of every variable (big ones included) at `t_star`.
    pub residual_instance: Instance,
    pub mode: SmallnessMode,
    /// Critical value `s_i` of each variable.
    pub critical: Vec<f64>,
}

impl DecompositionResult {
    /// Indices outside the big set, ascending.
    pub fn kept(&self) -> Vec<usize> {
        (0..self.critical.len())
            .filter(|i| self.big_indices.binary_search(i).is_err())
            .collect()
    }
}

/// `inf { t : the residual of d at t meets the criterion }`.
pub fn critical_value(d: &Distribution, eps: f64, mode: SmallnessMode) -> f64 {
    let a = d.small_level(eps);
    match mode {
        SmallnessMode::EpsSmall => a,
        SmallnessMode::EpsTSmall => a / (1.0 + eps),
    }
}

fn residual_is_small(z: &Distribution, eps: f64, t: f64, mode: SmallnessMode) -> bool {
    match mode {
        SmallnessMode::EpsSmall => z.is_small(eps, 0.0),
        SmallnessMode::EpsTSmall => z.is_small(eps, eps * t),
    }
}

/// Splits off at most `k` big variables.
pub fn decompose(inst: &Instance, eps: f64, k: usize, mode: SmallnessMode) -> Result<DecompositionResult> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::domain(format!("eps = {eps} outside (0, 0.5)")));
    }
    let critical: Vec<f64> = inst.variables().iter().map(|d| critical_value(d, eps, mode)).collect();
    let mut sorted = critical.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let t_star = if sorted.len() > k && sorted[k] > 0.0 { sorted[k] } else { 0.0 };
    let big_indices: Vec<usize> = (0..inst.len()).filter(|&i| critical[i] > t_star).collect();
    let residual_instance = inst.map(|d| d.shift_residual(t_star))?;
    for i in 0..inst.len() {
        let small = residual_is_small(residual_instance.get(i), eps, t_star, mode);
        if !small && big_indices.binary_search(&i).is_err() {
            return Err(Error::Internal(format!(
                "decomposition invariant failed for variable {i} at t* = {t_star}"
            )));
        }
    }
    Ok(DecompositionResult {
        t_star,
        big_indices,
        residual_instance,
        mode,
        critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_critical_value() {
        let inst = Instance::new(vec![Distribution::point(5.0).unwrap()]).unwrap();
        let d = decompose(&inst, 0.1, 0, SmallnessMode::EpsTSmall).unwrap();
        assert!((d.t_star - 5.0 / 1.1).abs() < 1e-12);
        assert!(d.big_indices.is_empty());
        assert_eq!(d.residual_instance.get(0), &Distribution::point(5.0 - 5.0 / 1.1).unwrap());
    }

    #[test]
    fn already_small_gives_zero_shift() {
        let d = Distribution::new([(0.0, 0.97), (2.0, 0.03)]).unwrap();
        let inst = Instance::iid(d, 10).unwrap();
        for k in [0, 3, 20] {
            let r = decompose(&inst, 0.05, k, SmallnessMode::EpsTSmall).unwrap();
            assert_eq!(r.t_star, 0.0);
            assert!(r.big_indices.is_empty());
        }
    }

    #[test]
    fn big_set_holds_the_outliers() {
        let mut vars = vec![Distribution::new([(0.0, 0.99), (1.0, 0.01)]).unwrap(); 30];
        vars.push(Distribution::point(100.0).unwrap());
        vars.push(Distribution::point(50.0).unwrap());
        let inst = Instance::new(vars).unwrap();
        let r = decompose(&inst, 0.1, 5, SmallnessMode::EpsTSmall).unwrap();
        assert_eq!(r.big_indices, vec![30, 31]);
        let r = decompose(&inst, 0.1, 1, SmallnessMode::EpsSmall).unwrap();
        assert_eq!(r.t_star, 50.0);
        assert_eq!(r.big_indices, vec![30]);
        assert_eq!(r.kept().len(), 31);
    }
}
