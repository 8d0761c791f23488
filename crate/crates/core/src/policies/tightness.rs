//! Instances on which no ratio above β survives the removal of a few
//! variables.

use crate::benchmarks::{backward_induction, expected_max};
use crate::dist::Instance;
use crate::error::{Error, Result};
use crate::kertz::KertzSolution;

/// Ratio of the optimal sequential value to `MAX` on an i.i.d. instance.
pub fn iid_opt_ratio(inst: &Instance) -> Result<f64> {
    let order: Vec<usize> = (0..inst.len()).collect();
    let pol = backward_induction(inst, &order)?;
    Ok(pol.value / expected_max(inst)?)
}

/// An i.i.d. worst-case instance whose optimal value stays below
/// `alpha · MAX(X')` for every `X'` that drops `r` variables.
///
/// Scans `q` downward and `n` upward until the exact ratio is within half of
/// `alpha - β` of β and still below `alpha (1 - r / n)`.
pub fn tightness_instance(alpha: f64, r: usize, sol: &KertzSolution) -> Result<Instance> {
    let beta = sol.beta();
    if !(alpha > beta) {
        return Err(Error::domain(format!("alpha = {alpha} must exceed beta = {beta}")));
    }
    let half_gap = (alpha - beta) / 2.0;
    let qs = [0.2, 0.1, 0.05, 0.02, 0.01, 0.005];
    let ns = [500usize, 1000, 2000, 5000];
    for &q in &qs {
        for &n in &ns {
            if (n as f64) <= r as f64 * (1.0 + half_gap) {
                continue;
            }
            let inst = sol.worst_case_instance(q, n)?;
            let ratio = iid_opt_ratio(&inst)?;
            let keep = 1.0 - r as f64 / n as f64;
            if ratio - beta < half_gap && ratio < alpha * keep {
                return Ok(inst);
            }
        }
    }
    Err(Error::Resolution(format!(
        "no tabulated (q, n) reaches ratio below {alpha} after removing {r}"
    )))
}
