//! Policies that compete with a prophet who loses a few variables: the
//! two-phase rule, its self-competing iteration, and the order-statistic and
//! frequent-instance guarantees built on it.

use serde::{Deserialize, Serialize};

use crate::benchmarks::{expected_kth_max, expected_max};
use crate::dist::Instance;
use crate::error::{Error, Result};
use crate::kertz::KertzSolution;
use crate::policies::decompose::{decompose, SmallnessMode};
use crate::policies::engine::{simulate, Schedule};
use crate::policies::time::small_prophets_policy;
use crate::sim::{streams, SimResult};

/// `ceil(mult * eps^-2 ln(1/eps))`.
pub fn removal_budget(eps: f64, mult: f64) -> usize {
    (mult * (1.0 / eps).ln() / (eps * eps)).ceil().max(0.0) as usize
}

/// Result of the two-phase rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImperfectOutcome {
    /// Variables the prophet loses.
    pub removed: Vec<usize>,
    pub result: SimResult,
    /// `MAX` of the surviving variables.
    pub benchmark: f64,
    pub t_star: f64,
    /// Removal budget used by the decomposition.
    pub k: usize,
    pub warnings: Vec<String>,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::domain(format!("eps = {eps} outside (0, 0.25)")));
    }
    Ok(())
}

/// Two-phase rule on the variables in `pool` (indices into `inst`); the rest
/// never arrive.
fn two_phase(
    inst: &Instance,
    pool: &[usize],
    eps: f64,
    sol: &KertzSolution,
    trials: u64,
    seed: u64,
    mult: f64,
) -> Result<ImperfectOutcome> {
    let sub = inst.subset(pool)?;
    let k = removal_budget(eps, mult);
    let dec = decompose(&sub, eps, k, SmallnessMode::EpsTSmall)?;
    let kept_local = dec.kept();
    let removed: Vec<usize> = dec.big_indices.iter().map(|&j| pool[j]).collect();
    let mut warnings = Vec::new();

    let t_star = dec.t_star;
    let n1 = kept_local.len();
    let need = (1.0 / eps).ln() / (eps * eps);
    if (n1 as f64) <= need {
        warnings.push(format!(
            "{n1} surviving variables do not exceed eps^-2 ln(1/eps) = {need:.1}; the phase-one guarantee does not apply"
        ));
    }

    let mut member = vec![false; inst.len()];
    kept_local.iter().for_each(|&j| member[pool[j]] = true);
    let (benchmark, curve) = if n1 == 0 {
        (0.0, None)
    } else {
        let kept_inst = sub.subset(&kept_local)?;
        let delta = eps * t_star;
        let thinned = dec
            .residual_instance
            .subset(&kept_local)?
            .map(|z| z.truncate_below(delta)?.mix_with_zero(2.0 * eps))?;
        let mut curve = small_prophets_policy(&thinned, eps, sol)?;
        curve.delta = delta;
        (expected_max(&kept_inst)?, Some(curve))
    };
    let schedule = Schedule {
        pool: pool.to_vec(),
        member,
        curve: curve.as_ref(),
        shift: t_star,
        skip_zero: true,
        restrict_eps: Some(eps),
        cutoff: ((1.0 - eps) * n1 as f64).floor() as usize,
        straggler: t_star,
    };
    let (result, _) = simulate(inst, &schedule, trials, seed, streams::IMPERFECT);
    Ok(ImperfectOutcome {
        removed,
        result,
        benchmark,
        t_star,
        k,
        warnings,
    })
}

/// Removes at most `ceil(mult eps^-2 ln(1/eps))` big variables and runs the
/// two-phase rule on the full instance: the restricted small-prophets rule on
/// the shifted residuals of the survivors, then the first arrival at least
/// `t*`.
pub fn imperfect_prophet_policy(
    inst: &Instance,
    eps: f64,
    sol: &KertzSolution,
    trials: u64,
    seed: u64,
    mult: f64,
) -> Result<ImperfectOutcome> {
    check_eps(eps)?;
    let pool: Vec<usize> = (0..inst.len()).collect();
    two_phase(inst, &pool, eps, sol, trials, seed, mult)
}

/// Result of the self-competing iteration, where the policy may only use the
/// variables the prophet keeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongOutcome {
    /// Variables shared by the policy and the prophet, ascending.
    pub kept: Vec<usize>,
    pub result: SimResult,
    pub benchmark: f64,
    /// Decomposition rounds performed.
    pub rounds: usize,
    /// Set when the iteration ran out and the policy just takes this variable.
    pub fallback: Option<usize>,
}

/// Repeats the decomposition on the survivors until removing the next big
/// set costs at most an `eps` fraction of `MAX`, for at most
/// `10 eps^-1 ln(1/eps)` rounds; otherwise, or when nothing survives, falls
/// back to the first-removed variable with the largest mean.
pub fn strong_imperfect_policy(
    inst: &Instance,
    eps: f64,
    sol: &KertzSolution,
    trials: u64,
    seed: u64,
    mult: f64,
) -> Result<StrongOutcome> {
    check_eps(eps)?;
    let k = removal_budget(eps, mult);
    let k_max = (10.0 * (1.0 / eps).ln() / eps).ceil() as usize;
    let mut current: Vec<usize> = (0..inst.len()).collect();
    let mut first_removed: Option<Vec<usize>> = None;
    let mut current_max = expected_max(inst)?;
    let mut rounds = k_max;
    for round in 0..k_max {
        let sub = inst.subset(&current)?;
        let dec = decompose(&sub, eps, k, SmallnessMode::EpsTSmall)?;
        let next: Vec<usize> = dec.kept().into_iter().map(|j| current[j]).collect();
        if first_removed.is_none() {
            first_removed = Some(dec.big_indices.iter().map(|&j| current[j]).collect());
        }
        let next_max = if next.is_empty() { 0.0 } else { expected_max(&inst.subset(&next)?)? };
        if next_max >= (1.0 - eps) * current_max {
            let out = two_phase(inst, &current, eps, sol, trials, seed, mult)?;
            return Ok(StrongOutcome {
                kept: current,
                result: out.result,
                benchmark: current_max,
                rounds: round + 1,
                fallback: None,
            });
        }
        if next.is_empty() {
            rounds = round + 1;
            current = next;
            break;
        }
        current = next;
        current_max = next_max;
    }
    let candidates = first_removed.unwrap_or_default();
    let star = candidates
        .iter()
        .copied()
        .max_by(|&a, &b| inst.get(a).mean().total_cmp(&inst.get(b).mean()).then(b.cmp(&a)))
        .ok_or_else(|| Error::Internal("iteration never removed a variable".into()))?;
    let mut kept = current;
    kept.push(star);
    kept.sort_unstable();
    let schedule = Schedule::single_threshold(inst.len(), vec![star], 0.0);
    let (result, _) = simulate(inst, &schedule, trials, seed, streams::IMPERFECT);
    Ok(StrongOutcome {
        benchmark: expected_max(&inst.subset(&kept)?)?,
        kept,
        result,
        rounds,
        fallback: Some(star),
    })
}

/// Comparison of the two-phase rule against the `k`-th largest value, with
/// `k = |removed| + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KthOutcome {
    pub k: usize,
    pub ratio: f64,
    pub kth_max: f64,
    pub outcome: ImperfectOutcome,
}

pub fn kth_order_guarantee(
    inst: &Instance,
    eps: f64,
    sol: &KertzSolution,
    trials: u64,
    seed: u64,
    mult: f64,
) -> Result<KthOutcome> {
    let outcome = imperfect_prophet_policy(inst, eps, sol, trials, seed, mult)?;
    let k = (outcome.removed.len() + 1).min(inst.len());
    let kth_max = expected_kth_max(inst, k)?;
    let ratio = if kth_max > 0.0 { outcome.result.mean / kth_max } else { 1.0 };
    Ok(KthOutcome {
        k,
        ratio,
        kth_max,
        outcome,
    })
}

/// The two-phase rule measured against the full `MAX` on a frequent
/// instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequentOutcome {
    pub result: SimResult,
    pub ratio: f64,
    pub max: f64,
    /// Smallest frequency class.
    pub m: usize,
    /// Frequency the guarantee asks for.
    pub required_m: usize,
    pub warnings: Vec<String>,
}

pub fn frequent_guarantee(
    inst: &Instance,
    eps: f64,
    sol: &KertzSolution,
    trials: u64,
    seed: u64,
    mult: f64,
) -> Result<FrequentOutcome> {
    let outcome = imperfect_prophet_policy(inst, eps, sol, trials, seed, mult)?;
    let m = inst.min_frequency();
    let required_m = removal_budget(eps, mult);
    let mut warnings = outcome.warnings;
    if m < 2 {
        warnings.push(format!("smallest frequency class has size {m}; the instance is not frequent"));
    } else if m < required_m {
        warnings.push(format!("smallest frequency class {m} is below the required {required_m}"));
    }
    let max = expected_max(inst)?;
    Ok(FrequentOutcome {
        ratio: if max > 0.0 { outcome.result.mean / max } else { 1.0 },
        result: outcome.result,
        max,
        m,
        required_m,
        warnings,
    })
}
