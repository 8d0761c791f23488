//! Subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use prophetlab_core::benchmarks::{expected_kth_max, expected_max, opt_free_order, opt_random_order, SUBSET_DP_LIMIT};
use prophetlab_core::kertz::{kertz_integral, solve_beta, DEFAULT_FQ_POINTS, DEFAULT_GRID};
use prophetlab_core::ordering::order_general;
use prophetlab_core::policies::{
    decompose, frequent_guarantee, imperfect_prophet_policy, kth_order_guarantee, removal_budget, run_restricted_small,
    run_time_policy, single_threshold_baseline, small_prophets_policy, strong_imperfect_policy,
};
use prophetlab_core::{Error, Instance, KertzSolution, SmallnessMode};

use crate::io::{read_instance, write_instance};
use crate::report::{emit_report, Report};
use crate::CliError;

type CmdResult = Result<Report, CliError>;

/// Tolerance for β when a command needs the Kertz curve.
const CURVE_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "prophetlab", version, about = "Prophet inequality experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the Kertz constant.
    Beta(BetaArgs),
    /// Tabulate y(t) and y'(t) as CSV.
    Ydump(YdumpArgs),
    /// Write the worst-case i.i.d. instance for a cutoff q.
    Worstcase(WorstcaseArgs),
    /// Exact benchmark values.
    Bench(BenchArgs),
    /// Simulate a stopping rule.
    Eval(EvalArgs),
    /// Construct an inspection order with thresholds.
    Order(OrderArgs),
    /// Split an instance into big and small variables.
    Decompose(DecomposeArgs),
}

#[derive(Debug, Args)]
pub struct BetaArgs {
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct YdumpArgs {
    /// Number of y-grid nodes.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = CURVE_TOL)]
    pub tol: f64,
    /// CSV path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WorstcaseArgs {
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub n: usize,
    /// Discretization points of the cutoff law.
    #[arg(long, default_value_t = DEFAULT_FQ_POINTS)]
    pub points: usize,
    /// Instance path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// max, maxk:K, opt or optfree.
    #[arg(long, default_value = "max")]
    pub what: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    Small,
    Restricted,
    Imperfect,
    Strong,
    Kth,
    Frequent,
    Baseline,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub policy: PolicyKind,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Multiplier on the removal budget.
    #[arg(long, default_value_t = 1.0)]
    pub mult: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    EpsTSmall,
    EpsSmall,
}

impl ModeArg {
    fn name(self) -> &'static str {
        match self {
            ModeArg::EpsTSmall => "eps-t-small",
            ModeArg::EpsSmall => "eps-small",
        }
    }
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Removal budget; defaults to ceil(eps^-2 ln(1/eps)).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::EpsTSmall)]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Cli {
    /// Runs the command and writes its report.
    pub fn execute(&self) -> CmdResult {
        let (report, path) = match &self.command {
            Command::Beta(a) => (beta(a)?, a.out.as_deref()),
            Command::Ydump(a) => (ydump(a)?, a.report.as_deref()),
            Command::Worstcase(a) => (worstcase(a)?, a.report.as_deref()),
            Command::Bench(a) => (bench(a)?, a.out.as_deref()),
            Command::Eval(a) => (eval(a)?, a.out.as_deref()),
            Command::Order(a) => (order(a)?, a.out.as_deref()),
            Command::Decompose(a) => (decompose_cmd(a)?, a.out.as_deref()),
        };
        emit_report(&report, path)?;
        Ok(report)
    }
}

fn curve(tol: f64, grid: usize) -> Result<KertzSolution, Error> {
    KertzSolution::solve(solve_beta(tol)?, grid)
}

fn ratio(value: f64, benchmark: f64) -> f64 {
    if benchmark > 0.0 {
        value / benchmark
    } else {
        1.0
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn beta(a: &BetaArgs) -> CmdResult {
    let b = solve_beta(a.tol)?;
    let residual = (kertz_integral(b, 1e-3 * a.tol) - 1.0).abs();
    let mut r = Report::new("beta");
    r.input("tol", a.tol);
    r.result("beta", b).result("residual", residual);
    Ok(r)
}

fn ydump(a: &YdumpArgs) -> CmdResult {
    let sol = curve(a.tol, a.grid)?;
    let mut csv = String::from("t,y,yprime\n");
    for (t, y, yp) in sol.grid() {
        let _ = writeln!(csv, "{t},{y},{yp}");
    }
    std::fs::write(&a.out, csv).map_err(|e| CliError::io(&a.out, e))?;
    let mut r = Report::new("ydump");
    r.input("grid", a.grid).input("tol", a.tol);
    r.result("beta", sol.beta())
        .result("rows", sol.grid_len())
        .result("endpoint_error", sol.tolerance());
    Ok(r)
}

fn worstcase(a: &WorstcaseArgs) -> CmdResult {
    if a.n == 0 {
        return Err(Error::Domain("n must be at least 1".into()).into());
    }
    let sol = curve(CURVE_TOL, DEFAULT_GRID)?;
    let params = sol.optimal_rate(a.q)?;
    let fq = sol.worst_case_cdf(&params, a.points)?;
    let inst = Instance::iid(fq.power_cdf(a.n as u32)?, a.n)?;
    write_instance(&a.out, &inst)?;
    let max = expected_max(&inst)?;
    let order: Vec<usize> = (0..a.n).collect();
    let opt = prophetlab_core::benchmarks::backward_induction(&inst, &order)?.value;
    let mut r = Report::new("worstcase");
    r.input("q", a.q).input("n", a.n).input("points", a.points);
    r.result("beta", sol.beta())
        .result("p", params.p)
        .result("h", params.h)
        .result("r_q", params.r_q)
        .result("expected_max", max)
        .result("iid_opt", opt)
        .result("ratio", ratio(opt, max));
    Ok(r)
}

fn bench(a: &BenchArgs) -> CmdResult {
    let inst = read_instance(&a.instance)?;
    let mut r = Report::new("bench");
    r.input("instance", path_str(&a.instance)).input("what", &a.what);
    r.result("n", inst.len());
    match a.what.as_str() {
        "max" => {
            r.result("value", expected_max(&inst)?);
        }
        "opt" => {
            r.result("value", opt_random_order(&inst)?);
        }
        "optfree" => {
            let (v, order) = opt_free_order(&inst)?;
            r.result("value", v).result("order", order);
        }
        other => {
            let k = other
                .strip_prefix("maxk:")
                .and_then(|k| k.parse::<usize>().ok())
                .ok_or_else(|| CliError::Usage(format!("--what {other:?}: expected max, maxk:K, opt or optfree")))?;
            r.result("k", k).result("value", expected_kth_max(&inst, k)?);
        }
    }
    Ok(r)
}

fn eval(a: &EvalArgs) -> CmdResult {
    let inst = read_instance(&a.instance)?;
    let mut r = Report::new("eval");
    r.input("instance", path_str(&a.instance))
        .input("policy", a.policy.to_possible_value().expect("named").get_name())
        .input("eps", a.eps)
        .input("trials", a.trials)
        .input("seed", a.seed)
        .input("mult", a.mult);
    let max = expected_max(&inst)?;
    r.result("expected_max", max);
    let needs_curve = !matches!(a.policy, PolicyKind::Baseline);
    let sol = if needs_curve { Some(curve(CURVE_TOL, DEFAULT_GRID)?) } else { None };
    let sol = sol.as_ref();
    match a.policy {
        PolicyKind::Small => {
            let pol = small_prophets_policy(&inst, a.eps, sol.expect("curve"))?;
            let sim = run_time_policy(&inst, &pol, a.trials, a.seed);
            r.result("sim", sim).result("ratio", ratio(sim.mean, max));
        }
        PolicyKind::Restricted => {
            let run = run_restricted_small(&inst, a.eps, sol.expect("curve"), a.trials, a.seed)?;
            r.result("sim", run.result)
                .result("ratio", ratio(run.result.mean, max))
                .result("max_stop_index", run.max_stop_index)
                .result("stop_limit", run.stop_limit)
                .result("delta", run.delta);
        }
        PolicyKind::Imperfect => {
            let out = imperfect_prophet_policy(&inst, a.eps, sol.expect("curve"), a.trials, a.seed, a.mult)?;
            r.result("sim", out.result)
                .result("benchmark", out.benchmark)
                .result("ratio", ratio(out.result.mean, out.benchmark))
                .result("removed", &out.removed)
                .result("t_star", out.t_star)
                .result("k", out.k);
            out.warnings.iter().for_each(|w| {
                r.flag(w.clone());
            });
        }
        PolicyKind::Strong => {
            let out = strong_imperfect_policy(&inst, a.eps, sol.expect("curve"), a.trials, a.seed, a.mult)?;
            r.result("sim", out.result)
                .result("benchmark", out.benchmark)
                .result("ratio", ratio(out.result.mean, out.benchmark))
                .result("kept", &out.kept)
                .result("rounds", out.rounds);
            if let Some(f) = out.fallback {
                r.result("fallback", f);
                r.flag(format!("iteration did not settle; fell back to variable {f}"));
            }
        }
        PolicyKind::Kth => {
            let out = kth_order_guarantee(&inst, a.eps, sol.expect("curve"), a.trials, a.seed, a.mult)?;
            r.result("sim", out.outcome.result)
                .result("benchmark", out.kth_max)
                .result("k", out.k)
                .result("ratio", out.ratio)
                .result("removed", &out.outcome.removed);
            out.outcome.warnings.iter().for_each(|w| {
                r.flag(w.clone());
            });
        }
        PolicyKind::Frequent => {
            let out = frequent_guarantee(&inst, a.eps, sol.expect("curve"), a.trials, a.seed, a.mult)?;
            r.result("sim", out.result)
                .result("ratio", out.ratio)
                .result("m", out.m)
                .result("required_m", out.required_m);
            out.warnings.iter().for_each(|w| {
                r.flag(w.clone());
            });
        }
        PolicyKind::Baseline => {
            let (sim, level) = single_threshold_baseline(&inst, a.trials, a.seed)?;
            r.result("sim", sim).result("threshold", level).result("ratio", ratio(sim.mean, max));
        }
    }
    Ok(r)
}

fn order(a: &OrderArgs) -> CmdResult {
    let inst = read_instance(&a.instance)?;
    let g = order_general(&inst, a.eps, a.seed)?;
    let mut r = Report::new("order");
    r.input("instance", path_str(&a.instance)).input("eps", a.eps).input("seed", a.seed);
    r.result("order", &g.policy.order)
        .result("thresholds", &g.policy.thresholds)
        .result("value", g.policy.value)
        .result("constructed_thresholds", &g.constructed.thresholds)
        .result("constructed_value", g.constructed.value)
        .result("expected_max", expected_max(&inst)?)
        .result("t_star", g.t_star)
        .result("big", &g.big)
        .result("removed", &g.removed)
        .result("k", g.k)
        .result("k_requested", g.k_requested)
        .result("eps_decomposition", g.eps_decomposition)
        .result("fixings_total", g.fixings_total)
        .result("fixings_solved", g.fixings_solved);
    if inst.len() <= SUBSET_DP_LIMIT {
        let (oracle, oracle_order) = opt_free_order(&inst)?;
        r.result("oracle_value", oracle)
            .result("oracle_order", oracle_order)
            .result("ratio", ratio(g.policy.value, oracle));
    } else {
        r.flag(format!("oracle skipped: n = {} exceeds {SUBSET_DP_LIMIT}", inst.len()));
    }
    if g.k_adjusted {
        r.flag(format!(
            "k_adjusted: removal budget lowered from {} to {} (decomposition eps {})",
            g.k_requested, g.k, g.eps_decomposition
        ));
    }
    if g.solver_hit_cap {
        r.flag("solver_hit_cap: a relaxation stopped at the iteration cap");
    }
    Ok(r)
}

fn decompose_cmd(a: &DecomposeArgs) -> CmdResult {
    let inst = read_instance(&a.instance)?;
    let k = a.k.unwrap_or_else(|| removal_budget(a.eps, 1.0));
    let mode = match a.mode {
        ModeArg::EpsTSmall => SmallnessMode::EpsTSmall,
        ModeArg::EpsSmall => SmallnessMode::EpsSmall,
    };
    let dec = decompose(&inst, a.eps, k, mode)?;
    let mut r = Report::new("decompose");
    r.input("instance", path_str(&a.instance))
        .input("eps", a.eps)
        .input("k", k)
        .input("mode", a.mode.name());
    let residual_max = expected_max(&dec.residual_instance)?;
    r.result("t_star", dec.t_star)
        .result("big", &dec.big_indices)
        .result("kept", dec.kept().len())
        .result("critical", &dec.critical)
        .result("residual_expected_max", residual_max);
    Ok(r)
}
