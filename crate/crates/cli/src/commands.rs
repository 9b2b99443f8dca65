//! Command adapters: flags in, library calls, records out.

use std::collections::BTreeMap;
use std::path::PathBuf;

use avwtc::capacity::{
    bsbe_capacity, capacity_thm1, lower_bound_thm2, upper_bound_thm3_with_starts, ConstraintSet, JointAuxInput,
    JointInput, OptimizerConfig,
};
use avwtc::coupling::{couple, deficiency_count, sample_type_class};
use avwtc::prob::type_counts;
use avwtc::rng::derive_seed;
use avwtc::softcover::{
    conditional_mutual_info_under_type, soft_cover_exponent, soft_cover_exponent_default, soft_cover_trials,
    ExponentReport, SoftCoverProblem,
};
use avwtc::{Dmc, Pmf};
use clap::{Args, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{Counts, Grid, Reals, Rows};
use crate::record::{csv_float, num, write_atomic, ResultRecord};
use crate::spec::ChannelSpec;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    /// Binary symmetric main channel, binary erasure eavesdropper.
    Bsbe,
}

#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    /// JSON channel specification.
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    pub spec: Option<PathBuf>,
    /// Built-in channel family.
    #[arg(long, value_enum, requires_all = ["eps", "alpha"])]
    pub builtin: Option<Builtin>,
    /// BS-BE main-channel crossover probability.
    #[arg(long, requires = "builtin")]
    pub eps: Option<f64>,
    /// BS-BE erasure probability.
    #[arg(long, requires = "builtin")]
    pub alpha: Option<f64>,
    /// State type, comma-separated; overrides the spec's `state_pmf`.
    #[arg(long)]
    pub state_pmf: Option<Reals>,
}

impl ChannelArgs {
    pub fn load(&self) -> Result<ChannelSpec, CliError> {
        let mut spec = match (&self.spec, self.builtin) {
            (Some(path), _) => ChannelSpec::load(path)?,
            (None, Some(Builtin::Bsbe)) => {
                ChannelSpec::builtin_bsbe(self.eps.unwrap_or_default(), self.alpha.unwrap_or_default())?
            }
            (None, None) => return Err(CliError::Input("either --spec or --builtin is required".into())),
        };
        if let Some(p) = &self.state_pmf {
            spec.state_pmf = Some(checked_pmf(&p.0, spec.channel.state_size(), "--state-pmf")?);
        }
        Ok(spec)
    }

    fn describe(&self) -> Value {
        json!({
            "spec": self.spec.as_ref().map(|p| p.display().to_string()),
            "builtin": self.builtin.map(|_| "bsbe"),
            "eps": self.eps,
            "alpha": self.alpha,
            "state_pmf": self.state_pmf.as_ref().map(|p| p.0.clone()),
        })
    }
}

fn checked_pmf(p: &[f64], len: usize, what: &str) -> Result<Pmf, CliError> {
    if p.len() != len {
        return Err(CliError::Input(format!("{what} has {} entries, expected {len}", p.len())));
    }
    Pmf::new(p.to_vec()).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

#[derive(Debug, Clone, Args)]
pub struct OptimizerArgs {
    /// Random restarts in addition to the structured starts.
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Points per coordinate of the inner grid scans.
    #[arg(long, default_value_t = 200)]
    pub inner_res: usize,
}

impl OptimizerArgs {
    pub fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_iters: self.max_iters,
            tolerance: self.tolerance,
            seed: self.seed,
            inner_grid_resolution: self.inner_res,
        }
    }

    fn describe(&self) -> Value {
        json!({
            "restarts": self.restarts,
            "max_iters": self.max_iters,
            "tolerance": self.tolerance,
            "inner_res": self.inner_res,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

fn joint_rows(q: &JointInput) -> Value {
    json!((0..q.u_size()).map(|u| (0..q.x_size()).map(|x| q.get(u, x)).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn aux_rows(q: &JointAuxInput) -> Value {
    let (nu, nx) = (q.u_size(), q.x_size());
    json!(q.probs().chunks(nu * nx).map(|v| v.chunks(nx).map(|r| r.to_vec()).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn state_pmf(spec: &ChannelSpec) -> Result<Pmf, CliError> {
    spec.state_pmf
        .clone()
        .ok_or_else(|| CliError::Input("a state type is required: give --state-pmf or `state_pmf` in the spec".into()))
}

pub fn capacity(a: &CapacityArgs) -> Result<ResultRecord, CliError> {
    let spec = a.channel.load()?;
    let q_s = state_pmf(&spec)?;
    let cfg = a.optimizer.config();
    let r = capacity_thm1(&spec.channel, &q_s, &cfg)?;
    Ok(ResultRecord::new(
        "capacity",
        json!({"channel": a.channel.describe(), "state_pmf": q_s.probs(), "optimizer": a.optimizer.describe()}),
        json!({"value": r.value, "raw": r.raw, "argmax_q_ux": joint_rows(&r.argmax)}),
        Some(cfg.seed),
    ))
}

#[derive(Debug, Clone, Args)]
#[group(id = "fixed", required = true, multiple = false, args = ["fixed_eps", "fixed_alpha"])]
pub struct CurveArgs {
    /// Hold eps fixed and sweep alpha.
    #[arg(long)]
    pub fixed_eps: Option<f64>,
    /// Hold alpha fixed and sweep eps.
    #[arg(long)]
    pub fixed_alpha: Option<f64>,
    /// Swept values as start:stop:step, inclusive.
    #[arg(long)]
    pub grid: Grid,
    /// CSV destination.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

pub fn bsbe_curve(a: &CurveArgs) -> Result<ResultRecord, CliError> {
    let cfg = a.optimizer.config();
    let points = a.grid.points();
    let values = points
        .par_iter()
        .map(|&p| {
            let (eps, alpha) = match (a.fixed_eps, a.fixed_alpha) {
                (Some(e), _) => (e, p),
                (None, Some(al)) => (p, al),
                (None, None) => unreachable!("clap enforces one fixed parameter"),
            };
            bsbe_capacity(eps, alpha, &cfg).map(|r| r.value)
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let mut csv = String::from("param,capacity\n");
    for (p, v) in points.iter().zip(&values) {
        csv.push_str(&format!("{},{}\n", csv_float(*p), csv_float(*v)));
    }
    write_atomic(&a.out, &csv)?;
    let zeros = values.iter().filter(|&&v| v == 0.0).count();
    Ok(ResultRecord::new(
        "bsbe-curve",
        json!({
            "fixed_eps": a.fixed_eps,
            "fixed_alpha": a.fixed_alpha,
            "grid": a.grid.to_string(),
            "out": a.out.display().to_string(),
            "optimizer": a.optimizer.describe(),
        }),
        json!({"rows": points.len(), "zero_rows": zeros, "max_capacity": values.iter().cloned().fold(0.0, f64::max)}),
        Some(cfg.seed),
    ))
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Box of relative radius DELTA around the state type.
    #[arg(long, conflicts_with = "vertices")]
    pub box_delta: Option<f64>,
    /// Polytope vertices, rows separated by `;`.
    #[arg(long, allow_hyphen_values = true)]
    pub vertices: Option<String>,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

fn constraint_set(a: &BoundsArgs, spec: &ChannelSpec) -> Result<(ConstraintSet, &'static str), CliError> {
    let k = spec.channel.state_size();
    if let Some(delta) = a.box_delta {
        return Ok((ConstraintSet::boxed(state_pmf(spec)?, delta)?, "box"));
    }
    if let Some(text) = &a.vertices {
        let rows: Rows = if text.trim().is_empty() {
            Rows(Vec::new())
        } else {
            text.parse().map_err(|e| CliError::Input(format!("--vertices: {e}")))?
        };
        let vs = rows
            .0
            .iter()
            .enumerate()
            .map(|(i, v)| checked_pmf(v, k, &format!("--vertices row {i}")))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok((ConstraintSet::polytope(vs)?, "polytope"));
    }
    if let Some(set) = &spec.constraint {
        return Ok((set.clone(), "spec"));
    }
    Ok((ConstraintSet::singleton(state_pmf(spec)?), "singleton"))
}

pub fn bounds(a: &BoundsArgs) -> Result<ResultRecord, CliError> {
    let spec = a.channel.load()?;
    let (set, kind) = constraint_set(a, &spec)?;
    let cfg = a.optimizer.config();
    let lb = lower_bound_thm2(&spec.channel, &set, &cfg)?;
    let ub = upper_bound_thm3_with_starts(&spec.channel, &set, &cfg, &[lb.argmax.clone()])?;
    Ok(ResultRecord::new(
        "bounds",
        json!({
            "channel": a.channel.describe(),
            "set": kind,
            "box_delta": a.box_delta,
            "vertices": a.vertices,
            "optimizer": a.optimizer.describe(),
        }),
        json!({
            "lower": {
                "value": lb.value,
                "raw": lb.raw,
                "tolerance": lb.tolerance,
                "argmax_q_ux": joint_rows(&lb.argmax),
                "min_state": lb.min_state,
                "max_state": lb.max_state,
            },
            "upper": {
                "value": ub.value,
                "raw": ub.raw,
                "tolerance": ub.tolerance,
                "argmax_q_vux": aux_rows(&ub.argmax),
                "min_state": ub.min_state,
                "grid_gap": ub.grid_gap,
                "grid_resolution": ub.grid_resolution,
            },
            "gap": ub.value - lb.value,
        }),
        Some(cfg.seed),
    ))
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Law of U, comma-separated.
    #[arg(long)]
    pub q_u: Reals,
    /// Channel U -> V, rows separated by `;`.
    #[arg(long)]
    pub channel: Rows,
    /// Codebook rate in bits per symbol.
    #[arg(long)]
    pub rate: f64,
    /// Slack delta; defaults to half the gap between the rate and I(U;V).
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
}

impl ProblemArgs {
    fn problem(&self, n: usize) -> Result<SoftCoverProblem, CliError> {
        let q_u = Pmf::new(self.q_u.0.clone()).map_err(|e| CliError::Input(format!("--q-u: {e}")))?;
        let ch = Dmc::new(self.channel.0.clone()).map_err(|e| CliError::Input(format!("--channel: {e}")))?;
        Ok(SoftCoverProblem::single_state(&q_u, ch, n, self.rate)?)
    }

    fn exponent(&self, prob: &SoftCoverProblem) -> Result<ExponentReport, CliError> {
        Ok(match self.delta {
            Some(d) => soft_cover_exponent(prob, d)?,
            None => soft_cover_exponent_default(prob)?,
        })
    }

    fn describe(&self) -> Value {
        json!({"q_u": self.q_u.0, "channel": self.channel.0, "rate": self.rate, "delta": self.delta})
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum SoftcoverCommand {
    /// Exponent gamma_delta, constant c_delta and optimal order.
    Exponent {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Blocklength.
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Exact divergences of random codebooks, one CSV row per trial.
    Sim {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Blocklengths, comma-separated.
        #[arg(long)]
        n_list: Counts,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Master seed; blocklength n uses the derived seed (seed, n).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination.
        #[arg(long)]
        out: PathBuf,
    },
}

fn exponent_json(e: &ExponentReport) -> Value {
    json!({
        "delta": e.delta,
        "gamma_delta": e.gamma_delta,
        "c_delta": e.c_delta,
        "eta_star": num(e.eta_star),
        "gamma_star": e.gamma_star,
        "beta": e.beta,
        "epsilon": num(e.epsilon),
        "alpha": num(e.alpha),
        "mutual_info": e.mutual_info,
        "clamped": e.clamped,
    })
}

pub fn softcover(c: &SoftcoverCommand) -> Result<ResultRecord, CliError> {
    match c {
        SoftcoverCommand::Exponent { problem, n } => {
            let prob = problem.problem(*n)?;
            let e = problem.exponent(&prob)?;
            Ok(ResultRecord::new(
                "softcover exponent",
                json!({"problem": problem.describe(), "n": n}),
                exponent_json(&e),
                None,
            ))
        }
        SoftcoverCommand::Sim { problem, n_list, trials, seed, out } => {
            if n_list.0.is_empty() || *trials == 0 {
                return Err(CliError::Input("need at least one blocklength and one trial".into()));
            }
            let mut csv = String::from("n,trial,divergence,threshold,fail\n");
            let mut per_n = Vec::new();
            for &n in &n_list.0 {
                let prob = problem.problem(n)?;
                let delta = match problem.delta {
                    Some(d) => d,
                    None => 0.5 * (problem.rate - conditional_mutual_info_under_type(&prob)),
                };
                let r = soft_cover_trials(&prob, *trials, derive_seed(*seed, n as u64), delta)?;
                for (t, d) in r.divergences.iter().enumerate() {
                    let fail = u8::from(*d > r.threshold);
                    csv.push_str(&format!("{n},{t},{},{},{fail}\n", csv_float(*d), csv_float(r.threshold)));
                }
                per_n.push(json!({
                    "n": n,
                    "median": r.median(),
                    "threshold": r.threshold,
                    "failures": r.failures,
                    "failure_fraction": r.failure_fraction,
                    "covering_failure_bound": r.covering_failure_bound,
                    "exponent": exponent_json(&r.exponent),
                }));
            }
            write_atomic(out, &csv)?;
            Ok(ResultRecord::new(
                "softcover sim",
                json!({
                    "problem": problem.describe(),
                    "n_list": n_list.0,
                    "trials": trials,
                    "out": out.display().to_string(),
                }),
                json!({"per_n": per_n}),
                Some(*seed),
            ))
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CouplingArgs {
    /// Blocklength.
    #[arg(long)]
    pub n: usize,
    /// Type of the input sequences, comma-separated.
    #[arg(long)]
    pub source: Reals,
    /// Target type, comma-separated.
    #[arg(long)]
    pub target: Reals,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Trial t draws its input with seed (seed, 2t) and repairs it with
    /// seed (seed, 2t + 1).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn coupling(a: &CouplingArgs) -> Result<ResultRecord, CliError> {
    let source = Pmf::new(a.source.0.clone()).map_err(|e| CliError::Input(format!("--source: {e}")))?;
    let target = Pmf::new(a.target.0.clone()).map_err(|e| CliError::Input(format!("--target: {e}")))?;
    if source.len() != target.len() {
        return Err(CliError::Input("--source and --target must have the same length".into()));
    }
    if a.n == 0 || a.trials == 0 {
        return Err(CliError::Input("--n and --trials must be >= 1".into()));
    }
    let quota = type_counts(&target, a.n)?;
    type_counts(&source, a.n)?;
    let results = (0..a.trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = sample_type_class(&source, a.n, derive_seed(a.seed, 2 * t))?;
            let trace = couple(&s, &target, derive_seed(a.seed, 2 * t + 1))?;
            let k = deficiency_count(&s, &target)?;
            Ok((
                trace.iterations,
                s.hamming_distance(&trace.output),
                trace.output.counts() == quota,
                trace.iterations == k,
            ))
        })
        .collect::<Result<Vec<_>, avwtc::Error>>()?;
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for r in &results {
        *histogram.entry(r.0).or_default() += 1;
    }
    let members = results.iter().filter(|r| r.2).count();
    Ok(ResultRecord::new(
        "coupling",
        json!({"n": a.n, "source": a.source.0, "target": a.target.0, "trials": a.trials}),
        json!({
            "k_histogram": histogram,
            "max_hamming": results.iter().map(|r| r.1).max().unwrap_or(0),
            "membership_pass_rate": members as f64 / results.len() as f64,
            "k_equals_deficiency": results.iter().all(|r| r.3),
            "hamming_equals_k": results.iter().all(|r| r.0 == r.1),
        }),
        Some(a.seed),
    ))
}
