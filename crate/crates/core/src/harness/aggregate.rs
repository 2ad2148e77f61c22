//! Replicated runs and their pointwise summary.

use rayon::prelude::*;

use crate::calibration::CalibrationReport;
use crate::environment::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::harness::config::RunConfig;
use crate::harness::run::{run_with, RegretTrace};

/// Caps the number of replications run in parallel; 0 or unset means one per core.
pub const THREADS_ENV: &str = "LINBANDIT_THREADS";

/// Package version plus `git describe` of the build tree.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("LINBANDIT_GIT_DESCRIBE"));

pub fn version_string() -> String {
    VERSION.to_string()
}

/// Mean and sample standard deviation across replications at each grid step.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTrace {
    pub t: Vec<u64>,
    pub mean_regret: Vec<f64>,
    pub std_regret: Vec<f64>,
    /// Warm-up plus exploration steps so far.
    pub explore_count_mean: Vec<f64>,
    pub exploit_count_mean: Vec<f64>,
    /// `R(T)` of each replication, in replication order.
    pub final_regrets: Vec<f64>,
    /// Calibration estimates of the first replication.
    pub calibration: CalibrationReport,
    /// `key=value` pairs describing the run, emitted as the CSV header.
    pub metadata: Vec<(String, String)>,
}

impl AggregateTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn final_mean(&self) -> f64 {
        self.mean_regret.last().copied().unwrap_or(0.0)
    }

    /// Mean regret at the last grid step `<= t`.
    pub fn mean_at(&self, t: u64) -> Option<f64> {
        let i = self.t.partition_point(|&s| s <= t);
        (i > 0).then(|| self.mean_regret[i - 1])
    }
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Summarizes finished replications on `grid`.
pub fn aggregate(traces: &[RegretTrace], grid: &[u64]) -> Result<AggregateTrace> {
    let first = traces.first().ok_or(Error::NoData)?;
    let recorded: Vec<Vec<u64>> = traces.iter().map(RegretTrace::recorded_counts).collect();
    let exploit: Vec<Vec<u64>> = traces.iter().map(RegretTrace::exploit_counts).collect();
    let n = traces.len() as f64;
    let mut out = AggregateTrace {
        t: grid.to_vec(),
        mean_regret: Vec::with_capacity(grid.len()),
        std_regret: Vec::with_capacity(grid.len()),
        explore_count_mean: Vec::with_capacity(grid.len()),
        exploit_count_mean: Vec::with_capacity(grid.len()),
        final_regrets: traces.iter().map(|t| t.ledger.total()).collect(),
        calibration: first.calibration.clone(),
        metadata: Vec::new(),
    };
    for &t in grid {
        let i = (t as usize)
            .checked_sub(1)
            .filter(|&i| traces.iter().all(|tr| i < tr.ledger.cumulative().len()))
            .ok_or_else(|| Error::config(format!("grid step {t} outside the run")))?;
        let (m, s) = mean_std(traces.iter().map(|tr| tr.ledger.cumulative()[i]));
        out.mean_regret.push(m);
        out.std_regret.push(s);
        out.explore_count_mean.push(recorded.iter().map(|c| c[i] as f64).sum::<f64>() / n);
        out.exploit_count_mean.push(exploit.iter().map(|c| c[i] as f64).sum::<f64>() / n);
    }
    Ok(out)
}

fn thread_cap() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

/// Runs every replication and returns the traces in replication order.
pub fn run_replications(config: &RunConfig, env: &EnvironmentSpec, threads: usize) -> Result<Vec<RegretTrace>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..config.run.reps)
            .into_par_iter()
            .map(|i| run_with(env, &config.policy, config, config.run.seed.wrapping_add(i as u64)))
            .collect()
    })
}

/// Runs `reps` replications with seeds `seed + i` and aggregates them.
pub fn replicate(config: &RunConfig) -> Result<AggregateTrace> {
    replicate_with_threads(config, thread_cap())
}

pub fn replicate_with_threads(config: &RunConfig, threads: usize) -> Result<AggregateTrace> {
    config.validate()?;
    let env = config.environment.build(config.run.seed)?;
    let traces = run_replications(config, &env, threads)?;
    let mut agg = aggregate(&traces, &config.grid())?;
    agg.metadata = metadata(config, &env, &agg.calibration);
    Ok(agg)
}

fn metadata(config: &RunConfig, env: &EnvironmentSpec, cal: &CalibrationReport) -> Vec<(String, String)> {
    let mut m: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, v: String| m.push((k.to_string(), v));
    put("version", version_string());
    put("seed", config.run.seed.to_string());
    put("reps", config.run.reps.to_string());
    put("T", config.run.horizon.to_string());
    put("dim", env.dim().to_string());
    put("arms", env.arms().to_string());
    put("policy", config.policy.kind().to_string());
    if let Some(p) = config.policy.p() {
        put("p", p.to_string());
        let k = env.arms() as u64;
        put("p_meets_32K", (p >= 32 * k).to_string());
        let meets = |b: Option<u64>| b.map_or_else(|| "NA".to_string(), |b| (p >= b).to_string());
        put("p_meets_theorem_estimate", meets(cal.p_theorem));
        put("p_meets_strict_estimate", meets(cal.p_strict));
    }
    put("delta_max", env.delta_max().to_string());
    put("theta_scale", env.theta_scale().to_string());
    if let Ok(s) = env.exact_sigma_min() {
        put("sigma_min_exact", s.to_string());
    }
    if let Ok(g) = env.exact_gaps() {
        put("delta_min_exact", g.delta_min.to_string());
    }
    for (k, v) in cal.key_values() {
        put(k, v);
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `y` against `ln t` over the last `tail_fraction` of the horizon.
pub fn log_fit_points(t: &[u64], y: &[f64], tail_fraction: f64) -> Result<LogFit> {
    if t.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: t.len(), found: y.len() });
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::config(format!("tail fraction {tail_fraction} outside (0, 1]")));
    }
    let t_max = t.iter().copied().max().ok_or(Error::NoData)? as f64;
    let start = t_max * (1.0 - tail_fraction);
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(&t, _)| t as f64 > start)
        .map(|(&t, &y)| ((t as f64).ln(), y))
        .collect();
    if pts.len() < 10 {
        return Err(Error::TooFewSamples { needed: 10, found: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if pts.iter().all(|p| p.0 == pts[0].0) {
        return Err(Error::config("degenerate tail: all t equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(LogFit { slope, intercept, r_squared })
}

pub fn log_fit(trace: &AggregateTrace, tail_fraction: f64) -> Result<LogFit> {
    log_fit_points(&trace.t, &trace.mean_regret, tail_fraction)
}
