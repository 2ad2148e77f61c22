//! Choosing the exploration scale `p`.
//!
//! Two lower bounds are provided. [`p_theorem_bound`] is the compact
//! `C K L'² / (Δ'² Σ'²)` form with a free constant `C`.
//! [`p_strict_bound`] takes the maximum of the three explicit conditions
//! `128 K L'²/(Δ'²Σ'²)`, `16 K/(C_abs Σ'²)` and `32 K`. Here
//! `Δ' = min(1, Δ_min)`, `Σ' = min(1, Σ_min)` and `L' = max(1, L)`. Both
//! bounds are rounded up to a multiple of `K`.
//!
//! The quantities themselves can be estimated online from a run with
//! [`Calibrator`].

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::environment::{ContextDist, EnvironmentSpec, RewardModel};
use crate::error::{Error, Result};
use crate::linalg::{check_dim, min_nonzero_eigenvalue, SymMat, Vector, DEFAULT_RANK_TOL};
use crate::policy::Arm;

/// Default for the free constant of the compact bound.
pub const DEFAULT_THEOREM_CONSTANT: f64 = 1.0;
/// Default for the covariance-concentration constant used by the strict bound.
pub const DEFAULT_CONCENTRATION_CONSTANT: f64 = 1.0;

/// Grid used to group "identical" contexts when estimating noise.
const CONTEXT_QUANTUM: f64 = 1e-9;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::config(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn round_up_to_multiple(value: f64, arms: usize) -> u64 {
    let k = arms as f64;
    let q = (value / k).ceil().max(1.0);
    q as u64 * arms as u64
}

struct Primed {
    l: f64,
    delta: f64,
    sigma: f64,
}

fn primed(arms: usize, l: f64, delta_min: f64, sigma_min: f64) -> Result<Primed> {
    if arms == 0 {
        return Err(Error::config("arm count must be at least 1"));
    }
    check_positive("L", l)?;
    check_positive("delta_min", delta_min)?;
    check_positive("sigma_min", sigma_min)?;
    Ok(Primed {
        l: l.max(1.0),
        delta: delta_min.min(1.0),
        sigma: sigma_min.min(1.0),
    })
}

/// Smallest multiple of `K` that is at least `C K L'² / (Δ'² Σ'²)`.
pub fn p_theorem_bound(arms: usize, l: f64, delta_min: f64, sigma_min: f64, c: f64) -> Result<u64> {
    check_positive("C", c)?;
    let p = primed(arms, l, delta_min, sigma_min)?;
    let raw = c * arms as f64 * p.l * p.l / (p.delta * p.delta * p.sigma * p.sigma);
    Ok(round_up_to_multiple(raw, arms))
}

/// Smallest multiple of `K` meeting all three explicit conditions.
pub fn p_strict_bound(arms: usize, l: f64, delta_min: f64, sigma_min: f64, c_abs: f64) -> Result<u64> {
    check_positive("C_abs", c_abs)?;
    let p = primed(arms, l, delta_min, sigma_min)?;
    let k = arms as f64;
    let gap = 128.0 * k * p.l * p.l / (p.delta * p.delta * p.sigma * p.sigma);
    let conc = 16.0 * k / (c_abs * p.sigma * p.sigma);
    let floor = 32.0 * k;
    Ok(round_up_to_multiple(gap.max(conc).max(floor), arms))
}

/// Running second moment of observed contexts.
#[derive(Debug, Clone)]
pub struct CovarianceAccumulator {
    n: u64,
    sum: SymMat,
}

impl CovarianceAccumulator {
    pub fn new(dim: usize) -> Self {
        CovarianceAccumulator {
            n: 0,
            sum: SymMat::zeros(dim),
        }
    }

    pub fn observe(&mut self, x: &Vector) -> Result<()> {
        self.sum.add_outer(x, 1.0)?;
        self.n += 1;
        Ok(())
    }

    pub fn samples(&self) -> u64 {
        self.n
    }

    /// `(1/n) Σ x x†`
    pub fn second_moment(&self) -> Result<SymMat> {
        if self.n == 0 {
            return Err(Error::NoData);
        }
        Ok(self.sum.scaled(1.0 / self.n as f64))
    }

    pub fn sigma_min(&self) -> Result<f64> {
        let d = self.sum.dim();
        if (self.n as usize) < d {
            return Err(Error::TooFewSamples { needed: d, found: self.n as usize });
        }
        min_nonzero_eigenvalue(&self.second_moment()?, DEFAULT_RANK_TOL)
    }
}

/// Smallest nonzero eigenvalue of the empirical second moment of `contexts`.
pub fn estimate_sigma_min<'a>(contexts: impl IntoIterator<Item = &'a Vector>) -> Result<f64> {
    let mut iter = contexts.into_iter().peekable();
    let dim = iter.peek().map(|x| x.dim()).ok_or(Error::TooFewSamples { needed: 1, found: 0 })?;
    let mut acc = CovarianceAccumulator::new(dim);
    for x in iter {
        check_dim(dim, x.dim())?;
        acc.observe(x)?;
    }
    acc.sigma_min()
}

/// Running minimum of the margin between the best and second-best predicted reward.
#[derive(Debug, Clone, Default)]
pub struct GapTracker {
    min_gap: Option<f64>,
    steps: u64,
    ties: u64,
}

impl GapTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feeds the per-arm predicted values of one exploit step.
    pub fn observe(&mut self, scores: &[f64]) {
        if scores.len() < 2 {
            return;
        }
        let mut best = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        for &s in scores {
            if s > best {
                second = best;
                best = s;
            } else if s > second {
                second = s;
            }
        }
        self.steps += 1;
        let gap = best - second;
        if gap == 0.0 {
            self.ties += 1;
        } else {
            self.min_gap = Some(self.min_gap.map_or(gap, |m| m.min(gap)));
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Exploit steps whose top two predictions tied exactly; excluded from the minimum.
    pub fn ties(&self) -> u64 {
        self.ties
    }

    pub fn estimate(&self) -> Result<f64> {
        self.min_gap.ok_or(Error::NoData)
    }
}

pub fn estimate_delta_min<'a>(exploit_scores: impl IntoIterator<Item = &'a [f64]>) -> Result<f64> {
    let mut g = GapTracker::new();
    for s in exploit_scores {
        g.observe(s);
    }
    g.estimate()
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn sample_sd(&self) -> Option<f64> {
        (self.n >= 2).then(|| (self.m2 / (self.n - 1) as f64).sqrt())
    }
}

/// Reward spread per (arm, context) group.
#[derive(Debug, Clone, Default)]
pub struct NoiseTracker {
    groups: HashMap<(usize, Vec<i64>), Welford>,
}

impl NoiseTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, arm: Arm, x: &Vector, reward: f64) {
        let key = x.iter().map(|v| (v / CONTEXT_QUANTUM).round() as i64).collect();
        self.groups.entry((arm.index(), key)).or_default().push(reward);
    }

    pub fn groups(&self) -> usize {
        self.groups.len()
    }

    /// Largest per-group sample standard deviation, floored at 1.
    pub fn estimate(&self) -> Result<f64> {
        let sd = self
            .groups
            .values()
            .filter_map(Welford::sample_sd)
            .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.max(s))));
        match sd {
            Some(s) => Ok(s.max(1.0)),
            None => Err(Error::TooFewSamples {
                needed: 2,
                found: self.groups.values().map(|w| w.n as usize).max().unwrap_or(0),
            }),
        }
    }
}

pub fn estimate_l<'a>(observations: impl IntoIterator<Item = (Arm, &'a Vector, f64)>) -> Result<f64> {
    let mut t = NoiseTracker::new();
    for (a, x, r) in observations {
        t.observe(a, x, r);
    }
    t.estimate()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SamplesUsed {
    pub contexts: u64,
    pub exploit_steps: u64,
    pub reward_groups: u64,
}

/// Estimated problem constants and the `p` they imply. Missing entries could not be estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub sigma_min_hat: Option<f64>,
    pub delta_min_hat: Option<f64>,
    pub l_hat: Option<f64>,
    pub theorem_constant: f64,
    pub concentration_constant: f64,
    pub p_theorem: Option<u64>,
    pub p_strict: Option<u64>,
    pub samples_used: SamplesUsed,
}

impl CalibrationReport {
    pub fn from_estimates(
        arms: usize,
        sigma_min_hat: Option<f64>,
        delta_min_hat: Option<f64>,
        l_hat: Option<f64>,
        theorem_constant: f64,
        concentration_constant: f64,
        samples_used: SamplesUsed,
    ) -> Self {
        let (p_theorem, p_strict) = match (sigma_min_hat, delta_min_hat, l_hat) {
            (Some(s), Some(d), Some(l)) => (
                p_theorem_bound(arms, l, d, s, theorem_constant).ok(),
                p_strict_bound(arms, l, d, s, concentration_constant).ok(),
            ),
            _ => (None, None),
        };
        CalibrationReport {
            sigma_min_hat,
            delta_min_hat,
            l_hat,
            theorem_constant,
            concentration_constant,
            p_theorem,
            p_strict,
            samples_used,
        }
    }

    /// Flat `key=value` pairs in a fixed order; missing values print as `NA`.
    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        fn opt<T: fmt::Display>(v: Option<T>) -> String {
            v.map_or_else(|| "NA".to_string(), |v| v.to_string())
        }
        vec![
            ("sigma_min_hat", opt(self.sigma_min_hat)),
            ("delta_min_hat", opt(self.delta_min_hat)),
            ("L_hat", opt(self.l_hat)),
            ("C", self.theorem_constant.to_string()),
            ("C_abs", self.concentration_constant.to_string()),
            ("p_theorem", opt(self.p_theorem)),
            ("p_strict", opt(self.p_strict)),
            ("samples_contexts", self.samples_used.contexts.to_string()),
            ("samples_exploit", self.samples_used.exploit_steps.to_string()),
            ("samples_reward_groups", self.samples_used.reward_groups.to_string()),
        ]
    }
}

impl fmt::Display for CalibrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.key_values() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Online estimator of `Σ_min`, `Δ_min` and `L` from a running simulation.
#[derive(Debug, Clone)]
pub struct Calibrator {
    covariance: CovarianceAccumulator,
    gaps: GapTracker,
    noise: NoiseTracker,
}

impl Calibrator {
    pub fn new(dim: usize) -> Self {
        Calibrator {
            covariance: CovarianceAccumulator::new(dim),
            gaps: GapTracker::new(),
            noise: NoiseTracker::new(),
        }
    }

    pub fn observe_context(&mut self, x: &Vector) -> Result<()> {
        self.covariance.observe(x)
    }

    pub fn observe_exploit(&mut self, scores: &[f64]) {
        self.gaps.observe(scores);
    }

    pub fn observe_reward(&mut self, arm: Arm, x: &Vector, reward: f64) {
        self.noise.observe(arm, x, reward);
    }

    pub fn report(&self, arms: usize, theorem_constant: f64, concentration_constant: f64) -> CalibrationReport {
        CalibrationReport::from_estimates(
            arms,
            self.covariance.sigma_min().ok(),
            self.gaps.estimate().ok(),
            self.noise.estimate().ok(),
            theorem_constant,
            concentration_constant,
            SamplesUsed {
                contexts: self.covariance.samples(),
                exploit_steps: self.gaps.steps(),
                reward_groups: self.noise.groups() as u64,
            },
        )
    }
}

/// Synthetic instance for studying how `p` scales with `d` and `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingScenario {
    pub dim: usize,
    pub arms: usize,
    /// Bernoulli rate of the context entries.
    pub rate: f64,
    /// Per-entry bound on the reward-parameter fluctuation.
    pub fluctuation: f64,
    pub spec: EnvironmentSpec,
}

/// Bernoulli(`rate`) normalized contexts; each `θ_a` has i.i.d. uniform `[0, 1]`
/// entries and is then normalized to unit length; rewards are `x†(θ_a + u)`
/// with `u` uniform on `[-F, F]^d`.
pub fn build_scaling_scenario<R: Rng + ?Sized>(
    dim: usize,
    arms: usize,
    rate: f64,
    fluctuation: f64,
    rng: &mut R,
) -> Result<ScalingScenario> {
    if dim == 0 || arms == 0 {
        return Err(Error::config("dim and arms must be at least 1"));
    }
    let thetas = (0..arms)
        .map(|_| {
            let raw: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            let scaled = if norm > 0.0 { raw.iter().map(|v| v / norm).collect() } else { raw };
            Vector::new(scaled)
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = EnvironmentSpec::new(
        thetas,
        ContextDist::BernoulliNormalized { rate },
        RewardModel::Fluctuation { bound: fluctuation },
    )?;
    Ok(ScalingScenario {
        dim,
        arms,
        rate,
        fluctuation,
        spec,
    })
}
