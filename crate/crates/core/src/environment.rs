//! Stochastic environments, ground-truth oracles, and regret accounting.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, dot, min_nonzero_eigenvalue, SymMat, Vector, DEFAULT_RANK_TOL};
use crate::policy::{Action, Arm, Mode};
use crate::seeded_rng;

/// Largest support [`EnvironmentSpec::support`] will enumerate.
pub const MAX_SUPPORT: u128 = 1_000_000;

/// RNG stream used when drawing arm parameters from a seed.
pub const THETA_STREAM: u64 = 2;

const PROB_SUM_TOL: f64 = 1e-9;
const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ContextDist {
    /// I.i.d. Bernoulli(`rate`) entries, redrawn while all-zero, then ℓ₂-normalized.
    BernoulliNormalized { rate: f64 },
    FiniteSupport { points: Vec<Vector>, probs: Vec<f64> },
    /// `rare` with probability `1/period`, otherwise `common`.
    TwoContext { period: u32, rare: Vector, common: Vector },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseKind {
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RewardModel {
    /// Uniform on the interval between 0 and `2 x†θ_a`.
    UniformScaled,
    /// `x†θ_a + ε`; `scale` is the standard deviation for Gaussian noise and
    /// the half-width for uniform noise.
    AdditiveNoise { kind: NoiseKind, scale: f64 },
    /// `x†Θ_a` with `Θ_a = θ_a + u`, `u` uniform on `[-bound, bound]^d`, fresh each draw.
    Fluctuation { bound: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    dim: usize,
    thetas: Vec<Vector>,
    contexts: ContextDist,
    rewards: RewardModel,
    unit_norm_enforced: bool,
    theta_scale: f64,
}

impl EnvironmentSpec {
    pub fn new(thetas: Vec<Vector>, contexts: ContextDist, rewards: RewardModel) -> Result<Self> {
        Self::build(thetas, contexts, rewards, true)
    }

    /// Like [`EnvironmentSpec::new`] but keeps support points outside the unit ball.
    pub fn literal(thetas: Vec<Vector>, contexts: ContextDist, rewards: RewardModel) -> Result<Self> {
        Self::build(thetas, contexts, rewards, false)
    }

    fn build(
        thetas: Vec<Vector>,
        contexts: ContextDist,
        rewards: RewardModel,
        unit_norm_enforced: bool,
    ) -> Result<Self> {
        let dim = thetas
            .first()
            .map(|t| t.dim())
            .ok_or_else(|| Error::config("at least one arm is required"))?;
        if dim == 0 {
            return Err(Error::config("dimension must be at least 1"));
        }
        for t in &thetas {
            check_dim(dim, t.dim())?;
            if t.norm() > 1.0 + NORM_TOL {
                return Err(Error::config(format!("arm parameter norm {} exceeds 1", t.norm())));
            }
        }
        let check_point = |x: &Vector| -> Result<()> {
            check_dim(dim, x.dim())?;
            if unit_norm_enforced && x.norm() > 1.0 + NORM_TOL {
                return Err(Error::config(format!("context norm {} exceeds 1", x.norm())));
            }
            Ok(())
        };
        match &contexts {
            ContextDist::BernoulliNormalized { rate } => {
                if !(*rate > 0.0 && *rate <= 1.0) {
                    return Err(Error::config(format!("Bernoulli rate {rate} outside (0, 1]")));
                }
            }
            ContextDist::FiniteSupport { points, probs } => {
                if points.is_empty() || points.len() != probs.len() {
                    return Err(Error::config("support points and probabilities must pair up"));
                }
                if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                    return Err(Error::config("probabilities must be nonnegative"));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > PROB_SUM_TOL {
                    return Err(Error::config(format!("probabilities sum to {total}, not 1")));
                }
                points.iter().try_for_each(check_point)?;
            }
            ContextDist::TwoContext { period, rare, common } => {
                if *period < 1 {
                    return Err(Error::config("two-context period must be at least 1"));
                }
                check_point(rare)?;
                check_point(common)?;
            }
        }
        match rewards {
            RewardModel::UniformScaled => {}
            RewardModel::AdditiveNoise { scale, .. } | RewardModel::Fluctuation { bound: scale } => {
                if !(scale >= 0.0 && scale.is_finite()) {
                    return Err(Error::config(format!("noise scale {scale} must be finite and >= 0")));
                }
            }
        }
        Ok(EnvironmentSpec {
            dim,
            thetas,
            contexts,
            rewards,
            unit_norm_enforced,
            theta_scale: 1.0,
        })
    }

    /// Records the factor the arm parameters were divided by when normalized.
    pub fn with_theta_scale(mut self, scale: f64) -> Self {
        self.theta_scale = scale;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arms(&self) -> usize {
        self.thetas.len()
    }

    pub fn thetas(&self) -> &[Vector] {
        &self.thetas
    }

    pub fn contexts(&self) -> &ContextDist {
        &self.contexts
    }

    pub fn rewards(&self) -> RewardModel {
        self.rewards
    }

    pub fn unit_norm_enforced(&self) -> bool {
        self.unit_norm_enforced
    }

    pub fn theta_scale(&self) -> f64 {
        self.theta_scale
    }

    /// `Q = max_a ‖θ_a‖₂`
    pub fn max_theta_norm(&self) -> f64 {
        self.thetas.iter().fold(0.0, |m, t| m.max(t.norm()))
    }

    pub fn delta_max(&self) -> f64 {
        delta_max(&self.thetas)
    }

    pub fn sample_context<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        match &self.contexts {
            ContextDist::BernoulliNormalized { rate } => loop {
                let bits: Vec<bool> = (0..self.dim).map(|_| rng.random_bool(*rate)).collect();
                let k = bits.iter().filter(|&&b| b).count();
                if k > 0 {
                    let v = 1.0 / (k as f64).sqrt();
                    let x = bits.iter().map(|&b| if b { v } else { 0.0 }).collect();
                    break Vector::new(x).expect("finite");
                }
            },
            ContextDist::FiniteSupport { points, probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (x, p) in points.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return x.clone();
                    }
                }
                // u landed in the round-off gap below 1
                let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(points.len() - 1);
                points[last].clone()
            }
            ContextDist::TwoContext { period, rare, common } => {
                if rng.random_bool(1.0 / *period as f64) {
                    rare.clone()
                } else {
                    common.clone()
                }
            }
        }
    }

    pub fn mean_reward(&self, arm: Arm, x: &Vector) -> Result<f64> {
        let theta = self.theta(arm)?;
        theta.dot(x)
    }

    pub fn sample_reward<R: Rng + ?Sized>(&self, arm: Arm, x: &Vector, rng: &mut R) -> Result<f64> {
        let mean = self.mean_reward(arm, x)?;
        Ok(match self.rewards {
            RewardModel::UniformScaled => {
                if mean == 0.0 {
                    0.0
                } else {
                    let (lo, hi) = if mean > 0.0 { (0.0, 2.0 * mean) } else { (2.0 * mean, 0.0) };
                    rng.random_range(lo..=hi)
                }
            }
            RewardModel::AdditiveNoise { kind, scale } => {
                let eps = match kind {
                    NoiseKind::Gaussian => scale * rng.sample::<f64, _>(StandardNormal),
                    NoiseKind::Uniform if scale > 0.0 => rng.random_range(-scale..=scale),
                    NoiseKind::Uniform => 0.0,
                };
                mean + eps
            }
            RewardModel::Fluctuation { bound } => {
                if bound == 0.0 {
                    mean
                } else {
                    let noise: f64 = x.iter().map(|&xi| xi * rng.random_range(-bound..=bound)).sum();
                    mean + noise
                }
            }
        })
    }

    fn theta(&self, arm: Arm) -> Result<&Vector> {
        self.thetas
            .get(arm.index())
            .ok_or_else(|| Error::config(format!("arm {arm} out of range 1..={}", self.arms())))
    }

    pub fn best_arm(&self, x: &Vector) -> Result<Arm> {
        best_arm(x, &self.thetas)
    }

    pub fn step_regret(&self, x: &Vector, arm: Arm) -> Result<f64> {
        step_regret(x, arm, &self.thetas)
    }

    /// Enumerates the context support with probabilities.
    pub fn support(&self) -> Result<Vec<(Vector, f64)>> {
        match &self.contexts {
            ContextDist::BernoulliNormalized { rate } => {
                let size = (1u128 << self.dim.min(127)) - 1;
                if self.dim >= 64 || size > MAX_SUPPORT {
                    return Err(Error::SupportTooLarge { size });
                }
                let d = self.dim;
                let nonzero = 1.0 - (1.0 - rate).powi(d as i32);
                let mut out = Vec::with_capacity(size as usize);
                for mask in 1u64..(1u64 << d) {
                    let k = mask.count_ones() as usize;
                    let v = 1.0 / (k as f64).sqrt();
                    let x = (0..d).map(|i| if mask >> i & 1 == 1 { v } else { 0.0 }).collect();
                    let p = rate.powi(k as i32) * (1.0 - rate).powi((d - k) as i32) / nonzero;
                    if p > 0.0 {
                        out.push((Vector::new(x)?, p));
                    }
                }
                Ok(out)
            }
            ContextDist::FiniteSupport { points, probs } => {
                Ok(points.iter().cloned().zip(probs.iter().copied()).collect())
            }
            ContextDist::TwoContext { period, rare, common } => {
                let q = 1.0 / *period as f64;
                Ok(vec![(rare.clone(), q), (common.clone(), 1.0 - q)])
            }
        }
    }

    /// `Σ = E{x x†}` over the enumerated support.
    pub fn second_moment(&self) -> Result<SymMat> {
        let mut sigma = SymMat::zeros(self.dim);
        for (x, p) in self.support()? {
            sigma.add_outer(&x, p)?;
        }
        Ok(sigma)
    }

    pub fn exact_gaps(&self) -> Result<Gaps> {
        let points: Vec<Vector> = self
            .support()?
            .into_iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(x, _)| x)
            .collect();
        exact_gaps(&self.thetas, &points)
    }

    pub fn exact_sigma_min(&self) -> Result<f64> {
        exact_sigma_min(self)
    }
}

/// Standard-normal arm parameters, all divided by `Q = max ‖θ_a‖` when `Q > 1`.
///
/// Returns the parameters and the divisor (1 when no scaling happened).
pub fn gaussian_thetas<R: Rng + ?Sized>(arms: usize, dim: usize, rng: &mut R) -> (Vec<Vector>, f64) {
    let raw: Vec<Vec<f64>> = (0..arms)
        .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let q = raw.iter().fold(0.0f64, |m, t| m.max(dot(t, t).sqrt()));
    let scale = if q > 1.0 { q } else { 1.0 };
    let thetas = raw
        .into_iter()
        .map(|t| Vector::new(t.into_iter().map(|v| v / scale).collect()).expect("finite"))
        .collect();
    (thetas, scale)
}

/// Context `x = [1,1,1]` with probability `1/period`, else `[1,0,1]`; Gaussian arms.
pub fn two_context_3d(period: u32, arms: usize, theta_seed: u64) -> Result<EnvironmentSpec> {
    let (thetas, scale) = gaussian_thetas(arms, 3, &mut seeded_rng(theta_seed, THETA_STREAM));
    EnvironmentSpec::literal(
        thetas,
        ContextDist::TwoContext {
            period,
            rare: Vector::new(vec![1.0, 1.0, 1.0])?,
            common: Vector::new(vec![1.0, 0.0, 1.0])?,
        },
        RewardModel::UniformScaled,
    )
    .map(|e| e.with_theta_scale(scale))
}

/// Context `(1,1)` with probability `1/period`, else `(1,0)`; Gaussian arms.
pub fn two_context_2d(period: u32, arms: usize, theta_seed: u64) -> Result<EnvironmentSpec> {
    let (thetas, scale) = gaussian_thetas(arms, 2, &mut seeded_rng(theta_seed, THETA_STREAM));
    EnvironmentSpec::literal(
        thetas,
        ContextDist::TwoContext {
            period,
            rare: Vector::new(vec![1.0, 1.0])?,
            common: Vector::new(vec![1.0, 0.0])?,
        },
        RewardModel::UniformScaled,
    )
    .map(|e| e.with_theta_scale(scale))
}

/// Binary contexts in `R^dim` with Bernoulli(1/2) entries, normalized; Gaussian arms; uniform rewards.
pub fn bernoulli_uniform(dim: usize, arms: usize, theta_seed: u64) -> Result<EnvironmentSpec> {
    let (thetas, scale) = gaussian_thetas(arms, dim, &mut seeded_rng(theta_seed, THETA_STREAM));
    EnvironmentSpec::new(
        thetas,
        ContextDist::BernoulliNormalized { rate: 0.5 },
        RewardModel::UniformScaled,
    )
    .map(|e| e.with_theta_scale(scale))
}

/// Lowest-index maximizer of `x†θ_a`.
pub fn best_arm(x: &Vector, thetas: &[Vector]) -> Result<Arm> {
    let values = thetas.iter().map(|t| t.dot(x)).collect::<Result<Vec<_>>>()?;
    crate::policy::argmax(&values)
        .map(Arm::from_index)
        .ok_or_else(|| Error::config("no arms"))
}

/// `max_b x†θ_b − x†θ_a`
pub fn step_regret(x: &Vector, arm: Arm, thetas: &[Vector]) -> Result<f64> {
    let played = thetas
        .get(arm.index())
        .ok_or_else(|| Error::config(format!("arm {arm} out of range")))?
        .dot(x)?;
    let mut best = played;
    for t in thetas {
        best = best.max(t.dot(x)?);
    }
    Ok(best - played)
}

pub fn delta_max(thetas: &[Vector]) -> f64 {
    let mut m = 0.0f64;
    for (i, a) in thetas.iter().enumerate() {
        for b in &thetas[i + 1..] {
            let d: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
            m = m.max(d.sqrt());
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaps {
    pub delta_min: f64,
    pub delta_max: f64,
}

/// Smallest positive per-context optimality gap and largest pairwise parameter distance.
pub fn exact_gaps(thetas: &[Vector], support: &[Vector]) -> Result<Gaps> {
    if support.len() as u128 > MAX_SUPPORT {
        return Err(Error::SupportTooLarge { size: support.len() as u128 });
    }
    let dmax = delta_max(thetas);
    let mut dmin = f64::INFINITY;
    for x in support {
        let values = thetas.iter().map(|t| t.dot(x)).collect::<Result<Vec<_>>>()?;
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for &v in &values {
            if v < best {
                dmin = dmin.min(best - v);
            }
        }
    }
    if dmin.is_infinite() {
        return Err(Error::DegenerateInstance { delta_max: dmax });
    }
    Ok(Gaps {
        delta_min: dmin,
        delta_max: dmax,
    })
}

/// Smallest nonzero eigenvalue of `E{x x†}` for an enumerable context distribution.
pub fn exact_sigma_min(spec: &EnvironmentSpec) -> Result<f64> {
    min_nonzero_eigenvalue(&spec.second_moment()?, DEFAULT_RANK_TOL)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeCounts {
    pub warmup: u64,
    pub explore: u64,
    pub exploit: u64,
}

impl ModeCounts {
    pub fn bump(&mut self, mode: Mode) {
        match mode {
            Mode::Warmup => self.warmup += 1,
            Mode::Explore => self.explore += 1,
            Mode::Exploit => self.exploit += 1,
        }
    }

    /// Steps whose reward was recorded (warm-up plus exploration).
    pub fn recorded(&self) -> u64 {
        self.warmup + self.explore
    }
}

/// Realized cumulative regret of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretLedger {
    cumulative: Vec<f64>,
    per_arm_pulls: Vec<u64>,
    mode_counts: ModeCounts,
}

impl RegretLedger {
    pub fn new(arms: usize) -> Self {
        RegretLedger {
            cumulative: Vec::new(),
            per_arm_pulls: vec![0; arms],
            mode_counts: ModeCounts::default(),
        }
    }

    pub fn with_capacity(arms: usize, horizon: usize) -> Self {
        RegretLedger {
            cumulative: Vec::with_capacity(horizon),
            ..RegretLedger::new(arms)
        }
    }

    /// Adds the regret of step `t`, which must follow the last accrued step.
    pub fn accrue(&mut self, t: u64, x: &Vector, action: &Action, thetas: &[Vector]) -> Result<f64> {
        let expected = self.cumulative.len() as u64 + 1;
        if t != expected {
            return Err(Error::OutOfOrder { expected, found: t });
        }
        let inc = step_regret(x, action.arm, thetas)?;
        let prev = self.cumulative.last().copied().unwrap_or(0.0);
        self.cumulative.push(prev + inc);
        self.per_arm_pulls[action.arm.index()] += 1;
        self.mode_counts.bump(action.mode);
        Ok(inc)
    }

    /// `cumulative()[t-1]` is the regret after step `t`.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn per_arm_pulls(&self) -> &[u64] {
        &self.per_arm_pulls
    }

    pub fn mode_counts(&self) -> ModeCounts {
        self.mode_counts
    }
}
