//! Built-in experiment presets.

use std::fmt;
use std::str::FromStr;

use crate::environment::RewardModel;
use crate::harness::config::{ContextRecipe, EnvironmentConfig, PolicyConfig, RunConfig, RunSettings, ThetaRecipe};

/// Arm count of the regret-curve presets.
pub const PRESET_ARMS: usize = 6;
/// `32 K` for [`PRESET_ARMS`].
pub const PRESET_P: u64 = 192;
/// Per-entry fluctuation bound of the scaling preset.
pub const SCALING_FLUCTUATION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// `d = 3`, `K = 6`, normalized Bernoulli(1/2) contexts, normalized Gaussian arms.
    Fig1a,
    /// As [`Scenario::Fig1a`] but contexts `[1,1,1]` with probability `1/I`, else `[1,0,1]`.
    Fig1b(u32),
    /// Bernoulli(1/2) contexts, unit-norm uniform arms, bounded fluctuation; `p = 32 K`.
    Scaling { dim: usize, arms: usize },
    /// Two-dimensional contexts `(1,1)` with probability `1/I`, else `(1,0)`.
    TwoContext(u32),
}

impl Scenario {
    pub fn config(self) -> RunConfig {
        let bernoulli = ContextRecipe::Bernoulli { rate: 0.5 };
        let (dim, arms, contexts, thetas, rewards, p) = match self {
            Scenario::Fig1a => (3, PRESET_ARMS, bernoulli, ThetaRecipe::Gaussian, RewardModel::UniformScaled, PRESET_P),
            Scenario::Fig1b(period) => (
                3,
                PRESET_ARMS,
                ContextRecipe::TwoContext { period, rare: vec![1.0, 1.0, 1.0], common: vec![1.0, 0.0, 1.0] },
                ThetaRecipe::Gaussian,
                RewardModel::UniformScaled,
                PRESET_P,
            ),
            Scenario::Scaling { dim, arms } => (
                dim,
                arms,
                bernoulli,
                ThetaRecipe::Uniform,
                RewardModel::Fluctuation { bound: SCALING_FLUCTUATION },
                32 * arms as u64,
            ),
            Scenario::TwoContext(period) => (
                2,
                PRESET_ARMS,
                ContextRecipe::TwoContext { period, rare: vec![1.0, 1.0], common: vec![1.0, 0.0] },
                ThetaRecipe::Gaussian,
                RewardModel::UniformScaled,
                PRESET_P,
            ),
        };
        RunConfig {
            environment: EnvironmentConfig { dim, arms, contexts, thetas, theta_seed: None, rewards },
            policy: PolicyConfig::EpsGreedy { p },
            run: RunSettings { horizon: 100_000, reps: 10, seed: 7, ..RunSettings::default() },
        }
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let period = |a: Option<&str>| -> Result<u32, String> {
            let v: u32 = a
                .ok_or_else(|| format!("`{name}` needs a period, e.g. {name}:10"))?
                .parse()
                .map_err(|e| format!("bad period: {e}"))?;
            if v == 0 {
                return Err("period must be at least 1".into());
            }
            Ok(v)
        };
        match name {
            "fig1a" if arg.is_none() => Ok(Scenario::Fig1a),
            "fig1b" => Ok(Scenario::Fig1b(period(arg)?)),
            "twocontext" => Ok(Scenario::TwoContext(period(arg)?)),
            "scaling" => {
                let (d, k) = arg
                    .and_then(|a| a.split_once(','))
                    .ok_or("scaling needs d,K, e.g. scaling:8,4")?;
                let dim: usize = d.trim().parse().map_err(|e| format!("bad d: {e}"))?;
                let arms: usize = k.trim().parse().map_err(|e| format!("bad K: {e}"))?;
                if dim == 0 || arms == 0 {
                    return Err("d and K must be at least 1".into());
                }
                Ok(Scenario::Scaling { dim, arms })
            }
            _ => Err(format!("unknown scenario `{s}` (fig1a|fig1b:I|scaling:d,K|twocontext:I)")),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Fig1a => write!(f, "fig1a"),
            Scenario::Fig1b(i) => write!(f, "fig1b:{i}"),
            Scenario::Scaling { dim, arms } => write!(f, "scaling:{dim},{arms}"),
            Scenario::TwoContext(i) => write!(f, "twocontext:{i}"),
        }
    }
}
