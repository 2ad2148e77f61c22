//! Run configuration and its text format.
//!
//! ```text
//! [environment]
//! dim = 3
//! arms = 6
//! contexts = bernoulli
//! bernoulli_rate = 0.5
//! thetas = gaussian
//! rewards = uniform_scaled
//!
//! [policy]
//! kind = eps_greedy
//! p = 192
//!
//! [run]
//! T = 100000
//! reps = 10
//! seed = 7
//! ```
//!
//! Lines starting with `#` are comments. Unknown and repeated keys are errors,
//! as are keys that do not apply to the chosen variant.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;

use crate::calibration::{DEFAULT_CONCENTRATION_CONSTANT, DEFAULT_THEOREM_CONSTANT};
use crate::environment::{gaussian_thetas, ContextDist, EnvironmentSpec, NoiseKind, RewardModel, THETA_STREAM};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::policy::{ContextualUcb, EpsGreedy, EpsGreedyConfig, Policy, UcbConfig, UniformPolicy, DEFAULT_HISTORY_CAP};
use crate::seeded_rng;

/// Horizons up to this length log every `log_every` steps; longer runs use a geometric grid.
pub const DENSE_LOG_LIMIT: u64 = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum ContextRecipe {
    Bernoulli { rate: f64 },
    Finite { points: Vec<Vec<f64>>, probs: Vec<f64> },
    TwoContext { period: u32, rare: Vec<f64>, common: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaRecipe {
    /// Standard normal entries, all divided by the largest norm when it exceeds 1.
    Gaussian,
    /// Uniform `[0, 1]` entries, each arm normalized to unit length.
    Uniform,
    Explicit(Vec<Vec<f64>>),
}

/// Declarative environment; [`EnvironmentConfig::build`] draws the arm parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentConfig {
    pub dim: usize,
    pub arms: usize,
    pub contexts: ContextRecipe,
    pub thetas: ThetaRecipe,
    /// Seed for drawing the arm parameters; the run seed when absent.
    pub theta_seed: Option<u64>,
    pub rewards: RewardModel,
}

impl EnvironmentConfig {
    /// Builds the environment. Supports with points outside the unit ball are kept as given.
    pub fn build(&self, run_seed: u64) -> Result<EnvironmentSpec> {
        let mut rng = seeded_rng(self.theta_seed.unwrap_or(run_seed), THETA_STREAM);
        let (thetas, scale) = match &self.thetas {
            ThetaRecipe::Gaussian => gaussian_thetas(self.arms, self.dim, &mut rng),
            ThetaRecipe::Uniform => {
                let thetas = (0..self.arms)
                    .map(|_| {
                        let raw: Vec<f64> = (0..self.dim).map(|_| rng.random::<f64>()).collect();
                        let n = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
                        Vector::new(if n > 0.0 { raw.iter().map(|v| v / n).collect() } else { raw })
                    })
                    .collect::<Result<Vec<_>>>()?;
                (thetas, 1.0)
            }
            ThetaRecipe::Explicit(rows) => {
                if rows.len() != self.arms {
                    return Err(Error::config(format!(
                        "theta_values has {} rows, expected {}",
                        rows.len(),
                        self.arms
                    )));
                }
                let thetas = rows.iter().map(|r| self.vector(r)).collect::<Result<Vec<_>>>()?;
                (thetas, 1.0)
            }
        };
        let contexts = match &self.contexts {
            ContextRecipe::Bernoulli { rate } => ContextDist::BernoulliNormalized { rate: *rate },
            ContextRecipe::Finite { points, probs } => ContextDist::FiniteSupport {
                points: points.iter().map(|p| self.vector(p)).collect::<Result<_>>()?,
                probs: probs.clone(),
            },
            ContextRecipe::TwoContext { period, rare, common } => ContextDist::TwoContext {
                period: *period,
                rare: self.vector(rare)?,
                common: self.vector(common)?,
            },
        };
        let unbounded = match &contexts {
            ContextDist::BernoulliNormalized { .. } => false,
            ContextDist::FiniteSupport { points, .. } => points.iter().any(|p| p.norm() > 1.0 + 1e-12),
            ContextDist::TwoContext { rare, common, .. } => rare.norm() > 1.0 + 1e-12 || common.norm() > 1.0 + 1e-12,
        };
        let spec = if unbounded {
            EnvironmentSpec::literal(thetas, contexts, self.rewards)?
        } else {
            EnvironmentSpec::new(thetas, contexts, self.rewards)?
        };
        Ok(spec.with_theta_scale(scale))
    }

    fn vector(&self, v: &[f64]) -> Result<Vector> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        Vector::new(v.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyConfig {
    EpsGreedy { p: u64 },
    Ucb { p: u64, history_cap: usize },
    Uniform,
}

impl PolicyConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            PolicyConfig::EpsGreedy { .. } => "eps_greedy",
            PolicyConfig::Ucb { .. } => "ucb",
            PolicyConfig::Uniform => "uniform",
        }
    }

    pub fn p(&self) -> Option<u64> {
        match self {
            PolicyConfig::EpsGreedy { p } | PolicyConfig::Ucb { p, .. } => Some(*p),
            PolicyConfig::Uniform => None,
        }
    }

    /// Fresh policy for one replication.
    pub fn build(&self, env: &EnvironmentSpec, seed: u64) -> Result<Box<dyn Policy>> {
        let (arms, dim) = (env.arms(), env.dim());
        Ok(match *self {
            PolicyConfig::EpsGreedy { p } => {
                let mut pol = EpsGreedy::new(EpsGreedyConfig { arms, dim, p, seed })?;
                if !env.unit_norm_enforced() {
                    pol = pol.allow_unbounded_contexts();
                }
                Box::new(pol)
            }
            PolicyConfig::Ucb { p, history_cap } => Box::new(ContextualUcb::new(UcbConfig {
                history_cap,
                ..UcbConfig::new(arms, dim, p)
            })?),
            PolicyConfig::Uniform => Box::new(UniformPolicy::new(arms, seed)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub horizon: u64,
    pub reps: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub log_every: u64,
    /// Extra steps always present in the output grid.
    pub checkpoints: Vec<u64>,
    pub theorem_constant: f64,
    pub concentration_constant: f64,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            horizon: 100_000,
            reps: 10,
            seed: 0,
            out: None,
            log_every: 1,
            checkpoints: Vec::new(),
            theorem_constant: DEFAULT_THEOREM_CONSTANT,
            concentration_constant: DEFAULT_CONCENTRATION_CONSTANT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub environment: EnvironmentConfig,
    pub policy: PolicyConfig,
    pub run: RunSettings,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let r = &self.run;
        if r.horizon < 1 || r.reps < 1 || r.log_every < 1 {
            return Err(Error::config("T, reps and log_every must be at least 1"));
        }
        if let Some(&c) = r.checkpoints.iter().find(|&&c| c < 1 || c > r.horizon) {
            return Err(Error::config(format!("checkpoint {c} outside 1..={}", r.horizon)));
        }
        for (name, v) in [("C", r.theorem_constant), ("C_abs", r.concentration_constant)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        let env = self.environment.build(r.seed).map_err(as_config)?;
        self.policy.build(&env, r.seed).map_err(as_config)?;
        Ok(())
    }

    /// Steps at which the aggregate trace is reported.
    pub fn grid(&self) -> Vec<u64> {
        let t_max = self.run.horizon;
        let mut grid: Vec<u64> = if t_max <= DENSE_LOG_LIMIT {
            (1..=t_max / self.run.log_every).map(|i| i * self.run.log_every).collect()
        } else {
            let mut g = vec![1u64];
            while let Some(&last) = g.last() {
                let next = ((last as f64 * 1.05).ceil() as u64).max(last + 1);
                if next > t_max {
                    break;
                }
                g.push(next);
            }
            g
        };
        grid.push(t_max);
        grid.extend(&self.run.checkpoints);
        grid.sort_unstable();
        grid.dedup();
        grid
    }
}

fn as_config(e: Error) -> Error {
    if e.is_config_error() {
        e
    } else {
        Error::config(e.to_string())
    }
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    let config: RunConfig = text.parse()?;
    config.validate()?;
    Ok(config)
}

pub fn write_config(config: &RunConfig, path: &Path) -> Result<()> {
    fs::write(path, config.to_string())?;
    Ok(())
}

const SECTIONS: [&str; 3] = ["environment", "policy", "run"];

struct Entry {
    value: String,
    line: usize,
}

/// Key/value pairs of one section, consumed as they are interpreted.
struct Section {
    name: &'static str,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn take_raw(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.take_raw(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|err| Error::Parse {
                line: e.line,
                message: format!("bad value for `{key}`: {err}"),
            }),
        }
    }

    fn require<T: FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.take(key)?
            .ok_or_else(|| Error::config(format!("missing key `{key}` in [{}]", self.name)))
    }

    fn take_with<T>(&mut self, key: &str, parse: fn(&str) -> std::result::Result<T, String>) -> Result<Option<T>> {
        match self.take_raw(key) {
            None => Ok(None),
            Some(e) => parse(&e.value).map(Some).map_err(|message| Error::Parse {
                line: e.line,
                message: format!("bad value for `{key}`: {message}"),
            }),
        }
    }

    fn require_with<T>(&mut self, key: &str, parse: fn(&str) -> std::result::Result<T, String>) -> Result<T> {
        self.take_with(key, parse)?
            .ok_or_else(|| Error::config(format!("missing key `{key}` in [{}]", self.name)))
    }

    fn finish(self) -> Result<()> {
        match self.entries.into_iter().min_by_key(|(_, e)| e.line) {
            None => Ok(()),
            Some((key, e)) => Err(Error::Parse {
                line: e.line,
                message: format!("unknown or inapplicable key `{key}` in [{}]", self.name),
            }),
        }
    }
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|v| v.trim().parse::<T>().map_err(|e| format!("`{}`: {e}", v.trim())))
        .collect()
}

fn parse_reals(s: &str) -> std::result::Result<Vec<f64>, String> {
    parse_list(s)
}

fn parse_rows(s: &str) -> std::result::Result<Vec<Vec<f64>>, String> {
    s.split(';').map(parse_reals).collect()
}

fn parse_steps(s: &str) -> std::result::Result<Vec<u64>, String> {
    parse_list(s)
}

fn fmt_reals(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn fmt_rows(rows: &[Vec<f64>]) -> String {
    rows.iter().map(|r| fmt_reals(r)).collect::<Vec<_>>().join("; ")
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = SECTIONS
        .iter()
        .map(|&name| Section { name, entries: BTreeMap::new() })
        .collect();
    let mut current: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        if let Some(name) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let idx = SECTIONS.iter().position(|&n| n == name.trim()).ok_or_else(|| Error::Parse {
                line,
                message: format!("unknown section [{}]", name.trim()),
            })?;
            current = Some(idx);
            continue;
        }
        let (key, value) = s.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected `key = value`, got `{s}`"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse { line, message: "empty key".into() });
        }
        let idx = current.ok_or_else(|| Error::Parse {
            line,
            message: format!("key `{key}` appears before any section header"),
        })?;
        let section = &mut sections[idx];
        if let Some(prev) = section.entries.get(key) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key `{key}` (first set on line {})", prev.line),
            });
        }
        section.entries.insert(key.to_string(), Entry { value: value.trim().to_string(), line });
    }
    Ok(sections)
}

fn parse_environment(sec: &mut Section) -> Result<EnvironmentConfig> {
    let dim = sec.require("dim")?;
    let arms = sec.require("arms")?;
    let kind: String = sec.require("contexts")?;
    let contexts = match kind.as_str() {
        "bernoulli" => ContextRecipe::Bernoulli { rate: sec.require("bernoulli_rate")? },
        "finite" => ContextRecipe::Finite {
            points: sec.require_with("support", parse_rows)?,
            probs: sec.require_with("probabilities", parse_reals)?,
        },
        "two_context" => ContextRecipe::TwoContext {
            period: sec.require("rare_period")?,
            rare: sec.require_with("rare", parse_reals)?,
            common: sec.require_with("common", parse_reals)?,
        },
        other => return Err(Error::config(format!("unknown contexts `{other}` (bernoulli|finite|two_context)"))),
    };
    let kind: String = sec.take("thetas")?.unwrap_or_else(|| "gaussian".into());
    let thetas = match kind.as_str() {
        "gaussian" => ThetaRecipe::Gaussian,
        "uniform" => ThetaRecipe::Uniform,
        "explicit" => ThetaRecipe::Explicit(sec.require_with("theta_values", parse_rows)?),
        other => return Err(Error::config(format!("unknown thetas `{other}` (gaussian|uniform|explicit)"))),
    };
    let theta_seed = match thetas {
        ThetaRecipe::Explicit(_) => None,
        _ => sec.take("theta_seed")?,
    };
    let kind: String = sec.take("rewards")?.unwrap_or_else(|| "uniform_scaled".into());
    let rewards = match kind.as_str() {
        "uniform_scaled" => RewardModel::UniformScaled,
        "gaussian" => RewardModel::AdditiveNoise { kind: NoiseKind::Gaussian, scale: sec.require("noise_scale")? },
        "uniform_noise" => RewardModel::AdditiveNoise { kind: NoiseKind::Uniform, scale: sec.require("noise_scale")? },
        "fluctuation" => RewardModel::Fluctuation { bound: sec.require("noise_scale")? },
        other => {
            return Err(Error::config(format!(
                "unknown rewards `{other}` (uniform_scaled|gaussian|uniform_noise|fluctuation)"
            )))
        }
    };
    Ok(EnvironmentConfig { dim, arms, contexts, thetas, theta_seed, rewards })
}

fn parse_policy(sec: &mut Section) -> Result<PolicyConfig> {
    let kind: String = sec.require("kind")?;
    Ok(match kind.as_str() {
        "eps_greedy" => PolicyConfig::EpsGreedy { p: sec.require("p")? },
        "ucb" => PolicyConfig::Ucb {
            p: sec.require("p")?,
            history_cap: sec.take("history_cap")?.unwrap_or(DEFAULT_HISTORY_CAP),
        },
        "uniform" => PolicyConfig::Uniform,
        other => return Err(Error::config(format!("unknown policy kind `{other}` (eps_greedy|ucb|uniform)"))),
    })
}

fn parse_run(sec: &mut Section) -> Result<RunSettings> {
    let d = RunSettings::default();
    Ok(RunSettings {
        horizon: sec.take("T")?.unwrap_or(d.horizon),
        reps: sec.take("reps")?.unwrap_or(d.reps),
        seed: sec.take("seed")?.unwrap_or(d.seed),
        out: sec.take::<String>("out")?.map(PathBuf::from),
        log_every: sec.take("log_every")?.unwrap_or(d.log_every),
        checkpoints: sec.take_with("checkpoints", parse_steps)?.unwrap_or_default(),
        theorem_constant: sec.take("C")?.unwrap_or(d.theorem_constant),
        concentration_constant: sec.take("C_abs")?.unwrap_or(d.concentration_constant),
    })
}

impl FromStr for RunConfig {
    type Err = Error;

    /// Parses without building the environment; see [`RunConfig::validate`].
    fn from_str(text: &str) -> Result<Self> {
        let mut sections = split_sections(text)?;
        let mut it = sections.iter_mut();
        let (env, pol, run) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
        let environment = parse_environment(env)?;
        let policy = parse_policy(pol)?;
        let run = parse_run(run)?;
        for s in sections {
            s.finish()?;
        }
        Ok(RunConfig { environment, policy, run })
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.environment;
        writeln!(f, "[environment]")?;
        writeln!(f, "dim = {}", e.dim)?;
        writeln!(f, "arms = {}", e.arms)?;
        match &e.contexts {
            ContextRecipe::Bernoulli { rate } => {
                writeln!(f, "contexts = bernoulli")?;
                writeln!(f, "bernoulli_rate = {rate}")?;
            }
            ContextRecipe::Finite { points, probs } => {
                writeln!(f, "contexts = finite")?;
                writeln!(f, "support = {}", fmt_rows(points))?;
                writeln!(f, "probabilities = {}", fmt_reals(probs))?;
            }
            ContextRecipe::TwoContext { period, rare, common } => {
                writeln!(f, "contexts = two_context")?;
                writeln!(f, "rare_period = {period}")?;
                writeln!(f, "rare = {}", fmt_reals(rare))?;
                writeln!(f, "common = {}", fmt_reals(common))?;
            }
        }
        match &e.thetas {
            ThetaRecipe::Gaussian => writeln!(f, "thetas = gaussian")?,
            ThetaRecipe::Uniform => writeln!(f, "thetas = uniform")?,
            ThetaRecipe::Explicit(rows) => {
                writeln!(f, "thetas = explicit")?;
                writeln!(f, "theta_values = {}", fmt_rows(rows))?;
            }
        }
        if let Some(s) = e.theta_seed {
            writeln!(f, "theta_seed = {s}")?;
        }
        match e.rewards {
            RewardModel::UniformScaled => writeln!(f, "rewards = uniform_scaled")?,
            RewardModel::AdditiveNoise { kind, scale } => {
                let name = match kind {
                    NoiseKind::Gaussian => "gaussian",
                    NoiseKind::Uniform => "uniform_noise",
                };
                writeln!(f, "rewards = {name}")?;
                writeln!(f, "noise_scale = {scale}")?;
            }
            RewardModel::Fluctuation { bound } => {
                writeln!(f, "rewards = fluctuation")?;
                writeln!(f, "noise_scale = {bound}")?;
            }
        }

        writeln!(f, "\n[policy]")?;
        writeln!(f, "kind = {}", self.policy.kind())?;
        match self.policy {
            PolicyConfig::EpsGreedy { p } => writeln!(f, "p = {p}")?,
            PolicyConfig::Ucb { p, history_cap } => {
                writeln!(f, "p = {p}")?;
                writeln!(f, "history_cap = {history_cap}")?;
            }
            PolicyConfig::Uniform => {}
        }

        let r = &self.run;
        writeln!(f, "\n[run]")?;
        writeln!(f, "T = {}", r.horizon)?;
        writeln!(f, "reps = {}", r.reps)?;
        writeln!(f, "seed = {}", r.seed)?;
        if let Some(out) = &r.out {
            writeln!(f, "out = {}", out.display())?;
        }
        writeln!(f, "log_every = {}", r.log_every)?;
        if !r.checkpoints.is_empty() {
            let c: Vec<String> = r.checkpoints.iter().map(|c| c.to_string()).collect();
            writeln!(f, "checkpoints = {}", c.join(", "))?;
        }
        writeln!(f, "C = {}", r.theorem_constant)?;
        writeln!(f, "C_abs = {}", r.concentration_constant)
    }
}
