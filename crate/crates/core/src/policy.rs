//! Arm-selection policies.
//!
//! * [`EpsGreedy`]: round-robin warm-up for `p` steps, then explore with
//!   probability `p/t` and otherwise play the arm maximizing `x† θ̂_a`.
//!   Only warm-up and exploration samples reach the per-arm statistics.
//! * [`ContextualUcb`]: same warm-up, then an optimistic rule whose width is
//!   minimized over every subset of a capped per-arm history. Exponential in
//!   the cap, so it is a toy for small `H`.
//! * [`UniformPolicy`]: uniform control baseline.
//!
//! Arms are 1-based throughout ([`Arm`]), and every argmax/argmin breaks ties
//! toward the lowest index.

use std::collections::VecDeque;
use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{ridge_from_sums, squared_width_from_sums, ArmState, Estimate};
use crate::linalg::{check_dim, SymMat, Vector};
use crate::seeded_rng;

pub type Context = Vector;

/// Largest history cap the exhaustive subset search accepts.
pub const MAX_HISTORY_CAP: usize = 20;
pub const DEFAULT_HISTORY_CAP: usize = 12;

/// RNG stream reserved for policy randomness; environments use stream 0.
pub const POLICY_STREAM: u64 = 1;

/// 1-based arm index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arm(usize);

impl Arm {
    pub fn new(one_based: usize) -> Result<Self> {
        if one_based == 0 {
            return Err(Error::config("arm indices start at 1"));
        }
        Ok(Arm(one_based))
    }

    pub fn from_index(zero_based: usize) -> Self {
        Arm(zero_based + 1)
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Warmup,
    Explore,
    Exploit,
}

impl Mode {
    /// Whether the observed reward is stored in the arm's statistics.
    pub fn is_recorded(self) -> bool {
        matches!(self, Mode::Warmup | Mode::Explore)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Warmup => "warmup",
            Mode::Explore => "explore",
            Mode::Exploit => "exploit",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One decision. Doubles as the action-log record `(t, mode, arm, coin probability)`.
///
/// `explore_probability` is the Bernoulli parameter of the exploration coin at
/// this step: 1 during warm-up, `p/t` afterwards for [`EpsGreedy`], 0 for
/// [`ContextualUcb`] after warm-up and 1 for [`UniformPolicy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub t: u64,
    pub arm: Arm,
    pub mode: Mode,
    pub explore_probability: f64,
}

pub trait Policy: Send {
    fn arms(&self) -> usize;

    /// Step the next call to [`Policy::step`] will decide.
    fn t(&self) -> u64;

    fn step(&mut self, x: &Context) -> Result<Action>;

    /// Reports the reward for `action`, then advances to the next step.
    fn feed(&mut self, action: &Action, x: &Context, reward: f64) -> Result<()>;

    /// Predicted values `x† θ̂_a` behind the most recent exploit decision.
    fn last_exploit_scores(&self) -> Option<&[f64]> {
        None
    }
}

fn check_arms_and_scale(arms: usize, dim: usize, p: u64) -> Result<()> {
    if arms == 0 || dim == 0 {
        return Err(Error::config("arms and dim must be at least 1"));
    }
    if p < arms as u64 || p % arms as u64 != 0 {
        return Err(Error::config(format!(
            "p = {p} must be a positive multiple of the arm count {arms}"
        )));
    }
    Ok(())
}

fn check_action(t: u64, arms: usize, action: &Action) -> Result<()> {
    if action.t != t {
        return Err(Error::StaleAction { expected: t, found: action.t });
    }
    if action.arm.get() > arms {
        return Err(Error::config(format!("arm {} out of range 1..={arms}", action.arm)));
    }
    Ok(())
}

/// Round-robin warm-up arm: `1 + (t mod K)`.
pub fn warmup_arm(t: u64, arms: usize) -> Arm {
    Arm(1 + (t % arms as u64) as usize)
}

/// Exploration coin with success probability `p/t`, valid only after warm-up.
pub fn explore_coin<R: Rng + ?Sized>(t: u64, p: u64, rng: &mut R) -> Result<bool> {
    if t <= p {
        return Err(Error::WarmupCoin { t, p });
    }
    Ok(rng.random_bool(p as f64 / t as f64))
}

/// Index of the largest value, lowest index on ties. `None` for an empty slice.
pub(crate) fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if !(v > b) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Arm maximizing `x† θ̂_a`, lowest index on ties.
pub fn greedy_arm(x: &Context, estimates: &[Estimate]) -> Result<Arm> {
    let scores = greedy_scores(x, estimates)?;
    argmax(&scores)
        .map(Arm::from_index)
        .ok_or_else(|| Error::config("no arms"))
}

fn greedy_scores(x: &Context, estimates: &[Estimate]) -> Result<Vec<f64>> {
    estimates
        .iter()
        .enumerate()
        .map(|(i, e)| {
            if e.n_used == 0 {
                return Err(Error::UninitializedArm { arm: i + 1 });
            }
            e.predict(x)
        })
        .collect()
}

/// Uniform arm in `1..=K`.
pub fn uniform_arm<R: Rng + ?Sized>(arms: usize, rng: &mut R) -> Arm {
    Arm::from_index(rng.random_range(0..arms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsGreedyConfig {
    pub arms: usize,
    pub dim: usize,
    /// Exploration scale; a positive multiple of `arms`.
    pub p: u64,
    pub seed: u64,
}

impl EpsGreedyConfig {
    pub fn validate(&self) -> Result<()> {
        check_arms_and_scale(self.arms, self.dim, self.p)
    }
}

/// Contextual ε-greedy with per-arm ridge estimates.
#[derive(Debug, Clone)]
pub struct EpsGreedy {
    config: EpsGreedyConfig,
    t: u64,
    arms: Vec<ArmState>,
    rng: ChaCha8Rng,
    scores: Vec<f64>,
}

impl EpsGreedy {
    pub fn new(config: EpsGreedyConfig) -> Result<Self> {
        config.validate()?;
        Ok(EpsGreedy {
            arms: vec![ArmState::new(config.dim); config.arms],
            t: 1,
            rng: seeded_rng(config.seed, POLICY_STREAM),
            scores: Vec::new(),
            config,
        })
    }

    /// Stops rejecting contexts with `‖x‖₂ > 1`.
    pub fn allow_unbounded_contexts(mut self) -> Self {
        for s in &mut self.arms {
            s.set_unit_norm_enforced(false);
        }
        self
    }

    pub fn config(&self) -> &EpsGreedyConfig {
        &self.config
    }

    pub fn arm_states(&self) -> &[ArmState] {
        &self.arms
    }

    /// Current ridge estimates for every arm.
    pub fn estimates(&mut self) -> Result<Vec<Estimate>> {
        self.arms
            .iter_mut()
            .enumerate()
            .map(|(i, s)| match s.ridge_solve() {
                Ok(e) => Ok(e.clone()),
                Err(Error::NoData) => Err(Error::UninitializedArm { arm: i + 1 }),
                Err(e) => Err(e),
            })
            .collect()
    }

    /// Like [`Policy::step`], but with the exploration coin supplied by the caller.
    ///
    /// `coin` is ignored during warm-up.
    pub fn step_with_coin(&mut self, x: &Context, coin: bool) -> Result<Action> {
        self.decide(x, Some(coin))
    }

    fn decide(&mut self, x: &Context, coin: Option<bool>) -> Result<Action> {
        check_dim(self.config.dim, x.dim())?;
        let (t, p, k) = (self.t, self.config.p, self.config.arms);
        if t <= p {
            return Ok(Action {
                t,
                arm: warmup_arm(t, k),
                mode: Mode::Warmup,
                explore_probability: 1.0,
            });
        }
        let prob = p as f64 / t as f64;
        let explore = match coin {
            Some(c) => c,
            None => explore_coin(t, p, &mut self.rng)?,
        };
        if explore {
            return Ok(Action {
                t,
                arm: uniform_arm(k, &mut self.rng),
                mode: Mode::Explore,
                explore_probability: prob,
            });
        }
        let mut scores = std::mem::take(&mut self.scores);
        scores.clear();
        for (i, s) in self.arms.iter_mut().enumerate() {
            let e = match s.ridge_solve() {
                Ok(e) => e,
                Err(Error::NoData) => return Err(Error::UninitializedArm { arm: i + 1 }),
                Err(e) => return Err(e),
            };
            scores.push(e.predict(x)?);
        }
        let arm = Arm::from_index(argmax(&scores).expect("at least one arm"));
        self.scores = scores;
        Ok(Action {
            t,
            arm,
            mode: Mode::Exploit,
            explore_probability: prob,
        })
    }
}

impl Policy for EpsGreedy {
    fn arms(&self) -> usize {
        self.config.arms
    }

    fn t(&self) -> u64 {
        self.t
    }

    fn step(&mut self, x: &Context) -> Result<Action> {
        self.decide(x, None)
    }

    fn feed(&mut self, action: &Action, x: &Context, reward: f64) -> Result<()> {
        check_action(self.t, self.config.arms, action)?;
        if action.mode.is_recorded() {
            self.arms[action.arm.index()].record(x, reward)?;
        }
        self.t += 1;
        Ok(())
    }

    fn last_exploit_scores(&self) -> Option<&[f64]> {
        (!self.scores.is_empty()).then_some(self.scores.as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UcbConfig {
    pub arms: usize,
    pub dim: usize,
    pub p: u64,
    /// Per-arm history cap `H`; oldest samples are evicted first.
    pub history_cap: usize,
}

impl UcbConfig {
    pub fn new(arms: usize, dim: usize, p: u64) -> Self {
        UcbConfig {
            arms,
            dim,
            p,
            history_cap: DEFAULT_HISTORY_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_arms_and_scale(self.arms, self.dim, self.p)?;
        if self.history_cap == 0 || self.history_cap > MAX_HISTORY_CAP {
            return Err(Error::config(format!(
                "history cap {} outside 1..={MAX_HISTORY_CAP}",
                self.history_cap
            )));
        }
        Ok(())
    }
}

/// Minimizer of the subset objective for one arm.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetWidth {
    /// Squared width `c_{a,t}`; the play rule adds `√c`.
    pub value: f64,
    /// Ascending positions into the history slice.
    pub subset: Vec<usize>,
}

/// `(ln t / m) · x† (λ_m I + A_T / m)⁻² x` for one subset given by its Gram matrix.
pub fn subset_objective(t: u64, gram: &SymMat, m: u64, x: &[f64]) -> Result<f64> {
    Ok((t as f64).ln() / m as f64 * squared_width_from_sums(gram, m, x)?)
}

/// Exhaustive minimum of the subset objective over all nonempty subsets of `history`.
///
/// Subsets are visited in increasing bitmask order (bit `i` selects
/// `history[i]`) and the first minimum is kept.
pub fn ucb_width(t: u64, history: &[(Context, f64)], x: &Context) -> Result<SubsetWidth> {
    let n = history.len();
    if n == 0 {
        return Err(Error::NoData);
    }
    if n > MAX_HISTORY_CAP {
        return Err(Error::config(format!("history of {n} exceeds {MAX_HISTORY_CAP}")));
    }
    if t < 2 {
        return Err(Error::config("subset width needs t >= 2"));
    }
    let dim = x.dim();
    for (h, _) in history {
        check_dim(dim, h.dim())?;
    }
    let mut best: Option<(f64, u32)> = None;
    for mask in 1u32..(1u32 << n) {
        let mut gram = SymMat::zeros(dim);
        for (i, (h, _)) in history.iter().enumerate() {
            if mask >> i & 1 == 1 {
                gram.add_outer(h, 1.0)?;
            }
        }
        let v = subset_objective(t, &gram, mask.count_ones() as u64, x)?;
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, mask));
        }
    }
    let (value, mask) = best.expect("history is nonempty");
    Ok(SubsetWidth {
        value,
        subset: (0..n).filter(|i| mask >> i & 1 == 1).collect(),
    })
}

/// Ridge estimate restricted to `subset` of `history`.
pub fn subset_estimate(history: &[(Context, f64)], subset: &[usize], dim: usize) -> Result<Estimate> {
    let mut gram = SymMat::zeros(dim);
    let mut moment = Vector::zeros(dim);
    for &i in subset {
        let (x, r) = &history[i];
        gram.add_outer(x, 1.0)?;
        moment.axpy(*r, x)?;
    }
    let m = subset.len() as u64;
    Ok(Estimate {
        theta_hat: ridge_from_sums(&gram, &moment, m)?,
        n_used: m,
    })
}

/// Contextual UCB with exhaustive subset search over a capped history.
#[derive(Debug, Clone)]
pub struct ContextualUcb {
    config: UcbConfig,
    t: u64,
    histories: Vec<VecDeque<(Context, f64)>>,
    scores: Vec<f64>,
}

impl ContextualUcb {
    pub fn new(config: UcbConfig) -> Result<Self> {
        config.validate()?;
        Ok(ContextualUcb {
            histories: vec![VecDeque::with_capacity(config.history_cap); config.arms],
            t: 1,
            scores: Vec::new(),
            config,
        })
    }

    pub fn config(&self) -> &UcbConfig {
        &self.config
    }

    pub fn history(&self, arm: Arm) -> &VecDeque<(Context, f64)> {
        &self.histories[arm.index()]
    }

    /// Per-arm optimistic scores `x† θ̂_a + √c_{a,t}` at the current step.
    pub fn scores(&mut self, x: &Context) -> Result<Vec<f64>> {
        check_dim(self.config.dim, x.dim())?;
        let t = self.t;
        self.histories
            .iter_mut()
            .enumerate()
            .map(|(i, h)| {
                if h.is_empty() {
                    return Err(Error::UninitializedArm { arm: i + 1 });
                }
                let h = h.make_contiguous();
                let w = ucb_width(t, h, x)?;
                let e = subset_estimate(h, &w.subset, x.dim())?;
                Ok(e.predict(x)? + w.value.sqrt())
            })
            .collect()
    }
}

impl Policy for ContextualUcb {
    fn arms(&self) -> usize {
        self.config.arms
    }

    fn t(&self) -> u64 {
        self.t
    }

    fn step(&mut self, x: &Context) -> Result<Action> {
        check_dim(self.config.dim, x.dim())?;
        let t = self.t;
        if t <= self.config.p {
            return Ok(Action {
                t,
                arm: warmup_arm(t, self.config.arms),
                mode: Mode::Warmup,
                explore_probability: 1.0,
            });
        }
        let scores = self.scores(x)?;
        let arm = Arm::from_index(argmax(&scores).expect("at least one arm"));
        self.scores = scores;
        Ok(Action {
            t,
            arm,
            mode: Mode::Exploit,
            explore_probability: 0.0,
        })
    }

    fn feed(&mut self, action: &Action, x: &Context, reward: f64) -> Result<()> {
        check_action(self.t, self.config.arms, action)?;
        check_dim(self.config.dim, x.dim())?;
        if !reward.is_finite() {
            return Err(Error::NonFinite("reward"));
        }
        let h = &mut self.histories[action.arm.index()];
        h.push_back((x.clone(), reward));
        while h.len() > self.config.history_cap {
            h.pop_front();
        }
        self.t += 1;
        Ok(())
    }

    fn last_exploit_scores(&self) -> Option<&[f64]> {
        (!self.scores.is_empty()).then_some(self.scores.as_slice())
    }
}

/// Plays a uniform arm every step; nothing is learned.
#[derive(Debug, Clone)]
pub struct UniformPolicy {
    arms: usize,
    t: u64,
    rng: ChaCha8Rng,
}

impl UniformPolicy {
    pub fn new(arms: usize, seed: u64) -> Result<Self> {
        if arms == 0 {
            return Err(Error::config("arms must be at least 1"));
        }
        Ok(UniformPolicy {
            arms,
            t: 1,
            rng: seeded_rng(seed, POLICY_STREAM),
        })
    }
}

impl Policy for UniformPolicy {
    fn arms(&self) -> usize {
        self.arms
    }

    fn t(&self) -> u64 {
        self.t
    }

    fn step(&mut self, _x: &Context) -> Result<Action> {
        Ok(Action {
            t: self.t,
            arm: uniform_arm(self.arms, &mut self.rng),
            mode: Mode::Explore,
            explore_probability: 1.0,
        })
    }

    fn feed(&mut self, action: &Action, _x: &Context, _reward: f64) -> Result<()> {
        check_action(self.t, self.arms, action)?;
        self.t += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    // chi-square critical values at p = 0.001
    const CHI2_CRIT_DF3: f64 = 16.266;
    const CHI2_CRIT_DF5: f64 = 20.515;

    fn chi_square(counts: &[u64]) -> f64 {
        let total: u64 = counts.iter().sum();
        let expected = total as f64 / counts.len() as f64;
        counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum()
    }

    fn est(theta: Vec<f64>) -> Estimate {
        Estimate {
            theta_hat: Vector::new(theta).unwrap(),
            n_used: 1,
        }
    }

    #[test]
    fn warmup_arm_examples() {
        assert_eq!(warmup_arm(1, 6).get(), 2);
        assert_eq!(warmup_arm(6, 6).get(), 1);
        let k = 5;
        let mut counts = vec![0; k];
        for t in 1..=(2 * k as u64) {
            counts[warmup_arm(t, k).index()] += 1;
        }
        assert_eq!(counts, vec![2; k]);
    }

    #[test]
    fn explore_coin_rate() {
        let p = 32u64;
        let t = 32_000_000u64;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let draws = 1_000_000u64;
        let hits = (0..draws).filter(|_| explore_coin(t, p, &mut rng).unwrap()).count() as f64;
        let q = p as f64 / t as f64;
        let mean = hits / draws as f64;
        let se = (q * (1.0 - q) / draws as f64).sqrt();
        assert!((mean - q).abs() <= 5.0 * se, "mean {mean} vs {q}");

        // a moderate rate where the binomial check has teeth
        let t = 100u64;
        let hits = (0..draws).filter(|_| explore_coin(t, p, &mut rng).unwrap()).count() as f64;
        let q = 0.32;
        let se = (q * (1.0 - q) / draws as f64).sqrt();
        assert!((hits / draws as f64 - q).abs() <= 5.0 * se);
    }

    #[test]
    fn explore_coin_guards_warmup() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(explore_coin(32, 32, &mut rng), Err(Error::WarmupCoin { .. })));
        assert!(explore_coin(33, 32, &mut rng).is_ok());
        assert!(32.0 / 33.0 < 1.0);
    }

    #[test]
    fn explore_coin_is_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(99);
        let mut b = ChaCha8Rng::seed_from_u64(99);
        let sa: Vec<bool> = (0..1000).map(|i| explore_coin(10 + i, 8, &mut a).unwrap()).collect();
        let sb: Vec<bool> = (0..1000).map(|i| explore_coin(10 + i, 8, &mut b).unwrap()).collect();
        assert_eq!(sa, sb);
    }

    #[test]
    fn greedy_arm_examples() {
        let x = Vector::basis(2, 0);
        let same = vec![est(vec![0.3, 0.1]); 4];
        assert_eq!(greedy_arm(&x, &same).unwrap().get(), 1);
        let two = vec![est(vec![1.0, 0.0]), est(vec![2.0, 0.0])];
        assert_eq!(greedy_arm(&x, &two).unwrap().get(), 2);
        let mut uninit = two.clone();
        uninit[1].n_used = 0;
        assert!(matches!(greedy_arm(&x, &uninit), Err(Error::UninitializedArm { arm: 2 })));
    }

    #[test]
    fn greedy_arm_scale_and_padding_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..500 {
            let k = rng.random_range(1..8);
            let d = rng.random_range(1..6);
            let thetas: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let base: Vec<Estimate> = thetas.iter().map(|t| est(t.clone())).collect();
            let xv = Vector::new(x.clone()).unwrap();
            let a = greedy_arm(&xv, &base).unwrap();
            let c = rng.random_range(0.1..10.0);
            let scaled: Vec<Estimate> = thetas
                .iter()
                .map(|t| est(t.iter().map(|v| v * c).collect()))
                .collect();
            assert_eq!(greedy_arm(&xv, &scaled).unwrap(), a);
            let padded: Vec<Estimate> = thetas
                .iter()
                .map(|t| {
                    let mut t = t.clone();
                    t.extend((0..3).map(|_| rng.random_range(-1.0..1.0)));
                    est(t)
                })
                .collect();
            let mut xp = x.clone();
            xp.extend([0.0; 3]);
            assert_eq!(greedy_arm(&Vector::new(xp).unwrap(), &padded).unwrap(), a);
        }
    }

    #[test]
    fn config_rejects_bad_scale() {
        let ok = EpsGreedyConfig { arms: 6, dim: 3, p: 12, seed: 0 };
        assert!(EpsGreedy::new(ok).is_ok());
        for p in [0, 5, 13] {
            assert!(EpsGreedy::new(EpsGreedyConfig { p, ..ok }).is_err());
        }
        assert!(EpsGreedy::new(EpsGreedyConfig { arms: 0, ..ok }).is_err());
    }

    #[test]
    fn warmup_steps_cycle_arms() {
        let cfg = EpsGreedyConfig { arms: 3, dim: 2, p: 9, seed: 1 };
        let mut pol = EpsGreedy::new(cfg).unwrap();
        let x = Vector::basis(2, 0);
        for t in 1..=9u64 {
            let a = pol.step(&x).unwrap();
            assert_eq!(a.mode, Mode::Warmup);
            assert_eq!(a.arm, warmup_arm(t, 3));
            assert_eq!(a.t, t);
            pol.feed(&a, &x, 0.5).unwrap();
        }
        assert!(pol.arm_states().iter().all(|s| s.n() == 3));
        let a = pol.step(&x).unwrap();
        assert_ne!(a.mode, Mode::Warmup);
        assert!((a.explore_probability - 0.9).abs() < 1e-15);
    }

    fn warmed(arms: usize, seed: u64) -> EpsGreedy {
        let cfg = EpsGreedyConfig { arms, dim: 2, p: arms as u64, seed };
        let mut pol = EpsGreedy::new(cfg).unwrap();
        for i in 0..arms {
            let x = Vector::basis(2, i % 2);
            let a = pol.step(&x).unwrap();
            pol.feed(&a, &x, i as f64 * 0.1).unwrap();
        }
        pol
    }

    #[test]
    fn forced_explore_is_uniform() {
        let mut pol = warmed(6, 3);
        let x = Vector::basis(2, 0);
        let mut counts = vec![0u64; 6];
        for _ in 0..100_000 {
            let a = pol.step_with_coin(&x, true).unwrap();
            assert_eq!(a.mode, Mode::Explore);
            counts[a.arm.index()] += 1;
        }
        assert!(chi_square(&counts) < CHI2_CRIT_DF5, "{counts:?}");
    }

    #[test]
    fn forced_exploit_delegates_to_greedy() {
        let mut pol = warmed(4, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let x = Vector::new(vec![rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7)]).unwrap();
            let a = pol.step_with_coin(&x, false).unwrap();
            let est = pol.estimates().unwrap();
            assert_eq!(a.mode, Mode::Exploit);
            assert_eq!(a.arm, greedy_arm(&x, &est).unwrap());
        }
    }

    #[test]
    fn feed_records_only_warmup_and_explore() {
        let mut pol = warmed(2, 7);
        let total = |p: &EpsGreedy| p.arm_states().iter().map(|s| s.n()).sum::<u64>();
        let x = Vector::basis(2, 1);
        let before = total(&pol);
        let a = pol.step_with_coin(&x, false).unwrap();
        pol.feed(&a, &x, 3.0).unwrap();
        assert_eq!(total(&pol), before);

        let a = pol.step_with_coin(&x, true).unwrap();
        let n_before = pol.arm_states()[a.arm.index()].n();
        pol.feed(&a, &x, 3.0).unwrap();
        assert_eq!(pol.arm_states()[a.arm.index()].n(), n_before + 1);
    }

    #[test]
    fn stale_action_rejected() {
        let mut pol = warmed(2, 7);
        let x = Vector::basis(2, 1);
        let a = pol.step(&x).unwrap();
        pol.feed(&a, &x, 0.0).unwrap();
        assert!(matches!(pol.feed(&a, &x, 0.0), Err(Error::StaleAction { .. })));
    }

    #[test]
    fn replay_reproduces_snapshots() {
        let run = || {
            let cfg = EpsGreedyConfig { arms: 3, dim: 3, p: 6, seed: 42 };
            let mut pol = EpsGreedy::new(cfg).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..500 {
                let x = Vector::basis(3, rng.random_range(0..3));
                let a = pol.step(&x).unwrap();
                pol.feed(&a, &x, rng.random()).unwrap();
            }
            pol.arm_states().iter().map(|s| s.snapshot()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn ucb_width_singleton_history() {
        let h = vec![(Vector::basis(2, 0), 1.0)];
        let w = ucb_width(5, &h, &Vector::basis(2, 0)).unwrap();
        assert_eq!(w.subset, vec![0]);
        // m = 1: (ln 5) · 1/(1+1)²
        assert!((w.value - 5f64.ln() / 4.0).abs() < 1e-15);
        assert!(matches!(ucb_width(5, &[], &Vector::basis(2, 0)), Err(Error::NoData)));
    }

    #[test]
    fn ucb_width_not_above_full_history_or_random_subsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let d = rng.random_range(1..4);
            let n = rng.random_range(1..9);
            let h: Vec<(Vector, f64)> = (0..n)
                .map(|_| {
                    let v: Vec<f64> = (0..d).map(|_| rng.random_range(-0.5..0.5)).collect();
                    (Vector::new(v).unwrap(), rng.random())
                })
                .collect();
            let x = Vector::new((0..d).map(|_| rng.random_range(-0.5..0.5)).collect()).unwrap();
            let t = rng.random_range(2..1000);
            let w = ucb_width(t, &h, &x).unwrap();
            let value_of = |subset: &[usize]| {
                let mut g = SymMat::zeros(d);
                for &i in subset {
                    g.add_outer(&h[i].0, 1.0).unwrap();
                }
                subset_objective(t, &g, subset.len() as u64, &x).unwrap()
            };
            let all: Vec<usize> = (0..n).collect();
            assert!(w.value <= value_of(&all));
            assert_eq!(w.value, value_of(&w.subset));
            for _ in 0..100 {
                let s: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
                if !s.is_empty() {
                    assert!(w.value <= value_of(&s));
                }
            }
        }
    }

    #[test]
    fn ucb_identical_arms_tie_to_first() {
        let cfg = UcbConfig::new(3, 2, 3);
        let mut pol = ContextualUcb::new(cfg).unwrap();
        let x = Vector::new(vec![0.6, 0.8]).unwrap();
        for _ in 0..3 {
            let a = pol.step(&x).unwrap();
            pol.feed(&a, &x, 0.4).unwrap();
        }
        let a = pol.step(&x).unwrap();
        assert_eq!(a.mode, Mode::Exploit);
        assert_eq!(a.arm.get(), 1);
    }

    #[test]
    fn ucb_history_is_capped_fifo() {
        let cfg = UcbConfig { history_cap: 3, ..UcbConfig::new(1, 1, 1) };
        let mut pol = ContextualUcb::new(cfg).unwrap();
        for i in 0..6 {
            let x = Vector::new(vec![0.1 * (i + 1) as f64]).unwrap();
            let a = pol.step(&x).unwrap();
            pol.feed(&a, &x, i as f64).unwrap();
        }
        let rewards: Vec<f64> = pol.history(Arm::from_index(0)).iter().map(|(_, r)| *r).collect();
        assert_eq!(rewards, vec![3.0, 4.0, 5.0]);
        assert!(ContextualUcb::new(UcbConfig { history_cap: 21, ..cfg }).is_err());
        assert!(ContextualUcb::new(UcbConfig { history_cap: 0, ..cfg }).is_err());
    }

    #[test]
    fn uniform_policy_examples() {
        let mut one = UniformPolicy::new(1, 3).unwrap();
        let x = Vector::basis(1, 0);
        for _ in 0..20 {
            let a = one.step(&x).unwrap();
            assert_eq!(a.arm.get(), 1);
            assert_eq!(a.mode, Mode::Explore);
            one.feed(&a, &x, 0.0).unwrap();
        }
        let mut pol = UniformPolicy::new(4, 9).unwrap();
        let mut counts = vec![0u64; 4];
        let mut seq = Vec::new();
        for _ in 0..40_000 {
            let a = pol.step(&x).unwrap();
            counts[a.arm.index()] += 1;
            seq.push(a.arm);
            pol.feed(&a, &x, 0.0).unwrap();
        }
        assert!(chi_square(&counts) < CHI2_CRIT_DF3);
        let mut again = UniformPolicy::new(4, 9).unwrap();
        for expected in seq.iter().take(1000) {
            let a = again.step(&x).unwrap();
            assert_eq!(a.arm, *expected);
            again.feed(&a, &x, 0.0).unwrap();
        }
    }
}
