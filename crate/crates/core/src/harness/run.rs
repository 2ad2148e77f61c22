//! One seeded simulation.

use crate::calibration::{CalibrationReport, Calibrator};
use crate::environment::{EnvironmentSpec, RegretLedger};
use crate::error::{Error, Result};
use crate::harness::config::{PolicyConfig, RunConfig};
use crate::policy::{Action, Mode};
use crate::seeded_rng;

/// Environment stream of a replication; the policy uses [`crate::policy::POLICY_STREAM`].
pub const ENV_STREAM: u64 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub seed: u64,
    pub ledger: RegretLedger,
    pub actions: Vec<Action>,
    pub calibration: CalibrationReport,
}

impl RegretTrace {
    /// Warm-up plus exploration steps up to and including each `t`.
    pub fn recorded_counts(&self) -> Vec<u64> {
        self.actions
            .iter()
            .scan(0u64, |n, a| {
                *n += a.mode.is_recorded() as u64;
                Some(*n)
            })
            .collect()
    }

    pub fn exploit_counts(&self) -> Vec<u64> {
        self.actions
            .iter()
            .scan(0u64, |n, a| {
                *n += (a.mode == Mode::Exploit) as u64;
                Some(*n)
            })
            .collect()
    }
}

fn at(t: u64) -> impl FnOnce(Error) -> Error {
    move |e| Error::Step { t, source: Box::new(e) }
}

/// Runs `config` once with replication seed `seed`.
pub fn run_one(config: &RunConfig, seed: u64) -> Result<RegretTrace> {
    let env = config.environment.build(config.run.seed)?;
    run_with(&env, &config.policy, config, seed)
}

/// Runs against an already built environment, so replications share the arm parameters.
pub fn run_with(env: &EnvironmentSpec, policy: &PolicyConfig, config: &RunConfig, seed: u64) -> Result<RegretTrace> {
    let horizon = config.run.horizon;
    let mut pol = policy.build(env, seed)?;
    let mut rng = seeded_rng(seed, ENV_STREAM);
    let mut ledger = RegretLedger::with_capacity(env.arms(), horizon as usize);
    let mut actions = Vec::with_capacity(horizon as usize);
    let mut cal = Calibrator::new(env.dim());
    for t in 1..=horizon {
        let x = env.sample_context(&mut rng);
        let action = pol.step(&x).map_err(at(t))?;
        let reward = env.sample_reward(action.arm, &x, &mut rng).map_err(at(t))?;
        pol.feed(&action, &x, reward).map_err(at(t))?;
        ledger.accrue(t, &x, &action, env.thetas()).map_err(at(t))?;
        cal.observe_context(&x).map_err(at(t))?;
        if action.mode == Mode::Exploit {
            if let Some(scores) = pol.last_exploit_scores() {
                cal.observe_exploit(scores);
            }
        }
        cal.observe_reward(action.arm, &x, reward);
        actions.push(action);
    }
    let calibration = cal.report(env.arms(), config.run.theorem_constant, config.run.concentration_constant);
    Ok(RegretTrace { seed, ledger, actions, calibration })
}
