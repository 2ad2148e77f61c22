//! The exhaustive-subset UCB policy next to epsilon-greedy on a small instance.
//!
//!     cargo run --release --example contextual_ucb_toy

use linbandit::harness::{replicate, PolicyConfig, Scenario};
use linbandit::policy::ucb_width;
use linbandit::Vector;

fn main() -> linbandit::Result<()> {
    let history: Vec<(Vector, f64)> = [[1.0, 0.0], [0.0, 1.0], [0.6, 0.8], [1.0, 0.0]]
        .iter()
        .map(|x| (Vector::new(x.to_vec()).unwrap(), 0.0))
        .collect();
    let x = Vector::new(vec![0.8, 0.6])?;
    let w = ucb_width(50, &history, &x)?;
    println!("narrowest width {:.4} from history positions {:?}", w.value.sqrt(), w.subset);

    let mut base = Scenario::TwoContext(10).config();
    base.environment.arms = 3;
    base.run.horizon = 3_000;
    base.run.reps = 4;
    for policy in [
        PolicyConfig::Ucb { p: 6, history_cap: 8 },
        PolicyConfig::EpsGreedy { p: 96 },
        PolicyConfig::Uniform,
    ] {
        let mut config = base.clone();
        config.policy = policy;
        let trace = replicate(&config)?;
        println!("{:<11} R(T) = {:>8.2}", config.policy.kind(), trace.final_mean());
    }
    Ok(())
}
