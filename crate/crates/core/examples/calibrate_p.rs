//! Estimating sigma_min, delta_min and L online and turning them into p.
//!
//!     cargo run --release --example calibrate_p

use linbandit::calibration::{p_strict_bound, p_theorem_bound};
use linbandit::harness::{run_one, Scenario};

fn main() -> linbandit::Result<()> {
    let mut config = Scenario::Fig1a.config();
    config.run.horizon = 20_000;
    let env = config.environment.build(config.run.seed)?;
    let trace = run_one(&config, config.run.seed)?;
    let report = &trace.calibration;
    print!("{report}");

    let gaps = env.exact_gaps()?;
    let sigma = env.exact_sigma_min()?;
    println!("exact sigma_min={sigma:.4} delta_min={:.4}", gaps.delta_min);
    let k = env.arms();
    println!(
        "p from exact values: compact bound {} (C = 1), strict bound {}",
        p_theorem_bound(k, 1.0, gaps.delta_min, sigma, 1.0)?,
        p_strict_bound(k, 1.0, gaps.delta_min, sigma, 1.0)?
    );
    println!("the preset runs with p = {}", config.policy.p().unwrap());
    Ok(())
}
