//! Regret on the two-context family as the rare context gets rarer.
//!
//!     cargo run --release --example fig1b_two_context [theta_seed]

use linbandit::harness::Scenario;
use linbandit::harness::replicate;

fn main() -> linbandit::Result<()> {
    let theta_seed = std::env::args().nth(1).map(|s| s.parse().expect("theta seed"));
    println!("{:>5} {:>10} {:>12} {:>10}", "I", "sigma_min", "R(T)", "sd");
    for period in [5, 10, 100] {
        let mut config = Scenario::Fig1b(period).config();
        config.environment.theta_seed = theta_seed;
        let sigma = config.environment.build(config.run.seed)?.exact_sigma_min()?;
        let trace = replicate(&config)?;
        println!(
            "{period:>5} {sigma:>10.6} {:>12.2} {:>10.2}",
            trace.final_mean(),
            trace.std_regret.last().unwrap()
        );
    }
    Ok(())
}
