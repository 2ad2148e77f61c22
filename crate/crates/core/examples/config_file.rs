//! Writing a run configuration, reading it back and running it.
//!
//!     cargo run --release --example config_file

use linbandit::harness::{read_config, replicate, write_config, write_csv, PolicyConfig, Scenario};

fn main() -> linbandit::Result<()> {
    let dir = std::env::temp_dir().join("linbandit-example");
    std::fs::create_dir_all(&dir)?;
    let mut config = Scenario::Scaling { dim: 6, arms: 3 }.config();
    config.policy = PolicyConfig::EpsGreedy { p: 96 };
    config.run.horizon = 5_000;
    config.run.reps = 4;
    config.run.log_every = 500;

    let path = dir.join("scaling.cfg");
    write_config(&config, &path)?;
    println!("{}", std::fs::read_to_string(&path)?);

    let loaded = read_config(&path)?;
    assert_eq!(loaded, config);
    let trace = replicate(&loaded)?;
    let csv = dir.join("scaling.csv");
    write_csv(&trace, &csv)?;
    println!("R(T) = {:.2}, {} rows in {}", trace.final_mean(), trace.len(), csv.display());
    Ok(())
}
