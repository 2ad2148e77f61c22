//! Ten replications on normalized Bernoulli contexts; checks the log shape of R(t).
//!
//!     cargo run --release --example fig1a_regret [out.csv]

use linbandit::harness::{log_fit, replicate, write_csv, Scenario};

fn main() -> linbandit::Result<()> {
    let config = Scenario::Fig1a.config();
    let trace = replicate(&config)?;
    let fit = log_fit(&trace, 0.5)?;
    for t in [1_000, 10_000, 100_000] {
        println!("R({t}) = {:.2}", trace.mean_at(t).unwrap_or(f64::NAN));
    }
    println!(
        "tail fit R(t) ~ {:.1} ln t + {:.1}, r^2 = {:.4}",
        fit.slope, fit.intercept, fit.r_squared
    );
    println!("explorations by T: {:.1}", trace.explore_count_mean.last().unwrap());
    if let Some(path) = std::env::args().nth(1) {
        write_csv(&trace, path.as_ref())?;
        println!("wrote {path}");
    }
    Ok(())
}
