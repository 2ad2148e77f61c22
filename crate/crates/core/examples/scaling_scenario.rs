//! How sigma_min, delta_min and the implied p move with d.
//!
//!     cargo run --example scaling_scenario

use linbandit::calibration::{build_scaling_scenario, p_strict_bound, p_theorem_bound};
use linbandit::seeded_rng;

fn main() -> linbandit::Result<()> {
    let arms = 4;
    println!("{:>4} {:>10} {:>10} {:>10} {:>10} {:>12}", "d", "sigma_min", "d*sigma", "delta_min", "p (C=1)", "p strict");
    for dim in [2usize, 4, 8, 12] {
        let mut rng = seeded_rng(3, dim as u64);
        let s = build_scaling_scenario(dim, arms, 0.5, 0.1, &mut rng)?;
        let sigma = s.spec.exact_sigma_min()?;
        let delta = s.spec.exact_gaps()?.delta_min;
        let l = 0.1 * (dim as f64).sqrt();
        println!(
            "{dim:>4} {sigma:>10.4} {:>10.3} {delta:>10.4} {:>10} {:>12}",
            sigma * dim as f64,
            p_theorem_bound(arms, l, delta, sigma, 1.0)?,
            p_strict_bound(arms, l, delta, sigma, 1.0)?
        );
    }
    Ok(())
}
