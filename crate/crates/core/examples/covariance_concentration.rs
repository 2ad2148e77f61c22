//! Spectral error of the empirical second moment shrinking like n^-1/2.
//!
//!     cargo run --release --example covariance_concentration

use linbandit::calibration::CovarianceAccumulator;
use linbandit::environment::bernoulli_uniform;
use linbandit::linalg::spectral_norm;
use linbandit::seeded_rng;

fn main() -> linbandit::Result<()> {
    let env = bernoulli_uniform(3, 1, 0)?;
    let sigma = env.second_moment()?;
    println!("{:>7} {:>12} {:>12}", "n", "median err", "err*sqrt(n)");
    for n in [100usize, 400, 1600, 6400] {
        let mut errs: Vec<f64> = (0..100u64)
            .map(|trial| {
                let mut rng = seeded_rng(1, trial);
                let mut acc = CovarianceAccumulator::new(3);
                for _ in 0..n {
                    acc.observe(&env.sample_context(&mut rng)).unwrap();
                }
                spectral_norm(&acc.second_moment().unwrap().sub(&sigma).unwrap())
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        let med = 0.5 * (errs[49] + errs[50]);
        println!("{n:>7} {med:>12.5} {:>12.4}", med * (n as f64).sqrt());
    }
    Ok(())
}
