//! Online ridge estimate of one arm converging to its parameter.
//!
//!     cargo run --example ridge_estimator

use linbandit::environment::bernoulli_uniform;
use linbandit::policy::Arm;
use linbandit::{seeded_rng, ArmState};

fn main() -> linbandit::Result<()> {
    let env = bernoulli_uniform(4, 1, 11)?;
    let theta = &env.thetas()[0];
    let mut rng = seeded_rng(11, 0);
    let mut arm = ArmState::new(env.dim());
    let probe = env.sample_context(&mut rng);

    println!("true theta  {:?}", theta.as_slice());
    // c tends to sqrt(x' Sigma^-2 x) as the regularization fades; c/sqrt(n) is the error scale
    println!("{:>6} {:>10} {:>10} {:>10}", "n", "error", "c", "c/sqrt(n)");
    let mut next = 1;
    for n in 1..=10_000u64 {
        let x = env.sample_context(&mut rng);
        let r = env.sample_reward(Arm::from_index(0), &x, &mut rng)?;
        arm.record(&x, r)?;
        if n == next {
            let est = arm.ridge_solve()?.theta_hat.clone();
            let err = est.sub(theta)?.norm();
            let c = arm.confidence_width(&probe)?;
            println!("{n:>6} {err:>10.5} {c:>10.5} {:>10.5}", c / (n as f64).sqrt());
            next *= 4;
        }
    }
    Ok(())
}
