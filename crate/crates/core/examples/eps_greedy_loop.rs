//! Driving the epsilon-greedy policy by hand: context, step, reward, feed.
//!
//!     cargo run --example eps_greedy_loop

use linbandit::environment::{bernoulli_uniform, RegretLedger};
use linbandit::policy::Mode;
use linbandit::{seeded_rng, EpsGreedy, EpsGreedyConfig, Policy};

fn main() -> linbandit::Result<()> {
    let (dim, arms, p) = (3, 4, 128);
    let env = bernoulli_uniform(dim, arms, 5)?;
    let mut policy = EpsGreedy::new(EpsGreedyConfig { arms, dim, p, seed: 5 })?;
    let mut rng = seeded_rng(5, 0);
    let mut ledger = RegretLedger::new(arms);

    for t in 1..=20_000 {
        let x = env.sample_context(&mut rng);
        let action = policy.step(&x)?;
        let reward = env.sample_reward(action.arm, &x, &mut rng)?;
        policy.feed(&action, &x, reward)?;
        ledger.accrue(t, &x, &action, env.thetas())?;
        if t == p + 1 || t % 5000 == 0 {
            let note = if action.mode == Mode::Exploit { "exploit" } else { action.mode.as_str() };
            println!("t={t:>6}  R(t)={:>8.2}  last step {note} arm {}", ledger.total(), action.arm);
        }
    }
    let counts = ledger.mode_counts();
    println!(
        "warm-up {} explore {} exploit {}; pulls per arm {:?}",
        counts.warmup,
        counts.explore,
        counts.exploit,
        ledger.per_arm_pulls()
    );
    for (a, est) in policy.estimates()?.iter().enumerate() {
        let err = est.theta_hat.sub(&env.thetas()[a])?.norm();
        println!("arm {} estimate error {err:.4} from {} samples", a + 1, est.n_used);
    }
    Ok(())
}
