//! Regularization schedules and block-count limits side by side.
//!
//! cargo run --example lambda_rules

use dac_krr::experiments::{lambda_rule, m_restriction, m_restriction_exponent, LambdaRule, MRestriction};

fn main() -> dac_krr::Result<()> {
    let (alpha, r) = (1.0, 1.0);
    println!("alpha={alpha} r={r}");
    for rule in MRestriction::ALL {
        println!("  {rule:<22} m ≤ N^{:.4}", m_restriction_exponent(rule, alpha, r)?);
    }
    println!("{:>7} {:>4} {:>12} {:>12} {:>20}", "N", "m", "block_ratio", "minimax", "distributed_minimax");
    for n in [512, 1024, 4096, 100_000] {
        let m = m_restriction(MRestriction::DistributedMinimax, n, alpha, r)?;
        let l: Vec<f64> = LambdaRule::ALL
            .iter()
            .map(|&rule| lambda_rule(rule, n, m, alpha, r))
            .collect::<dac_krr::Result<_>>()?;
        println!("{n:>7} {m:>4} {:>12.4e} {:>12.4e} {:>20.4e}", l[0], l[1], l[2]);
    }
    Ok(())
}
