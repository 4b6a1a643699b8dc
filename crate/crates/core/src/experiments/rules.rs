//! Regularization schedules and admissible block counts.
//!
//! `α` is the eigenvalue decay exponent (`μ_k ≍ k^{-2α}`, so `α = s` for the
//! periodic Sobolev kernel) and `r` the source-condition exponent.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named λ schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaRule {
    /// `λ = (m/N)^{2α/(2α·max{2r,1}+1)}`: tuned to the block size.
    BlockRatio,
    /// `λ = N^{-2α/(2α·max{2r,1}+1)}`: the single-machine minimax choice.
    Minimax,
    /// `λ = N^{-2α/(4αr+1)}`: the choice paired with the distributed rate.
    DistributedMinimax,
}

impl LambdaRule {
    pub const ALL: [LambdaRule; 3] = [LambdaRule::BlockRatio, LambdaRule::Minimax, LambdaRule::DistributedMinimax];

    pub fn name(self) -> &'static str {
        match self {
            LambdaRule::BlockRatio => "block_ratio",
            LambdaRule::Minimax => "minimax",
            LambdaRule::DistributedMinimax => "distributed_minimax",
        }
    }
}

impl fmt::Display for LambdaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LambdaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LambdaRule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown lambda rule {s:?}")))
    }
}

/// Named upper limits on the number of blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MRestriction {
    /// Limit for the block-ratio schedule, any `r ∈ (0, 1]`.
    BlockRatio,
    /// The block-ratio limit specialised to `r = 1/2`: `N^{1/(4+6α)}`.
    BlockRatioInRkhs,
    /// Limit for the distributed-minimax schedule; requires `r > 1/2`.
    DistributedMinimax,
}

impl MRestriction {
    pub const ALL: [MRestriction; 3] = [
        MRestriction::BlockRatio,
        MRestriction::BlockRatioInRkhs,
        MRestriction::DistributedMinimax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MRestriction::BlockRatio => "block_ratio",
            MRestriction::BlockRatioInRkhs => "block_ratio_in_rkhs",
            MRestriction::DistributedMinimax => "distributed_minimax",
        }
    }
}

impl fmt::Display for MRestriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MRestriction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MRestriction::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown m restriction {s:?}")))
    }
}

fn check_alpha_r(alpha: f64, r: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::arg(format!("alpha must be positive, got {alpha}")));
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::arg(format!("r must lie in (0, 1], got {r}")));
    }
    Ok(())
}

/// Evaluate a λ schedule. `m` is ignored by the rules that do not use it.
pub fn lambda_rule(rule: LambdaRule, n: usize, m: usize, alpha: f64, r: f64) -> Result<f64> {
    check_alpha_r(alpha, r)?;
    if n == 0 {
        return Err(Error::arg("N must be at least 1"));
    }
    let n = n as f64;
    let lambda = match rule {
        LambdaRule::BlockRatio => {
            if m == 0 || m as f64 > n {
                return Err(Error::arg(format!("m must lie in 1..=N, got {m}")));
            }
            (m as f64 / n).powf(2.0 * alpha / (2.0 * alpha * (2.0 * r).max(1.0) + 1.0))
        }
        LambdaRule::Minimax => n.powf(-2.0 * alpha / (2.0 * alpha * (2.0 * r).max(1.0) + 1.0)),
        LambdaRule::DistributedMinimax => n.powf(-2.0 * alpha / (4.0 * alpha * r + 1.0)),
    };
    Ok(lambda)
}

/// Exponent `e` such that the largest admissible block count is `⌊N^e⌋`.
pub fn m_restriction_exponent(rule: MRestriction, alpha: f64, r: f64) -> Result<f64> {
    check_alpha_r(alpha, r)?;
    let e = match rule {
        MRestriction::BlockRatio => {
            let num = 1.0 + 2.0 * alpha * (2.0 * r - 1.0).max(0.0) + 2.0 * alpha * (2.0 * r - 1.0);
            let den = 4.0 + 8.0 * alpha * (2.0 * r).max(1.0) - 4.0 * alpha + 4.0 * alpha * r;
            num / den
        }
        MRestriction::BlockRatioInRkhs => 1.0 / (4.0 + 6.0 * alpha),
        MRestriction::DistributedMinimax => {
            let a = (6.0 * alpha * (2.0 * r - 1.0) + 1.0) / (5.0 * (4.0 * alpha * r + 1.0));
            let b = 2.0 * alpha * (2.0 * r - 1.0) / (4.0 * alpha * r + 1.0);
            a.min(b)
        }
    };
    Ok(e)
}

/// `⌊N^e⌋` with a relative slack of `1e-12`, so exact powers such as
/// `1024^{0.1} = 2` are not lost to rounding. Never less than 1.
pub fn floor_power(n: usize, exponent: f64) -> usize {
    let v = (n as f64).powf(exponent) * (1.0 + 1e-12);
    (v.floor() as usize).clamp(1, n.max(1))
}

/// Largest admissible number of blocks for `N` samples.
///
/// The distributed-minimax limit is vacuous for `r ≤ 1/2`; it then returns 1
/// with a warning.
pub fn m_restriction(rule: MRestriction, n: usize, alpha: f64, r: f64) -> Result<usize> {
    if n == 0 {
        return Err(Error::arg("N must be at least 1"));
    }
    let e = m_restriction_exponent(rule, alpha, r)?;
    if rule == MRestriction::DistributedMinimax && r <= 0.5 {
        log::warn!("distributed-minimax block limit needs r > 1/2 (got r = {r}); using m = 1");
        return Ok(1);
    }
    Ok(floor_power(n, e))
}
