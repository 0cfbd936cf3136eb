//! The three-branch minimax rates `f(n, k)` (non-increasing) and `g(n, k)`
//! (convex non-increasing).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeClass {
    Monotone,
    Convex,
}

impl std::str::FromStr for ShapeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monotone" => Ok(ShapeClass::Monotone),
            "convex" => Ok(ShapeClass::Convex),
            other => Err(Error::BadParam(format!("unknown class {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    SmallK,
    MidK,
    LargeK,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRegime {
    pub class: ShapeClass,
    pub n: u64,
    pub k: u64,
    pub branch: Branch,
    pub value: f64,
}

/// Largest `k` accepted by the rate functions.
pub const MAX_K: u64 = i64::MAX as u64;

/// Branch of `f(n, k)`, given `log₂ k` so that thresholds beyond `u64` can be
/// probed: small below `2n^{1/3}`, large from `n^{1/3} 2^n` on.
pub fn monotone_branch(n: u64, log2_k: f64) -> Branch {
    let log2_n = (n as f64).log2();
    if log2_k < 1.0 + log2_n / 3.0 {
        Branch::SmallK
    } else if log2_k - log2_n / 3.0 >= n as f64 {
        Branch::LargeK
    } else {
        Branch::MidK
    }
}

/// Branch of `g(n, k)` given `log₃ k`: small below `3n^{1/5}`, large from
/// `n^{1/5} 3^n` on.
pub fn convex_branch(n: u64, log3_k: f64) -> Branch {
    let log3_n = (n as f64).ln() / 3f64.ln();
    if log3_k < 1.0 + log3_n / 5.0 {
        Branch::SmallK
    } else if log3_k - log3_n / 5.0 >= n as f64 {
        Branch::LargeK
    } else {
        Branch::MidK
    }
}

fn check(n: u64, k: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::BadParam("n must be at least 1".into()));
    }
    if !(2..=MAX_K).contains(&k) {
        return Err(Error::BadParam(format!("k = {k} outside 2..=2^63-1")));
    }
    Ok(())
}

/// `√(k/n)`, `(log₂(k/n^{1/3})/n)^{1/3}` or `1`, capped at 1.
pub fn rate_monotone(n: u64, k: u64) -> Result<RateRegime> {
    check(n, k)?;
    let (nf, kf) = (n as f64, k as f64);
    let branch = monotone_branch(n, kf.log2());
    let value = match branch {
        Branch::SmallK => (kf / nf).sqrt(),
        Branch::MidK => ((kf.log2() - nf.log2() / 3.0) / nf).cbrt(),
        Branch::LargeK => 1.0,
    };
    let value = value.min(1.0);
    Ok(RateRegime { class: ShapeClass::Monotone, n, k, branch, value })
}

/// `√(k/n)`, `(log₃(k/n^{1/5})/n)^{2/5}` or `1`, capped at 1 (the small-k
/// branch exceeds 1 when `n ≤ 3`).
pub fn rate_convex(n: u64, k: u64) -> Result<RateRegime> {
    check(n, k)?;
    let (nf, kf) = (n as f64, k as f64);
    let ln3 = 3f64.ln();
    let branch = convex_branch(n, kf.ln() / ln3);
    let value = match branch {
        Branch::SmallK => (kf / nf).sqrt(),
        Branch::MidK => (((kf.ln() - nf.ln() / 5.0) / ln3) / nf).powf(0.4),
        Branch::LargeK => 1.0,
    };
    let value = value.min(1.0);
    Ok(RateRegime { class: ShapeClass::Convex, n, k, branch, value })
}

pub fn rate(class: ShapeClass, n: u64, k: u64) -> Result<RateRegime> {
    match class {
        ShapeClass::Monotone => rate_monotone(n, k),
        ShapeClass::Convex => rate_convex(n, k),
    }
}
