//! Probability vectors on `{1, …, k}` and the shape classes they can belong to.
//!
//! Atoms are labelled `1..=k` in every public signature; `mass()[x - 1]` is the
//! mass of atom `x`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `|Σ mass − 1|` accepted by [`DiscreteDensity::new`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A validated probability mass function on `{1, …, k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDensity")]
pub struct DiscreteDensity {
    k: usize,
    mass: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDensity {
    k: usize,
    mass: Vec<f64>,
}

impl TryFrom<RawDensity> for DiscreteDensity {
    type Error = Error;

    fn try_from(raw: RawDensity) -> Result<Self> {
        if raw.k != raw.mass.len() {
            return Err(Error::DomainMismatch(format!(
                "k = {} but {} masses given",
                raw.k,
                raw.mass.len()
            )));
        }
        DiscreteDensity::new(raw.mass)
    }
}

impl DiscreteDensity {
    /// Validates `mass` without repairing it.
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::EmptyDensity);
        }
        for (i, &m) in mass.iter().enumerate() {
            // `!(m >= 0.0)` also rejects NaN.
            if !m.is_finite() || m < 0.0 {
                return Err(Error::NegativeMass { atom: i + 1, value: m });
            }
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized {
                sum,
                tolerance: NORMALIZATION_TOLERANCE,
            });
        }
        Ok(Self { k: mass.len(), mass })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        family(Family::Uniform, k, None)
    }

    /// Point mass at atom `x`.
    pub fn point_mass(k: usize, x: usize) -> Result<Self> {
        if x == 0 || x > k {
            return Err(Error::OutOfRange { start: x, len: 1, k });
        }
        let mut mass = vec![0.0; k];
        mass[x - 1] = 1.0;
        Self::new(mass)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Mass of atom `x` (1-based); zero outside `1..=k`.
    pub fn at(&self, x: usize) -> f64 {
        if x == 0 || x > self.k {
            0.0
        } else {
            self.mass[x - 1]
        }
    }

    /// Total mass of `{start, …, start + len − 1}`; atoms beyond `k` contribute zero.
    pub fn interval_mass(&self, start: usize, len: usize) -> f64 {
        if start == 0 || start > self.k {
            return 0.0;
        }
        let end = (start - 1 + len).min(self.k);
        self.mass[start - 1..end].iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn is_non_increasing(&self) -> bool {
        is_non_increasing_slice(&self.mass)
    }

    pub fn is_convex_non_increasing(&self) -> bool {
        is_convex_non_increasing_slice(&self.mass)
    }

    /// Convex combination of densities sharing one support size.
    pub fn mixture(components: &[(f64, &DiscreteDensity)]) -> Result<Self> {
        let Some((_, first)) = components.first() else {
            return Err(Error::BadParam("empty mixture".into()));
        };
        let k = first.k;
        let mut mass = vec![0.0; k];
        for (w, d) in components {
            if d.k != k {
                return Err(Error::DomainMismatch(format!("mixture of k = {k} and k = {}", d.k)));
            }
            if w.is_nan() || *w < 0.0 {
                return Err(Error::BadParam(format!("mixture weight {w}")));
            }
            for (m, &v) in mass.iter_mut().zip(&d.mass) {
                *m += w * v;
            }
        }
        Self::new(mass)
    }

    /// Writes `index,mass` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "mass"])?;
        for (i, m) in self.mass.iter().enumerate() {
            w.write_record([(i + 1).to_string(), m.to_string()])?;
        }
        w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(())
    }
}

/// `mass[x+1] ≤ mass[x]` for every consecutive pair, compared exactly.
pub fn is_non_increasing_slice(mass: &[f64]) -> bool {
    mass.windows(2).all(|w| w[1] <= w[0])
}

/// Non-increasing and `f(x) − 2f(x+1) + f(x+2) ≥ 0` everywhere.
///
/// The second difference is tested as `f(x) + f(x+2) ≥ 2 f(x+1)`: doubling is
/// exact and rounding is monotone, so this decides the inequality exactly for
/// the stored values.
pub fn is_convex_non_increasing_slice(mass: &[f64]) -> bool {
    is_non_increasing_slice(mass) && mass.windows(3).all(|w| w[0] + w[2] >= 2.0 * w[1])
}

pub fn make_density(mass: &[f64]) -> Result<DiscreteDensity> {
    DiscreteDensity::new(mass.to_vec())
}

pub fn is_non_increasing(f: &DiscreteDensity) -> bool {
    f.is_non_increasing()
}

pub fn is_convex_non_increasing(f: &DiscreteDensity) -> bool {
    f.is_convex_non_increasing()
}

/// Named test families. All are non-increasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Uniform,
    /// `f(x) = 1 / (x H_k)` with `H_k` the k-th harmonic number.
    HarmonicZipf,
    /// `f(x) ∝ q^(x−1)` for a ratio `q ∈ (0, 1)`.
    TruncGeometric,
    /// `f(x) ∝ k + 1 − x`.
    LinearDecreasing,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Uniform,
        Family::HarmonicZipf,
        Family::TruncGeometric,
        Family::LinearDecreasing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::HarmonicZipf => "harmonic-zipf",
            Family::TruncGeometric => "trunc-geometric",
            Family::LinearDecreasing => "linear-decreasing",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::BadParam(format!("unknown family {s:?}")))
    }
}

/// Builds a member of a named family on `{1, …, k}`.
///
/// `param` is the ratio for [`Family::TruncGeometric`] and is ignored otherwise.
pub fn family(name: Family, k: usize, param: Option<f64>) -> Result<DiscreteDensity> {
    if k == 0 {
        return Err(Error::BadParam("k must be at least 1".into()));
    }
    let mass = match name {
        Family::Uniform => {
            let v = 1.0 / k as f64;
            vec![v; k]
        }
        Family::HarmonicZipf => {
            let h: f64 = (1..=k).map(|x| 1.0 / x as f64).sum();
            (1..=k).map(|x| 1.0 / (x as f64 * h)).collect()
        }
        Family::TruncGeometric => {
            let q = param.ok_or_else(|| Error::BadParam("trunc-geometric needs a ratio".into()))?;
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::BadParam(format!("geometric ratio {q} not in (0, 1)")));
            }
            // Repeated multiplication keeps the sequence exactly non-increasing.
            let mut w = Vec::with_capacity(k);
            let mut p = 1.0f64;
            for _ in 0..k {
                w.push(p);
                p *= q;
            }
            let z: f64 = w.iter().sum();
            w.into_iter().map(|p| p / z).collect()
        }
        Family::LinearDecreasing => {
            let weights: Vec<u64> = (1..=k as u64).rev().collect();
            normalize_integer_weights(&weights)
        }
    };
    DiscreteDensity::new(mass)
}

/// Scales non-negative integer weights to (approximately) unit sum so that every
/// product `w · c` is exact.
///
/// The scale `c ≈ 1 / Σ w` is rounded to `53 − bits(max w)` significant bits, so
/// any affine relation among the weights (equal second differences, equal steps)
/// survives exactly in the floats. The sum is off by at most `2^-(54 − bits)`
/// relative; weights up to `2^23` keep that below [`NORMALIZATION_TOLERANCE`].
pub fn normalize_integer_weights(weights: &[u64]) -> Vec<f64> {
    let total: u128 = weights.iter().map(|&w| w as u128).sum();
    if total == 0 {
        return vec![0.0; weights.len()];
    }
    let max = weights.iter().copied().max().unwrap_or(0);
    let weight_bits = 64 - max.leading_zeros() as i32;
    let scale = round_to_bits(1.0 / total as f64, 53 - weight_bits);
    weights.iter().map(|&w| w as f64 * scale).collect()
}

/// Rounds a positive float to `bits` significant bits.
fn round_to_bits(x: f64, bits: i32) -> f64 {
    if bits >= 53 {
        return x;
    }
    let bits = bits.max(1);
    let exp = x.log2().floor() as i32;
    let quantum = 2f64.powi(exp - bits + 1);
    (x / quantum).round() * quantum
}
