//! Seeded i.i.d. sampling and empirical measures.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded with
//! [`SeedableRng::seed_from_u64`]. Draws are inverse-CDF lookups of
//! `rng.random::<f64>()` against the cumulative mass, so a `(f, n, seed)`
//! triple always produces the same counts on every platform.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::density::DiscreteDensity;
use crate::error::{Error, Result};

/// Atom counts of a sample of size `n` on `{1, …, k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCounts {
    k: usize,
    counts: Vec<u64>,
    n: u64,
}

impl SampleCounts {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyDensity);
        }
        let n = counts.iter().sum();
        Ok(Self { k: counts.len(), counts, n })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Count at atom `x` (1-based); zero beyond `k`.
    pub fn at(&self, x: usize) -> u64 {
        if x == 0 { 0 } else { self.counts.get(x - 1).copied().unwrap_or(0) }
    }

    /// `N = Σ_{x ∈ [start, start + len)} counts[x]`.
    pub fn interval_count(&self, start: usize, len: usize) -> Result<u64> {
        if start == 0 || len == 0 || start - 1 + len > self.k {
            return Err(Error::OutOfRange { start, len, k: self.k });
        }
        Ok(self.counts[start - 1..start - 1 + len].iter().sum())
    }

    /// Empirical measure `μ_n(A) = (1/n) Σ_{x ∈ A} counts[x]`.
    pub fn empirical_measure(&self, set: &AtomSet) -> f64 {
        set.count(self) as f64 / self.n as f64
    }

    /// Per-atom relative frequencies `counts[x] / n`.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Writes `index,count` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "count"])?;
        for (i, c) in self.counts.iter().enumerate() {
            w.serialize((i + 1, c))?;
        }
        w.flush().map_err(|e| Error::Serialization(e.to_string()))
    }
}

pub fn interval_count(c: &SampleCounts, start: usize, len: usize) -> Result<u64> {
    c.interval_count(start, len)
}

/// Draws `n` i.i.d. atoms from `f` and tallies them.
pub fn sample(f: &DiscreteDensity, n: u64, seed: u64) -> SampleCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cdf: Vec<f64> = f
        .mass()
        .iter()
        .scan(0.0, |acc, &m| {
            *acc += m;
            Some(*acc)
        })
        .collect();
    // Rounding can leave the final cumulative value just below 1.
    let last_positive = f.mass().iter().rposition(|&m| m > 0.0).unwrap_or(0);
    let mut counts = vec![0u64; f.k()];
    for _ in 0..n {
        let u: f64 = rng.random();
        let idx = cdf.partition_point(|&c| c <= u);
        counts[idx.min(last_positive)] += 1;
    }
    SampleCounts { k: f.k(), counts, n }
}

/// Seed for replication `index` of a run with master seed `master`: the
/// `index + 1`-th output of a SplitMix64 stream started at `master`.
pub fn replication_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1))))
}

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A subset of `{1, …, k}` stored as sorted, distinct atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AtomSet(Vec<usize>);

impl AtomSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Sorts and deduplicates.
    pub fn new(mut atoms: Vec<usize>) -> Self {
        atoms.sort_unstable();
        atoms.dedup();
        Self(atoms)
    }

    /// Atoms `x` with `mask[x - 1]` set.
    pub fn from_mask(mask: &[bool]) -> Self {
        Self(mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i + 1).collect())
    }

    pub fn atoms(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_atom(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// `μ(A)` under `f`.
    pub fn mass(&self, f: &DiscreteDensity) -> f64 {
        self.0.iter().map(|&x| f.at(x)).sum()
    }

    pub fn count(&self, c: &SampleCounts) -> u64 {
        self.0.iter().map(|&x| c.at(x)).sum()
    }

    /// Number of maximal runs of consecutive atoms.
    pub fn interval_runs(&self) -> usize {
        self.0.windows(2).filter(|w| w[1] != w[0] + 1).count() + usize::from(!self.0.is_empty())
    }
}

/// `max_{A ∈ sets} |μ_n(A) − μ(A)|`, zero for an empty list.
pub fn empirical_sup_deviation(c: &SampleCounts, f: &DiscreteDensity, sets: &[AtomSet]) -> Result<f64> {
    if c.k() != f.k() {
        return Err(Error::DomainMismatch(format!("counts on k = {}, density on k = {}", c.k(), f.k())));
    }
    if c.n() == 0 {
        return Err(Error::BadParam("empirical measure needs n ≥ 1".into()));
    }
    let mut sup = 0.0f64;
    for set in sets {
        if let Some(x) = set.max_atom() {
            if x > c.k() || set.atoms()[0] == 0 {
                return Err(Error::OutOfRange { start: x, len: 1, k: c.k() });
            }
        }
        sup = sup.max((c.empirical_measure(set) - set.mass(f)).abs());
    }
    Ok(sup)
}
