//! Shared inputs for the benchmarks.

use shapetree::{family, sample, DiscreteDensity, Family, SampleCounts};

pub fn zipf(k: usize) -> DiscreteDensity {
    family(Family::HarmonicZipf, k, None).expect("k > 0")
}

/// A fixed-seed sample of size `n` from the harmonic-zipf density on `{1, …, k}`.
pub fn zipf_sample(k: usize, n: u64) -> SampleCounts {
    sample(&zipf(k), n, 42)
}
