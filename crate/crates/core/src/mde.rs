//! Minimum distance selection over a finite candidate set.

use std::collections::HashSet;

use crate::density::DiscreteDensity;
use crate::error::{Error, Result};
use crate::sampling::{AtomSet, SampleCounts};

/// Deviations closer than this are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Non-empty list of densities on a common `{1, …, k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    candidates: Vec<DiscreteDensity>,
    labels: Vec<Option<String>>,
}

impl CandidateSet {
    pub fn new(candidates: Vec<DiscreteDensity>) -> Result<Self> {
        let labels = vec![None; candidates.len()];
        Self::with_labels(candidates, labels)
    }

    pub fn with_labels(candidates: Vec<DiscreteDensity>, labels: Vec<Option<String>>) -> Result<Self> {
        let Some(first) = candidates.first() else {
            return Err(Error::EmptyCandidates);
        };
        if let Some(bad) = candidates.iter().find(|c| c.k() != first.k()) {
            return Err(Error::DomainMismatch(format!("candidates on k = {} and k = {}", first.k(), bad.k())));
        }
        if labels.len() != candidates.len() {
            return Err(Error::BadParam(format!("{} labels for {} candidates", labels.len(), candidates.len())));
        }
        Ok(Self { candidates, labels })
    }

    pub fn k(&self) -> usize {
        self.candidates[0].k()
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn candidates(&self) -> &[DiscreteDensity] {
        &self.candidates
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.labels.get(i).and_then(|l| l.as_deref())
    }
}

/// The distinct sets `{x : f_i(x) > f_j(x)}` over ordered pairs `i ≠ j`, in
/// order of first appearance.
pub fn yatracos_class(cs: &CandidateSet) -> Vec<AtomSet> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, fi) in cs.candidates.iter().enumerate() {
        for (j, fj) in cs.candidates.iter().enumerate() {
            if i == j {
                continue;
            }
            let mask: Vec<bool> = fi.mass().iter().zip(fj.mass()).map(|(a, b)| a > b).collect();
            let set = AtomSet::from_mask(&mask);
            if seen.insert(set.clone()) {
                out.push(set);
            }
        }
    }
    out
}

/// `max_{A} |μ_θ(A) − μ_n(A)|` over `sets`, for every candidate `θ`.
pub fn yatracos_deviations(cs: &CandidateSet, c: &SampleCounts, sets: &[AtomSet]) -> Result<Vec<f64>> {
    if c.k() != cs.k() {
        return Err(Error::DomainMismatch(format!("counts on k = {}, candidates on k = {}", c.k(), cs.k())));
    }
    if c.n() == 0 {
        return Err(Error::BadParam("selection needs n ≥ 1".into()));
    }
    let n = c.n() as f64;
    let empirical: Vec<f64> = sets.iter().map(|a| a.count(c) as f64 / n).collect();
    Ok(cs
        .candidates
        .iter()
        .map(|f| {
            sets.iter()
                .zip(&empirical)
                .map(|(a, mu_n)| (a.mass(f) - mu_n).abs())
                .fold(0.0, f64::max)
        })
        .collect())
}

/// Index of the candidate whose largest Yatracos deviation is smallest;
/// among candidates within [`TIE_TOLERANCE`] of the minimum, the first.
pub fn minimum_distance_estimate(cs: &CandidateSet, c: &SampleCounts) -> Result<usize> {
    let sets = yatracos_class(cs);
    let dev = yatracos_deviations(cs, c, &sets)?;
    let best = dev.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(dev.iter().position(|&d| d <= best + TIE_TOLERANCE).unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::make_density;

    #[test]
    fn empty_set_rejected() {
        assert_eq!(CandidateSet::new(vec![]), Err(Error::EmptyCandidates));
        let a = make_density(&[1.0]).unwrap();
        let b = make_density(&[0.5, 0.5]).unwrap();
        assert!(matches!(CandidateSet::new(vec![a, b]), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn class_examples() {
        let f = make_density(&[0.3, 0.7]).unwrap();
        let same = CandidateSet::new(vec![f.clone(), f]).unwrap();
        assert_eq!(yatracos_class(&same), vec![AtomSet::empty()]);
        let p = make_density(&[1.0, 0.0]).unwrap();
        let q = make_density(&[0.0, 1.0]).unwrap();
        let cs = CandidateSet::new(vec![p, q]).unwrap();
        assert_eq!(yatracos_class(&cs), vec![AtomSet::new(vec![1]), AtomSet::new(vec![2])]);
    }

    #[test]
    fn selection_examples() {
        let p = make_density(&[1.0, 0.0]).unwrap();
        let q = make_density(&[0.0, 1.0]).unwrap();
        let c = SampleCounts::from_counts(vec![20, 0]).unwrap();
        let single = CandidateSet::new(vec![q.clone()]).unwrap();
        assert_eq!(minimum_distance_estimate(&single, &c).unwrap(), 0);
        let cs = CandidateSet::new(vec![q.clone(), p.clone()]).unwrap();
        assert_eq!(minimum_distance_estimate(&cs, &c).unwrap(), 1);
        let tied = CandidateSet::new(vec![q.clone(), q]).unwrap();
        assert_eq!(minimum_distance_estimate(&tied, &c).unwrap(), 0);
    }

    #[test]
    fn class_size_bound() {
        let cands: Vec<DiscreteDensity> = (1..=4)
            .map(|i| {
                let a = 0.1 * i as f64;
                make_density(&[a, 0.5 - a / 2.0, 0.5 - a / 2.0]).unwrap()
            })
            .collect();
        let cs = CandidateSet::new(cands).unwrap();
        assert!(yatracos_class(&cs).len() <= 4 * 3);
    }
}
