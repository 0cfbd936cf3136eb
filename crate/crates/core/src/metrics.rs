//! Distances between densities and estimates.

use std::borrow::Cow;

use crate::density::DiscreteDensity;
use crate::error::{Error, Result};
use crate::estimate::PiecewiseEstimate;

/// Anything that can be evaluated atom by atom on `{1, …, k}`.
pub trait PerAtom {
    fn per_atom(&self) -> Cow<'_, [f64]>;
}

impl PerAtom for DiscreteDensity {
    fn per_atom(&self) -> Cow<'_, [f64]> {
        Cow::Borrowed(self.mass())
    }
}

impl PerAtom for PiecewiseEstimate {
    fn per_atom(&self) -> Cow<'_, [f64]> {
        Cow::Owned(self.values())
    }
}

impl PerAtom for [f64] {
    fn per_atom(&self) -> Cow<'_, [f64]> {
        Cow::Borrowed(self)
    }
}

impl PerAtom for Vec<f64> {
    fn per_atom(&self) -> Cow<'_, [f64]> {
        Cow::Borrowed(self)
    }
}

type Pair<'a> = (Cow<'a, [f64]>, Cow<'a, [f64]>);

fn paired<'a, F: PerAtom + ?Sized, G: PerAtom + ?Sized>(
    f: &'a F,
    g: &'a G,
) -> Result<Pair<'a>> {
    let (a, b) = (f.per_atom(), g.per_atom());
    if a.len() != b.len() {
        return Err(Error::DomainMismatch(format!("k = {} vs k = {}", a.len(), b.len())));
    }
    Ok((a, b))
}

/// `TV(f, g) = ½ Σ_x |f(x) − g(x)|`, values compared as given.
pub fn tv<F: PerAtom + ?Sized, G: PerAtom + ?Sized>(f: &F, g: &G) -> Result<f64> {
    let (a, b) = paired(f, g)?;
    Ok(0.5 * a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// Largest support size accepted by [`tv_sup_bruteforce`].
pub const MAX_BRUTEFORCE_K: usize = 20;

/// `sup_A |μ(A) − ν(A)|` over all `2^k` subsets `A`.
pub fn tv_sup_bruteforce(f: &DiscreteDensity, g: &DiscreteDensity) -> Result<f64> {
    let (a, b) = paired(f, g)?;
    let k = a.len();
    if k > MAX_BRUTEFORCE_K {
        return Err(Error::TooLarge(format!("2^{k} subsets")));
    }
    let mut best = 0.0f64;
    for set in 0u32..1 << k {
        let (mut mu, mut nu) = (0.0, 0.0);
        for x in 0..k {
            if set >> x & 1 == 1 {
                mu += a[x];
                nu += b[x];
            }
        }
        best = best.max((mu - nu).abs());
    }
    Ok(best)
}

/// `Σ_x √(f(x) g(x))`.
pub fn hellinger_affinity<F: PerAtom + ?Sized, G: PerAtom + ?Sized>(f: &F, g: &G) -> Result<f64> {
    let (a, b) = paired(f, g)?;
    Ok(a.iter().zip(b.iter()).map(|(x, y)| (x * y).sqrt()).sum())
}

/// `(rα/4) · max(0, 1 − √(2n(1 − β)))`.
pub fn assouad_lower_bound(r: usize, alpha: f64, beta: f64, n: u64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::BadParam(format!("α = {alpha} must be positive")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::BadParam(format!("β = {beta} must lie in (0, 1]")));
    }
    let deficiency = (2.0 * n as f64 * (1.0 - beta)).sqrt();
    Ok(r as f64 * alpha / 4.0 * (1.0 - deficiency).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::make_density;

    #[test]
    fn tv_examples() {
        let f = make_density(&[0.5, 0.3, 0.2]).unwrap();
        let g = make_density(&[0.2, 0.3, 0.5]).unwrap();
        assert!((tv(&f, &g).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(tv(&f, &f).unwrap(), 0.0);
        let p = make_density(&[1.0, 0.0]).unwrap();
        let q = make_density(&[0.0, 1.0]).unwrap();
        assert_eq!(tv(&p, &q).unwrap(), 1.0);
        assert_eq!(tv_sup_bruteforce(&p, &q).unwrap(), 1.0);
        assert_eq!(tv_sup_bruteforce(&f, &f).unwrap(), 0.0);
        assert!(matches!(tv(&f, &p), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn bruteforce_size_limit() {
        let u = DiscreteDensity::uniform(21).unwrap();
        assert!(matches!(tv_sup_bruteforce(&u, &u), Err(Error::TooLarge(_))));
    }

    #[test]
    fn affinity_examples() {
        let f = make_density(&[0.5, 0.5]).unwrap();
        let g = make_density(&[0.25, 0.75]).unwrap();
        let expect = 0.125f64.sqrt() + 0.375f64.sqrt();
        assert!((hellinger_affinity(&f, &g).unwrap() - expect).abs() < 1e-15);
        assert!((expect - 0.96593).abs() < 1e-5);
        assert!((hellinger_affinity(&f, &f).unwrap() - 1.0).abs() < 1e-15);
        let p = make_density(&[1.0, 0.0]).unwrap();
        let q = make_density(&[0.0, 1.0]).unwrap();
        assert_eq!(hellinger_affinity(&p, &q).unwrap(), 0.0);
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(assouad_lower_bound(4, 0.1, 1.0, 50).unwrap(), 0.1);
        let n = 1000u64;
        let beta = 1.0 - 1.0 / (8.0 * n as f64);
        assert!((assouad_lower_bound(4, 0.1, beta, n).unwrap() - 0.05).abs() < 1e-12);
        assert!(assouad_lower_bound(4, 0.1, 1.0 - 1.0 / (2.0 * n as f64), n).unwrap() < 1e-9);
        assert_eq!(assouad_lower_bound(4, 0.1, 1.0 - 1.0 / n as f64, n).unwrap(), 0.0);
        assert_eq!(assouad_lower_bound(4, 0.1, 0.2, n).unwrap(), 0.0);
        assert!(assouad_lower_bound(4, 0.0, 0.5, n).is_err());
        assert!(assouad_lower_bound(4, 0.1, 0.0, n).is_err());
        assert!(assouad_lower_bound(4, 0.1, 1.5, n).is_err());
    }
}
