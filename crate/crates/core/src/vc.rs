//! Exhaustive VC-dimension search for unions of integer intervals.

use crate::error::{Error, Result};

pub const MAX_GROUND_SET: usize = 24;
pub const MAX_INTERVALS: usize = 4;

/// VC dimension on `{1, …, m}` of the sets that are unions of at most `ell`
/// integer intervals, found by trying every candidate set of each size.
pub fn vc_unions_intervals_brute(ell: usize, m: usize) -> Result<usize> {
    if ell == 0 || m == 0 {
        return Err(Error::BadParam("ell and m must be positive".into()));
    }
    if m > MAX_GROUND_SET || ell > MAX_INTERVALS {
        return Err(Error::TooLarge(format!("m = {m}, ell = {ell}")));
    }
    let mut dim = 0;
    for d in 1..=m {
        if !subsets_of_size(m, d).any(|x| shattered(x, ell)) {
            break;
        }
        dim = d;
    }
    Ok(dim)
}

/// Bitmasks over `m` bits with exactly `d` bits set, in increasing order.
fn subsets_of_size(m: usize, d: usize) -> impl Iterator<Item = u32> {
    let limit = 1u32 << m;
    let first = (1u32 << d) - 1;
    std::iter::successors(Some(first), move |&x| {
        // Gosper's hack: next larger integer with the same popcount.
        let c = x & x.wrapping_neg();
        let r = x + c;
        let next = (((r ^ x) >> 2) / c) | r;
        (next < limit).then_some(next)
    })
    .take_while(move |&x| x < limit)
}

fn shattered(x: u32, ell: usize) -> bool {
    let points: Vec<u32> = (0..32).filter(|i| x >> i & 1 == 1).collect();
    (0u32..1 << points.len()).all(|y| picked_by_intervals(&points, y, ell))
}

/// Whether some union of at most `ell` intervals contains exactly the points
/// selected by `y` among `points`: every maximal run of consecutive selected
/// points needs its own interval, and one interval per run suffices.
fn picked_by_intervals(points: &[u32], y: u32, ell: usize) -> bool {
    let mut runs = 0;
    let mut inside = false;
    for i in 0..points.len() {
        let picked = y >> i & 1 == 1;
        if picked && !inside {
            runs += 1;
        }
        inside = picked;
    }
    runs <= ell
}
