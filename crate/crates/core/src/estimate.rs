//! Piecewise-constant and piecewise-linear estimates built on partition trees.
//!
//! Trees live on the padded domain `{1, …, padded_k}`; estimates are computed
//! there and then truncated to `{1, …, k}`. Padded atoms carry no samples and
//! no true mass, so a leaf straddling `k` can leave the truncated estimate
//! with total mass below one. [`PiecewiseEstimate::renormalized`] rescales it.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::density::DiscreteDensity;
use crate::error::{Error, Result};
use crate::sampling::SampleCounts;
use crate::tree::{pad_to_power, CountPrefix, Interval, PartitionTree};

/// Values below `-NEGATIVITY_TOLERANCE` are reported by [`PiecewiseEstimate::is_nonnegative`].
pub const NEGATIVITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PieceKind {
    Constant { value: f64 },
    /// `slope · x + intercept` at integer `x`.
    Linear { slope: f64, intercept: f64 },
}

impl PieceKind {
    pub fn eval(&self, x: usize) -> f64 {
        match *self {
            PieceKind::Constant { value } => value,
            PieceKind::Linear { slope, intercept } => slope * x as f64 + intercept,
        }
    }

    fn scaled(self, s: f64) -> Self {
        match self {
            PieceKind::Constant { value } => PieceKind::Constant { value: value * s },
            PieceKind::Linear { slope, intercept } => PieceKind::Linear { slope: slope * s, intercept: intercept * s },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub start: usize,
    pub len: usize,
    #[serde(flatten)]
    pub kind: PieceKind,
}

impl Piece {
    pub fn constant(start: usize, len: usize, value: f64) -> Self {
        Self { start, len, kind: PieceKind::Constant { value } }
    }

    pub fn atoms(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// An estimate given as consecutive pieces covering `{1, …, domain_k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEstimate")]
pub struct PiecewiseEstimate {
    domain_k: usize,
    pieces: Vec<Piece>,
}

#[derive(Deserialize)]
struct RawEstimate {
    domain_k: usize,
    pieces: Vec<Piece>,
}

impl TryFrom<RawEstimate> for PiecewiseEstimate {
    type Error = Error;

    fn try_from(raw: RawEstimate) -> Result<Self> {
        PiecewiseEstimate::new(raw.domain_k, raw.pieces)
    }
}

impl PiecewiseEstimate {
    /// Checks that `pieces` cover `{1, …, domain_k}` in order without gaps.
    pub fn new(domain_k: usize, pieces: Vec<Piece>) -> Result<Self> {
        let mut next = 1;
        for p in &pieces {
            if p.start != next || p.len == 0 {
                return Err(Error::DomainMismatch(format!(
                    "piece at {} (len {}) does not continue from atom {next}",
                    p.start, p.len
                )));
            }
            next += p.len;
        }
        if next != domain_k + 1 || domain_k == 0 {
            return Err(Error::DomainMismatch(format!(
                "pieces cover 1..{next} but domain_k = {domain_k}"
            )));
        }
        Ok(Self { domain_k, pieces })
    }

    pub fn domain_k(&self) -> usize {
        self.domain_k
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.pieces.iter().all(|p| matches!(p.kind, PieceKind::Constant { .. }))
    }

    /// Per-atom values on `{1, …, domain_k}`.
    pub fn values(&self) -> Vec<f64> {
        self.pieces
            .iter()
            .flat_map(|p| p.atoms().map(move |x| p.kind.eval(x)))
            .collect()
    }

    pub fn mass(&self) -> f64 {
        self.values().iter().sum()
    }

    pub fn min_value(&self) -> f64 {
        self.values().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.min_value() >= -NEGATIVITY_TOLERANCE
    }

    /// Scales every piece so the total mass is one.
    pub fn renormalized(&self) -> Result<Self> {
        let mass = self.mass();
        if mass.is_nan() || mass <= 0.0 {
            return Err(Error::BadParam(format!("cannot renormalize an estimate with mass {mass}")));
        }
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece { kind: p.kind.scaled(1.0 / mass), ..*p })
            .collect();
        Ok(Self { domain_k: self.domain_k, pieces })
    }

    /// The per-atom values as a validated density.
    pub fn to_density(&self) -> Result<DiscreteDensity> {
        DiscreteDensity::new(self.values())
    }

    /// Writes `x,value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "value"])?;
        for (i, v) in self.values().into_iter().enumerate() {
            w.serialize((i + 1, v))?;
        }
        w.flush().map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Part of `leaf` inside `{1, …, k}`, if any.
fn truncate(leaf: Interval, k: usize) -> Option<(usize, usize)> {
    (leaf.start <= k).then(|| (leaf.start, leaf.len.min(k + 1 - leaf.start)))
}

fn check_domain(t: &PartitionTree, k: usize) -> Result<()> {
    let expected = pad_to_power(k, t.arity());
    if t.padded_k() != expected {
        return Err(Error::DomainMismatch(format!(
            "tree covers {} atoms, k = {k} pads to {expected}",
            t.padded_k()
        )));
    }
    Ok(())
}

fn check_ternary(t: &PartitionTree) -> Result<()> {
    if t.arity() != 3 {
        return Err(Error::DomainMismatch("piecewise-linear estimates need a ternary tree".into()));
    }
    Ok(())
}

fn nonempty(c: &SampleCounts) -> Result<f64> {
    if c.n() == 0 {
        return Err(Error::BadParam("estimate needs n ≥ 1".into()));
    }
    Ok(c.n() as f64)
}

/// `f̂_n(x) = N_u / (n |I_u|)` on each leaf `u`.
pub fn histogram_estimate(t: &PartitionTree, c: &SampleCounts) -> Result<PiecewiseEstimate> {
    check_domain(t, c.k())?;
    let n = nonempty(c)?;
    let prefix = CountPrefix::new(c);
    let pieces = t
        .leaves()
        .into_iter()
        .filter_map(|leaf| {
            let value = prefix.count(leaf) as f64 / (n * leaf.len as f64);
            truncate(leaf, c.k()).map(|(start, len)| Piece::constant(start, len, value))
        })
        .collect();
    PiecewiseEstimate::new(c.k(), pieces)
}

/// `f*_n(x) = f_u / |I_u|` on each leaf `u`.
pub fn idealized_pc_estimate(t: &PartitionTree, f: &DiscreteDensity) -> Result<PiecewiseEstimate> {
    check_domain(t, f.k())?;
    let pieces = t
        .leaves()
        .into_iter()
        .filter_map(|leaf| {
            let value = f.interval_mass(leaf.start, leaf.len) / leaf.len as f64;
            truncate(leaf, f.k()).map(|(start, len)| Piece::constant(start, len, value))
        })
        .collect();
    PiecewiseEstimate::new(f.k(), pieces)
}

/// The line through `(m_v, avg_v)` and `(m_r, avg_r)` for the outer thirds of
/// `leaf`, with `m_z = a_z + (|I_z| − 1)/2`.
fn leaf_line(leaf: Interval, avg_v: f64, avg_r: f64) -> PieceKind {
    let h = leaf.len / 3;
    let m_v = leaf.start as f64 + (h as f64 - 1.0) / 2.0;
    let slope = (avg_r - avg_v) / (2 * h) as f64;
    PieceKind::Linear { slope, intercept: avg_v - slope * m_v }
}

/// `f†_n`: on each non-singleton leaf the line through the averages of its
/// first and last thirds; singleton leaves copy `f`. No clamping is applied.
pub fn idealized_pl_estimate(t: &PartitionTree, f: &DiscreteDensity) -> Result<PiecewiseEstimate> {
    check_ternary(t)?;
    check_domain(t, f.k())?;
    let mut pieces = Vec::new();
    for leaf in t.leaves() {
        let Some((start, len)) = truncate(leaf, f.k()) else { continue };
        let kind = if leaf.len == 1 {
            PieceKind::Constant { value: f.at(leaf.start) }
        } else {
            let h = leaf.len / 3;
            let avg = |i: Interval| f.interval_mass(i.start, i.len) / h as f64;
            let mut parts = leaf.parts(3);
            let (v, r) = (parts.next().unwrap(), parts.nth(1).unwrap());
            leaf_line(leaf, avg(v), avg(r))
        };
        pieces.push(Piece { start, len, kind });
    }
    PiecewiseEstimate::new(f.k(), pieces)
}

/// Empirical analog of [`idealized_pl_estimate`] with averages
/// `N_z / (n |I_z|)`. Atoms where a line dips below zero get value zero.
pub fn greedy_pl_estimate(t: &PartitionTree, c: &SampleCounts) -> Result<PiecewiseEstimate> {
    check_ternary(t)?;
    check_domain(t, c.k())?;
    let n = nonempty(c)?;
    let prefix = CountPrefix::new(c);
    let mut pieces = Vec::new();
    for leaf in t.leaves() {
        let Some((start, len)) = truncate(leaf, c.k()) else { continue };
        if leaf.len == 1 {
            pieces.push(Piece::constant(start, len, c.at(start) as f64 / n));
            continue;
        }
        let h = leaf.len / 3;
        let avg = |i: Interval| prefix.count(i) as f64 / (n * h as f64);
        let mut parts = leaf.parts(3);
        let (v, r) = (parts.next().unwrap(), parts.nth(1).unwrap());
        push_clamped(&mut pieces, start, len, leaf_line(leaf, avg(v), avg(r)));
    }
    PiecewiseEstimate::new(c.k(), pieces)
}

/// Pushes `kind` over `start..start + len`, replacing the (contiguous, since
/// the piece is affine) run of negative atoms by a zero constant.
fn push_clamped(pieces: &mut Vec<Piece>, start: usize, len: usize, kind: PieceKind) {
    let end = start + len;
    let first_ok = (start..end).find(|&x| kind.eval(x) >= 0.0);
    let Some(lo) = first_ok else {
        pieces.push(Piece::constant(start, len, 0.0));
        return;
    };
    let hi = (lo..end).find(|&x| kind.eval(x) < 0.0).unwrap_or(end);
    if lo > start {
        pieces.push(Piece::constant(start, lo - start, 0.0));
    }
    pieces.push(Piece { start: lo, len: hi - lo, kind });
    if hi < end {
        pieces.push(Piece::constant(hi, end - hi, 0.0));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{family, Family};
    use crate::tree::{build_greedy_binary, build_greedy_ternary, build_idealized_binary, build_idealized_ternary};

    #[test]
    fn single_leaf_histogram_is_uniform() {
        let c = SampleCounts::from_counts(vec![5, 1, 1, 1]).unwrap();
        let t = PartitionTree::grow(2, 4, |_| false);
        let e = histogram_estimate(&t, &c).unwrap();
        assert_eq!(e.values(), vec![0.25; 4]);
    }

    #[test]
    fn split_point_mass_histogram() {
        let c = SampleCounts::from_counts(vec![10, 0]).unwrap();
        let e = histogram_estimate(&build_greedy_binary(&c), &c).unwrap();
        assert_eq!(e.values(), vec![1.0, 0.0]);
    }

    #[test]
    fn padded_histogram_is_sub_normalized() {
        let c = SampleCounts::from_counts(vec![4, 4, 4, 4, 4]).unwrap();
        let t = PartitionTree::grow(2, 8, |_| false);
        let e = histogram_estimate(&t, &c).unwrap();
        assert_eq!(e.domain_k(), 5);
        assert!((e.mass() - 5.0 / 8.0).abs() < 1e-15);
        assert!((e.renormalized().unwrap().mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn domain_mismatch() {
        let c = SampleCounts::from_counts(vec![1; 5]).unwrap();
        let t = PartitionTree::grow(2, 4, |_| false);
        assert!(matches!(histogram_estimate(&t, &c), Err(Error::DomainMismatch(_))));
        let t3 = build_greedy_ternary(&c);
        assert!(histogram_estimate(&t3, &c).is_ok());
        let t2 = build_greedy_binary(&c);
        assert!(matches!(greedy_pl_estimate(&t2, &c), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn idealized_pc_exact_cases() {
        let f = DiscreteDensity::uniform(16).unwrap();
        let t = build_idealized_binary(&f, 100).unwrap();
        assert_eq!(idealized_pc_estimate(&t, &f).unwrap().values(), f.mass());
        let g = family(Family::HarmonicZipf, 16, None).unwrap();
        let full = PartitionTree::grow(2, 16, |_| true);
        assert_eq!(idealized_pc_estimate(&full, &g).unwrap().values(), g.mass());
    }

    #[test]
    fn idealized_pl_reproduces_a_line() {
        let f = family(Family::LinearDecreasing, 27, None).unwrap();
        let t = PartitionTree::grow(3, 27, |_| false);
        let e = idealized_pl_estimate(&t, &f).unwrap();
        for (a, b) in e.values().iter().zip(f.mass()) {
            assert!((a - b).abs() < 1e-15);
        }
        let full = PartitionTree::grow(3, 27, |_| true);
        assert_eq!(idealized_pl_estimate(&full, &f).unwrap().values(), f.mass());
    }

    #[test]
    fn greedy_pl_cases() {
        let c = SampleCounts::from_counts(vec![3; 9]).unwrap();
        let t = build_greedy_ternary(&c);
        let e = greedy_pl_estimate(&t, &c).unwrap();
        assert_eq!(e.pieces().len(), 1);
        assert!(matches!(e.pieces()[0].kind, PieceKind::Linear { slope, .. } if slope == 0.0));
        let single = SampleCounts::from_counts(vec![7, 2, 1]).unwrap();
        let full = PartitionTree::grow(3, 3, |_| true);
        let e = greedy_pl_estimate(&full, &single).unwrap();
        assert_eq!(e.values(), vec![0.7, 0.2, 0.1]);
    }

    #[test]
    fn greedy_pl_clamps_at_zero() {
        let c = SampleCounts::from_counts(vec![9, 0, 0, 0, 0, 0, 0, 0, 0]).unwrap();
        let t = PartitionTree::grow(3, 9, |_| false);
        let e = greedy_pl_estimate(&t, &c).unwrap();
        assert!(e.values().iter().all(|&v| v >= 0.0));
        assert_eq!(e.values()[8], 0.0);
        assert!(e.values()[0] > 0.0);
    }

    #[test]
    fn json_shape() {
        let e = PiecewiseEstimate::new(
            3,
            vec![
                Piece::constant(1, 1, 0.5),
                Piece { start: 2, len: 2, kind: PieceKind::Linear { slope: -0.1, intercept: 0.5 } },
            ],
        )
        .unwrap();
        let json = e.to_json().unwrap();
        assert_eq!(
            json,
            r#"{"domain_k":3,"pieces":[{"start":1,"len":1,"kind":"constant","value":0.5},{"start":2,"len":2,"kind":"linear","slope":-0.1,"intercept":0.5}]}"#
        );
        let back: PiecewiseEstimate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<PiecewiseEstimate>(r#"{"domain_k":2,"pieces":[]}"#).is_err());
    }

    #[test]
    fn idealized_ternary_pipeline_runs() {
        let f = family(Family::HarmonicZipf, 100, None).unwrap();
        let t = build_idealized_ternary(&f, 10_000).unwrap();
        let e = idealized_pl_estimate(&t, &f).unwrap();
        assert_eq!(e.domain_k(), 100);
    }

    #[test]
    fn csv_rows() {
        let e = PiecewiseEstimate::new(2, vec![Piece::constant(1, 2, 0.5)]).unwrap();
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,value\n1,0.5\n2,0.5\n");
    }
}
