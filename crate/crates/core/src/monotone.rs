//! Monotonization of piecewise-constant estimates.
//!
//! Whenever a piece is lower than its right neighbour the two are replaced by
//! their length-weighted average. The result does not depend on the order of
//! merges; pool-adjacent-violators computes it in one left-to-right pass.

use crate::error::{Error, Result};
use crate::estimate::{Piece, PieceKind, PiecewiseEstimate};

struct Block {
    start: usize,
    len: usize,
    weighted: f64,
    value: f64,
}

/// The non-increasing piecewise-constant estimate obtained by merging
/// adjacent violators until none remain.
pub fn monotonize(e: &PiecewiseEstimate) -> Result<PiecewiseEstimate> {
    let mut blocks: Vec<Block> = Vec::with_capacity(e.pieces().len());
    for p in e.pieces() {
        let PieceKind::Constant { value } = p.kind else {
            return Err(Error::NotPiecewiseConstant);
        };
        let mut cur = Block { start: p.start, len: p.len, weighted: value * p.len as f64, value };
        while let Some(prev) = blocks.last() {
            if prev.value >= cur.value {
                break;
            }
            let prev = blocks.pop().unwrap();
            let len = prev.len + cur.len;
            let weighted = prev.weighted + cur.weighted;
            cur = Block { start: prev.start, len, weighted, value: weighted / len as f64 };
        }
        blocks.push(cur);
    }
    let pieces = blocks
        .into_iter()
        .map(|b| Piece::constant(b.start, b.len, b.value))
        .collect();
    PiecewiseEstimate::new(e.domain_k(), pieces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pc(pieces: &[(usize, f64)]) -> PiecewiseEstimate {
        let mut start = 1;
        let pieces: Vec<Piece> = pieces
            .iter()
            .map(|&(len, v)| {
                let p = Piece::constant(start, len, v);
                start += len;
                p
            })
            .collect();
        PiecewiseEstimate::new(start - 1, pieces).unwrap()
    }

    #[test]
    fn non_increasing_input_is_unchanged() {
        let e = pc(&[(2, 0.2), (1, 0.2), (3, 0.1), (2, 0.0)]);
        assert_eq!(monotonize(&e).unwrap(), e);
    }

    #[test]
    fn two_piece_average() {
        let out = monotonize(&pc(&[(2, 0.1), (2, 0.2)])).unwrap();
        assert_eq!(out.pieces().len(), 1);
        assert_eq!(out.pieces()[0].len, 4);
        assert!((out.values()[0] - 0.15).abs() < 1e-15);
    }

    #[test]
    fn cascading_merge() {
        let out = monotonize(&pc(&[(1, 0.5), (1, 0.1), (2, 0.4)])).unwrap();
        assert_eq!(out.pieces().len(), 2);
        assert_eq!(out.values()[0], 0.5);
        assert!((out.values()[1] - 0.3).abs() < 1e-15);
        let out = monotonize(&pc(&[(1, 0.2), (1, 0.1), (2, 0.4)])).unwrap();
        assert_eq!(out.pieces().len(), 1);
        assert!((out.values()[0] - 0.275).abs() < 1e-15);
    }

    #[test]
    fn idempotent() {
        let e = pc(&[(3, 0.05), (1, 0.3), (2, 0.1), (4, 0.12)]);
        let once = monotonize(&e).unwrap();
        assert_eq!(monotonize(&once).unwrap(), once);
        assert!((once.mass() - e.mass()).abs() < 1e-12);
    }

    #[test]
    fn rejects_linear_pieces() {
        let e = PiecewiseEstimate::new(
            2,
            vec![Piece { start: 1, len: 2, kind: PieceKind::Linear { slope: 0.0, intercept: 0.5 } }],
        )
        .unwrap();
        assert_eq!(monotonize(&e), Err(Error::NotPiecewiseConstant));
    }
}
