//! Recursive binary and ternary partitions of `{1, …, m}` where `m` is a power
//! of the arity.
//!
//! A node covering `I_u` is either a leaf or has `arity` children splitting
//! `I_u` into equal consecutive parts. Trees are grown top-down from a split
//! predicate; the greedy rules use exact integer arithmetic on sample counts,
//! the idealized rules compare true interval masses.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::density::DiscreteDensity;
use crate::error::{Error, Result};
use crate::sampling::SampleCounts;

/// Atoms `start..start + len` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub len: usize,
}

impl Interval {
    pub fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    /// One past the last atom.
    pub fn end(&self) -> usize {
        self.start + self.len
    }

    /// The `arity` equal consecutive parts.
    pub fn parts(&self, arity: usize) -> impl Iterator<Item = Interval> + '_ {
        let step = self.len / arity;
        (0..arity).map(move |j| Interval::new(self.start + j * step, step))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub interval: Interval,
    /// Index of the first child; the children occupy `arity` consecutive slots.
    pub first_child: Option<usize>,
}

/// Rooted ordered tree over `{1, …, padded_k}`, nodes stored breadth-first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "TreeJson", try_from = "TreeJson")]
pub struct PartitionTree {
    arity: usize,
    padded_k: usize,
    nodes: Vec<Node>,
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    arity: usize,
    padded_k: usize,
    leaves: Vec<Interval>,
}

impl From<PartitionTree> for TreeJson {
    fn from(t: PartitionTree) -> Self {
        TreeJson { arity: t.arity, padded_k: t.padded_k, leaves: t.leaves() }
    }
}

impl TryFrom<TreeJson> for PartitionTree {
    type Error = Error;

    fn try_from(j: TreeJson) -> Result<Self> {
        PartitionTree::from_leaves(j.arity, j.padded_k, &j.leaves)
    }
}

impl PartitionTree {
    /// Grows a tree breadth-first, splitting a non-singleton node whenever
    /// `split(interval)` holds.
    pub fn grow(arity: usize, padded_k: usize, mut split: impl FnMut(Interval) -> bool) -> Self {
        assert!(arity == 2 || arity == 3, "arity must be 2 or 3");
        assert!(is_power_of(padded_k, arity), "padded_k must be a power of the arity");
        let mut nodes = vec![Node { interval: Interval::new(1, padded_k), first_child: None }];
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            let interval = nodes[u].interval;
            if interval.len == 1 || !split(interval) {
                continue;
            }
            nodes[u].first_child = Some(nodes.len());
            for part in interval.parts(arity) {
                queue.push_back(nodes.len());
                nodes.push(Node { interval: part, first_child: None });
            }
        }
        Self { arity, padded_k, nodes }
    }

    /// Rebuilds the unique tree whose leaves, left to right, are `leaves`.
    pub fn from_leaves(arity: usize, padded_k: usize, leaves: &[Interval]) -> Result<Self> {
        if arity != 2 && arity != 3 {
            return Err(Error::BadParam(format!("arity {arity} is not 2 or 3")));
        }
        if !is_power_of(padded_k, arity) {
            return Err(Error::BadParam(format!("padded_k = {padded_k} is not a power of {arity}")));
        }
        let wanted: std::collections::HashSet<Interval> = leaves.iter().copied().collect();
        let tree = Self::grow(arity, padded_k, |i| !wanted.contains(&i));
        if tree.leaves() != leaves {
            return Err(Error::BadParam("leaves do not form a partition tree".into()));
        }
        Ok(tree)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn padded_k(&self) -> usize {
        self.padded_k
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    /// Children of node `u`, empty for a leaf.
    pub fn children(&self, u: usize) -> std::ops::Range<usize> {
        match self.nodes[u].first_child {
            Some(c) => c..c + self.arity,
            None => 0..0,
        }
    }

    /// Leaf intervals in left-to-right order.
    pub fn leaves(&self) -> Vec<Interval> {
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(u) = stack.pop() {
            match self.nodes[u].first_child {
                None => out.push(self.nodes[u].interval),
                Some(_) => stack.extend(self.children(u).rev()),
            }
        }
        out
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.first_child.is_none()).count()
    }

    /// `m = |{u ∈ leaves : |I_u| > 1}|`.
    pub fn non_singleton_leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.first_child.is_none() && n.interval.len > 1)
            .count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

fn is_power_of(mut m: usize, arity: usize) -> bool {
    if m == 0 {
        return false;
    }
    while m % arity == 0 {
        m /= arity;
    }
    m == 1
}

/// Smallest power of `arity` that is at least `k`.
pub fn pad_to_power(k: usize, arity: usize) -> usize {
    assert!(arity >= 2);
    let mut m = 1usize;
    while m < k {
        m = m.checked_mul(arity).expect("padded support overflows usize");
    }
    m
}

/// `|N_v − N_w| > √(N_v + N_w)`, decided as `(N_v − N_w)² > N_v + N_w`.
pub fn greedy_split_decision(n_left: u64, n_right: u64) -> bool {
    let d = n_left.abs_diff(n_right) as u128;
    d * d > n_left as u128 + n_right as u128
}

/// `N_v − 2N_w + N_r > √(N_v + N_w + N_r)`, decided as a positive difference
/// whose square exceeds the sum.
pub fn ternary_split_decision(n_v: u64, n_w: u64, n_r: u64) -> bool {
    let d = n_v as i128 + n_r as i128 - 2 * n_w as i128;
    d > 0 && d * d > n_v as i128 + n_w as i128 + n_r as i128
}

/// Interval sums of counts over the padded domain (atoms past `k` hold zero).
pub(crate) struct CountPrefix {
    prefix: Vec<u64>,
}

impl CountPrefix {
    pub(crate) fn new(c: &SampleCounts) -> Self {
        let mut prefix = Vec::with_capacity(c.k() + 1);
        prefix.push(0);
        let mut acc = 0u64;
        for &x in c.counts() {
            acc += x;
            prefix.push(acc);
        }
        Self { prefix }
    }

    pub(crate) fn count(&self, i: Interval) -> u64 {
        let k = self.prefix.len() - 1;
        let hi = (i.end() - 1).min(k);
        let lo = (i.start - 1).min(k);
        self.prefix[hi] - self.prefix[lo]
    }
}

pub fn build_greedy_binary(c: &SampleCounts) -> PartitionTree {
    let prefix = CountPrefix::new(c);
    PartitionTree::grow(2, pad_to_power(c.k(), 2), |i| {
        let mut halves = i.parts(2);
        let (v, w) = (halves.next().unwrap(), halves.next().unwrap());
        greedy_split_decision(prefix.count(v), prefix.count(w))
    })
}

pub fn build_greedy_ternary(c: &SampleCounts) -> PartitionTree {
    let prefix = CountPrefix::new(c);
    PartitionTree::grow(3, pad_to_power(c.k(), 3), |i| {
        let n: Vec<u64> = i.parts(3).map(|p| prefix.count(p)).collect();
        ternary_split_decision(n[0], n[1], n[2])
    })
}

/// `T*(f)`: split iff `f_v − f_w > √((f_v + f_w)/n)`.
pub fn build_idealized_binary(f: &DiscreteDensity, n: u64) -> Result<PartitionTree> {
    if !f.is_non_increasing() {
        return Err(Error::NotMonotone);
    }
    check_n(n)?;
    let n = n as f64;
    Ok(PartitionTree::grow(2, pad_to_power(f.k(), 2), |i| {
        let mut halves = i.parts(2);
        let (v, w) = (halves.next().unwrap(), halves.next().unwrap());
        let (fv, fw) = (f.interval_mass(v.start, v.len), f.interval_mass(w.start, w.len));
        fv - fw > ((fv + fw) / n).sqrt()
    }))
}

/// `T†(f)`: split iff `f_v − 2f_w + f_r > √((f_v + f_w + f_r)/n)`.
pub fn build_idealized_ternary(f: &DiscreteDensity, n: u64) -> Result<PartitionTree> {
    if !f.is_convex_non_increasing() {
        return Err(Error::NotConvex);
    }
    check_n(n)?;
    let n = n as f64;
    Ok(PartitionTree::grow(3, pad_to_power(f.k(), 3), |i| {
        let m: Vec<f64> = i.parts(3).map(|p| f.interval_mass(p.start, p.len)).collect();
        m[0] - 2.0 * m[1] + m[2] > ((m[0] + m[1] + m[2]) / n).sqrt()
    }))
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::BadParam("n must be positive".into()))
    } else {
        Ok(())
    }
}
