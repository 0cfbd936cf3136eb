//! Hypercube families of densities used for minimax lower bounds.
//!
//! A hypercube is indexed by `θ ∈ {0,1}^r`. Bin `A_i` carries one of two local
//! shapes chosen by `θ_i`; everything outside the bins is fixed. Four regimes
//! are provided, two for non-increasing densities and two for non-increasing
//! convex ones, each with a small-`k` and a large-`k` variant.
//!
//! Every constructed density satisfies the exact class predicates of
//! [`crate::density`]. The monotone regimes get this from the evaluation order
//! (bin sizes are chosen by the same float expressions used to fill them). The
//! convex regimes are realized on an integer lattice: each atom is an integer
//! multiple of `2^-e`, every linear segment has an integer step, and so second
//! differences are computed without rounding.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::density::DiscreteDensity;
use crate::error::{Error, Result};

/// Largest support size [`Hypercube::density`] will materialize.
pub const MAX_MATERIALIZED_ATOMS: u64 = 1 << 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    MonotoneLargeK,
    MonotoneSmallK,
    ConvexLargeK,
    ConvexSmallK,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Regime::MonotoneLargeK,
        Regime::MonotoneSmallK,
        Regime::ConvexLargeK,
        Regime::ConvexSmallK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Regime::MonotoneLargeK => "monotone-large-k",
            Regime::MonotoneSmallK => "monotone-small-k",
            Regime::ConvexLargeK => "convex-large-k",
            Regime::ConvexSmallK => "convex-small-k",
        }
    }

    pub fn is_convex(self) -> bool {
        matches!(self, Regime::ConvexLargeK | Regime::ConvexSmallK)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::BadParam(format!("unknown regime {s:?}")))
    }
}

/// Full description of one hypercube vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypercubeSpec {
    pub regime: Regime,
    pub n: u64,
    pub k: u64,
    pub r: usize,
    pub epsilon: f64,
    pub theta: Vec<bool>,
}

impl HypercubeSpec {
    /// Uses [`assouad_default_params`] for `(r, ε)`; `theta` defaults to all zeros.
    pub fn with_default_params(regime: Regime, n: u64, k: u64, theta: Option<Vec<bool>>) -> Result<Self> {
        let (r, epsilon) = assouad_default_params(regime, n, k)?;
        let theta = theta.unwrap_or_else(|| vec![false; r]);
        Ok(Self { regime, n, k, r, epsilon, theta })
    }
}

/// Parses a bit string such as `"0110"` into a θ vector.
pub fn parse_theta(bits: &str) -> Result<Vec<bool>> {
    bits.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::BadParam(format!("theta must be a bit string, found {other:?}"))),
        })
        .collect()
}

/// A contiguous run of atoms `start..start + len` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bin {
    pub start: usize,
    pub len: usize,
}

impl Bin {
    pub fn atoms(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// `f_θ` for [`HypercubeSpec`].
pub fn assouad_density(spec: &HypercubeSpec) -> Result<DiscreteDensity> {
    Hypercube::new(spec.regime, spec.k, spec.r, spec.epsilon)?.density(&spec.theta)
}

/// The `(r, ε)` pair prescribed for `(n, k)` in each regime, with the smallest
/// admissible integer `r`.
pub fn assouad_default_params(regime: Regime, n: u64, k: u64) -> Result<(usize, f64)> {
    let out_of_regime = |reason: String| Error::OutOfRegime { n, k, reason };
    if n == 0 {
        return Err(out_of_regime("n must be positive".into()));
    }
    let nf = n as f64;
    let ln_k = (k as f64).ln();
    match regime {
        Regime::MonotoneLargeK => {
            // e^8 n^{1/3} ≤ k ≤ n^{1/3} e^n, compared in log space.
            let log_ratio = ln_k - nf.ln() / 3.0;
            if !(log_ratio >= 8.0 && log_ratio <= nf) {
                return Err(out_of_regime(format!(
                    "need 8 ≤ ln(k / n^(1/3)) ≤ n, got {log_ratio}"
                )));
            }
            let epsilon = 0.25 * (log_ratio / nf).cbrt();
            let r_min = 0.25 * (nf * log_ratio * log_ratio).cbrt();
            Ok((r_min.ceil() as usize, epsilon))
        }
        Regime::MonotoneSmallK => {
            if k < 2 || ln_k > 8.0 + nf.ln() / 3.0 {
                return Err(out_of_regime("need 2 ≤ k ≤ e^8 n^(1/3)".into()));
            }
            let r = (k / 2) as usize;
            let epsilon = (-12f64).exp() * r as f64 * (k as f64 / nf).sqrt();
            if epsilon > 0.5 {
                return Err(out_of_regime(format!("ε = {epsilon} exceeds 1/2")));
            }
            Ok((r, epsilon))
        }
        Regime::ConvexLargeK => {
            let log_ratio = ln_k - nf.ln() / 5.0;
            if !(log_ratio >= 40.0 && log_ratio <= nf) {
                return Err(out_of_regime(format!(
                    "need 40 ≤ ln(k / n^(1/5)) ≤ n, got {log_ratio}"
                )));
            }
            let epsilon = 0.5 * (log_ratio / nf).powf(0.2);
            let r_min = nf.powf(0.2) * log_ratio.powf(0.8) / 18.0;
            Ok((r_min.ceil() as usize, epsilon))
        }
        Regime::ConvexSmallK => {
            if k < 3 || ln_k > 40.0 + nf.ln() / 5.0 {
                return Err(out_of_regime("need 3 ≤ k ≤ e^40 n^(1/5)".into()));
            }
            let r = (k / 3) as usize;
            let epsilon = (-100f64).exp() * (r * r) as f64 * (k as f64 / nf).sqrt();
            if epsilon > 0.5 {
                return Err(out_of_regime(format!("ε = {epsilon} exceeds 1/2")));
            }
            Ok((r, epsilon))
        }
    }
}

/// A fully resolved hypercube: bin layout plus everything needed to evaluate
/// any vertex `f_θ`.
#[derive(Debug, Clone)]
pub struct Hypercube {
    regime: Regime,
    k: u64,
    r: usize,
    epsilon: f64,
    bins: Vec<Bin>,
    shape: Shape,
}

#[derive(Debug, Clone)]
enum Shape {
    MonotoneLarge,
    MonotoneSmall { a: f64, b: f64 },
    Convex(Lattice),
}

impl Hypercube {
    pub fn new(regime: Regime, k: u64, r: usize, epsilon: f64) -> Result<Self> {
        let infeasible = |msg: String| Err(Error::InfeasibleSpec(msg));
        if r == 0 {
            return infeasible("r must be at least 1".into());
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return infeasible(format!("ε = {epsilon} not in (0, 1)"));
        }
        match regime {
            Regime::MonotoneLargeK => {
                if epsilon >= std::f64::consts::FRAC_1_SQRT_2 {
                    return infeasible(format!("ε = {epsilon} must be below 1/√2"));
                }
                let bins = monotone_large_bins(k, r, epsilon)?;
                Ok(Self { regime, k, r, epsilon, bins, shape: Shape::MonotoneLarge })
            }
            Regime::MonotoneSmallK => {
                if 2 * r as u64 > k {
                    return infeasible(format!("2r = {} exceeds k = {k}", 2 * r));
                }
                let bins = (0..r).map(|i| Bin { start: 2 * i + 1, len: 2 }).collect();
                let rf = r as f64;
                let b = epsilon / (2.0 * rf * rf);
                let a = b + (1.0 + epsilon) / (2.0 * rf);
                Ok(Self { regime, k, r, epsilon, bins, shape: Shape::MonotoneSmall { a, b } })
            }
            Regime::ConvexLargeK | Regime::ConvexSmallK => {
                if epsilon > 0.5 {
                    return infeasible(format!("ε = {epsilon} must be at most 1/2"));
                }
                let sizes = if regime == Regime::ConvexLargeK {
                    convex_large_sizes(r, epsilon)
                } else {
                    vec![3; r]
                };
                let used: u64 = sizes.iter().map(|&s| s as u64).sum();
                if used > k {
                    return infeasible(format!("bins need {used} atoms but k = {k}"));
                }
                let bins = layout(&sizes);
                let lattice = if regime == Regime::ConvexLargeK {
                    Lattice::convex_large(&sizes, epsilon, k)?
                } else {
                    Lattice::convex_small(r, epsilon, k)?
                };
                Ok(Self { regime, k, r, epsilon, bins, shape: Shape::Convex(lattice) })
            }
        }
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The perturbation bins `A_1, …, A_r`.
    pub fn bins(&self) -> &[Bin] {
        &self.bins
    }

    /// Number of leading atoms that can carry mass for some θ, plus one
    /// trailing zero atom when `k` allows it. Every vertex is zero beyond.
    pub fn support_len(&self) -> usize {
        let last = self.bins.last().map_or(0, |b| b.start + b.len - 1);
        let carrying = match &self.shape {
            Shape::MonotoneLarge | Shape::MonotoneSmall { .. } => last,
            Shape::Convex(lat) => last + lat.tail_len(self.k, last),
        };
        (carrying as u64 + 1).min(self.k) as usize
    }

    /// `f_θ` on `{1, …, k}`.
    pub fn density(&self, theta: &[bool]) -> Result<DiscreteDensity> {
        if self.k > MAX_MATERIALIZED_ATOMS {
            return Err(Error::TooLarge(format!(
                "k = {} atoms; use density_truncated for the {}-atom support",
                self.k,
                self.support_len()
            )));
        }
        self.density_on(theta, self.k as usize)
    }

    /// `f_θ` restricted to `{1, …, support_len()}`. All of the mass lives
    /// there, and when `support_len() < k` the last atom is zero, so class
    /// membership of the restriction certifies it for the zero extension.
    pub fn density_truncated(&self, theta: &[bool]) -> Result<DiscreteDensity> {
        self.density_on(theta, self.support_len())
    }

    fn density_on(&self, theta: &[bool], len: usize) -> Result<DiscreteDensity> {
        if theta.len() != self.r {
            return Err(Error::BadParam(format!(
                "theta has {} bits but r = {}",
                theta.len(),
                self.r
            )));
        }
        let mut mass = vec![0.0; len];
        match &self.shape {
            Shape::MonotoneLarge => {
                let rf = self.r as f64;
                for (bin, &bit) in self.bins.iter().zip(theta) {
                    let half = bin.len / 2;
                    for (t, x) in bin.atoms().enumerate() {
                        mass[x - 1] = if bit {
                            level(1.0, rf, bin.len)
                        } else if t < half {
                            level(1.0 + self.epsilon, rf, bin.len)
                        } else {
                            level(1.0 - self.epsilon, rf, bin.len)
                        };
                    }
                }
            }
            Shape::MonotoneSmall { a, b } => {
                for (i, (bin, &bit)) in self.bins.iter().zip(theta).enumerate() {
                    let i = (i + 1) as u64;
                    // atoms take the value a − b·j for a step index j that never
                    // decreases left to right, so the float sequence is monotone
                    let steps = if bit { [2 * i, 2 * i] } else { [2 * i - 1, 2 * i + 1] };
                    for (x, j) in bin.atoms().zip(steps) {
                        mass[x - 1] = (a - b * j as f64).max(0.0);
                    }
                }
            }
            Shape::Convex(lat) => {
                let scale = pow2(-lat.exponent);
                for (x, u) in lat.values(&self.bins, theta, len).into_iter().enumerate() {
                    mass[x] = u as f64 * scale;
                }
            }
        }
        DiscreteDensity::new(mass)
    }

    /// Lower bound on `Σ_{A_i} |f_θ − f_ζ|` over all `θ`, `i` (ζ flips bit `i`).
    pub fn separation_bound(&self) -> f64 {
        let (e, r) = (self.epsilon, self.r as f64);
        match self.regime {
            Regime::MonotoneLargeK => e / r,
            Regime::MonotoneSmallK => e / (r * r),
            Regime::ConvexLargeK => e * e / (72.0 * r),
            Regime::ConvexSmallK => e / (6.0 * r * r * r),
        }
    }

    /// Whether [`Self::separation_bound`] is attained with equality.
    pub fn separation_is_exact(&self) -> bool {
        self.regime != Regime::ConvexLargeK
    }

    /// Lower bound on the affinity `Σ √(f_θ f_ζ)` between neighbouring vertices.
    pub fn affinity_bound(&self) -> f64 {
        let (e, r) = (self.epsilon, self.r as f64);
        match self.regime {
            Regime::MonotoneLargeK => 1.0 - e * e / (2.0 * r),
            Regime::MonotoneSmallK => 1.0 - e * e / (2.0 * r.powi(3) * (1.0 - e)),
            Regime::ConvexLargeK => 1.0 - e.powi(4) / (9.0 * r),
            Regime::ConvexSmallK => 1.0 - e * e / (48.0 * r.powi(5)),
        }
    }

    /// Largest atom value `a − b = (1 + ε)/(2r)` of the monotone small-k cube.
    pub fn monotone_small_peak(&self) -> Option<f64> {
        match self.shape {
            Shape::MonotoneSmall { a, b } => Some(a - b),
            _ => None,
        }
    }
}

fn level(numerator: f64, r: f64, bin_len: usize) -> f64 {
    numerator / (r * bin_len as f64)
}

fn layout(sizes: &[usize]) -> Vec<Bin> {
    let mut start = 1;
    sizes
        .iter()
        .map(|&len| {
            let bin = Bin { start, len };
            start += len;
            bin
        })
        .collect()
}

fn ceil_to_multiple(x: f64, m: usize) -> usize {
    let m = m as f64;
    ((x / m).ceil() * m) as usize
}

/// Even bin sizes starting at 2, at least `2 e^{4ε(i−1)}`, grown until the
/// smallest level of bin `i` dominates the largest level of bin `i + 1` in the
/// same float expressions the densities use.
fn monotone_large_bins(k: u64, r: usize, epsilon: f64) -> Result<Vec<Bin>> {
    let rf = r as f64;
    let growth = (1.0 + epsilon) / (1.0 - epsilon);
    let mut sizes: Vec<usize> = Vec::with_capacity(r);
    let mut used: u64 = 0;
    for i in 0..r {
        let target = 2.0 * (4.0 * epsilon * i as f64).exp();
        let mut s = ceil_to_multiple(target, 2).max(2);
        if let Some(&prev) = sizes.last() {
            s = s.max(ceil_to_multiple(prev as f64 * growth, 2).saturating_sub(2).max(prev));
            let floor = level(1.0 - epsilon, rf, prev);
            while level(1.0 + epsilon, rf, s) > floor {
                s += 2;
            }
        }
        used += s as u64;
        if used > k {
            return Err(Error::InfeasibleSpec(format!(
                "bins need more than k = {k} atoms by bin {}",
                i + 1
            )));
        }
        sizes.push(s);
    }
    Ok(layout(&sizes))
}

/// Multiples of 3 starting at 3 with `|A_{i+1}| ≥ (1 + ε)|A_i|` and
/// `|A_i| ≥ 3/(1 − ε)^{i−1}`.
fn convex_large_sizes(r: usize, epsilon: f64) -> Vec<usize> {
    let mut sizes: Vec<usize> = Vec::with_capacity(r);
    for i in 0..r {
        let target = 3.0 / (1.0 - epsilon).powi(i as i32);
        let mut s = ceil_to_multiple(target, 3).max(3);
        if let Some(&prev) = sizes.last() {
            s = s.max(ceil_to_multiple(prev as f64 * (1.0 + epsilon), 3));
        }
        sizes.push(s);
    }
    sizes
}

fn pow2(e: i32) -> f64 {
    f64::from_bits(((1023 + e) as u64) << 52)
}

/// Integer realization of the convex dented-ramp construction.
///
/// Bin `i` runs from anchor `B_i` down to `B_{i+1} = B_i − |A_i| τ_i` along a
/// baseline of step `τ_i`, dented below the baseline with its deepest point at
/// one third (`θ_i = 0`) or two thirds (`θ_i = 1`) of the bin. With `h = |A_i|/3`
/// the four segment steps are
///
/// ```text
///   θ = 0:  τ + 2δ for h atoms,  then τ − δ  for 2h atoms
///   θ = 1:  τ + δ  for 2h atoms, then τ − 2δ for h atoms
/// ```
///
/// so the dent depth is `2hδ` and both shapes end exactly at `B_{i+1}` with the
/// same bin mass. After the last bin the values keep falling with step
/// `τ_r − 2δ_r` (the flattest step of the last bin) until they reach zero.
#[derive(Debug, Clone)]
struct Lattice {
    tau: Vec<i64>,
    delta: Vec<i64>,
    /// `B_1, …, B_{r+1}`.
    anchors: Vec<i64>,
    exponent: i32,
}

const LATTICE_MAX_VALUE: f64 = (1u64 << 52) as f64;

impl Lattice {
    fn assemble(sizes: &[usize], tau: Vec<i64>, delta: Vec<i64>, floor: i64, exponent: i32) -> Self {
        let r = sizes.len();
        let mut anchors = vec![0i64; r + 1];
        anchors[r] = floor;
        for i in (0..r).rev() {
            anchors[i] = anchors[i + 1] + sizes[i] as i64 * tau[i];
        }
        Self { tau, delta, anchors, exponent }
    }

    fn tail_step(&self) -> i64 {
        let r = self.tau.len();
        self.tau[r - 1] - 2 * self.delta[r - 1]
    }

    /// Atoms after the last bin that carry mass.
    fn tail_len(&self, k: u64, bins_end: usize) -> usize {
        let room = k.saturating_sub(bins_end as u64);
        let floor = self.anchors[self.tau.len()];
        let step = self.tail_step();
        let wanted = if floor <= 0 {
            0
        } else if step == 0 {
            room
        } else {
            ((floor + step - 1) / step) as u64
        };
        wanted.min(room) as usize
    }

    /// Total mass in lattice units; independent of θ.
    fn total(&self, sizes: &[usize], k: u64) -> i128 {
        let mut total: i128 = 0;
        for (i, &s) in sizes.iter().enumerate() {
            let (s, h) = (s as i128, (s / 3) as i128);
            total += s * self.anchors[i] as i128 - self.tau[i] as i128 * s * (s - 1) / 2
                - 3 * self.delta[i] as i128 * h * h;
        }
        let end: usize = sizes.iter().sum();
        let floor = self.anchors[sizes.len()] as i128;
        let step = self.tail_step() as i128;
        let len = self.tail_len(k, end) as i128;
        total + len * floor - step * len * (len - 1) / 2
    }

    fn values(&self, bins: &[Bin], theta: &[bool], len: usize) -> Vec<i64> {
        let mut out = vec![0i64; len];
        let mut put = |x: usize, v: i64| {
            if x <= len {
                out[x - 1] = v;
            }
        };
        for (i, (bin, &bit)) in bins.iter().zip(theta).enumerate() {
            let (tau, delta, anchor) = (self.tau[i], self.delta[i], self.anchors[i]);
            let h = (bin.len / 3) as i64;
            let (knee, first, second) = if bit {
                (2 * h, tau + delta, tau - 2 * delta)
            } else {
                (h, tau + 2 * delta, tau - delta)
            };
            let knee_value = anchor - knee * first;
            for (t, x) in bin.atoms().enumerate() {
                let t = t as i64;
                let v = if t < knee { anchor - t * first } else { knee_value - (t - knee) * second };
                put(x, v);
            }
        }
        let end = bins.last().map_or(0, |b| b.start + b.len - 1);
        let floor = self.anchors[bins.len()];
        let step = self.tail_step();
        let mut x = end + 1;
        let mut v = floor;
        while v > 0 && x <= len {
            put(x, v);
            v -= step;
            x += 1;
        }
        out
    }

    fn convex_large(sizes: &[usize], epsilon: f64, k: u64) -> Result<Self> {
        // τ_i ≈ λ ε (1 − ε)^{i−1} / |A_i| with δ_i = ⌊τ_i ε / 2⌋, and each τ_{i+1}
        // lowered until the steepest step of bin i+1 is no steeper than the
        // flattest step of bin i.
        let build = |lambda: f64, floor_shift: i64, exponent: i32| -> Lattice {
            let r = sizes.len();
            let mut tau = Vec::with_capacity(r);
            let mut delta = Vec::with_capacity(r);
            let mut t = (lambda * epsilon / sizes[0] as f64).round() as i64;
            let mut d = (t as f64 * epsilon / 2.0).floor() as i64;
            tau.push(t);
            delta.push(d);
            for i in 1..r {
                let flattest = t - 2 * d;
                let mut next =
                    (t as f64 * (1.0 - epsilon) * sizes[i - 1] as f64 / sizes[i] as f64).round() as i64;
                let mut next_d = (next as f64 * epsilon / 2.0).floor() as i64;
                while next > 0 && next + 2 * next_d > flattest {
                    next -= 1;
                    next_d = (next as f64 * epsilon / 2.0).floor() as i64;
                }
                t = next.max(0);
                d = next_d.max(0);
                tau.push(t);
                delta.push(d);
            }
            let floor = (lambda * (1.0 - epsilon).powi(r as i32)).round() as i64 + floor_shift;
            Lattice::assemble(sizes, tau, delta, floor, exponent)
        };
        Self::normalize(sizes, k, build)
    }

    fn convex_small(r: usize, epsilon: f64, k: u64) -> Result<Self> {
        let sizes = vec![3usize; r];
        let rf = r as f64;
        // β_1 ≤ 5/(6r) < 2^{-⌊log2 r⌋}, so anchors stay below 2^52.
        let exponent = 52 + rf.log2().floor() as i32;
        // Δ = ε/(6r³) = 2δ lattice units; τ_i = 2δ(2(r − i) + 1) makes the
        // cross-bin convexity condition hold with equality, as intended.
        let d = (epsilon / (12.0 * rf.powi(3)) * pow2(exponent)).round() as i64;
        let tau: Vec<i64> = (1..=r as i64).map(|i| 2 * d * (2 * (r as i64 - i) + 1)).collect();
        let delta = vec![d; r];
        let base = Lattice::assemble(&sizes, tau.clone(), delta.clone(), 0, exponent);
        let fixed = base.total(&sizes, k);
        let tail = (k - 3 * r as u64) as i128;
        let per_unit = 3 * r as i128 + tail;
        let target = 1i128 << exponent;
        let floor = ((target - fixed) as f64 / per_unit as f64).round() as i64;
        if floor < 0 {
            return Err(Error::InfeasibleSpec(format!("ε = {epsilon} leaves a negative floor")));
        }
        Ok(Lattice::assemble(&sizes, tau, delta, floor, exponent))
    }

    /// Picks the lattice scale so the total mass is `2^e` (up to a few units)
    /// with the largest atom below `2^52`.
    fn normalize(sizes: &[usize], k: u64, build: impl Fn(f64, i64, i32) -> Lattice) -> Result<Self> {
        let probe_lambda = (1u64 << 40) as f64;
        let probe = build(probe_lambda, 0, 0);
        let probe_total = probe.total(sizes, k) as f64;
        if probe_total.is_nan() || probe_total <= 0.0 {
            return Err(Error::InfeasibleSpec("construction has no mass".into()));
        }
        let peak_share = probe.anchors[0] as f64 / probe_total;
        let exponent = (LATTICE_MAX_VALUE / peak_share).log2().floor() as i32;
        let target = pow2(exponent);
        let mut lambda = probe_lambda * target / probe_total;
        for _ in 0..4 {
            let total = build(lambda, 0, exponent).total(sizes, k) as f64;
            lambda *= target / total;
        }
        // Fine adjustment through the floor level, which shifts every anchor.
        let mut shift = 0i64;
        let mut lat = build(lambda, shift, exponent);
        for _ in 0..16 {
            let gap = (1i128 << exponent) - lat.total(sizes, k);
            let end: usize = sizes.iter().sum();
            let carrying = (end + lat.tail_len(k, end)) as i128;
            let adjust = (gap as f64 / carrying as f64).round() as i64;
            if adjust == 0 {
                break;
            }
            shift += adjust;
            lat = build(lambda, shift, exponent);
        }
        let total = lat.total(sizes, k) as f64;
        if ((total - target) / target).abs() > 1e-11 {
            return Err(Error::InfeasibleSpec(format!(
                "could not normalize lattice (relative error {})",
                (total - target) / target
            )));
        }
        if lat.anchors[sizes.len()] < 0 || lat.tau.iter().any(|&t| t < 0) {
            return Err(Error::InfeasibleSpec("lattice went negative".into()));
        }
        Ok(lat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_thetas(r: usize) -> Vec<Vec<bool>> {
        (0..1u32 << r)
            .map(|m| (0..r).map(|i| m >> i & 1 == 1).collect())
            .collect()
    }

    fn restricted_l1(f: &DiscreteDensity, g: &DiscreteDensity, bin: Bin) -> f64 {
        bin.atoms().map(|x| (f.at(x) - g.at(x)).abs()).sum()
    }

    fn affinity(f: &DiscreteDensity, g: &DiscreteDensity) -> f64 {
        f.mass().iter().zip(g.mass()).map(|(a, b)| (a * b).sqrt()).sum()
    }

    #[test]
    fn default_params_examples() {
        let (r, _) = assouad_default_params(Regime::MonotoneSmallK, 1000, 4).unwrap();
        assert_eq!(r, 2);
        let (r, _) = assouad_default_params(Regime::ConvexSmallK, 1000, 9).unwrap();
        assert_eq!(r, 3);
        let n = 1_000_000u64;
        let k = (8f64.exp() * 100.0).ceil() as u64;
        let (r, eps) = assouad_default_params(Regime::MonotoneLargeK, n, k).unwrap();
        let log_ratio = (k as f64 / 100.0).ln();
        assert!(r as f64 >= 0.25 * (n as f64 * log_ratio * log_ratio).cbrt());
        assert!(r as f64 <= 0.5 * (n as f64 * log_ratio * log_ratio).cbrt());
        assert!((eps - 0.25 * (log_ratio / n as f64).cbrt()).abs() < 1e-15);
        assert!(matches!(
            assouad_default_params(Regime::MonotoneLargeK, n, 1000),
            Err(Error::OutOfRegime { .. })
        ));
        assert!(matches!(
            assouad_default_params(Regime::ConvexSmallK, 1000, 2),
            Err(Error::OutOfRegime { .. })
        ));
    }

    #[test]
    fn monotone_large_all_ones_is_flat_per_bin() {
        let cube = Hypercube::new(Regime::MonotoneLargeK, 400, 6, 0.2).unwrap();
        let f = cube.density(&[true; 6]).unwrap();
        for bin in cube.bins() {
            let expect = 1.0 / (6.0 * bin.len as f64);
            for x in bin.atoms() {
                assert_eq!(f.at(x), expect);
            }
        }
        assert!(f.is_non_increasing());
    }

    #[test]
    fn monotone_large_equal_sized_neighbours_do_not_occur() {
        // tiny ε makes 2e^{4ε(i−1)} flat; sizes must still grow
        let cube = Hypercube::new(Regime::MonotoneLargeK, 100_000, 40, 0.005).unwrap();
        for w in cube.bins().windows(2) {
            assert!(w[1].len > w[0].len);
        }
        let f = cube.density(&[false; 40]).unwrap();
        assert!(f.is_non_increasing());
    }

    #[test]
    fn monotone_small_peak_value() {
        let cube = Hypercube::new(Regime::MonotoneSmallK, 4, 2, 0.3).unwrap();
        let peak = cube.monotone_small_peak().unwrap();
        assert!((peak - 1.3 / 4.0).abs() < 1e-15);
        for theta in all_thetas(2) {
            let f = cube.density(&theta).unwrap();
            let max = f.mass().iter().cloned().fold(0.0, f64::max);
            assert!(max <= peak);
            if !theta[0] {
                assert_eq!(max, peak);
            }
        }
    }

    #[test]
    fn every_vertex_is_normalized_and_in_class() {
        let cases = [
            (Regime::MonotoneLargeK, 200u64, 5usize, 0.1),
            (Regime::MonotoneSmallK, 11, 5, 0.4),
            (Regime::ConvexLargeK, 400, 6, 0.3),
            (Regime::ConvexLargeK, 90, 4, 0.5),
            (Regime::ConvexSmallK, 17, 5, 0.5),
            (Regime::ConvexSmallK, 15, 5, 0.01),
        ];
        for (regime, k, r, eps) in cases {
            let cube = Hypercube::new(regime, k, r, eps).unwrap();
            for theta in all_thetas(r) {
                let f = cube.density(&theta).unwrap();
                assert!((f.total_mass() - 1.0).abs() < 1e-9, "{regime}");
                assert!(f.is_non_increasing(), "{regime} {theta:?}");
                if regime.is_convex() {
                    assert!(f.is_convex_non_increasing(), "{regime} {theta:?} {:?}", f.mass());
                }
            }
        }
    }

    #[test]
    fn separation_and_affinity_per_regime() {
        let cases = [
            (Regime::MonotoneLargeK, 200u64, 5usize, 0.1),
            (Regime::MonotoneSmallK, 11, 5, 0.4),
            (Regime::ConvexLargeK, 400, 6, 0.3),
            (Regime::ConvexSmallK, 17, 5, 0.5),
        ];
        for (regime, k, r, eps) in cases {
            let cube = Hypercube::new(regime, k, r, eps).unwrap();
            for theta in all_thetas(r) {
                let f = cube.density(&theta).unwrap();
                for i in 0..r {
                    let mut zeta = theta.clone();
                    zeta[i] = !zeta[i];
                    let g = cube.density(&zeta).unwrap();
                    let sep = restricted_l1(&f, &g, cube.bins()[i]);
                    if cube.separation_is_exact() {
                        assert!((sep - cube.separation_bound()).abs() < 1e-9, "{regime}: {sep}");
                    } else {
                        assert!(sep >= cube.separation_bound(), "{regime}: {sep}");
                    }
                    assert!(affinity(&f, &g) >= cube.affinity_bound() - 1e-9, "{regime}");
                    // only bin i moves
                    for x in 1..=k as usize {
                        if !cube.bins()[i].atoms().contains(&x) {
                            assert_eq!(f.at(x), g.at(x));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn truncated_density_matches_full_prefix() {
        let cube = Hypercube::new(Regime::ConvexLargeK, 5000, 5, 0.4).unwrap();
        let theta = [true, false, true, true, false];
        let full = cube.density(&theta).unwrap();
        let cut = cube.density_truncated(&theta).unwrap();
        assert_eq!(&full.mass()[..cut.k()], cut.mass());
        assert!(full.mass()[cut.k()..].iter().all(|&m| m == 0.0));
        assert_eq!(*cut.mass().last().unwrap(), 0.0);
    }

    #[test]
    fn infeasible_specs() {
        assert!(matches!(
            Hypercube::new(Regime::MonotoneSmallK, 5, 3, 0.2),
            Err(Error::InfeasibleSpec(_))
        ));
        assert!(matches!(
            Hypercube::new(Regime::MonotoneLargeK, 10, 8, 0.2),
            Err(Error::InfeasibleSpec(_))
        ));
        assert!(matches!(
            Hypercube::new(Regime::ConvexLargeK, 100, 3, 0.6),
            Err(Error::InfeasibleSpec(_))
        ));
        assert!(matches!(
            Hypercube::new(Regime::MonotoneLargeK, 100, 3, 0.8),
            Err(Error::InfeasibleSpec(_))
        ));
        let spec = HypercubeSpec {
            regime: Regime::MonotoneSmallK,
            n: 10,
            k: 4,
            r: 2,
            epsilon: 0.1,
            theta: vec![true],
        };
        assert!(matches!(assouad_density(&spec), Err(Error::BadParam(_))));
    }

    #[test]
    fn theta_parsing() {
        assert_eq!(parse_theta("0110").unwrap(), vec![false, true, true, false]);
        assert!(parse_theta("01x").is_err());
    }
}
