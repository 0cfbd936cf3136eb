//! Seeded Monte Carlo estimates of expected TV risk.
//!
//! Replication `i` of a run with master seed `s` samples with
//! [`replication_seed`]`(s, i)`. Replications may run on any number of
//! threads; their TV errors are collected in index order and summed
//! sequentially, so results do not depend on the schedule.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assouad::{assouad_default_params, Hypercube, Regime};
use crate::density::{family, DiscreteDensity, Family};
use crate::error::{Error, Result};
use crate::estimate::{greedy_pl_estimate, histogram_estimate, idealized_pc_estimate, idealized_pl_estimate, PiecewiseEstimate};
use crate::metrics::tv;
use crate::monotone::monotonize;
use crate::sampling::{replication_seed, sample, SampleCounts};
use crate::tree::{build_greedy_binary, build_greedy_ternary, build_idealized_binary, build_idealized_ternary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Estimator {
    /// Returns the true density.
    Oracle,
    /// Per-atom relative frequencies.
    EmpiricalHistogram,
    GreedyBinary,
    GreedyBinaryMonotonize,
    /// Piecewise-linear estimate on the greedy ternary tree.
    GreedyTernary,
    /// `f*_n`, which depends on `f` and `n` only.
    IdealizedBinary,
    /// `f†_n`, which depends on `f` and `n` only.
    IdealizedTernary,
}

impl Estimator {
    pub const ALL: [Estimator; 7] = [
        Estimator::Oracle,
        Estimator::EmpiricalHistogram,
        Estimator::GreedyBinary,
        Estimator::GreedyBinaryMonotonize,
        Estimator::GreedyTernary,
        Estimator::IdealizedBinary,
        Estimator::IdealizedTernary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Oracle => "oracle",
            Estimator::EmpiricalHistogram => "empirical-histogram",
            Estimator::GreedyBinary => "greedy-binary",
            Estimator::GreedyBinaryMonotonize => "greedy-binary+monotonize",
            Estimator::GreedyTernary => "greedy-ternary",
            Estimator::IdealizedBinary => "idealized-binary",
            Estimator::IdealizedTernary => "idealized-ternary",
        }
    }

    /// Whether the estimate ignores the sample.
    pub fn is_sample_free(self) -> bool {
        matches!(self, Estimator::Oracle | Estimator::IdealizedBinary | Estimator::IdealizedTernary)
    }

    /// The estimate as a piecewise function, for estimators built on trees.
    pub fn piecewise(self, f: &DiscreteDensity, c: &SampleCounts) -> Result<Option<PiecewiseEstimate>> {
        let e = match self {
            Estimator::Oracle | Estimator::EmpiricalHistogram => return Ok(None),
            Estimator::GreedyBinary => histogram_estimate(&build_greedy_binary(c), c)?,
            Estimator::GreedyBinaryMonotonize => monotonize(&histogram_estimate(&build_greedy_binary(c), c)?)?,
            Estimator::GreedyTernary => greedy_pl_estimate(&build_greedy_ternary(c), c)?,
            Estimator::IdealizedBinary => idealized_pc_estimate(&build_idealized_binary(f, c.n())?, f)?,
            Estimator::IdealizedTernary => idealized_pl_estimate(&build_idealized_ternary(f, c.n())?, f)?,
        };
        Ok(Some(e))
    }

    /// Per-atom values of the estimate from sample `c` of truth `f`.
    pub fn estimate(self, f: &DiscreteDensity, c: &SampleCounts, renormalize: bool) -> Result<Vec<f64>> {
        if c.k() != f.k() {
            return Err(Error::DomainMismatch(format!("counts on k = {}, density on k = {}", c.k(), f.k())));
        }
        if c.n() == 0 {
            return Err(Error::BadParam("n must be positive".into()));
        }
        match self {
            Estimator::Oracle => Ok(f.mass().to_vec()),
            Estimator::EmpiricalHistogram => Ok(c.frequencies()),
            _ => {
                let e = self.piecewise(f, c)?.expect("tree-based estimator");
                Ok(if renormalize { e.renormalized()?.values() } else { e.values() })
            }
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::UnknownEstimator(s.to_string()))
    }
}

/// Looks an estimator up by name.
pub fn estimator(name: &str) -> Result<Estimator> {
    name.parse()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedDensity {
    pub name: String,
    pub density: DiscreteDensity,
}

impl NamedDensity {
    pub fn new(name: impl Into<String>, density: DiscreteDensity) -> Self {
        Self { name: name.into(), density }
    }
}

/// Monte Carlo settings shared by the risk functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarlo {
    pub reps: usize,
    pub master_seed: u64,
    /// Worker threads; `None` uses rayon's global pool.
    pub threads: Option<usize>,
    pub renormalize: bool,
}

impl MonteCarlo {
    pub fn new(reps: usize, master_seed: u64) -> Self {
        Self { reps, master_seed, threads: None, renormalize: false }
    }

    pub fn threads(self, threads: usize) -> Self {
        Self { threads: Some(threads), ..self }
    }

    pub fn renormalize(self, renormalize: bool) -> Self {
        Self { renormalize, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub estimator_name: String,
    pub density_name: String,
    pub n: u64,
    pub k: usize,
    pub replications: usize,
    pub mean_tv: f64,
    pub std_error: f64,
    pub master_seed: u64,
}

/// Writes `n,k,mean_tv,std_error,reps,seed` rows.
pub fn write_risk_csv<W: Write>(reports: &[RiskReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "k", "mean_tv", "std_error", "reps", "seed"])?;
    for r in reports {
        w.serialize((r.n, r.k, r.mean_tv, r.std_error, r.replications, r.master_seed))?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))
}

/// Per-replication TV errors, in replication order.
pub fn tv_errors(est: Estimator, f: &DiscreteDensity, n: u64, mc: &MonteCarlo) -> Result<Vec<f64>> {
    if mc.reps == 0 {
        return Err(Error::BadParam("reps must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::BadParam("n must be at least 1".into()));
    }
    let one = |i: usize| -> Result<f64> {
        let c = sample(f, n, replication_seed(mc.master_seed, i as u64));
        tv(&est.estimate(f, &c, mc.renormalize)?, f)
    };
    if est.is_sample_free() {
        // these estimators read only n from the sample
        let mut counts = vec![0; f.k()];
        counts[0] = n;
        let err = tv(&est.estimate(f, &SampleCounts::from_counts(counts)?, mc.renormalize)?, f)?;
        return Ok(vec![err; mc.reps]);
    }
    let run = || (0..mc.reps).into_par_iter().map(one).collect::<Result<Vec<f64>>>();
    match mc.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::BadParam(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Mean and standard error `sd / √reps` of `xs`, summed in order.
fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Estimates `E TV(f̂_n, f)`.
pub fn mc_risk(est: Estimator, f: &NamedDensity, n: u64, mc: &MonteCarlo) -> Result<RiskReport> {
    let errors = tv_errors(est, &f.density, n, mc)?;
    let (mean_tv, std_error) = mean_and_se(&errors);
    Ok(RiskReport {
        estimator_name: est.name().to_string(),
        density_name: f.name.clone(),
        n,
        k: f.density.k(),
        replications: mc.reps,
        mean_tv,
        std_error,
        master_seed: mc.master_seed,
    })
}

/// The largest [`mc_risk`] over `family` (first member on ties). Every member
/// uses the same master seed.
pub fn sup_risk(est: Estimator, family: &[NamedDensity], n: u64, mc: &MonteCarlo) -> Result<RiskReport> {
    let mut best: Option<RiskReport> = None;
    for f in family {
        let r = mc_risk(est, f, n, mc)?;
        if best.as_ref().map_or(true, |b| r.mean_tv > b.mean_tv) {
            best = Some(r);
        }
    }
    best.ok_or(Error::EmptyFamily)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateScaling {
    pub reports: Vec<RiskReport>,
    /// Least-squares slope of `log mean_tv` against `log n`; NaN when undefined.
    pub slope: f64,
    /// False when some `mean_tv` is zero and the slope is undefined.
    pub slope_defined: bool,
}

/// [`sup_risk`] at each `n` of a strictly increasing grid of at least three
/// points, with a log-log slope fit.
pub fn rate_scaling(est: Estimator, family: &[NamedDensity], n_grid: &[u64], mc: &MonteCarlo) -> Result<RateScaling> {
    if n_grid.len() < 3 {
        return Err(Error::DegenerateGrid(format!("{} points, need at least 3", n_grid.len())));
    }
    if n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::DegenerateGrid("grid must be positive and strictly increasing".into()));
    }
    let reports = n_grid
        .iter()
        .map(|&n| sup_risk(est, family, n, mc))
        .collect::<Result<Vec<_>>>()?;
    let slope_defined = reports.iter().all(|r| r.mean_tv > 0.0);
    let slope = if slope_defined {
        let pts: Vec<(f64, f64)> = reports.iter().map(|r| ((r.n as f64).ln(), r.mean_tv.ln())).collect();
        least_squares_slope(&pts)
    } else {
        f64::NAN
    };
    Ok(RateScaling { reports, slope, slope_defined })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Number of random hypercube vertices added by [`standard_family`].
pub const RANDOM_VERTICES: usize = 8;

/// The finite stand-in for the class of non-increasing densities on
/// `{1, …, k}`: the named families plus hypercube vertices (all zeros, all
/// ones and [`RANDOM_VERTICES`] seeded random θ) when `(n, k)` falls in a
/// monotone regime.
pub fn standard_family(k: usize, n: u64, seed: u64) -> Result<Vec<NamedDensity>> {
    let mut out = vec![
        NamedDensity::new("uniform", family(Family::Uniform, k, None)?),
        NamedDensity::new("harmonic-zipf", family(Family::HarmonicZipf, k, None)?),
        NamedDensity::new("trunc-geometric(0.9)", family(Family::TruncGeometric, k, Some(0.9))?),
        NamedDensity::new("linear-decreasing", family(Family::LinearDecreasing, k, None)?),
    ];
    let cube = [Regime::MonotoneSmallK, Regime::MonotoneLargeK].into_iter().find_map(|regime| {
        let (r, eps) = assouad_default_params(regime, n, k as u64).ok()?;
        Hypercube::new(regime, k as u64, r, eps).ok()
    });
    if let Some(cube) = cube {
        let r = cube.r();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut thetas = vec![vec![false; r], vec![true; r]];
        for _ in 0..RANDOM_VERTICES {
            thetas.push((0..r).map(|_| rng.random::<bool>()).collect());
        }
        for theta in thetas {
            let bits: String = theta.iter().map(|&b| if b { '1' } else { '0' }).collect();
            let name = format!("{}[{}]", cube.regime(), bits);
            out.push(NamedDensity::new(name, cube.density(&theta)?));
        }
    }
    Ok(out)
}
