//! Command-line front end for `shapetree`.
//!
//! Every subcommand is a thin wrapper over a library call. Data goes to
//! stdout or `--output`; diagnostics go to stderr. Exit codes: 0 success,
//! 1 runtime error, 2 usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use shapetree::assouad::{assouad_default_params, parse_theta, Hypercube, HypercubeSpec, Regime};
use shapetree::estimate::{Piece, PiecewiseEstimate};
use shapetree::mde::{minimum_distance_estimate, yatracos_class, yatracos_deviations, CandidateSet};
use shapetree::metrics::{assouad_lower_bound, tv};
use shapetree::rates::{rate, ShapeClass};
use shapetree::risk::{mc_risk, rate_scaling, standard_family, sup_risk, write_risk_csv, Estimator, MonteCarlo, NamedDensity, RiskReport};
use shapetree::tree::{build_greedy_binary, build_greedy_ternary, build_idealized_binary, build_idealized_ternary, PartitionTree};
use shapetree::{family, sample, vc_unions_intervals_brute, DiscreteDensity, Error, Family};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "shapetree", version, about = "Tree-based estimators for monotone and convex discrete densities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write data here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Truth {
    /// Density family: uniform, harmonic-zipf, trunc-geometric, linear-decreasing.
    #[arg(long, default_value = "harmonic-zipf")]
    pub family: String,
    /// Support size.
    #[arg(long, default_value_t = 64)]
    pub k: usize,
    /// Ratio for trunc-geometric.
    #[arg(long, default_value_t = 0.9)]
    pub param: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample once and print the tree and estimate.
    Estimate {
        #[command(flatten)]
        truth: Truth,
        /// Sample size.
        #[arg(long, default_value_t = 1000)]
        n: u64,
        /// oracle, empirical-histogram, greedy-binary, greedy-binary+monotonize,
        /// greedy-ternary, idealized-binary or idealized-ternary.
        #[arg(long, default_value = "greedy-binary")]
        estimator: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rescale the estimate to total mass one.
        #[arg(long)]
        renormalize: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Monte Carlo risk over a grid of sample sizes.
    Simulate {
        /// A family name, or `standard` for the maximum over the standard family.
        #[arg(long, default_value = "harmonic-zipf")]
        family: String,
        #[arg(long, default_value_t = 64)]
        k: usize,
        #[arg(long, default_value_t = 0.9)]
        param: f64,
        #[arg(long, default_value = "greedy-binary+monotonize")]
        estimator: String,
        /// Comma-separated sample sizes; a slope is fitted when there are three or more.
        #[arg(long, value_delimiter = ',', default_value = "1000")]
        n_grid: Vec<u64>,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (results do not depend on this).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        renormalize: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluate the minimax rate f(n, k) or g(n, k).
    Rates {
        /// monotone or convex.
        #[arg(long, default_value = "monotone")]
        class: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Build one vertex of a lower-bound hypercube.
    Assouad {
        /// monotone-large-k, monotone-small-k, convex-large-k or convex-small-k.
        #[arg(long)]
        regime: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        /// Number of bins; defaults to the regime's choice for (n, k).
        #[arg(long)]
        r: Option<usize>,
        /// Perturbation size; defaults to the regime's choice for (n, k).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Bit string such as 0110; defaults to all zeros.
        #[arg(long)]
        theta: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// VC dimension of unions of at most `ell` intervals on {1, …, m}.
    Vc {
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Minimum distance selection among named candidates.
    Mde {
        /// Comma-separated candidates, each `name` or `name:param`.
        #[arg(long, value_delimiter = ',')]
        candidates: Vec<String>,
        /// Index of the candidate that generates the sample.
        #[arg(long, default_value_t = 0)]
        truth: usize,
        #[arg(long, default_value_t = 64)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
}

/// Failure of a run, mapped onto an exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownEstimator(_) | Error::DegenerateGrid(_) | Error::OutOfRegime { .. } => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn usage(flag: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("--{flag}: {msg}"))
}

/// Parses `argv` (including the program name) and runs it.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_RUNTIME
        }
    }
}

fn parse_family(flag: &str, name: &str, k: usize, param: f64) -> Result<NamedDensity, Failure> {
    if k == 0 {
        return Err(usage("k", "must be at least 1"));
    }
    let fam: Family = name.parse().map_err(|e| usage(flag, e))?;
    let density = family(fam, k, Some(param)).map_err(|e| usage("param", e))?;
    let label = if fam == Family::TruncGeometric { format!("{fam}({param})") } else { fam.to_string() };
    Ok(NamedDensity::new(label, density))
}

fn parse_estimator(name: &str) -> Result<Estimator, Failure> {
    name.parse().map_err(|e| usage("estimator", e))
}

fn positive(flag: &str, v: u64) -> Result<(), Failure> {
    if v == 0 {
        Err(usage(flag, "must be positive"))
    } else {
        Ok(())
    }
}

fn emit(out: &Output, stdout: &mut dyn Write, write: impl FnOnce(&mut dyn Write) -> Result<(), Failure>) -> Result<(), Failure> {
    match &out.output {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?);
            write(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => write(stdout),
    }
}

fn write_json(w: &mut dyn Write, value: &Value) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Failure::Runtime(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Estimate { truth, n, estimator, seed, renormalize, out } => {
            let f = parse_family("family", &truth.family, truth.k, truth.param)?;
            let est = parse_estimator(&estimator)?;
            positive("n", n)?;
            let counts = sample(&f.density, n, seed);
            let tree: Option<PartitionTree> = match est {
                Estimator::GreedyBinary | Estimator::GreedyBinaryMonotonize => Some(build_greedy_binary(&counts)),
                Estimator::GreedyTernary => Some(build_greedy_ternary(&counts)),
                Estimator::IdealizedBinary => Some(build_idealized_binary(&f.density, n)?),
                Estimator::IdealizedTernary => Some(build_idealized_ternary(&f.density, n)?),
                Estimator::Oracle | Estimator::EmpiricalHistogram => None,
            };
            let estimate = match est.piecewise(&f.density, &counts)? {
                Some(e) if renormalize => e.renormalized()?,
                Some(e) => e,
                None => {
                    let values = est.estimate(&f.density, &counts, false)?;
                    let pieces = values.iter().enumerate().map(|(i, &v)| Piece::constant(i + 1, 1, v)).collect();
                    PiecewiseEstimate::new(values.len(), pieces)?
                }
            };
            let error = tv(&estimate, &f.density)?;
            emit(&out, stdout, |w| match out.format {
                Format::Csv => estimate.write_csv(w).map_err(Failure::from),
                Format::Json => write_json(
                    w,
                    &json!({
                        "family": f.name,
                        "k": truth.k,
                        "n": n,
                        "seed": seed,
                        "estimator": est.name(),
                        "tree": tree,
                        "estimate": estimate,
                        "mass": estimate.mass(),
                        "tv": error,
                    }),
                ),
            })
        }
        Command::Simulate { family: fam, k, param, estimator, n_grid, reps, seed, threads, renormalize, out } => {
            let est = parse_estimator(&estimator)?;
            if reps == 0 {
                return Err(usage("reps", "must be positive"));
            }
            if threads == Some(0) {
                return Err(usage("threads", "must be positive"));
            }
            if n_grid.is_empty() || n_grid.contains(&0) {
                return Err(usage("n-grid", "sample sizes must be positive"));
            }
            if n_grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(usage("n-grid", "must be strictly increasing"));
            }
            let members = if fam == "standard" {
                if k == 0 {
                    return Err(usage("k", "must be at least 1"));
                }
                standard_family(k, n_grid[0], seed)?
            } else {
                vec![parse_family("family", &fam, k, param)?]
            };
            let mut mc = MonteCarlo::new(reps, seed).renormalize(renormalize);
            mc.threads = threads;
            let (reports, slope): (Vec<RiskReport>, Option<(f64, bool)>) = if n_grid.len() >= 3 {
                let s = rate_scaling(est, &members, &n_grid, &mc)?;
                (s.reports, Some((s.slope, s.slope_defined)))
            } else if members.len() == 1 {
                (n_grid.iter().map(|&n| mc_risk(est, &members[0], n, &mc)).collect::<Result<_, _>>()?, None)
            } else {
                (n_grid.iter().map(|&n| sup_risk(est, &members, n, &mc)).collect::<Result<_, _>>()?, None)
            };
            emit(&out, stdout, |w| match out.format {
                Format::Csv => write_risk_csv(&reports, w).map_err(Failure::from),
                Format::Json => {
                    let mut v = json!({ "reports": reports });
                    if let Some((slope, defined)) = slope {
                        v["slope"] = if defined { json!(slope) } else { Value::Null };
                        v["slope_defined"] = json!(defined);
                    }
                    write_json(w, &v)
                }
            })
        }
        Command::Rates { class, n, k, out } => {
            let class: ShapeClass = class.parse().map_err(|e| usage("class", e))?;
            positive("n", n)?;
            if k < 2 {
                return Err(usage("k", "must be at least 2"));
            }
            let r = rate(class, n, k).map_err(|e| usage("k", e))?;
            emit(&out, stdout, |w| match out.format {
                Format::Csv => {
                    writeln!(w, "class,n,k,branch,value")?;
                    let class = if class == ShapeClass::Monotone { "monotone" } else { "convex" };
                    writeln!(w, "{class},{},{},{:?},{}", r.n, r.k, r.branch, r.value)?;
                    Ok(())
                }
                Format::Json => write_json(w, &json!(r)),
            })
        }
        Command::Assouad { regime, n, k, r, epsilon, theta, out } => {
            let regime: Regime = regime.parse().map_err(|e| usage("regime", e))?;
            positive("n", n)?;
            positive("k", k)?;
            if r == Some(0) {
                return Err(usage("r", "must be positive"));
            }
            let (r, epsilon) = match (r, epsilon) {
                (Some(r), Some(e)) => (r, e),
                (r_flag, e_flag) => {
                    let (r0, e0) = assouad_default_params(regime, n, k)?;
                    (r_flag.unwrap_or(r0), e_flag.unwrap_or(e0))
                }
            };
            let theta = match theta {
                Some(bits) => parse_theta(&bits).map_err(|e| usage("theta", e))?,
                None => vec![false; r],
            };
            if theta.len() != r {
                return Err(usage("theta", format!("has {} bits, r = {r}", theta.len())));
            }
            let spec = HypercubeSpec { regime, n, k, r, epsilon, theta };
            let cube = Hypercube::new(regime, k, r, epsilon)?;
            let truncated = k > shapetree::assouad::MAX_MATERIALIZED_ATOMS;
            let density: DiscreteDensity =
                if truncated { cube.density_truncated(&spec.theta)? } else { cube.density(&spec.theta)? };
            emit(&out, stdout, |w| match out.format {
                Format::Csv => density.write_csv(w).map_err(Failure::from),
                Format::Json => {
                    let lower = assouad_lower_bound(r, cube.separation_bound(), cube.affinity_bound(), n).ok();
                    write_json(
                        w,
                        &json!({
                            "spec": spec,
                            "bins": cube.bins(),
                            "support_len": cube.support_len(),
                            "truncated": truncated,
                            "separation_bound": cube.separation_bound(),
                            "affinity_bound": cube.affinity_bound(),
                            "lower_bound": lower,
                            "density": density,
                        }),
                    )
                }
            })
        }
        Command::Vc { ell, m, out } => {
            if ell == 0 {
                return Err(usage("ell", "must be positive"));
            }
            if m == 0 {
                return Err(usage("m", "must be positive"));
            }
            let dim = vc_unions_intervals_brute(ell, m).map_err(|e| usage("m", e))?;
            emit(&out, stdout, |w| match out.format {
                Format::Csv => {
                    writeln!(w, "ell,m,vc")?;
                    writeln!(w, "{ell},{m},{dim}")?;
                    Ok(())
                }
                Format::Json => write_json(w, &json!({ "ell": ell, "m": m, "vc": dim })),
            })
        }
        Command::Mde { candidates, truth, k, n, seed, out } => {
            if candidates.is_empty() {
                return Err(usage("candidates", "at least one candidate is required"));
            }
            positive("n", n)?;
            let members = candidates
                .iter()
                .map(|c| {
                    let (name, param) = match c.split_once(':') {
                        Some((name, p)) => (name, p.parse::<f64>().map_err(|e| usage("candidates", e))?),
                        None => (c.as_str(), 0.9),
                    };
                    parse_family("candidates", name, k, param)
                })
                .collect::<Result<Vec<_>, _>>()?;
            if truth >= members.len() {
                return Err(usage("truth", format!("index {truth} with {} candidates", members.len())));
            }
            let labels = members.iter().map(|m| Some(m.name.clone())).collect();
            let cs = CandidateSet::with_labels(members.iter().map(|m| m.density.clone()).collect(), labels)?;
            let counts = sample(&members[truth].density, n, seed);
            let chosen = minimum_distance_estimate(&cs, &counts)?;
            let deviations = yatracos_deviations(&cs, &counts, &yatracos_class(&cs))?;
            emit(&out, stdout, |w| match out.format {
                Format::Csv => {
                    writeln!(w, "index,label,deviation,chosen")?;
                    for (i, d) in deviations.iter().enumerate() {
                        writeln!(w, "{i},{},{d},{}", cs.label(i).unwrap_or(""), i == chosen)?;
                    }
                    Ok(())
                }
                Format::Json => write_json(
                    w,
                    &json!({
                        "chosen": chosen,
                        "label": cs.label(chosen),
                        "truth": truth,
                        "deviations": deviations,
                        "tv_to_truth": tv(&cs.candidates()[chosen], &members[truth].density)?,
                    }),
                ),
            })
        }
    }
}
