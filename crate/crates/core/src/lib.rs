//! Tree-based minimax estimators for discrete non-increasing and
//! non-increasing convex densities on `{1, …, k}`, together with the metrics,
//! lower-bound constructions and Monte Carlo tooling used to check them.
//!
//! ```
//! use shapetree::{build_greedy_binary, family, histogram_estimate, monotonize, sample, tv, Family};
//!
//! let f = family(Family::HarmonicZipf, 64, None).unwrap();
//! let counts = sample(&f, 1000, 7);
//! let tree = build_greedy_binary(&counts);
//! let estimate = monotonize(&histogram_estimate(&tree, &counts).unwrap()).unwrap();
//! assert!(tv(&estimate, &f).unwrap() < 0.5);
//! ```

pub mod assouad;
pub mod density;
pub mod error;
pub mod estimate;
pub mod mde;
pub mod metrics;
pub mod monotone;
pub mod rates;
pub mod risk;
pub mod sampling;
pub mod tree;
pub mod vc;

pub use assouad::{assouad_default_params, assouad_density, parse_theta, Hypercube, HypercubeSpec, Regime};
pub use density::{family, is_convex_non_increasing, is_non_increasing, make_density, DiscreteDensity, Family};
pub use error::{Error, Result};
pub use estimate::{
    greedy_pl_estimate, histogram_estimate, idealized_pc_estimate, idealized_pl_estimate, Piece, PieceKind,
    PiecewiseEstimate,
};
pub use mde::{minimum_distance_estimate, yatracos_class, CandidateSet};
pub use metrics::{assouad_lower_bound, hellinger_affinity, tv, tv_sup_bruteforce, PerAtom};
pub use monotone::monotonize;
pub use rates::{rate_convex, rate_monotone, Branch, RateRegime, ShapeClass};
pub use risk::{mc_risk, rate_scaling, standard_family, sup_risk, Estimator, MonteCarlo, NamedDensity, RiskReport};
pub use sampling::{empirical_sup_deviation, interval_count, replication_seed, sample, AtomSet, SampleCounts};
pub use tree::{
    build_greedy_binary, build_greedy_ternary, build_idealized_binary, build_idealized_ternary,
    greedy_split_decision, pad_to_power, ternary_split_decision, Interval, PartitionTree,
};
pub use vc::vc_unions_intervals_brute;
