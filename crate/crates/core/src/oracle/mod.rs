//! Exhaustive ground truth for small instances.

mod cluster;
mod enumerate;
mod first_moment;
mod pairs;

pub use cluster::{build_solution_path, cluster_decomposition, hypergraph_components, ClusterReport};
pub use enumerate::{enumerate_solutions, EnumerationLimits, SolutionSet, DEFAULT_MAX_VARS};
pub use first_moment::{expected_z, monte_carlo_pair_count, ExpectedZ, MonteCarloEstimate};
pub use pairs::{
    count_overlap_pairs, format_ratio, overlap_support, DistanceHistogram, HistogramMethod,
};
