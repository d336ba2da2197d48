#pragma once

// Elastic k-means over SRVF orbits, the non-empty cluster assignment, and
// Euclidean k-means baselines on discretized functions.
//
// Cluster labels are zero-based throughout the library.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "elastic/alignment.hpp"
#include "elastic/srvf.hpp"

namespace elastic {

struct KmeansConfig {
  std::size_t k = 2;
  std::size_t n_restarts = 10;
  std::size_t max_iter = 50;
  double epsilon = 1e-3;
  DpConfig dp;
  std::uint64_t seed = 0;
};

struct ClusteringResult {
  std::size_t k = 0;
  std::vector<int> labels;
  std::vector<Srvf> templates;
  std::vector<Func> template_funcs;
  std::vector<Warping> warpings;
  std::vector<Func> aligned_funcs;
  std::vector<Srvf> aligned_srvfs;
  // Cost L(eta^(n-1), delta^(n)) recorded after each assignment step.
  std::vector<double> cost_trace;
  // Cost traces of every restart in restart order; restart_traces[restart] == cost_trace.
  std::vector<std::vector<double>> restart_traces;
  // Within-cluster sum of squared L2 distances between the final templates and
  // the final aligned SRVFs; restarts are ranked by this value.
  double final_cost = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t restart = 0;
  // Every input function is identical, so any partition is optimal.
  bool degenerate = false;
};

ClusteringResult elastic_kmeans(const FunctionSample& sample, const KmeansConfig& config);

// Minimizes sum_i dist(i, label_i)^2 subject to every cluster receiving at least
// one member. `dist` is N x K. The unconstrained argmin (lowest index on ties) is
// returned as is when it already covers every cluster.
std::vector<int> assign_non_empty(const Eigen::MatrixXd& dist);

// Lloyd's algorithm on the rows of `data`, best of n_restarts by within-cluster
// sum of squares. Initial centers are distinct random rows.
std::vector<int> kmeans_euclidean(const Eigen::MatrixXd& data, std::size_t k, std::size_t n_restarts,
                                  std::uint64_t seed, std::size_t max_iter = 100);

// Row i is function i flattened dimension-major (all T values of dim 0, then dim 1, ...).
Eigen::MatrixXd discretize(const std::vector<Func>& funcs);

// Mixes a master seed with a stream index (SplitMix64 finalizer).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace elastic
