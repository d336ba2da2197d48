#pragma once

// Elastic alignment: dynamic-programming pairwise registration of SRVFs, the
// amplitude distance, orbit centering, and Karcher-mean multiple alignment.

#include <cstddef>
#include <utility>
#include <vector>

#include "elastic/srvf.hpp"

namespace elastic {

// DP lattice settings. The lattice uses every `stride`-th grid index on both axes
// (T - 1 must be divisible by stride); admissible moves are the coprime steps
// (p, q) with 1 <= p, q <= max_step.
struct DpConfig {
  std::size_t stride = 1;
  int max_step = 7;
  unsigned threads = 1;
};

std::vector<std::pair<int, int>> coprime_steps(int max_step);

// Optimal lattice path as fine-grid index pairs (t index, gamma index) plus the
// DP objective: the piecewise trapezoidal value of ||q1 - (q2, gamma)||^2.
struct LatticePath {
  std::vector<std::pair<std::size_t, std::size_t>> vertices;
  double cost = 0.0;
};

LatticePath dp_lattice_path(const Srvf& q1, const Srvf& q2, const DpConfig& config);

// Piecewise-linear warping through lattice vertices.
Warping warping_from_path(const Grid& grid, const LatticePath& path);

struct PairwiseAlignment {
  Warping gamma;
  Srvf q_aligned;   // warp_srvf(q2, gamma)
  double distance;  // ||q1 - q_aligned||
};

// Registers q2 to q1: minimizes ||q1 - (q2, gamma)|| over lattice warpings.
// If the lattice optimum reevaluated on the grid is worse than no warping, the
// identity is returned instead.
PairwiseAlignment dp_align(const Srvf& q1, const Srvf& q2, const DpConfig& config = {});

// Amplitude distance; with `symmetric` the smaller of both registration directions.
double amplitude_distance(const Srvf& q1, const Srvf& q2, const DpConfig& config = {},
                          bool symmetric = true);

// Mean warping: average of sqrt(gamma_i') on the unit sphere, renormalized and
// integrated back into a warping.
Warping mean_warping(const std::vector<Warping>& warpings);

struct CenteredOrbit {
  Srvf template_srvf;
  std::vector<Warping> warpings;
};

// Chooses the orbit representative whose warpings average to the identity:
// gamma_i <- gamma_i o mean^-1 and template <- (template, mean^-1).
CenteredOrbit center_orbit(const Srvf& template_srvf, const std::vector<Warping>& warpings);

struct KarcherConfig {
  DpConfig dp;
  std::size_t max_iter = 20;
  double tol = 1e-4;  // relative template change
};

struct MultipleAlignmentResult {
  Srvf template_srvf;
  std::vector<Warping> warpings;
  std::vector<Srvf> aligned;
  std::size_t iterations = 0;
  bool converged = false;
  // Sum of squared amplitude distances to the template at the start of each iteration.
  std::vector<double> cost_trace;
};

MultipleAlignmentResult karcher_mean(const std::vector<Srvf>& qs, const KarcherConfig& config = {});

struct AlignedSample {
  MultipleAlignmentResult alignment;
  std::vector<Func> aligned_funcs;
  Func template_func;
};

AlignedSample multiple_align(const FunctionSample& sample, const KarcherConfig& config = {});

// Reconstructs a template function whose start point is the mean start of `members`.
Func template_function(const Srvf& template_srvf, const std::vector<Func>& members);

}  // namespace elastic
