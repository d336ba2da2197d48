#pragma once

#include <vector>

#include <Eigen/Dense>

#include "elastic/srvf.hpp"

namespace elastic {

// Hubert-Arabie adjusted Rand index. Labels may be any integers. Returns 1 when
// both partitions are identical even if the chance-expected index is degenerate.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

struct PointwiseBand {
  Grid grid;
  Eigen::MatrixXd mean;   // T x m
  Eigen::MatrixXd lower;  // mean - n_sd * sd
  Eigen::MatrixXd upper;  // mean + n_sd * sd

  // Largest upper - lower over all time points and dimensions.
  double max_width() const { return (upper - lower).maxCoeff(); }
};

// Cross-sectional mean +/- n_sd sample standard deviations (1/(N-1) normalization).
PointwiseBand pointwise_band(const std::vector<Func>& funcs, double n_sd = 2.0);

}  // namespace elastic
