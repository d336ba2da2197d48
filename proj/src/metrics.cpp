#include "elastic/metrics.hpp"

#include <cmath>
#include <map>
#include <utility>

namespace elastic {

namespace {

double choose2(double n) { return 0.5 * n * (n - 1.0); }

}  // namespace

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw InputError("partitions have different lengths");
  if (a.size() < 2) throw InputError("adjusted Rand index needs at least two elements");

  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [key, n] : joint) index += choose2(n);
  double sum_rows = 0.0;
  for (const auto& [key, n] : rows) sum_rows += choose2(n);
  double sum_cols = 0.0;
  for (const auto& [key, n] : cols) sum_cols += choose2(n);

  const double expected = sum_rows * sum_cols / choose2(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sum_rows + sum_cols);
  const double denom = max_index - expected;
  if (denom == 0.0) {
    // Both partitions are all-singletons or both are one cluster.
    return index == max_index ? 1.0 : 0.0;
  }
  return (index - expected) / denom;
}

PointwiseBand pointwise_band(const std::vector<Func>& funcs, double n_sd) {
  if (funcs.size() < 2) throw InputError("pointwise band needs at least two functions");
  const Grid& grid = funcs.front().grid();
  const auto t = funcs.front().values().rows();
  const auto m = funcs.front().dims();
  // Moments of the data shifted by the first function, so equal values give exactly zero spread.
  const Eigen::MatrixXd& shift = funcs.front().values();
  Eigen::MatrixXd offset = Eigen::MatrixXd::Zero(t, m);
  for (const auto& f : funcs) {
    if (!(f.grid() == grid) || f.dims() != m) throw InputError("functions do not share grid and dimension");
    offset += f.values() - shift;
  }
  const double n = static_cast<double>(funcs.size());
  offset /= n;
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(t, m);
  for (const auto& f : funcs) var += (f.values() - shift - offset).cwiseAbs2();
  var /= (n - 1.0);
  const Eigen::MatrixXd mean = shift + offset;
  const Eigen::MatrixXd spread = n_sd * var.cwiseSqrt();
  return PointwiseBand{grid, mean, mean - spread, mean + spread};
}

}  // namespace elastic
