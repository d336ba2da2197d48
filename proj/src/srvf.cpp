#include "elastic/srvf.hpp"

#include <algorithm>
#include <cmath>

namespace elastic {

namespace {

void require_same_shape(const Grid& a, const Grid& b, Eigen::Index da, Eigen::Index db) {
  if (!(a == b)) throw InputError("grids differ");
  if (da != db) throw InputError("codomain dimensions differ");
}

// Index i such that grid[i] <= t <= grid[i+1], with t clamped to [0,1].
std::pair<std::size_t, double> locate(const Grid& grid, double t) {
  const std::size_t n = grid.size();
  t = std::clamp(t, 0.0, 1.0);
  std::size_t i = 0;
  if (grid.is_uniform()) {
    const double pos = t * static_cast<double>(n - 1);
    i = std::min(static_cast<std::size_t>(pos), n - 2);
  } else {
    const auto& p = grid.points();
    auto it = std::upper_bound(p.begin(), p.end(), t);
    i = static_cast<std::size_t>(std::distance(p.begin(), it));
    i = std::clamp<std::size_t>(i, 1, n - 1) - 1;
  }
  const double lo = grid[i];
  const double hi = grid[i + 1];
  const double w = (t - lo) / (hi - lo);
  return {i, std::clamp(w, 0.0, 1.0)};
}

}  // namespace

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
  const std::size_t n = points_.size();
  if (n < 3) throw InputError("grid needs at least 3 points");
  if (points_.front() != 0.0 || points_.back() != 1.0) {
    throw InputError("grid must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(points_[i] > points_[i - 1])) throw InputError("grid must be strictly increasing");
  }
  const double h = 1.0 / static_cast<double>(n - 1);
  uniform_ = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(points_[i] - static_cast<double>(i) * h) > 1e-12) {
      uniform_ = false;
      break;
    }
  }
  weights_.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double half = 0.5 * (points_[i] - points_[i - 1]);
    weights_[i - 1] += half;
    weights_[i] += half;
  }
}

Grid Grid::uniform(std::size_t size) {
  if (size < 3) throw InputError("grid needs at least 3 points");
  std::vector<double> p(size);
  const double h = 1.0 / static_cast<double>(size - 1);
  for (std::size_t i = 0; i < size; ++i) p[i] = static_cast<double>(i) * h;
  p.back() = 1.0;
  return Grid(std::move(p));
}

double Grid::spacing() const {
  if (!uniform_) throw InputError("grid is not uniform");
  return 1.0 / static_cast<double>(points_.size() - 1);
}

Warping::Warping(Grid grid, Eigen::VectorXd gamma) : grid_(std::move(grid)), gamma_(std::move(gamma)) {
  const auto n = static_cast<Eigen::Index>(grid_.size());
  if (gamma_.size() != n) throw InputError("warping length does not match grid");
  if (!gamma_.allFinite()) throw InputError("warping values must be finite");
  if (gamma_[0] != 0.0 || gamma_[n - 1] != 1.0) {
    throw InputError("warping must satisfy gamma(0)=0 and gamma(1)=1");
  }
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(gamma_[i] > gamma_[i - 1])) throw InputError("warping must be strictly increasing");
  }
}

Warping Warping::identity(const Grid& grid) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) g[static_cast<Eigen::Index>(i)] = grid[i];
  return Warping(grid, std::move(g));
}

double Warping::operator()(double t) const {
  const auto [i, w] = locate(grid_, t);
  const auto k = static_cast<Eigen::Index>(i);
  return (1.0 - w) * gamma_[k] + w * gamma_[k + 1];
}

FunctionSample::FunctionSample(Grid g, std::vector<Func> f) : grid(std::move(g)), funcs(std::move(f)) {
  for (const auto& fn : funcs) {
    if (!(fn.grid() == grid)) throw InputError("function grid differs from sample grid");
    if (fn.dims() != funcs.front().dims()) throw InputError("mixed codomain dimensions in sample");
  }
}

Eigen::MatrixXd interpolate(const Grid& grid, const Eigen::MatrixXd& values,
                            const Eigen::VectorXd& at) {
  Eigen::MatrixXd out(at.size(), values.cols());
  for (Eigen::Index r = 0; r < at.size(); ++r) {
    const auto [i, w] = locate(grid, at[r]);
    const auto k = static_cast<Eigen::Index>(i);
    out.row(r) = (1.0 - w) * values.row(k) + w * values.row(k + 1);
  }
  return out;
}

Eigen::MatrixXd gradient(const Grid& grid, const Eigen::MatrixXd& values) {
  const auto n = values.rows();
  Eigen::MatrixXd d(n, values.cols());
  const auto& t = grid.points();
  d.row(0) = (values.row(1) - values.row(0)) / (t[1] - t[0]);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    d.row(i) = (values.row(i + 1) - values.row(i - 1)) / (t[u + 1] - t[u - 1]);
  }
  const auto last = static_cast<std::size_t>(n - 1);
  d.row(n - 1) = (values.row(n - 1) - values.row(n - 2)) / (t[last] - t[last - 1]);
  return d;
}

Eigen::MatrixXd cumulative_trapezoid(const Grid& grid, const Eigen::MatrixXd& values) {
  Eigen::MatrixXd out(values.rows(), values.cols());
  out.row(0).setZero();
  for (Eigen::Index i = 1; i < values.rows(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const double h = grid[u] - grid[u - 1];
    out.row(i) = out.row(i - 1) + 0.5 * h * (values.row(i) + values.row(i - 1));
  }
  return out;
}

double integrate_squared(const Grid& grid, const Eigen::MatrixXd& values) {
  const auto& w = grid.weights();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    sum += w[static_cast<std::size_t>(i)] * values.row(i).squaredNorm();
  }
  return sum;
}

Srvf to_srvf(const Func& f) {
  const Eigen::MatrixXd df = gradient(f.grid(), f.values());
  Eigen::MatrixXd q(df.rows(), df.cols());
  for (Eigen::Index i = 0; i < df.rows(); ++i) {
    const double speed = df.row(i).norm();
    if (speed < kDerivativeFloor) {
      q.row(i).setZero();
    } else {
      q.row(i) = df.row(i) / std::sqrt(speed);
    }
  }
  return Srvf(f.grid(), std::move(q));
}

Func from_srvf(const Srvf& q, const Eigen::VectorXd& start) {
  if (start.size() != q.dims()) throw InputError("start point dimension differs from SRVF");
  Eigen::MatrixXd velocity(q.values().rows(), q.dims());
  for (Eigen::Index i = 0; i < velocity.rows(); ++i) {
    velocity.row(i) = q.values().row(i) * q.values().row(i).norm();
  }
  Eigen::MatrixXd f = cumulative_trapezoid(q.grid(), velocity);
  f.rowwise() += start.transpose();
  return Func(q.grid(), std::move(f));
}

Func warp_func(const Func& f, const Warping& gamma) {
  if (!(f.grid() == gamma.grid())) throw InputError("function and warping grids differ");
  return Func(f.grid(), interpolate(f.grid(), f.values(), gamma.gamma()));
}

Srvf warp_srvf(const Srvf& q, const Warping& gamma) {
  if (!(q.grid() == gamma.grid())) throw InputError("SRVF and warping grids differ");
  Eigen::MatrixXd out = interpolate(q.grid(), q.values(), gamma.gamma());
  const Eigen::MatrixXd slope = gradient(gamma.grid(), gamma.gamma());
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) *= std::sqrt(std::max(slope(i, 0), 0.0));
  return Srvf(q.grid(), std::move(out));
}

double l2_distance(const Srvf& a, const Srvf& b) {
  require_same_shape(a.grid(), b.grid(), a.dims(), b.dims());
  return std::sqrt(integrate_squared(a.grid(), a.values() - b.values()));
}

double l2_norm(const Srvf& q) { return std::sqrt(integrate_squared(q.grid(), q.values())); }

Warping compose(const Warping& outer, const Warping& inner) {
  if (!(outer.grid() == inner.grid())) throw InputError("warping grids differ");
  Eigen::VectorXd g = interpolate(outer.grid(), outer.gamma(), inner.gamma());
  const auto n = g.size();
  g[0] = 0.0;
  g[n - 1] = 1.0;
  return Warping(outer.grid(), std::move(g));
}

Warping invert(const Warping& gamma) {
  // Swap the roles of (t, gamma(t)): interpolate t as a function of gamma.
  const Grid& grid = gamma.grid();
  const auto n = static_cast<Eigen::Index>(grid.size());
  const Eigen::VectorXd& g = gamma.gamma();
  Eigen::VectorXd inv(n);
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = grid[static_cast<std::size_t>(i)];
    while (j + 2 < n && g[j + 1] < t) ++j;
    const double w = std::clamp((t - g[j]) / (g[j + 1] - g[j]), 0.0, 1.0);
    inv[i] = (1.0 - w) * grid[static_cast<std::size_t>(j)] + w * grid[static_cast<std::size_t>(j + 1)];
  }
  inv[0] = 0.0;
  inv[n - 1] = 1.0;
  return Warping(grid, std::move(inv));
}

Func resample(const Func& f, const Grid& grid) {
  Eigen::VectorXd at(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) at[static_cast<Eigen::Index>(i)] = grid[i];
  return Func(grid, interpolate(f.grid(), f.values(), at));
}

Srvf mean_srvf(const std::vector<Srvf>& qs) {
  if (qs.empty()) throw InputError("mean of an empty SRVF list");
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(qs.front().values().rows(), qs.front().dims());
  for (const auto& q : qs) {
    require_same_shape(q.grid(), qs.front().grid(), q.dims(), qs.front().dims());
    sum += q.values();
  }
  sum /= static_cast<double>(qs.size());
  return Srvf(qs.front().grid(), std::move(sum));
}

double within_cost(const Srvf& center, const std::vector<Srvf>& qs) {
  double cost = 0.0;
  for (const auto& q : qs) {
    const double d = l2_distance(center, q);
    cost += d * d;
  }
  return cost;
}

}  // namespace elastic
