#pragma once

// Discretized functions on [0,1], their square-root velocity representation,
// and the warping group acting on both.

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

#include "elastic/error.hpp"

namespace elastic {

// Ordered time points on [0,1]: strictly increasing, first 0, last 1, at least 3 points.
class Grid {
 public:
  explicit Grid(std::vector<double> points);

  static Grid uniform(std::size_t size);

  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  const std::vector<double>& points() const { return points_; }

  bool is_uniform() const { return uniform_; }
  // Uniform spacing 1/(T-1). Throws InputError on a non-uniform grid.
  double spacing() const;

  // Trapezoidal quadrature weights; they sum to 1.
  const std::vector<double>& weights() const { return weights_; }

  bool operator==(const Grid& other) const { return points_ == other.points_; }

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
  bool uniform_ = false;
};

// A T x m matrix of samples tied to a grid. The tag separates raw functions from
// SRVFs at the type level; both share the same shape rules.
template <class Tag>
class Sampled {
 public:
  Sampled(Grid grid, Eigen::MatrixXd values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.rows() != static_cast<Eigen::Index>(grid_.size())) {
      throw InputError("sample rows do not match grid length");
    }
    if (values_.cols() < 1) throw InputError("codomain dimension must be at least 1");
    if (!values_.allFinite()) throw InputError("sample values must be finite");
  }

  const Grid& grid() const { return grid_; }
  const Eigen::MatrixXd& values() const { return values_; }
  std::size_t size() const { return grid_.size(); }
  Eigen::Index dims() const { return values_.cols(); }

 private:
  Grid grid_;
  Eigen::MatrixXd values_;
};

struct FuncTag {};
struct SrvfTag {};
using Func = Sampled<FuncTag>;
using Srvf = Sampled<SrvfTag>;

// Boundary-pinned, strictly increasing reparameterization of [0,1] sampled on a grid.
class Warping {
 public:
  Warping(Grid grid, Eigen::VectorXd gamma);

  static Warping identity(const Grid& grid);

  const Grid& grid() const { return grid_; }
  const Eigen::VectorXd& gamma() const { return gamma_; }
  std::size_t size() const { return grid_.size(); }

  // Piecewise-linear evaluation at an arbitrary t in [0,1].
  double operator()(double t) const;

 private:
  Grid grid_;
  Eigen::VectorXd gamma_;
};

// N functions on a common grid with a common codomain dimension.
struct FunctionSample {
  Grid grid;
  std::vector<Func> funcs;

  FunctionSample(Grid g, std::vector<Func> f);

  std::size_t size() const { return funcs.size(); }
  Eigen::Index dims() const { return funcs.empty() ? 1 : funcs.front().dims(); }
};

// Numerical helpers shared by the higher-level modules.

// Linear interpolation of each column of `values` (sampled on `grid`) at points `at`.
// Points outside [0,1] are clamped.
Eigen::MatrixXd interpolate(const Grid& grid, const Eigen::MatrixXd& values,
                            const Eigen::VectorXd& at);

// Central differences in the interior, one-sided differences at the endpoints.
Eigen::MatrixXd gradient(const Grid& grid, const Eigen::MatrixXd& values);

// Cumulative trapezoidal integral of each column, starting at zero.
Eigen::MatrixXd cumulative_trapezoid(const Grid& grid, const Eigen::MatrixXd& values);

// Trapezoidal integral of sum over columns of values^2.
double integrate_squared(const Grid& grid, const Eigen::MatrixXd& values);

// |f'| below this is treated as zero velocity.
inline constexpr double kDerivativeFloor = 1e-12;

Srvf to_srvf(const Func& f);
Func from_srvf(const Srvf& q, const Eigen::VectorXd& start);

// (f o gamma)(t_i) = f(gamma(t_i)).
Func warp_func(const Func& f, const Warping& gamma);
// (q o gamma) * sqrt(gamma').
Srvf warp_srvf(const Srvf& q, const Warping& gamma);

double l2_distance(const Srvf& a, const Srvf& b);
double l2_norm(const Srvf& q);

// (outer o inner)(t) = outer(inner(t)).
Warping compose(const Warping& outer, const Warping& inner);
Warping invert(const Warping& gamma);

// Resample onto another grid by linear interpolation.
Func resample(const Func& f, const Grid& grid);

// Pointwise mean of SRVFs sharing a grid and dimension.
Srvf mean_srvf(const std::vector<Srvf>& qs);

// Sum of squared L2 distances from `center` to each element of `qs`.
double within_cost(const Srvf& center, const std::vector<Srvf>& qs);

}  // namespace elastic
