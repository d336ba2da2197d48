#include "elastic/simulation.hpp"

#include <cmath>
#include <random>

#include "elastic/clustering.hpp"

namespace elastic {

namespace {

constexpr double kAlphaRange = 3.0;

std::vector<double> draw_amplitudes(std::size_t count, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> z(1.0, sd);
  std::vector<double> out(count);
  for (double& v : out) v = z(rng);
  return out;
}

void check_common(std::size_t n, double tau, std::size_t k_star, std::size_t grid_size) {
  if (k_star < 1) throw InputError("K* must be at least 1");
  if (!(tau > 0.0)) throw InputError("tau must be positive");
  if (n < k_star) throw InputError("N must be at least K*");
  if (grid_size < 3) throw InputError("grid needs at least 3 points");
}

}  // namespace

double amplitude_sd(double tau, AmplitudeScale scale) {
  return scale == AmplitudeScale::kVariance ? std::sqrt(tau) : tau;
}

Warping random_warping(const Grid& grid, double alpha) {
  if (alpha == 0.0) return Warping::identity(grid);
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd g(n);
  const double denom = std::expm1(alpha);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = std::expm1(alpha * grid[static_cast<std::size_t>(i)]) / denom;
  g[0] = 0.0;
  g[n - 1] = 1.0;
  return Warping(grid, std::move(g));
}

double gaussian_kernel(double t, double mu, double sigma) {
  const double u = (t - mu) / sigma;
  return std::exp(-0.5 * u * u);
}

double kernel_sum(double t, const std::vector<double>& amplitudes) {
  const double p = static_cast<double>(amplitudes.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < amplitudes.size(); ++j) {
    const double mu = (2.0 * static_cast<double>(j + 1) - 1.0) / (2.0 * p);
    sum += amplitudes[j] * gaussian_kernel(t, mu, 1.0 / (3.0 * p));
  }
  return sum;
}

LabeledSample generate_sim1(const Sim1Config& config) {
  check_common(config.n, config.tau, config.k_star, config.grid_size);
  const Grid grid = Grid::uniform(config.grid_size);
  const double sd = amplitude_sd(config.tau, config.scale);
  std::vector<Func> funcs;
  std::vector<int> labels;
  std::vector<Warping> warpings;
  std::vector<std::vector<double>> amplitudes;
  for (std::size_t i = 0; i < config.n; ++i) {
    std::mt19937_64 rng(derive_seed(config.seed, i));
    std::uniform_int_distribution<std::size_t> peaks(1, config.k_star);
    std::uniform_real_distribution<double> alpha(-kAlphaRange, kAlphaRange);
    const std::size_t p = peaks(rng);
    Warping gamma = random_warping(grid, alpha(rng));
    const std::vector<double> z = draw_amplitudes(p, sd, rng);
    Eigen::MatrixXd values(static_cast<Eigen::Index>(grid.size()), 1);
    for (Eigen::Index r = 0; r < values.rows(); ++r) values(r, 0) = kernel_sum(gamma.gamma()[r], z);
    funcs.emplace_back(grid, std::move(values));
    labels.push_back(static_cast<int>(p) - 1);
    warpings.push_back(std::move(gamma));
    amplitudes.push_back(z);
  }
  return LabeledSample{FunctionSample(grid, std::move(funcs)), std::move(labels), std::move(warpings),
                       std::move(amplitudes)};
}

LabeledSample generate_sim2(const Sim2Config& config) {
  check_common(config.n, config.tau, config.k_star, config.grid_size);
  if (config.k_star > 3) throw InputError("the two-dimensional generator supports K* <= 3");
  const Grid grid = Grid::uniform(config.grid_size);
  const double sd = amplitude_sd(config.tau, config.scale);
  std::vector<Func> funcs;
  std::vector<int> labels;
  std::vector<Warping> warpings;
  std::vector<std::vector<double>> amplitudes;
  for (std::size_t i = 0; i < config.n; ++i) {
    std::mt19937_64 rng(derive_seed(config.seed, i));
    std::uniform_int_distribution<std::size_t> cluster(1, config.k_star);
    std::uniform_real_distribution<double> alpha(-kAlphaRange, kAlphaRange);
    const std::size_t c = cluster(rng) - 1;
    Warping gamma = random_warping(grid, alpha(rng));
    Eigen::MatrixXd values(static_cast<Eigen::Index>(grid.size()), 2);
    std::vector<double> drawn;
    for (Eigen::Index l = 0; l < 2; ++l) {
      const auto peaks = static_cast<std::size_t>(kSim2Peaks[c][l]);
      const std::vector<double> z = draw_amplitudes(peaks, sd, rng);
      drawn.insert(drawn.end(), z.begin(), z.end());
      for (Eigen::Index r = 0; r < values.rows(); ++r) values(r, l) = kernel_sum(gamma.gamma()[r], z);
    }
    funcs.emplace_back(grid, std::move(values));
    labels.push_back(static_cast<int>(c));
    warpings.push_back(std::move(gamma));
    amplitudes.push_back(std::move(drawn));
  }
  return LabeledSample{FunctionSample(grid, std::move(funcs)), std::move(labels), std::move(warpings),
                       std::move(amplitudes)};
}

std::size_t count_peaks(const Eigen::VectorXd& values, double fraction) {
  const double lo = values.minCoeff();
  const double threshold = lo + fraction * (values.maxCoeff() - lo);
  std::size_t count = 0;
  for (Eigen::Index i = 1; i + 1 < values.size(); ++i) {
    if (values[i] > threshold && values[i] > values[i - 1] && values[i] >= values[i + 1]) ++count;
  }
  return count;
}

}  // namespace elastic
