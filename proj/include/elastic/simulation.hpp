#pragma once

// Ground-truth generators: sums of Gaussian kernels with random amplitudes,
// observed through random exponential warpings.
//
// Reproducibility: function i of a sample draws from its own std::mt19937_64
// seeded with derive_seed(seed, i), in the order (peak count, warping
// parameter, amplitudes). Identical configs give bit-identical samples.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "elastic/srvf.hpp"

namespace elastic {

// How tau parameterizes the amplitude draws z ~ N(1, .). The default reads tau
// as the standard deviation; kVariance uses sqrt(tau).
enum class AmplitudeScale { kVariance, kStandardDeviation };

struct Sim1Config {
  std::size_t n = 120;
  double tau = 0.05;
  std::size_t k_star = 2;
  std::size_t grid_size = 201;
  std::uint64_t seed = 0;
  AmplitudeScale scale = AmplitudeScale::kStandardDeviation;
};

struct Sim2Config {
  std::size_t n = 120;
  double tau = 0.1;
  std::size_t k_star = 3;  // at most 3
  std::size_t grid_size = 201;
  std::uint64_t seed = 0;
  AmplitudeScale scale = AmplitudeScale::kStandardDeviation;
};

// Standard deviation of the amplitude draws implied by tau.
double amplitude_sd(double tau, AmplitudeScale scale);

struct LabeledSample {
  FunctionSample sample;
  std::vector<int> true_labels;  // zero-based: peak-count class minus one
  std::vector<Warping> true_warpings;
  // Amplitude draws z of each function in draw order (dimension by dimension).
  std::vector<std::vector<double>> true_amplitudes;
};

// gamma(t) = (exp(alpha t) - 1) / (exp(alpha) - 1); the identity when alpha == 0.
Warping random_warping(const Grid& grid, double alpha);

// Gaussian kernel exp(-(t - mu)^2 / (2 sigma^2)).
double gaussian_kernel(double t, double mu, double sigma);

// Sum of `peaks` kernels with centers (2j-1)/(2 peaks), widths 1/(3 peaks).
double kernel_sum(double t, const std::vector<double>& amplitudes);

LabeledSample generate_sim1(const Sim1Config& config);
LabeledSample generate_sim2(const Sim2Config& config);

// Peak counts per (cluster, dimension) for the two-dimensional generator.
inline constexpr int kSim2Peaks[3][2] = {{2, 1}, {1, 2}, {2, 2}};

// Local maxima exceeding `fraction` of the range above the minimum.
std::size_t count_peaks(const Eigen::VectorXd& values, double fraction = 0.1);

}  // namespace elastic
