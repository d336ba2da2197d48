#pragma once

// Choosing the number of clusters: per-cluster fPCA of aligned SRVFs, PC
// coefficients, a diagonal Gaussian mixture fitted in closed form from the
// k-means labels, and its BIC
//
//   BIC_K = -2 loglik + log(N) * ((2d + 1) K - 1).

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "elastic/clustering.hpp"
#include "elastic/srvf.hpp"

namespace elastic {

struct FpcaResult {
  Eigen::VectorXd mean;      // length T*m, dimension-major
  Eigen::MatrixXd weights;   // (T*m) x (T*m); column j is the j-th PC weight function
  Eigen::VectorXd variances; // non-increasing, length T*m
};

// Flattens an SRVF dimension-major into a row vector of length T*m.
Eigen::VectorXd flatten(const Srvf& q);

// SVD of the centered data matrix: variances dt/|M| * omega_j^2, weights V / sqrt(dt).
FpcaResult cluster_fpca(const std::vector<Srvf>& aligned, double dt);

// Smallest r with sum_{j<=r} lambda_j >= rho * sum_j lambda_j (1 for zero variance).
std::size_t dimension_for(const Eigen::VectorXd& variances, double rho);

// Largest dimension_for over every cluster of every K.
std::size_t choose_dimension(const std::vector<Eigen::VectorXd>& variances, double rho);

// c_j = dt * (q - mean) . w_j for j < d.
Eigen::VectorXd pc_coefficients(const Srvf& q, const Eigen::VectorXd& mean, const Eigen::MatrixXd& weights,
                                std::size_t d, double dt);

inline constexpr double kVarianceFloor = 1e-8;

struct GmmFit {
  std::size_t k = 0;
  std::size_t d = 0;
  std::vector<double> alphas;
  std::vector<Eigen::VectorXd> mus;
  std::vector<Eigen::VectorXd> sigmas;  // diagonal variances
  double loglik = 0.0;
  bool variance_floored = false;
};

struct GmmBic {
  GmmFit fit;
  double bic = 0.0;
  double penalty = 0.0;
};

// Closed-form MLEs for labels in [0, k) and an N x d coefficient matrix.
GmmBic gmm_bic(const std::vector<int>& labels, const Eigen::MatrixXd& coefficients, std::size_t k);

struct BicEntry {
  std::size_t k = 0;
  double bic = 0.0;
  double loglik = 0.0;
  double penalty = 0.0;
  std::size_t d = 0;
  bool variance_floored = false;
};

struct BicReport {
  std::vector<BicEntry> per_k;
  std::size_t chosen_k = 0;
  double rho = 0.0;
  std::size_t d = 0;
  std::size_t n = 0;
  // explained[K-1][k] holds the cumulative explained-variance fractions of
  // cluster k for the K-cluster solution, truncated once they reach 1.
  std::vector<std::vector<std::vector<double>>> explained;
};

struct Selection {
  BicReport report;
  std::vector<ClusteringResult> clusterings;  // index K-1
};

// BIC report for already-computed clusterings of one sample (index K-1 holds K clusters).
BicReport bic_report(const std::vector<ClusteringResult>& clusterings, double rho);

// Runs elastic k-means for K = 1..k_max (config.k is ignored) and scores each K.
Selection select_k(const FunctionSample& sample, std::size_t k_max, double rho, const KmeansConfig& config);

}  // namespace elastic
