#include "elastic/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

namespace elastic {

Eigen::VectorXd flatten(const Srvf& q) {
  const Eigen::MatrixXd& v = q.values();
  Eigen::VectorXd out(v.size());
  for (Eigen::Index d = 0; d < v.cols(); ++d) out.segment(d * v.rows(), v.rows()) = v.col(d);
  return out;
}

FpcaResult cluster_fpca(const std::vector<Srvf>& aligned, double dt) {
  if (aligned.empty()) throw InputError("fPCA of an empty cluster");
  if (!(dt > 0.0)) throw InputError("time step must be positive");
  const auto rows = static_cast<Eigen::Index>(aligned.size());
  const Eigen::Index cols = aligned.front().values().size();
  Eigen::MatrixXd data(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::VectorXd row = flatten(aligned[static_cast<std::size_t>(i)]);
    if (row.size() != cols) throw InputError("aligned SRVFs have different shapes");
    data.row(i) = row.transpose();
  }
  FpcaResult out;
  out.mean = data.colwise().mean().transpose();
  data.rowwise() -= out.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeFullV);
  const Eigen::VectorXd& omega = svd.singularValues();
  out.variances = Eigen::VectorXd::Zero(cols);
  out.variances.head(omega.size()) = (dt / static_cast<double>(rows)) * omega.cwiseAbs2();
  out.weights = svd.matrixV() / std::sqrt(dt);
  return out;
}

std::size_t dimension_for(const Eigen::VectorXd& variances, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw InputError("rho must lie in (0, 1)");
  const double total = variances.sum();
  if (!(total > 0.0)) return 1;
  const double target = rho * total * (1.0 - 1e-12);
  double running = 0.0;
  for (Eigen::Index j = 0; j < variances.size(); ++j) {
    running += variances[j];
    if (running >= target) return static_cast<std::size_t>(j + 1);
  }
  return static_cast<std::size_t>(variances.size());
}

std::size_t choose_dimension(const std::vector<Eigen::VectorXd>& variances, double rho) {
  std::size_t d = 1;
  for (const auto& v : variances) d = std::max(d, dimension_for(v, rho));
  return d;
}

Eigen::VectorXd pc_coefficients(const Srvf& q, const Eigen::VectorXd& mean, const Eigen::MatrixXd& weights,
                                std::size_t d, double dt) {
  const Eigen::VectorXd row = flatten(q);
  if (row.size() != mean.size() || weights.rows() != row.size()) {
    throw InputError("SRVF shape does not match the fPCA basis");
  }
  if (d > static_cast<std::size_t>(weights.cols())) throw InputError("d exceeds the available components");
  const auto dd = static_cast<Eigen::Index>(d);
  return dt * (weights.leftCols(dd).transpose() * (row - mean));
}

GmmBic gmm_bic(const std::vector<int>& labels, const Eigen::MatrixXd& coefficients, std::size_t k) {
  const auto n = static_cast<std::size_t>(coefficients.rows());
  const Eigen::Index d = coefficients.cols();
  if (labels.size() != n) throw InputError("labels and coefficients differ in length");
  if (n == 0 || k == 0 || d == 0) throw InputError("empty mixture problem");

  GmmBic out;
  GmmFit& fit = out.fit;
  fit.k = k;
  fit.d = static_cast<std::size_t>(d);
  std::vector<std::size_t> counts(k, 0);
  fit.mus.assign(k, Eigen::VectorXd::Zero(d));
  fit.sigmas.assign(k, Eigen::VectorXd::Zero(d));
  for (std::size_t i = 0; i < n; ++i) {
    const int l = labels[i];
    if (l < 0 || static_cast<std::size_t>(l) >= k) throw InputError("label outside [0, K)");
    ++counts[static_cast<std::size_t>(l)];
    fit.mus[static_cast<std::size_t>(l)] += coefficients.row(static_cast<Eigen::Index>(i)).transpose();
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) throw InputError("every cluster needs at least one member");
    fit.mus[c] /= static_cast<double>(counts[c]);
    fit.alphas.push_back(static_cast<double>(counts[c]) / static_cast<double>(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    fit.sigmas[c] += (coefficients.row(static_cast<Eigen::Index>(i)).transpose() - fit.mus[c]).cwiseAbs2();
  }
  for (std::size_t c = 0; c < k; ++c) {
    fit.sigmas[c] /= static_cast<double>(counts[c]);
    for (Eigen::Index j = 0; j < d; ++j) {
      if (fit.sigmas[c][j] < kVarianceFloor) {
        fit.sigmas[c][j] = kVarianceFloor;
        fit.variance_floored = true;
      }
    }
  }

  const double log_2pi = std::log(2.0 * std::numbers::pi);
  double loglik = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    const Eigen::VectorXd r = coefficients.row(static_cast<Eigen::Index>(i)).transpose() - fit.mus[c];
    const double quad = (r.cwiseAbs2().array() / fit.sigmas[c].array()).sum();
    const double logdet = fit.sigmas[c].array().log().sum();
    loglik += std::log(fit.alphas[c]) - 0.5 * (static_cast<double>(d) * log_2pi + logdet + quad);
  }
  fit.loglik = loglik;
  const double params = static_cast<double>((2 * static_cast<std::size_t>(d) + 1) * k) - 1.0;
  out.penalty = std::log(static_cast<double>(n)) * params;
  out.bic = -2.0 * loglik + out.penalty;
  return out;
}

BicReport bic_report(const std::vector<ClusteringResult>& clusterings, double rho) {
  if (clusterings.empty()) throw InputError("no clusterings to score");
  const std::size_t n = clusterings.front().labels.size();
  const double dt = clusterings.front().aligned_srvfs.front().grid().spacing();

  std::vector<std::vector<FpcaResult>> fpca(clusterings.size());
  std::vector<Eigen::VectorXd> all_variances;
  BicReport report;
  report.rho = rho;
  report.n = n;
  for (std::size_t idx = 0; idx < clusterings.size(); ++idx) {
    const ClusteringResult& r = clusterings[idx];
    if (r.labels.size() != n) throw InputError("clusterings cover different samples");
    std::vector<std::vector<double>> curves;
    for (std::size_t c = 0; c < r.k; ++c) {
      std::vector<Srvf> members;
      for (std::size_t i = 0; i < n; ++i) {
        if (r.labels[i] == static_cast<int>(c)) members.push_back(r.aligned_srvfs[i]);
      }
      fpca[idx].push_back(cluster_fpca(members, dt));
      const Eigen::VectorXd& v = fpca[idx].back().variances;
      all_variances.push_back(v);
      std::vector<double> curve;
      const double total = v.sum();
      double running = 0.0;
      for (Eigen::Index j = 0; j < v.size(); ++j) {
        running += v[j];
        curve.push_back(total > 0.0 ? running / total : 1.0);
        if (curve.back() >= 1.0 - 1e-12) break;
      }
      curves.push_back(std::move(curve));
    }
    report.explained.push_back(std::move(curves));
  }
  report.d = choose_dimension(all_variances, rho);

  for (std::size_t idx = 0; idx < clusterings.size(); ++idx) {
    const ClusteringResult& r = clusterings[idx];
    Eigen::MatrixXd coefficients(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(report.d));
    for (std::size_t i = 0; i < n; ++i) {
      const FpcaResult& basis = fpca[idx][static_cast<std::size_t>(r.labels[i])];
      coefficients.row(static_cast<Eigen::Index>(i)) =
          pc_coefficients(r.aligned_srvfs[i], basis.mean, basis.weights, report.d, dt).transpose();
    }
    const GmmBic g = gmm_bic(r.labels, coefficients, r.k);
    report.per_k.push_back(BicEntry{r.k, g.bic, g.fit.loglik, g.penalty, report.d, g.fit.variance_floored});
  }
  std::size_t best = 0;
  for (std::size_t idx = 1; idx < report.per_k.size(); ++idx) {
    if (report.per_k[idx].bic < report.per_k[best].bic) best = idx;
  }
  report.chosen_k = report.per_k[best].k;
  return report;
}

Selection select_k(const FunctionSample& sample, std::size_t k_max, double rho, const KmeansConfig& config) {
  if (k_max < 1) throw InputError("K_max must be at least 1");
  if (k_max > sample.size()) throw InputError("K_max exceeds the sample size");
  Selection out;
  for (std::size_t k = 1; k <= k_max; ++k) {
    KmeansConfig c = config;
    c.k = k;
    out.clusterings.push_back(elastic_kmeans(sample, c));
  }
  out.report = bic_report(out.clusterings, rho);
  return out;
}

}  // namespace elastic
