#include "elastic/clustering.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <numeric>
#include <random>

#include "elastic/parallel.hpp"

namespace elastic {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

// k distinct indices from [0, n) by a partial Fisher-Yates shuffle.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

bool all_identical(const std::vector<Srvf>& qs) {
  for (std::size_t i = 1; i < qs.size(); ++i) {
    if (qs[i].values() != qs.front().values()) return false;
  }
  return true;
}

double mean_relative_change(const std::vector<Srvf>& next, const std::vector<Srvf>& prev) {
  double total = 0.0;
  for (std::size_t c = 0; c < next.size(); ++c) {
    const double change = l2_distance(next[c], prev[c]);
    const double scale = l2_norm(prev[c]);
    total += scale > 0.0 ? change / scale : change;
  }
  return total / static_cast<double>(next.size());
}

// Fills the reconstructed pieces of a result from its labels, warpings and templates.
void finish(const FunctionSample& sample, ClusteringResult& r) {
  const std::size_t n = sample.size();
  r.aligned_funcs.clear();
  r.aligned_funcs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) r.aligned_funcs.push_back(warp_func(sample.funcs[i], r.warpings[i]));
  r.template_funcs.clear();
  r.final_cost = 0.0;
  for (std::size_t c = 0; c < r.k; ++c) {
    std::vector<Func> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (r.labels[i] == static_cast<int>(c)) members.push_back(r.aligned_funcs[i]);
    }
    r.template_funcs.push_back(template_function(r.templates[c], members));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double d = l2_distance(r.templates[static_cast<std::size_t>(r.labels[i])], r.aligned_srvfs[i]);
    r.final_cost += d * d;
  }
}

ClusteringResult single_run(const FunctionSample& sample, const std::vector<Srvf>& qs,
                            const KmeansConfig& config, std::size_t restart) {
  const std::size_t n = qs.size();
  const std::size_t k = config.k;
  std::mt19937_64 rng(derive_seed(config.seed, restart));

  ClusteringResult r;
  r.k = k;
  r.restart = restart;
  for (std::size_t idx : sample_without_replacement(n, k, rng)) r.templates.push_back(qs[idx]);

  std::vector<PairwiseAlignment> sweep(n * k, PairwiseAlignment{Warping::identity(sample.grid), qs.front(), 0.0});
  Eigen::MatrixXd dist(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::size_t iter = 1; iter <= config.max_iter; ++iter) {
    // Alignment of every function to every template.
    parallel_for(n * k, config.dp.threads, [&](std::size_t job) {
      const std::size_t i = job / k;
      const std::size_t c = job % k;
      sweep[job] = dp_align(r.templates[c], qs[i], config.dp);
    });
    // The lattice cannot always represent last iteration's centered warping, so
    // keep it when it fits the current template better. With the centering
    // guard below this makes the cost trace non-increasing.
    if (iter > 1) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(r.labels[i]);
        const double previous = l2_distance(r.templates[c], r.aligned_srvfs[i]);
        if (previous < sweep[i * k + c].distance) {
          sweep[i * k + c] = PairwiseAlignment{r.warpings[i], r.aligned_srvfs[i], previous};
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) {
        dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = sweep[i * k + c].distance;
      }
    }

    // Assignment.
    r.labels = assign_non_empty(dist);
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = dist(static_cast<Eigen::Index>(i), r.labels[i]);
      cost += d * d;
    }
    r.cost_trace.push_back(cost);

    // Orbit centering and template update per cluster.
    std::vector<Warping> warpings(n, Warping::identity(sample.grid));
    std::vector<Srvf> aligned(n, qs.front());
    std::vector<Srvf> next;
    next.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<std::size_t> members;
      std::vector<Warping> member_warpings;
      for (std::size_t i = 0; i < n; ++i) {
        if (r.labels[i] == static_cast<int>(c)) {
          members.push_back(i);
          member_warpings.push_back(sweep[i * k + c].gamma);
        }
      }
      CenteredOrbit centered = center_orbit(r.templates[c], member_warpings);
      std::vector<Srvf> cluster_aligned;
      double assigned = 0.0;
      for (std::size_t j = 0; j < members.size(); ++j) {
        const std::size_t i = members[j];
        cluster_aligned.push_back(warp_srvf(qs[i], centered.warpings[j]));
        assigned += sweep[i * k + c].distance * sweep[i * k + c].distance;
      }
      Srvf mean = mean_srvf(cluster_aligned);
      // Centering is an isometry only up to interpolation error; skip it for
      // this iteration when it would raise the cluster's cost.
      const bool keep_centered = within_cost(mean, cluster_aligned) <= assigned;
      if (!keep_centered) {
        for (std::size_t j = 0; j < members.size(); ++j) cluster_aligned[j] = sweep[members[j] * k + c].q_aligned;
        mean = mean_srvf(cluster_aligned);
      }
      for (std::size_t j = 0; j < members.size(); ++j) {
        const std::size_t i = members[j];
        warpings[i] = keep_centered ? std::move(centered.warpings[j]) : sweep[i * k + c].gamma;
        aligned[i] = std::move(cluster_aligned[j]);
      }
      next.push_back(std::move(mean));
    }

    const double change = mean_relative_change(next, r.templates);
    r.templates = std::move(next);
    r.warpings = std::move(warpings);
    r.aligned_srvfs = std::move(aligned);
    r.iterations = iter;
    if (change < config.epsilon) {
      r.converged = true;
      break;
    }
  }
  finish(sample, r);
  return r;
}

}  // namespace

ClusteringResult elastic_kmeans(const FunctionSample& sample, const KmeansConfig& config) {
  const std::size_t n = sample.size();
  if (config.k < 1) throw InputError("number of clusters must be at least 1");
  if (!(config.epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (n < config.k) throw InputError("fewer functions than clusters");

  std::vector<Srvf> qs;
  qs.reserve(n);
  for (const auto& f : sample.funcs) qs.push_back(to_srvf(f));
  const bool degenerate = config.k > 1 && all_identical(qs);

  if (config.k == 1) {
    // A single cluster is multiple alignment; the start is deterministic, so restarts add nothing.
    MultipleAlignmentResult m = karcher_mean(qs, KarcherConfig{config.dp, config.max_iter, config.epsilon});
    ClusteringResult r;
    r.k = 1;
    r.labels.assign(n, 0);
    r.templates.push_back(std::move(m.template_srvf));
    r.warpings = std::move(m.warpings);
    r.aligned_srvfs = std::move(m.aligned);
    r.cost_trace = std::move(m.cost_trace);
    r.converged = m.converged;
    r.iterations = m.iterations;
    finish(sample, r);
    r.restart_traces.push_back(r.cost_trace);
    return r;
  }

  const std::size_t restarts = std::max<std::size_t>(config.n_restarts, 1);
  ClusteringResult best;
  bool have_best = false;
  std::vector<std::vector<double>> traces;
  for (std::size_t restart = 0; restart < restarts; ++restart) {
    ClusteringResult r = single_run(sample, qs, config, restart);
    traces.push_back(r.cost_trace);
    if (!have_best || r.final_cost < best.final_cost) {
      best = std::move(r);
      have_best = true;
    }
  }
  best.restart_traces = std::move(traces);
  best.degenerate = degenerate;
  return best;
}

Eigen::MatrixXd discretize(const std::vector<Func>& funcs) {
  if (funcs.empty()) return {};
  const Eigen::Index t = funcs.front().values().rows();
  const Eigen::Index m = funcs.front().dims();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(funcs.size()), t * m);
  for (std::size_t i = 0; i < funcs.size(); ++i) {
    const Eigen::MatrixXd& v = funcs[i].values();
    if (v.rows() != t || v.cols() != m) throw InputError("functions have different shapes");
    for (Eigen::Index d = 0; d < m; ++d) {
      out.row(static_cast<Eigen::Index>(i)).segment(d * t, t) = v.col(d).transpose();
    }
  }
  return out;
}

std::vector<int> kmeans_euclidean(const Eigen::MatrixXd& data, std::size_t k, std::size_t n_restarts,
                                  std::uint64_t seed, std::size_t max_iter) {
  const auto n = static_cast<std::size_t>(data.rows());
  if (k < 1) throw InputError("number of clusters must be at least 1");
  if (n < k) throw InputError("fewer observations than clusters");

  std::vector<int> best_labels;
  double best_wcss = std::numeric_limits<double>::infinity();
  const std::size_t restarts = std::max<std::size_t>(n_restarts, 1);
  for (std::size_t restart = 0; restart < restarts; ++restart) {
    std::mt19937_64 rng(derive_seed(seed, restart));
    Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), data.cols());
    const auto init = sample_without_replacement(n, k, rng);
    for (std::size_t c = 0; c < k; ++c) centers.row(static_cast<Eigen::Index>(c)) = data.row(static_cast<Eigen::Index>(init[c]));

    std::vector<int> labels(n, -1);
    std::vector<double> sq(n, 0.0);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        Eigen::Index c = 0;
        const double d = (centers.rowwise() - data.row(static_cast<Eigen::Index>(i))).rowwise().squaredNorm().minCoeff(&c);
        sq[i] = d;
        if (labels[i] != static_cast<int>(c)) {
          labels[i] = static_cast<int>(c);
          changed = true;
        }
      }
      // Refill empty clusters with the worst-fitted point of a cluster that can spare it.
      std::vector<std::size_t> counts(k, 0);
      for (int l : labels) ++counts[static_cast<std::size_t>(l)];
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        std::size_t worst = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (counts[static_cast<std::size_t>(labels[i])] > 1 && (worst == n || sq[i] > sq[worst])) worst = i;
        }
        --counts[static_cast<std::size_t>(labels[worst])];
        labels[worst] = static_cast<int>(c);
        sq[worst] = 0.0;
        counts[c] = 1;
        changed = true;
      }
      centers.setZero();
      for (std::size_t i = 0; i < n; ++i) centers.row(labels[i]) += data.row(static_cast<Eigen::Index>(i));
      for (std::size_t c = 0; c < k; ++c) centers.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
      if (!changed) break;
    }
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wcss += (data.row(static_cast<Eigen::Index>(i)) - centers.row(labels[i])).squaredNorm();
    }
    if (wcss < best_wcss) {
      best_wcss = wcss;
      best_labels = labels;
    }
  }
  return best_labels;
}

}  // namespace elastic
