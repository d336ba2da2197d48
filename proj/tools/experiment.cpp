#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "commands.hpp"
#include "elastic/metrics.hpp"
#include "elastic/model_selection.hpp"
#include "sample_file.hpp"

namespace elastic::cli {

namespace {

template <class T>
std::vector<T> list_of(const nlohmann::json& j, const char* key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  const nlohmann::json& v = j[key];
  std::vector<T> out;
  try {
    if (v.is_array()) {
      for (const auto& e : v) out.push_back(e.get<T>());
    } else {
      out.push_back(v.get<T>());
    }
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("\"") + key + "\" has the wrong type");
  }
  if (out.empty()) throw ConfigError(std::string("\"") + key + "\" must not be empty");
  return out;
}

template <class T>
T scalar_of(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("\"") + key + "\" has the wrong type");
  }
}

Method parse_method(const std::string& s) {
  if (s == "elastic") return Method::kElastic;
  if (s == "euclid_raw") return Method::kEuclidRaw;
  if (s == "euclid_aligned") return Method::kEuclidAligned;
  throw ConfigError("unknown method \"" + s + "\"");
}

bool same_cell(const Cell& a, const Cell& b) { return a.n == b.n && a.tau == b.tau && a.k_star == b.k_star; }

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::kElastic: return "elastic";
    case Method::kEuclidRaw: return "euclid_raw";
    case Method::kEuclidAligned: return "euclid_aligned";
  }
  return "";
}

std::string method_column(Method m) {
  switch (m) {
    case Method::kElastic: return "(a)";
    case Method::kEuclidRaw: return "(c)";
    case Method::kEuclidAligned: return "(d)";
  }
  return "";
}

ExperimentGrid parse_grid(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  static const char* known[] = {"generator", "N",     "tau",      "K_star", "T",    "replicates", "seed",
                                "scale",     "methods", "select_k", "rho",    "kmax"};
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known)) {
      throw ConfigError("unknown config key \"" + key + "\"");
    }
  }
  ExperimentGrid g;
  g.generator = scalar_of<std::string>(j, "generator", g.generator);
  if (g.generator != "sim1" && g.generator != "sim2") throw ConfigError("generator must be sim1 or sim2");
  g.n = list_of<std::size_t>(j, "N", g.n);
  g.tau = list_of<double>(j, "tau", g.tau);
  g.k_star = list_of<std::size_t>(j, "K_star", g.k_star);
  g.grid_size = scalar_of<std::size_t>(j, "T", g.grid_size);
  g.replicates = scalar_of<std::size_t>(j, "replicates", g.replicates);
  g.seed = scalar_of<std::uint64_t>(j, "seed", g.seed);
  const std::string scale = scalar_of<std::string>(j, "scale", "sd");
  if (scale == "sd") {
    g.scale = AmplitudeScale::kStandardDeviation;
  } else if (scale == "variance") {
    g.scale = AmplitudeScale::kVariance;
  } else {
    throw ConfigError("scale must be \"sd\" or \"variance\"");
  }
  if (j.contains("methods")) {
    g.methods.clear();
    for (const auto& s : list_of<std::string>(j, "methods", {})) g.methods.push_back(parse_method(s));
  }
  g.select_k = scalar_of<bool>(j, "select_k", g.select_k);
  g.rho = scalar_of<double>(j, "rho", g.rho);
  g.k_max = scalar_of<std::size_t>(j, "kmax", g.k_max);

  if (g.replicates < 1) throw ConfigError("replicates must be at least 1");
  if (g.grid_size < 3) throw ConfigError("T must be at least 3");
  for (double t : g.tau) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("tau must be positive");
  }
  const std::size_t k_limit = g.generator == "sim1" ? 4 : 3;
  for (std::size_t k : g.k_star) {
    if (k < 1 || k > k_limit) throw ConfigError("K_star out of range for " + g.generator);
  }
  for (std::size_t n : g.n) {
    if (n < 1) throw ConfigError("N must be positive");
  }
  if (!(g.rho > 0.0 && g.rho < 1.0)) throw ConfigError("rho must lie in (0, 1)");
  if (g.k_max < 1) throw ConfigError("kmax must be at least 1");
  return g;
}

std::vector<Cell> cells(const ExperimentGrid& grid) {
  std::vector<Cell> out;
  for (std::size_t n : grid.n) {
    for (double tau : grid.tau) {
      for (std::size_t k : grid.k_star) out.push_back({n, tau, k});
    }
  }
  return out;
}

std::uint64_t replicate_seed(const ExperimentGrid& grid, std::size_t r) { return grid.seed + r; }

LabeledSample simulate(const ExperimentGrid& grid, const Cell& cell, std::size_t r) {
  const std::uint64_t seed = replicate_seed(grid, r);
  if (grid.generator == "sim2") {
    return generate_sim2({cell.n, cell.tau, cell.k_star, grid.grid_size, seed, grid.scale});
  }
  return generate_sim1({cell.n, cell.tau, cell.k_star, grid.grid_size, seed, grid.scale});
}

std::string sample_file_name(const ExperimentGrid& grid, const Cell& cell, std::size_t r) {
  return grid.generator + "_N" + std::to_string(cell.n) + "_tau" + format_double(cell.tau) + "_K" +
         std::to_string(cell.k_star) + "_rep" + std::to_string(r) + ".csv";
}

std::vector<int> euclid_labels(const std::vector<Func>& funcs, std::size_t k, std::size_t restarts,
                               std::uint64_t seed) {
  return kmeans_euclidean(discretize(funcs), k, std::max<std::size_t>(restarts, 1), seed);
}

ReplicateOutcome run_replicate(const ExperimentGrid& grid, const Cell& cell, std::size_t r,
                               const KmeansConfig& base) {
  ReplicateOutcome out;
  out.cell = cell;
  out.replicate = r;
  out.seed = replicate_seed(grid, r);
  const LabeledSample ls = simulate(grid, cell, r);
  KmeansConfig config = base;
  config.seed = out.seed;

  std::map<std::size_t, ClusteringResult> cache;
  if (grid.select_k) {
    try {
      Selection s = select_k(ls.sample, std::min(grid.k_max, cell.n), grid.rho, config);
      out.chosen_k = s.report.chosen_k;
      out.d = s.report.d;
      for (auto& c : s.clusterings) {
        for (const auto& t : c.restart_traces) out.cost_traces.push_back(t);
        const std::size_t k = c.k;
        cache.emplace(k, std::move(c));
      }
    } catch (const std::exception& e) {
      out.selection_error = e.what();
    }
  }
  const auto clustering = [&](std::size_t k) -> const ClusteringResult& {
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;
    KmeansConfig c = config;
    c.k = k;
    ClusteringResult res = elastic_kmeans(ls.sample, c);
    for (const auto& t : res.restart_traces) out.cost_traces.push_back(t);
    return cache.emplace(k, std::move(res)).first->second;
  };

  for (Method m : grid.methods) {
    MethodOutcome mo{m, std::nullopt, true, ""};
    try {
      if (m == Method::kElastic) {
        const ClusteringResult& res = clustering(cell.k_star);
        mo.ari = adjusted_rand_index(res.labels, ls.true_labels);
        mo.converged = res.converged;
      } else if (m == Method::kEuclidRaw) {
        mo.ari = adjusted_rand_index(euclid_labels(ls.sample.funcs, cell.k_star, config.n_restarts, out.seed),
                                     ls.true_labels);
      } else {
        const ClusteringResult& aligned = clustering(1);
        mo.ari = adjusted_rand_index(euclid_labels(aligned.aligned_funcs, cell.k_star, config.n_restarts, out.seed),
                                     ls.true_labels);
        mo.converged = aligned.converged;
      }
    } catch (const std::exception& e) {
      mo.ari.reset();
      mo.error = e.what();
    }
    out.methods.push_back(std::move(mo));
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return v.empty() ? std::nan("") : 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<CellSummary> summarize(const ExperimentGrid& grid, const std::vector<ReplicateOutcome>& outcomes) {
  std::vector<CellSummary> out;
  for (const Cell& cell : cells(grid)) {
    for (Method m : grid.methods) {
      std::vector<double> aris;
      std::size_t failed = 0;
      for (const auto& o : outcomes) {
        if (!same_cell(o.cell, cell)) continue;
        for (const auto& mo : o.methods) {
          if (mo.method != m) continue;
          if (mo.ari) {
            aris.push_back(*mo.ari);
          } else {
            ++failed;
          }
        }
      }
      out.push_back({cell, m, mean_of(aris), sample_sd(aris), aris.size(), failed});
    }
  }
  return out;
}

std::vector<SelectionSummary> summarize_selection(const ExperimentGrid& grid,
                                                  const std::vector<ReplicateOutcome>& outcomes) {
  std::vector<SelectionSummary> out;
  if (!grid.select_k) return out;
  for (const Cell& cell : cells(grid)) {
    SelectionSummary s{cell, 0, 0, 0, std::vector<std::size_t>(grid.k_max, 0)};
    for (const auto& o : outcomes) {
      if (!same_cell(o.cell, cell)) continue;
      if (!o.chosen_k) {
        ++s.failed;
        continue;
      }
      ++s.total;
      if (*o.chosen_k == cell.k_star) ++s.correct;
      if (*o.chosen_k >= 1 && *o.chosen_k <= s.chosen_counts.size()) ++s.chosen_counts[*o.chosen_k - 1];
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace elastic::cli
