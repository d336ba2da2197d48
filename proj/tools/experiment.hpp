#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "elastic/clustering.hpp"
#include "elastic/simulation.hpp"

namespace elastic::cli {

enum class Method { kElastic, kEuclidRaw, kEuclidAligned };

std::string method_name(Method m);
// Column letter used by the wide table: (a), (c), (d).
std::string method_column(Method m);

struct ExperimentGrid {
  std::string generator = "sim1";  // sim1 | sim2
  std::vector<std::size_t> n{120};
  std::vector<double> tau{0.05};
  std::vector<std::size_t> k_star{2};
  std::size_t grid_size = 201;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  AmplitudeScale scale = AmplitudeScale::kStandardDeviation;
  std::vector<Method> methods{Method::kElastic, Method::kEuclidRaw, Method::kEuclidAligned};
  bool select_k = false;
  double rho = 0.95;
  std::size_t k_max = 6;
};

// Reads the JSON experiment description. Scalars are accepted wherever a list is.
// Throws ConfigError.
ExperimentGrid parse_grid(const nlohmann::json& j);

struct Cell {
  std::size_t n = 0;
  double tau = 0.0;
  std::size_t k_star = 0;
};

std::vector<Cell> cells(const ExperimentGrid& grid);

// Replicate r of a cell uses seed + r for the generator and for every clustering.
std::uint64_t replicate_seed(const ExperimentGrid& grid, std::size_t r);

LabeledSample simulate(const ExperimentGrid& grid, const Cell& cell, std::size_t r);

std::string sample_file_name(const ExperimentGrid& grid, const Cell& cell, std::size_t r);

struct MethodOutcome {
  Method method;
  std::optional<double> ari;  // empty when the run failed
  bool converged = true;
  std::string error;
};

struct ReplicateOutcome {
  Cell cell;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::vector<MethodOutcome> methods;
  std::optional<std::size_t> chosen_k;
  std::size_t d = 0;
  std::string selection_error;
  // Cost traces of every elastic k-means restart and multiple alignment run performed.
  std::vector<std::vector<double>> cost_traces;
};

// Runs all requested methods on one simulated replicate. `base` supplies the DP,
// restart and stopping settings; k and seed are overridden per method.
ReplicateOutcome run_replicate(const ExperimentGrid& grid, const Cell& cell, std::size_t r,
                               const KmeansConfig& base);

// Euclidean k-means on the discretized functions.
std::vector<int> euclid_labels(const std::vector<Func>& funcs, std::size_t k, std::size_t restarts,
                               std::uint64_t seed);

struct CellSummary {
  Cell cell;
  Method method;
  double mean = 0.0;
  double sd = 0.0;  // sample SD, 0 for a single replicate
  std::size_t ok = 0;
  std::size_t failed = 0;
};

std::vector<CellSummary> summarize(const ExperimentGrid& grid, const std::vector<ReplicateOutcome>& outcomes);

struct SelectionSummary {
  Cell cell;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::size_t failed = 0;
  std::vector<std::size_t> chosen_counts;  // index K-1
};

std::vector<SelectionSummary> summarize_selection(const ExperimentGrid& grid,
                                                  const std::vector<ReplicateOutcome>& outcomes);

double mean_of(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);

}  // namespace elastic::cli
