// Non-empty cluster assignment as a minimum-cost transportation problem.
//
// Network: source -> function i (cap 1, cost 0) -> cluster k (cap 1, cost d_ik^2)
// -> sink. Each cluster reaches the sink through a mandatory arc (cap 1, cost -B)
// and an optional arc (cap N-K, cost 0). B exceeds any achievable change in the
// assignment cost, so a minimum-cost flow of N units saturates every mandatory
// arc whenever N >= K. Solved by successive shortest paths with potentials.

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "elastic/clustering.hpp"

namespace elastic {

namespace {

class MinCostFlow {
 public:
  explicit MinCostFlow(std::size_t nodes) : graph_(nodes) {}

  // Returns the index of the forward arc within graph_[from].
  std::size_t add_arc(std::size_t from, std::size_t to, int capacity, double cost) {
    graph_[from].push_back(Arc{to, graph_[to].size(), capacity, cost});
    graph_[to].push_back(Arc{from, graph_[from].size() - 1, 0, -cost});
    return graph_[from].size() - 1;
  }

  // Pushes up to `demand` units from source to sink along successive cheapest paths.
  int run(std::size_t source, std::size_t sink, int demand) {
    const std::size_t n = graph_.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> potential = bellman_ford(source);
    for (double& p : potential) {
      if (!std::isfinite(p)) p = 0.0;
    }
    int flow = 0;
    std::vector<double> dist(n);
    std::vector<std::size_t> prev_node(n);
    std::vector<std::size_t> prev_arc(n);
    while (flow < demand) {
      std::fill(dist.begin(), dist.end(), kInf);
      dist[source] = 0.0;
      using Entry = std::pair<double, std::size_t>;
      std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
      heap.emplace(0.0, source);
      while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (std::size_t e = 0; e < graph_[u].size(); ++e) {
          const Arc& arc = graph_[u][e];
          if (arc.capacity <= 0) continue;
          // Reduced costs are non-negative up to rounding; clamp keeps Dijkstra valid.
          const double reduced = std::max(0.0, arc.cost + potential[u] - potential[arc.to]);
          const double nd = d + reduced;
          if (nd < dist[arc.to]) {
            dist[arc.to] = nd;
            prev_node[arc.to] = u;
            prev_arc[arc.to] = e;
            heap.emplace(nd, arc.to);
          }
        }
      }
      if (!std::isfinite(dist[sink])) break;
      for (std::size_t v = 0; v < n; ++v) {
        if (std::isfinite(dist[v])) potential[v] += dist[v];
      }
      int push = demand - flow;
      for (std::size_t v = sink; v != source; v = prev_node[v]) {
        push = std::min(push, graph_[prev_node[v]][prev_arc[v]].capacity);
      }
      for (std::size_t v = sink; v != source; v = prev_node[v]) {
        Arc& arc = graph_[prev_node[v]][prev_arc[v]];
        arc.capacity -= push;
        graph_[v][arc.reverse].capacity += push;
      }
      flow += push;
    }
    return flow;
  }

  int residual(std::size_t from, std::size_t arc) const { return graph_[from][arc].capacity; }

 private:
  struct Arc {
    std::size_t to;
    std::size_t reverse;
    int capacity;
    double cost;
  };

  std::vector<double> bellman_ford(std::size_t source) const {
    const std::size_t n = graph_.size();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    dist[source] = 0.0;
    for (std::size_t round = 0; round + 1 < n; ++round) {
      bool changed = false;
      for (std::size_t u = 0; u < n; ++u) {
        if (!std::isfinite(dist[u])) continue;
        for (const Arc& arc : graph_[u]) {
          if (arc.capacity > 0 && dist[u] + arc.cost < dist[arc.to]) {
            dist[arc.to] = dist[u] + arc.cost;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    return dist;
  }

  std::vector<std::vector<Arc>> graph_;
};

}  // namespace

std::vector<int> assign_non_empty(const Eigen::MatrixXd& dist) {
  const auto n = static_cast<std::size_t>(dist.rows());
  const auto k = static_cast<std::size_t>(dist.cols());
  if (k == 0) throw InputError("assignment needs at least one cluster");
  if (n < k) throw InputError("fewer functions than clusters");
  if (!dist.allFinite()) throw InputError("distance matrix must be finite");

  std::vector<int> labels(n, 0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    dist.row(static_cast<Eigen::Index>(i)).minCoeff(&best);  // first minimum on ties
    labels[i] = static_cast<int>(best);
    ++counts[static_cast<std::size_t>(best)];
  }
  if (std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; })) return labels;

  const Eigen::MatrixXd cost = dist.cwiseProduct(dist);
  double bonus = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    bonus += cost.row(static_cast<Eigen::Index>(i)).maxCoeff() - cost.row(static_cast<Eigen::Index>(i)).minCoeff();
  }

  const std::size_t source = 0;
  const std::size_t sink = n + k + 1;
  MinCostFlow flow(n + k + 2);
  std::vector<std::vector<std::size_t>> arcs(n, std::vector<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    flow.add_arc(source, 1 + i, 1, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      arcs[i][c] = flow.add_arc(1 + i, 1 + n + c, 1, cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    flow.add_arc(1 + n + c, sink, 1, -bonus);
    if (n > k) flow.add_arc(1 + n + c, sink, static_cast<int>(n - k), 0.0);
  }
  if (flow.run(source, sink, static_cast<int>(n)) != static_cast<int>(n)) {
    throw NumericalError("transportation problem did not route every function");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      if (flow.residual(1 + i, arcs[i][c]) == 0) labels[i] = static_cast<int>(c);
    }
  }
  return labels;
}

}  // namespace elastic
