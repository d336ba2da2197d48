#include "elastic/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "elastic/parallel.hpp"

namespace elastic {

namespace {

// Precomputed geometry of one lattice move, in fine-grid units.
struct Step {
  int p = 0;  // lattice cells along t
  int q = 0;  // lattice cells along gamma
  double sqrt_slope = 0.0;
  std::vector<std::size_t> offset;  // integer part of gamma offset at each fine point
  std::vector<double> lo;           // sqrt(slope) * (1 - frac): weight of the lower neighbor
  std::vector<double> hi;           // sqrt(slope) * frac: weight of the upper neighbor
};

std::vector<Step> build_steps(int max_step, std::size_t stride) {
  std::vector<Step> steps;
  for (const auto& [p, q] : coprime_steps(max_step)) {
    Step s;
    s.p = p;
    s.q = q;
    s.sqrt_slope = std::sqrt(static_cast<double>(q) / static_cast<double>(p));
    const std::size_t span = static_cast<std::size_t>(p) * stride;
    const std::size_t rise = static_cast<std::size_t>(q) * stride;
    for (std::size_t u = 0; u <= span; ++u) {
      // Exact rational position u * rise / span.
      const std::size_t num = u * rise;
      const double frac = static_cast<double>(num % span) / static_cast<double>(span);
      s.offset.push_back(num / span);
      s.lo.push_back(s.sqrt_slope * (1.0 - frac));
      s.hi.push_back(s.sqrt_slope * frac);
    }
    steps.push_back(std::move(s));
  }
  return steps;
}

std::vector<double> row_major(const Eigen::MatrixXd& m, std::size_t pad_rows) {
  std::vector<double> out(static_cast<std::size_t>(m.size()) + pad_rows * static_cast<std::size_t>(m.cols()),
                          0.0);
  const auto cols = static_cast<std::size_t>(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out[static_cast<std::size_t>(i) * cols + static_cast<std::size_t>(j)] = m(i, j);
    }
  }
  return out;
}

// Forward DP over the lattice. Energies are accumulated without the dt factor.
// Dims > 0 fixes the codomain dimension at compile time; 0 reads it from `dims`.
template <int Dims>
void fill_lattice(const std::vector<Step>& steps, const std::vector<double>& a,
                  const std::vector<double>& b, std::size_t n, std::size_t stride,
                  std::size_t dims, std::vector<double>& energy, std::vector<int>& back) {
  const std::size_t m = Dims > 0 ? static_cast<std::size_t>(Dims) : dims;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (std::size_t c = 1; c < n; ++c) {
    for (std::size_t d = 1; d < n; ++d) {
      double best = kInf;
      int best_step = -1;
      for (std::size_t s = 0; s < steps.size(); ++s) {
        const Step& st = steps[s];
        if (static_cast<std::size_t>(st.p) > c || static_cast<std::size_t>(st.q) > d) continue;
        const std::size_t pa = c - static_cast<std::size_t>(st.p);
        const std::size_t pb = d - static_cast<std::size_t>(st.q);
        const double start = energy[pa * n + pb];
        if (!(start < best)) continue;
        const double budget = best - start;
        const double* qa = &a[pa * stride * m];
        const double* qb = &b[pb * stride * m];
        const std::size_t last = st.offset.size() - 1;
        double seg = 0.0;
        for (std::size_t u = 0; u <= last; ++u) {
          const double* ya = qa + u * m;
          const double* yb = qb + st.offset[u] * m;
          const double lo = st.lo[u];
          const double hi = st.hi[u];
          double e = 0.0;
          for (std::size_t k = 0; k < m; ++k) {
            const double r = ya[k] - (lo * yb[k] + hi * yb[k + m]);
            e += r * r;
          }
          seg += (u == 0 || u == last) ? 0.5 * e : e;
          if (seg >= budget) break;
        }
        const double total = start + seg;
        if (total < best) {
          best = total;
          best_step = static_cast<int>(s);
        }
      }
      energy[c * n + d] = best;
      back[c * n + d] = best_step;
    }
  }
}

void check_pair(const Srvf& q1, const Srvf& q2, const DpConfig& config) {
  if (!(q1.grid() == q2.grid())) throw InputError("SRVFs live on different grids");
  if (q1.dims() != q2.dims()) throw InputError("SRVFs have different dimensions");
  if (!q1.grid().is_uniform()) throw InputError("DP alignment requires a uniform grid");
  if (config.stride == 0 || config.max_step < 1) throw InputError("invalid DP configuration");
  const std::size_t t = q1.size();
  if ((t - 1) % config.stride != 0) throw InputError("grid length - 1 must be divisible by the DP stride");
  if ((t - 1) / config.stride < 2) throw InputError("grid too short for the DP lattice");
}

}  // namespace

std::vector<std::pair<int, int>> coprime_steps(int max_step) {
  std::vector<std::pair<int, int>> steps;
  for (int p = 1; p <= max_step; ++p) {
    for (int q = 1; q <= max_step; ++q) {
      if (std::gcd(p, q) == 1) steps.emplace_back(p, q);
    }
  }
  return steps;
}

LatticePath dp_lattice_path(const Srvf& q1, const Srvf& q2, const DpConfig& config) {
  check_pair(q1, q2, config);
  const std::size_t t_len = q1.size();
  const std::size_t stride = config.stride;
  const std::size_t n = (t_len - 1) / stride + 1;
  const auto m = static_cast<std::size_t>(q1.dims());
  const double dt = q1.grid().spacing();

  const std::vector<Step> steps = build_steps(config.max_step, stride);
  const std::vector<double> a = row_major(q1.values(), 0);
  // One zero row of padding so interpolation at the last grid point stays in bounds.
  const std::vector<double> b = row_major(q2.values(), 1);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> energy(n * n, kInf);
  std::vector<int> back(n * n, -1);
  energy[0] = 0.0;

  if (m == 1) {
    fill_lattice<1>(steps, a, b, n, stride, 1, energy, back);
  } else if (m == 2) {
    fill_lattice<2>(steps, a, b, n, stride, 2, energy, back);
  } else {
    fill_lattice<0>(steps, a, b, n, stride, m, energy, back);
  }
  for (double& e : energy) e *= dt;

  LatticePath path;
  path.cost = energy[n * n - 1];
  if (!std::isfinite(path.cost)) throw NumericalError("DP lattice has no admissible path");
  std::size_t c = n - 1;
  std::size_t d = n - 1;
  path.vertices.emplace_back(c * stride, d * stride);
  while (c > 0 || d > 0) {
    const Step& st = steps[static_cast<std::size_t>(back[c * n + d])];
    c -= static_cast<std::size_t>(st.p);
    d -= static_cast<std::size_t>(st.q);
    path.vertices.emplace_back(c * stride, d * stride);
  }
  std::reverse(path.vertices.begin(), path.vertices.end());
  return path;
}

Warping warping_from_path(const Grid& grid, const LatticePath& path) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd gamma(n);
  for (std::size_t v = 0; v + 1 < path.vertices.size(); ++v) {
    const auto [x0, y0] = path.vertices[v];
    const auto [x1, y1] = path.vertices[v + 1];
    for (std::size_t x = x0; x <= x1; ++x) {
      const double w = static_cast<double>(x - x0) / static_cast<double>(x1 - x0);
      gamma[static_cast<Eigen::Index>(x)] = (1.0 - w) * grid[y0] + w * grid[y1];
    }
  }
  gamma[0] = 0.0;
  gamma[n - 1] = 1.0;
  return Warping(grid, std::move(gamma));
}

PairwiseAlignment dp_align(const Srvf& q1, const Srvf& q2, const DpConfig& config) {
  const LatticePath path = dp_lattice_path(q1, q2, config);
  Warping gamma = warping_from_path(q1.grid(), path);
  Srvf aligned = warp_srvf(q2, gamma);
  const double dist = l2_distance(q1, aligned);
  const double unwarped = l2_distance(q1, q2);
  if (unwarped <= dist) {
    return PairwiseAlignment{Warping::identity(q1.grid()), q2, unwarped};
  }
  return PairwiseAlignment{std::move(gamma), std::move(aligned), dist};
}

double amplitude_distance(const Srvf& q1, const Srvf& q2, const DpConfig& config, bool symmetric) {
  const double forward = dp_align(q1, q2, config).distance;
  if (!symmetric) return forward;
  return std::min(forward, dp_align(q2, q1, config).distance);
}

Warping mean_warping(const std::vector<Warping>& warpings) {
  if (warpings.empty()) throw InputError("mean of an empty warping list");
  const Grid& grid = warpings.front().grid();
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(n, 1);
  for (const auto& w : warpings) {
    if (!(w.grid() == grid)) throw InputError("warpings live on different grids");
    const Eigen::MatrixXd slope = gradient(grid, w.gamma());
    psi += slope.cwiseMax(0.0).cwiseSqrt();
  }
  psi /= static_cast<double>(warpings.size());
  const double norm = std::sqrt(integrate_squared(grid, psi));
  if (!(norm > 0.0)) throw NumericalError("mean warping has zero velocity");
  psi /= norm;
  Eigen::VectorXd gamma = cumulative_trapezoid(grid, psi.cwiseProduct(psi));
  gamma /= gamma[n - 1];
  gamma[0] = 0.0;
  gamma[n - 1] = 1.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(gamma[i] > gamma[i - 1])) throw NumericalError("mean warping is not invertible");
  }
  return Warping(grid, std::move(gamma));
}

CenteredOrbit center_orbit(const Srvf& template_srvf, const std::vector<Warping>& warpings) {
  const Warping inverse = invert(mean_warping(warpings));
  CenteredOrbit out{warp_srvf(template_srvf, inverse), {}};
  out.warpings.reserve(warpings.size());
  for (const auto& w : warpings) out.warpings.push_back(compose(w, inverse));
  return out;
}

namespace {

std::size_t closest_to_mean(const std::vector<Srvf>& qs) {
  const Srvf mean = mean_srvf(qs);
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const double d = l2_distance(qs[i], mean);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

MultipleAlignmentResult karcher_mean(const std::vector<Srvf>& qs, const KarcherConfig& config) {
  if (qs.empty()) throw InputError("Karcher mean of an empty sample");
  const std::size_t n = qs.size();
  const Grid& grid = qs.front().grid();

  MultipleAlignmentResult result{qs[closest_to_mean(qs)], {}, {}, 0, false, {}};
  if (n == 1) {
    result.warpings.push_back(Warping::identity(grid));
    result.aligned.push_back(qs.front());
    result.cost_trace.push_back(0.0);
    result.iterations = 1;
    result.converged = true;
    return result;
  }

  std::vector<Warping> warpings(n, Warping::identity(grid));
  std::vector<Srvf> registered(qs);
  std::vector<double> dist(n, 0.0);
  for (std::size_t iter = 1; iter <= config.max_iter; ++iter) {
    const Srvf& current = result.template_srvf;
    parallel_for(n, config.dp.threads, [&](std::size_t i) {
      PairwiseAlignment a = dp_align(current, qs[i], config.dp);
      // Keep the previous warping when the lattice optimum is worse.
      if (iter > 1) {
        const double previous = l2_distance(current, result.aligned[i]);
        if (previous <= a.distance) {
          registered[i] = result.aligned[i];
          dist[i] = previous;
          return;
        }
      }
      warpings[i] = std::move(a.gamma);
      registered[i] = std::move(a.q_aligned);
      dist[i] = a.distance;
    });
    double cost = 0.0;
    for (double d : dist) cost += d * d;
    result.cost_trace.push_back(cost);

    CenteredOrbit centered = center_orbit(current, warpings);
    std::vector<Srvf> aligned;
    aligned.reserve(n);
    for (std::size_t i = 0; i < n; ++i) aligned.push_back(warp_srvf(qs[i], centered.warpings[i]));
    Srvf next = mean_srvf(aligned);
    // Centering is an isometry only up to interpolation error; skip it for
    // this iteration when it would raise the cost.
    if (within_cost(next, aligned) <= cost) {
      warpings = std::move(centered.warpings);
    } else {
      aligned = registered;
      next = mean_srvf(aligned);
    }

    const double change = l2_distance(next, current);
    const double scale = l2_norm(current);
    const double relative = scale > 0.0 ? change / scale : change;
    result.template_srvf = std::move(next);
    result.aligned = std::move(aligned);
    result.iterations = iter;
    if (relative < config.tol) {
      result.converged = true;
      break;
    }
  }
  result.warpings = warpings;
  return result;
}

Func template_function(const Srvf& template_srvf, const std::vector<Func>& members) {
  Eigen::VectorXd start = Eigen::VectorXd::Zero(template_srvf.dims());
  for (const auto& f : members) start += f.values().row(0).transpose();
  if (!members.empty()) start /= static_cast<double>(members.size());
  return from_srvf(template_srvf, start);
}

AlignedSample multiple_align(const FunctionSample& sample, const KarcherConfig& config) {
  std::vector<Srvf> qs;
  qs.reserve(sample.size());
  for (const auto& f : sample.funcs) qs.push_back(to_srvf(f));
  MultipleAlignmentResult alignment = karcher_mean(qs, config);
  std::vector<Func> aligned;
  aligned.reserve(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    aligned.push_back(warp_func(sample.funcs[i], alignment.warpings[i]));
  }
  Func tmpl = template_function(alignment.template_srvf, aligned);
  return AlignedSample{std::move(alignment), std::move(aligned), std::move(tmpl)};
}

}  // namespace elastic
