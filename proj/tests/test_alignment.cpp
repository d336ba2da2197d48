#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include "elastic/alignment.hpp"
#include "elastic/metrics.hpp"
#include "elastic/simulation.hpp"
#include "oracles.hpp"

using namespace elastic;
using namespace elastic::oracle;

namespace {

constexpr double kPi = std::numbers::pi;

Func sample_func(const Grid& grid, const std::function<double(double)>& f) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(grid.size()), 1);
  for (std::size_t i = 0; i < grid.size(); ++i) v(static_cast<Eigen::Index>(i), 0) = f(grid[i]);
  return Func(grid, v);
}

double sup_distance(const Warping& a, const Warping& b) { return (a.gamma() - b.gamma()).cwiseAbs().maxCoeff(); }

Srvf random_srvf(const Grid& grid, Eigen::Index dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd v(static_cast<Eigen::Index>(grid.size()), dims);
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index k = 0; k < dims; ++k) v(i, k) = z(rng);
  }
  return Srvf(grid, v);
}

}  // namespace

TEST_CASE("coprime step set") {
  const auto steps = coprime_steps(7);
  CHECK(steps.size() == 35);
  for (const auto& [p, q] : steps) CHECK(std::gcd(p, q) == 1);
  CHECK(coprime_steps(1).size() == 1);
}

TEST_CASE("DP cost equals brute-force lattice enumeration") {
  SUBCASE("T = 16, steps up to 5, scalar") {
    const Grid g = Grid::uniform(16);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const Srvf a = random_srvf(g, 1, seed);
      const Srvf b = random_srvf(g, 1, seed + 100);
      const LatticePath path = dp_lattice_path(a, b, DpConfig{1, 5, 1});
      CHECK(std::abs(path.cost - brute_force_cost(a, b, 1, 5)) <= 1e-10);
    }
  }
  SUBCASE("T = 16, smooth shapes") {
    const Grid g = Grid::uniform(16);
    const Srvf a = to_srvf(sample_func(g, [](double t) { return std::sin(2.0 * kPi * t); }));
    const Srvf b = to_srvf(sample_func(g, [](double t) { return std::sin(2.0 * kPi * t * t); }));
    const LatticePath path = dp_lattice_path(a, b, DpConfig{1, 5, 1});
    CHECK(std::abs(path.cost - brute_force_cost(a, b, 1, 5)) <= 1e-10);
  }
  SUBCASE("two-dimensional and three-dimensional codomains") {
    const Grid g = Grid::uniform(12);
    for (Eigen::Index dims : {2, 3}) {
      const Srvf a = random_srvf(g, dims, 7);
      const Srvf b = random_srvf(g, dims, 8);
      const LatticePath path = dp_lattice_path(a, b, DpConfig{1, 4, 1});
      CHECK(std::abs(path.cost - brute_force_cost(a, b, 1, 4)) <= 1e-10);
    }
  }
  SUBCASE("strided lattice") {
    const Grid g = Grid::uniform(25);
    const Srvf a = random_srvf(g, 1, 11);
    const Srvf b = random_srvf(g, 1, 12);
    const LatticePath path = dp_lattice_path(a, b, DpConfig{2, 4, 1});
    CHECK(std::abs(path.cost - brute_force_cost(a, b, 2, 4)) <= 1e-10);
  }
}

TEST_CASE("lattice path geometry") {
  const Grid g = Grid::uniform(41);
  const Srvf a = random_srvf(g, 1, 21);
  const Srvf b = random_srvf(g, 1, 22);
  const LatticePath path = dp_lattice_path(a, b, DpConfig{});
  CHECK(path.vertices.front() == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(path.vertices.back() == std::pair<std::size_t, std::size_t>{40, 40});
  for (std::size_t v = 1; v < path.vertices.size(); ++v) {
    CHECK(path.vertices[v].first > path.vertices[v - 1].first);
    CHECK(path.vertices[v].second > path.vertices[v - 1].second);
  }
  const Warping w = warping_from_path(g, path);
  CHECK(w.gamma()[0] == 0.0);
  CHECK(w.gamma()[40] == 1.0);
}

TEST_CASE("DP input validation") {
  const Grid g = Grid::uniform(21);
  const Srvf a = random_srvf(g, 1, 1);
  CHECK_THROWS_AS(dp_align(a, random_srvf(Grid::uniform(11), 1, 2)), InputError);
  CHECK_THROWS_AS(dp_align(a, random_srvf(g, 2, 2)), InputError);
  CHECK_THROWS_AS(dp_align(a, a, DpConfig{3, 7, 1}), InputError);
  CHECK_THROWS_AS(dp_align(a, a, DpConfig{20, 7, 1}), InputError);
  const Grid irregular({0.0, 0.1, 0.3, 0.6, 1.0});
  const Srvf r(irregular, Eigen::MatrixXd::Ones(5, 1));
  CHECK_THROWS_AS(dp_align(r, r), InputError);
}

TEST_CASE("self-alignment") {
  const Grid g = Grid::uniform(201);
  const Srvf q = to_srvf(sample_func(g, [](double t) { return std::sin(2.0 * kPi * t) + 0.3 * t; }));
  const PairwiseAlignment a = dp_align(q, q);
  CHECK(a.distance <= 1e-8);
  CHECK(sup_distance(a.gamma, Warping::identity(g)) <= g.spacing());
  CHECK(amplitude_distance(q, q) <= 1e-8);
}

TEST_CASE("warped sine is registered back") {
  const Grid g = Grid::uniform(201);
  const Func f1 = sample_func(g, [](double t) { return std::sin(2.0 * kPi * t); });
  const Warping gamma = random_warping(g, 1.5);
  const Func f2 = warp_func(sample_func(g, [](double t) { return std::sin(2.0 * kPi * t); }), gamma);
  const Srvf q1 = to_srvf(f1);
  const Srvf q2 = to_srvf(sample_func(g, [&](double t) { return std::sin(2.0 * kPi * gamma(t)); }));
  const PairwiseAlignment a = dp_align(q1, q2);
  // Measured: distance 0.034, sup error 0.0061.
  CHECK(a.distance <= 0.05 * l2_norm(q1));
  CHECK(sup_distance(a.gamma, invert(gamma)) <= 0.03);
  CHECK(a.distance < l2_distance(q1, q2));
  CHECK(l2_distance(a.q_aligned, warp_srvf(q2, a.gamma)) == 0.0);
  CHECK(amplitude_distance(q1, to_srvf(f2), {}, false) <= 0.05 * l2_norm(q1));
}

TEST_CASE("amplitude distance separates peak counts") {
  const Grid g = Grid::uniform(201);
  const Srvf one = to_srvf(sample_func(g, [](double t) { return kernel_sum(t, {1.0}); }));
  const Srvf two = to_srvf(sample_func(g, [](double t) { return kernel_sum(t, {1.0, 1.0}); }));
  const Warping gamma = random_warping(g, 2.0);
  const Srvf one_warped = to_srvf(sample_func(g, [&](double t) { return kernel_sum(gamma(t), {1.0}); }));
  const double residual = amplitude_distance(one, one_warped);
  const double between = amplitude_distance(one, two);
  CHECK(between > 10.0 * residual);
  CHECK(amplitude_distance(one, two) == amplitude_distance(two, one));
}

TEST_CASE("mean warping") {
  const Grid g = Grid::uniform(201);
  CHECK(sup_distance(mean_warping({Warping::identity(g)}), Warping::identity(g)) < 1e-12);
  const Warping gamma = random_warping(g, 1.3);
  CHECK(sup_distance(mean_warping({gamma}), gamma) < 1e-3);
  CHECK_THROWS_AS(mean_warping({}), InputError);
}

TEST_CASE("center_orbit") {
  const Grid g = Grid::uniform(201);
  const Srvf q = to_srvf(sample_func(g, [](double t) { return std::sin(2.0 * kPi * t); }));

  SUBCASE("identity warpings change nothing") {
    const CenteredOrbit c = center_orbit(q, {Warping::identity(g), Warping::identity(g)});
    CHECK(l2_distance(c.template_srvf, q) < 1e-12);
    for (const auto& w : c.warpings) CHECK(sup_distance(w, Warping::identity(g)) < 1e-12);
  }
  SUBCASE("symmetric pair") {
    const Warping gamma = random_warping(g, 1.8);
    const CenteredOrbit c = center_orbit(q, {gamma, invert(gamma)});
    CHECK(sup_distance(mean_warping(c.warpings), Warping::identity(g)) <= 0.02);
  }
  SUBCASE("a single warping is absorbed by the template") {
    // q registered to (q, gamma) by gamma; centering moves gamma into the template.
    const Warping gamma = random_warping(g, -2.0);
    const CenteredOrbit c = center_orbit(warp_srvf(q, gamma), {gamma});
    CHECK(sup_distance(c.warpings.front(), Warping::identity(g)) <= 5e-3);
    CHECK(l2_distance(c.template_srvf, q) / l2_norm(q) < 0.02);
  }
  SUBCASE("centering is idempotent") {
    std::vector<Warping> ws;
    for (double a : {-2.4, -0.5, 0.9, 2.7}) ws.push_back(random_warping(g, a));
    const CenteredOrbit once = center_orbit(q, ws);
    const CenteredOrbit twice = center_orbit(once.template_srvf, once.warpings);
    CHECK(sup_distance(mean_warping(once.warpings), Warping::identity(g)) <= 0.02);
    for (std::size_t i = 0; i < ws.size(); ++i) CHECK(sup_distance(once.warpings[i], twice.warpings[i]) <= 0.02);
    CHECK(l2_distance(once.template_srvf, twice.template_srvf) / l2_norm(q) <= 0.02);
  }
}

TEST_CASE("karcher_mean") {
  const Grid g = Grid::uniform(201);
  const Srvf q1 = to_srvf(sample_func(g, [](double t) { return std::sin(2.0 * kPi * t); }));

  SUBCASE("single input") {
    const MultipleAlignmentResult r = karcher_mean({q1});
    CHECK(l2_distance(r.template_srvf, q1) == 0.0);
    CHECK(sup_distance(r.warpings.front(), Warping::identity(g)) == 0.0);
  }
  SUBCASE("a warped pair") {
    const Srvf q2 = warp_srvf(q1, random_warping(g, 1.5));
    const MultipleAlignmentResult r = karcher_mean({q1, q2});
    CHECK(amplitude_distance(r.template_srvf, q1) <= 0.05 * l2_norm(q1));
  }
  SUBCASE("empty input") { CHECK_THROWS_AS(karcher_mean({}), InputError); }
}

TEST_CASE("multiple_align on warped copies") {
  const Grid g = Grid::uniform(201);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> alpha(-3.0, 3.0);
  std::vector<Func> funcs;
  for (int i = 0; i < 30; ++i) {
    const Warping w = random_warping(g, alpha(rng));
    funcs.push_back(sample_func(g, [&](double t) { return std::sin(2.0 * kPi * w(t)); }));
  }
  const FunctionSample sample(g, funcs);
  const AlignedSample r = multiple_align(sample);
  const double before = pointwise_band(sample.funcs).max_width();
  const double after = pointwise_band(r.aligned_funcs).max_width();
  MESSAGE("band ratio " << after / before << " iterations " << r.alignment.iterations);
  CHECK(after <= 0.2 * before);
  const auto& trace = r.alignment.cost_trace;
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
  CHECK(mean_warping(r.alignment.warpings).gamma().size() == 201);
  CHECK(sup_distance(mean_warping(r.alignment.warpings), Warping::identity(g)) <= 0.02);
}

TEST_CASE("multiple_align on identical functions") {
  const Grid g = Grid::uniform(101);
  const Func f = sample_func(g, [](double t) { return kernel_sum(t, {1.0, 0.8}); });
  const AlignedSample r = multiple_align(FunctionSample(g, {f, f, f, f}));
  for (const auto& w : r.alignment.warpings) CHECK(sup_distance(w, Warping::identity(g)) <= g.spacing());
  CHECK(r.alignment.converged);
}

TEST_CASE("multiple_align collapses peak locations") {
  const LabeledSample s = generate_sim1({40, 0.05, 1, 101, 3});
  const AlignedSample r = multiple_align(s.sample);
  std::vector<double> peaks;
  for (const auto& f : r.aligned_funcs) {
    Eigen::Index at = 0;
    f.values().col(0).maxCoeff(&at);
    peaks.push_back(s.sample.grid[static_cast<std::size_t>(at)]);
  }
  double mean = 0.0;
  for (double p : peaks) mean += p;
  mean /= static_cast<double>(peaks.size());
  double var = 0.0;
  for (double p : peaks) var += (p - mean) * (p - mean);
  const double sd = std::sqrt(var / static_cast<double>(peaks.size() - 1));
  MESSAGE("aligned peak sd " << sd);
  CHECK(sd <= 0.01);
  const auto& trace = r.alignment.cost_trace;
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
}

TEST_CASE("template function keeps the members' start") {
  const Grid g = Grid::uniform(101);
  const Func a = sample_func(g, [](double t) { return 1.0 + t; });
  const Func b = sample_func(g, [](double t) { return 3.0 + t; });
  const Func tmpl = template_function(to_srvf(a), {a, b});
  CHECK(tmpl.values()(0, 0) == doctest::Approx(2.0));
  CHECK(tmpl.values()(100, 0) == doctest::Approx(3.0).epsilon(1e-6));
}
