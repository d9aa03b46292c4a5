#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "choqlab/grid.hpp"

using namespace choq;

TEST_CASE("log grid endpoints and constant node ratio") {
  auto g = build_log_grid(1e-6, 1.0, 1024);
  REQUIRE(g->size() == 1024);
  CHECK(g->r.front() == Catch::Approx(1e-6).epsilon(1e-14));
  CHECK(g->r.back() == Catch::Approx(1.0).epsilon(1e-14));
  const double ratio = g->r[1] / g->r[0];
  for (std::size_t i = 1; i + 1 < g->size(); ++i)
    CHECK(g->r[i + 1] / g->r[i] == Catch::Approx(ratio).epsilon(1e-12));
  CHECK(g->log_uniform);
}

TEST_CASE("grid construction preconditions") {
  CHECK_THROWS_AS(build_log_grid(1.0, 0.5, 64), std::invalid_argument);
  CHECK_THROWS_AS(build_log_grid(-1.0, 1.0, 64), std::invalid_argument);
  CHECK_THROWS_AS(build_log_grid(0.0, 1.0, 64), std::invalid_argument);
  CHECK_THROWS_AS(build_log_grid(0.1, 1.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(RadialGrid::from_nodes({0.1, 0.3, 0.2, 0.5}),
                  std::invalid_argument);
}

TEST_CASE("weights are nonnegative and sum to the exact radial mass") {
  auto g = build_log_grid(1e-6, 1.0, 2048);
  double sum = 0.0;
  for (double w : g->w) {
    CHECK(w >= 0.0);
    sum += w;
  }
  const double exact = 0.5 * (1.0 - 1e-12);
  CHECK(sum == Catch::Approx(exact).epsilon(1e-13));
}

TEST_CASE("integrate of the unit profile is the pinholed disk area") {
  auto g = build_log_grid(1e-6, 1.0, 2048);
  auto one = RadialFunction::sample(g, [](double) { return 1.0; });
  CHECK(integrate(one) == Catch::Approx(M_PI * (1.0 - 1e-12)).epsilon(1e-10));
}

TEST_CASE("integrate of the Gaussian reaches 1e-8 relative error") {
  auto g = build_log_grid(1e-6, 12.0, 262144);
  auto f = RadialFunction::sample(g, [](double r) { return std::exp(-r * r); });
  CHECK(integrate(f) == Catch::Approx(M_PI).epsilon(1e-8));
}

TEST_CASE("integrate handles the integrable singularity r^{-1/2}") {
  auto g = build_log_grid(1e-8, 1.0, 2048);
  auto f = RadialFunction::sample(g,
                                  [](double r) { return 1.0 / std::sqrt(r); });
  CHECK(integrate(f) == Catch::Approx(4.0 * M_PI / 3.0).epsilon(1e-4));
}

TEST_CASE("integrate rejects non-finite values") {
  auto g = build_log_grid(0.1, 1.0, 32);
  auto f = RadialFunction::zeros(g);
  f.v[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(integrate(f), std::runtime_error);
}

TEST_CASE("quadrature linearity") {
  auto grid = build_log_grid(1e-3, 5.0, 256);
  auto g = RadialFunction::sample(grid, [](double r) { return std::exp(-r); });
  auto h = RadialFunction::sample(grid, [](double r) { return r * r; });
  RadialFunction comb(grid, g.v);
  for (std::size_t i = 0; i < comb.size(); ++i)
    comb.v[i] = 2.5 * g.v[i] - 0.75 * h.v[i];
  CHECK(integrate(comb) ==
        Catch::Approx(2.5 * integrate(g) - 0.75 * integrate(h))
            .epsilon(1e-13));
}

TEST_CASE("refinement convergence for the Gaussian") {
  double prev = -1.0;
  for (std::size_t n : {1024u, 2048u, 4096u, 8192u}) {
    auto g = build_log_grid(1e-6, 12.0, n);
    auto f =
        RadialFunction::sample(g, [](double r) { return std::exp(-r * r); });
    const double err = std::abs(integrate(f) - M_PI);
    if (prev > 0.0) CHECK(err < prev / 3.0);
    prev = err;
  }
}

TEST_CASE("radial derivative is exact on linear profiles") {
  auto g = build_log_grid(0.1, 1.0, 128);
  auto u = RadialFunction::sample(g, [](double r) { return r; });
  auto d = radial_derivative(u);
  for (std::size_t i = 1; i + 1 < g->size(); ++i)
    CHECK(d.v[i] == Catch::Approx(1.0).epsilon(1e-10));
  auto c = RadialFunction::sample(g, [](double) { return 3.0; });
  auto dc = radial_derivative(c);
  for (double x : dc.v) CHECK(std::abs(x) < 1e-12);
}

TEST_CASE("radial derivative of log(1/r)") {
  auto g = build_log_grid(0.1, 1.0, 2048);
  auto u =
      RadialFunction::sample(g, [](double r) { return std::log(1.0 / r); });
  auto d = radial_derivative(u);
  for (std::size_t i = 1; i + 1 < g->size(); ++i)
    CHECK(d.v[i] == Catch::Approx(-1.0 / g->r[i]).epsilon(1e-6));
}

TEST_CASE("radial derivative needs at least 3 nodes") {
  auto g = std::make_shared<const RadialGrid>(
      RadialGrid::from_nodes({0.5, 1.0}));
  auto u = RadialFunction::zeros(g);
  CHECK_THROWS_AS(radial_derivative(u), std::invalid_argument);
}

TEST_CASE("truncated integral stops at the cut radius") {
  auto g = build_log_grid(1e-4, 4.0, 4096);
  auto one = RadialFunction::sample(g, [](double) { return 1.0; });
  CHECK(integrate_to(one, 1.0) == Catch::Approx(M_PI).epsilon(1e-6));
  CHECK(integrate_to(one, 0.5) == Catch::Approx(M_PI * 0.25).epsilon(1e-6));
}

TEST_CASE("dirichlet energy of the log profile") {
  // u = log(1/r) on [a,1]: 2 pi int (1/r)^2 r dr = 2 pi log(1/a).
  auto g = build_log_grid(0.01, 1.0, 1024);
  auto u =
      RadialFunction::sample(g, [](double r) { return std::log(1.0 / r); });
  CHECK(dirichlet_energy(u) ==
        Catch::Approx(2.0 * M_PI * std::log(100.0)).epsilon(1e-5));
}

TEST_CASE("grid hash distinguishes grids") {
  auto a = build_log_grid(1e-6, 1.0, 256);
  auto b = build_log_grid(1e-6, 1.0, 512);
  auto c = build_log_grid(1e-6, 2.0, 256);
  CHECK(a->hash() != b->hash());
  CHECK(a->hash() != c->hash());
  CHECK(a->hash() == build_log_grid(1e-6, 1.0, 256)->hash());
}
