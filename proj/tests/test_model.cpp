#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "choqlab/grid.hpp"
#include "choqlab/model.hpp"
#include "choqlab/quadrature.hpp"

using namespace choq;

namespace {
const CheckEntry* find_check(const std::vector<CheckEntry>& cs,
                             const std::string& needle) {
  for (const auto& c : cs)
    if (c.name.find(needle) != std::string::npos) return &c;
  return nullptr;
}
}  // namespace

TEST_CASE("piecewise power potential evaluation") {
  auto V = PotentialSpec::power(PotentialSpec::Role::V, 2.0, 1.0, 2.0);
  CHECK(V(0.5) == Catch::Approx(1.0));
  CHECK(V(1.0) == Catch::Approx(2.0));
  CHECK(V(2.0) == Catch::Approx(8.0));
  CHECK(V.exponent_origin() == 1.0);
  CHECK(V.exponent_infinity() == 2.0);
  CHECK_THROWS_AS(V(0.0), std::domain_error);
  auto C = PotentialSpec::constant(PotentialSpec::Role::Q, 3.0);
  CHECK(C(0.001) == 3.0);
  CHECK(C.exponent_origin() == 0.0);
}

TEST_CASE("tabulated potential log-interpolates") {
  PotentialSpec p;
  p.form = PotentialSpec::Form::Tabulated;
  p.tab_r = {0.1, 1.0, 10.0};
  p.tab_val = {2.0, 4.0, 8.0};
  CHECK(p(0.05) == Catch::Approx(2.0));
  CHECK(p(std::sqrt(0.1)) == Catch::Approx(3.0));
  CHECK(p(20.0) == Catch::Approx(8.0));
}

TEST_CASE("admissibility: constants are borderline in (Q0)") {
  ProblemSpec spec;  // V = Q = 1, mu = 1, so a = b = 0
  auto rep = check_admissible(spec);
  const auto* bc = find_check(rep.checks, "b < a(4-mu)/4");
  REQUIRE(bc != nullptr);
  CHECK_FALSE(bc->pass);  // 0 < 0 fails: strict inequality
  CHECK_FALSE(rep.all_pass);
}

TEST_CASE("admissibility: strict power pair passes") {
  ProblemSpec spec;
  spec.mu = 1.0;
  spec.V = PotentialSpec::power(PotentialSpec::Role::V, 1.0, 1.0, 2.0);
  spec.Q = PotentialSpec::power(PotentialSpec::Role::Q, 1.0, -0.5, 0.5);
  auto rep = check_admissible(spec);
  CHECK(rep.all_pass);  // 0.5 < 2*3/4 = 1.5
}

TEST_CASE("admissibility: a0 = -2 fails by name") {
  ProblemSpec spec;
  spec.V = PotentialSpec::power(PotentialSpec::Role::V, 1.0, -2.0, 0.0);
  auto rep = check_admissible(spec);
  const auto* c = find_check(rep.checks, "a0 > -2");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->pass);
  CHECK_FALSE(rep.all_pass);
}

TEST_CASE("Trudinger-Moser threshold values") {
  CHECK(tm_threshold(1.0, 0.0) == Catch::Approx(4.0 * M_PI).epsilon(1e-12));
  CHECK(tm_threshold(1.0, -0.75) ==
        Catch::Approx(2.0 * M_PI).epsilon(1e-12));
  CHECK_THROWS_AS(tm_threshold(1.0, -1.5), std::domain_error);
  CHECK_THROWS_AS(tm_threshold(2.5, 0.0), std::domain_error);
}

TEST_CASE("compactness threshold c0") {
  CHECK(c0_threshold(1.0, 0.0, 4.0 * M_PI, 2.0) ==
        Catch::Approx(0.1875).epsilon(1e-12));
  // theta -> inf limit: (theta-1)/2theta -> 1/2, so c0 -> 0.375.
  CHECK(c0_threshold(1.0, 0.0, 4.0 * M_PI, 1e6) ==
        Catch::Approx(0.375).epsilon(1e-5));
  CHECK_THROWS_AS(c0_threshold(1.0, 0.0, 4.0 * M_PI, 1.0),
                  std::domain_error);
  CHECK(refined_level_bound(1.0, 0.0, 4.0 * M_PI) ==
        Catch::Approx(0.375).epsilon(1e-12));
}

TEST_CASE("xi1 closed-form cases") {
  auto grid = build_log_grid(1e-8, 2.0, 8192);
  auto V1 = PotentialSpec::constant(PotentialSpec::Role::V, 1.0);
  auto Q1 = PotentialSpec::constant(PotentialSpec::Role::Q, 1.0);
  CHECK(xi1_constant(V1, Q1, grid) ==
        Catch::Approx(4.0 * std::sqrt(2.0 * M_PI) / M_PI).epsilon(1e-5));
  auto Q2 = PotentialSpec::constant(PotentialSpec::Role::Q, 2.0);
  CHECK(xi1_constant(V1, Q2, grid) ==
        Catch::Approx(2.0 * std::sqrt(2.0 * M_PI) / M_PI).epsilon(1e-5));
  auto Vr = PotentialSpec::power(PotentialSpec::Role::V, 1.0, 1.0, 1.0);
  // ||V||_{L1(B1)} = 2 pi / 3.
  CHECK(xi1_constant(Vr, Q1, grid) ==
        Catch::Approx(std::sqrt(M_PI + 2.0 * M_PI / 3.0) / (M_PI / 4.0))
            .epsilon(1e-5));
}

TEST_CASE("xi requirement reference value and monotonicity") {
  auto grid = build_log_grid(1e-8, 2.0, 8192);
  auto V1 = PotentialSpec::constant(PotentialSpec::Role::V, 1.0);
  auto Q1 = PotentialSpec::constant(PotentialSpec::Role::Q, 1.0);
  // Hand-evaluated before the build: sqrt(128/3).
  const double ref = std::sqrt(128.0 / 3.0);
  CHECK(xi_requirement(1.0, 0.0, 4.0 * M_PI, 2.0, 2.0, V1, Q1, grid) ==
        Catch::Approx(ref).epsilon(1e-5));
  // Larger alpha0 shrinks c0, so the second term (and the max) grows.
  CHECK(xi_requirement(1.0, 0.0, 8.0 * M_PI, 2.0, 2.0, V1, Q1, grid) >
        xi_requirement(1.0, 0.0, 4.0 * M_PI, 2.0, 2.0, V1, Q1, grid));
  // Degenerate: huge c0 (tiny alpha0) pushes the second term below xi1.
  CHECK(xi_requirement(1.0, 0.0, 1e-6, 2.0, 2.0, V1, Q1, grid) ==
        Catch::Approx(xi1_constant(V1, Q1, grid)).epsilon(1e-12));
}

TEST_CASE("nonlinearity primitive matches quadrature of f") {
  auto nl = NonlinearitySpec::exp_critical(1.3, 2.0, 4.0 * M_PI);
  for (double s : {0.1, 0.5, 1.0, 2.0, 3.5}) {
    const double ref = integrate_adaptive(
        [&](double t) { return nl.f(t); }, 0.0, s, 1e-12);
    CHECK(nl.F(s) == Catch::Approx(ref).epsilon(1e-10));
  }
  CHECK(nl.F(0.0) == 0.0);
  CHECK(nl.F(-1.0) == 0.0);
}

TEST_CASE("f' matches central differences") {
  auto nl = NonlinearitySpec::exp_critical(1.0, 2.0, 4.0 * M_PI);
  for (double s : {0.2, 0.7, 1.5, 3.0}) {
    const double h = 1e-6 * s;
    const double fd = (nl.f(s + h) - nl.f(s - h)) / (2.0 * h);
    CHECK(nl.fprime(s) == Catch::Approx(fd).epsilon(1e-7));
  }
  auto pp = NonlinearitySpec::pure_power(2.0, 3.0);
  CHECK(pp.fprime(2.0) == Catch::Approx(2.0 * 3.0 * 2.0 * 2.0).epsilon(1e-12));
}

TEST_CASE("exponential overflow is an error, not a saturation") {
  auto nl = NonlinearitySpec::exp_critical(1.0, 2.0, 4.0 * M_PI);
  CHECK_THROWS_AS(nl.f(10.0), std::runtime_error);
  CHECK_THROWS_AS(nl.F(10.0), std::runtime_error);
}

TEST_CASE("fitted theta") {
  // Pure power F = s^q has s f / F = q exactly.
  auto pp = NonlinearitySpec::pure_power(1.0, 4.0);
  CHECK(pp.fitted_theta() == Catch::Approx(4.0).margin(1e-5));
  // Shipped family: inf of s f/F is attained at s -> 0 where f/F -> (p+3)/s.
  auto nl = NonlinearitySpec::exp_critical(1.0, 2.0, 4.0 * M_PI);
  CHECK(nl.fitted_theta() == Catch::Approx(5.0).margin(1e-4));
  CHECK(nl.theta_or_fitted() == Catch::Approx(5.0).margin(1e-4));
  nl.theta = 2.0;
  CHECK(nl.theta_or_fitted() == 2.0);
}

TEST_CASE("growth checks pass for the shipped family") {
  auto nl = NonlinearitySpec::exp_critical(1.0, 2.0, 4.0 * M_PI);
  auto rep = check_growth(nl, 1.0);
  CHECK(rep.all_declared_pass);
  const auto* f1 = find_check(rep.checks, "(f1)");
  REQUIRE(f1 != nullptr);
  CHECK(f1->pass);
}

TEST_CASE("growth check (f2) equality case: f(s) = s") {
  // f = 2s as pure power F = s^2; theta = 2 gives exact equality.
  auto nl = NonlinearitySpec::pure_power(1.0, 2.0);
  nl.theta = 2.0;
  auto rep = check_growth(nl, 1.0);
  const auto* f2 = find_check(rep.checks, "(f2)");
  REQUIRE(f2 != nullptr);
  CHECK(f2->pass);
}

TEST_CASE("declared (f3)/(f5) that fail are reported") {
  auto nl = NonlinearitySpec::exp_critical(1e-12, 6.0, 0.5);
  nl.xi = 100.0;  // F(1) << 100: (f3) must fail
  nl.q_exp = 2.0;
  nl.beta0 = 1e6;  // absurd liminf demand: (f5) must fail
  auto rep = check_growth(nl, 1.0);
  CHECK_FALSE(rep.all_declared_pass);
}

TEST_CASE("problem spec validation") {
  ProblemSpec spec;
  spec.mu = 2.0;
  CHECK_THROWS_AS(spec.validate(), std::domain_error);
  spec.mu = 0.5;
  CHECK_NOTHROW(spec.validate());
}
