#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace choq {

// Radial discretization of R^2: strictly increasing nodes r_1 < ... < r_N
// with r_1 > 0 (a pinhole excludes the origin so that singular power-law
// weights stay finite), and trapezoid quadrature weights for the measure
// r dr with the r factor integrated exactly per cell.  Integrals over
// (0, r_min) and (r_max, inf) are truncated, never extrapolated.
struct RadialGrid {
  std::vector<double> r;  // nodes
  std::vector<double> w;  // weights: sum_i w_i g_i ~ int g(r) r dr
  bool log_uniform = false;

  std::size_t size() const { return r.size(); }
  double r_min() const { return r.front(); }
  double r_max() const { return r.back(); }

  // Builds a grid from arbitrary strictly increasing positive nodes.
  static RadialGrid from_nodes(std::vector<double> nodes) {
    if (nodes.size() < 2)
      throw std::invalid_argument("RadialGrid: need at least 2 nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!std::isfinite(nodes[i]) || nodes[i] <= 0.0)
        throw std::invalid_argument("RadialGrid: nodes must be positive finite");
      if (i > 0 && nodes[i] <= nodes[i - 1])
        throw std::invalid_argument("RadialGrid: nodes must be strictly increasing");
    }
    RadialGrid g;
    g.r = std::move(nodes);
    g.w.assign(g.r.size(), 0.0);
    // Trapezoid in g with exact integration of the r factor per cell:
    // int_{r_i}^{r_{i+1}} r dr = (r_{i+1}^2 - r_i^2)/2, split evenly.
    for (std::size_t i = 0; i + 1 < g.r.size(); ++i) {
      const double m = 0.5 * (g.r[i + 1] * g.r[i + 1] - g.r[i] * g.r[i]);
      g.w[i] += 0.5 * m;
      g.w[i + 1] += 0.5 * m;
    }
    return g;
  }

  // FNV-1a over the node bit patterns; used to key kernel cache files.
  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (double x : r) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(x));
      std::memcpy(&bits, &x, sizeof(bits));
      for (int k = 0; k < 8; ++k) {
        h ^= (bits >> (8 * k)) & 0xffu;
        h *= 1099511628211ull;
      }
    }
    return h;
  }
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr build_log_grid(double r_min, double r_max,
                              std::size_t n_nodes) {
  if (!(r_min > 0.0) || !(r_max > 0.0))
    throw std::invalid_argument("build_log_grid: radii must be positive");
  if (!(r_min < r_max))
    throw std::invalid_argument("build_log_grid: r_min >= r_max");
  if (n_nodes < 16)
    throw std::invalid_argument("build_log_grid: n_nodes must be >= 16");
  std::vector<double> nodes(n_nodes);
  const double la = std::log(r_min), lb = std::log(r_max);
  for (std::size_t i = 0; i < n_nodes; ++i)
    nodes[i] = std::exp(la + (lb - la) * double(i) / double(n_nodes - 1));
  nodes.front() = r_min;
  nodes.back() = r_max;
  RadialGrid g = RadialGrid::from_nodes(std::move(nodes));
  g.log_uniform = true;
  return std::make_shared<const RadialGrid>(std::move(g));
}

// Nodal values of a radial profile on a shared grid; interpreted as the
// piecewise-linear interpolant between nodes.
struct RadialFunction {
  GridPtr grid;
  std::vector<double> v;

  RadialFunction() = default;
  RadialFunction(GridPtr g, std::vector<double> values)
      : grid(std::move(g)), v(std::move(values)) {
    if (!grid) throw std::invalid_argument("RadialFunction: null grid");
    if (v.size() != grid->size())
      throw std::invalid_argument("RadialFunction: value/node count mismatch");
  }

  static RadialFunction zeros(GridPtr g) {
    std::vector<double> z(g->size(), 0.0);
    return RadialFunction(std::move(g), std::move(z));
  }

  template <typename F>
  static RadialFunction sample(GridPtr g, const F& f) {
    std::vector<double> vals(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) vals[i] = f(g->r[i]);
    return RadialFunction(std::move(g), std::move(vals));
  }

  std::size_t size() const { return v.size(); }

  void check_finite() const {
    for (double x : v)
      if (!std::isfinite(x))
        throw std::runtime_error("RadialFunction: non-finite nodal value");
  }
};

// 2*pi * sum w_i g_i, the discrete form of int_{R^2} g(|x|) dx.
inline double integrate(const RadialFunction& g) {
  g.check_finite();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += g.grid->w[i] * g.v[i];
  return 2.0 * M_PI * acc;
}

// Same but truncated at radius R (linear interpolation of the last cell);
// used for ball integrals such as ||V||_{L^1(B_1)}.
inline double integrate_to(const RadialFunction& g, double R) {
  g.check_finite();
  const auto& r = g.grid->r;
  if (R <= r.front()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    if (r[i] >= R) break;
    const double hi = std::min(r[i + 1], R);
    double gv_hi = g.v[i + 1];
    if (hi < r[i + 1]) {
      const double t = (hi - r[i]) / (r[i + 1] - r[i]);
      gv_hi = g.v[i] + t * (g.v[i + 1] - g.v[i]);
    }
    acc += 0.5 * (g.v[i] + gv_hi) * 0.5 * (hi * hi - r[i] * r[i]);
  }
  return 2.0 * M_PI * acc;
}

// Nodal derivative by second-order finite differences on a non-uniform
// grid (three-point stencils, one-sided at the ends).
inline RadialFunction radial_derivative(const RadialFunction& u) {
  u.check_finite();
  const auto& r = u.grid->r;
  const std::size_t n = r.size();
  if (n < 3)
    throw std::invalid_argument("radial_derivative: need at least 3 nodes");
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = r[i] - r[i - 1], h2 = r[i + 1] - r[i];
    d[i] = (-h2 / (h1 * (h1 + h2))) * u.v[i - 1] +
           ((h2 - h1) / (h1 * h2)) * u.v[i] +
           (h1 / (h2 * (h1 + h2))) * u.v[i + 1];
  }
  {
    const double h1 = r[1] - r[0], h2 = r[2] - r[1];
    d[0] = (-(2 * h1 + h2) / (h1 * (h1 + h2))) * u.v[0] +
           ((h1 + h2) / (h1 * h2)) * u.v[1] -
           (h1 / (h2 * (h1 + h2))) * u.v[2];
  }
  {
    const double h1 = r[n - 2] - r[n - 3], h2 = r[n - 1] - r[n - 2];
    d[n - 1] = (h2 / (h1 * (h1 + h2))) * u.v[n - 3] -
               ((h1 + h2) / (h1 * h2)) * u.v[n - 2] +
               ((h1 + 2 * h2) / (h2 * (h1 + h2))) * u.v[n - 1];
  }
  return RadialFunction(u.grid, std::move(d));
}

// Dirichlet energy 2*pi int |u'|^2 r dr of the piecewise-linear
// interpolant (exact per-interval slopes, exact r factor).  This is the
// kinetic part of the Y norm and what the energy gradient differentiates.
inline double dirichlet_energy(const RadialFunction& u) {
  u.check_finite();
  const auto& r = u.grid->r;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double slope = (u.v[i + 1] - u.v[i]) / (r[i + 1] - r[i]);
    acc += slope * slope * 0.5 * (r[i + 1] * r[i + 1] - r[i] * r[i]);
  }
  return 2.0 * M_PI * acc;
}

}  // namespace choq
