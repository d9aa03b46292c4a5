#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "choqlab/energy.hpp"
#include "choqlab/grid.hpp"
#include "choqlab/model.hpp"
#include "choqlab/quadrature.hpp"
#include "choqlab/riesz.hpp"

namespace choq {

struct Solution {
  RadialFunction u;
  EnergyBreakdown energy;
  double residual_norm = 0.0;  // Y-dual norm of J'(u), probe-checked
  double probe_residual = 0.0;  // sup over random probes of |J'(u)phi|/||phi||
  int iterations = 0;
  bool converged = false;
  double c0 = 0.0;
  bool level_ok = false;     // J(u) < c0
  bool ps_bound_ok = false;  // ||u||^2 <= (2 theta/(theta-1)) J(u) (1+tol)
  double theta = 0.0;
  std::string failure;  // empty on success
};

struct LevelReport {
  double J = 0.0;
  double c0 = 0.0;
  double refined_bound = 0.0;
  double margin_c0 = 0.0;
  double margin_refined = 0.0;
  bool below_c0 = false;
  bool below_refined = false;
};

namespace solver_detail {

// Gram matrix of the Y inner product in nodal coordinates is tridiagonal
// (P1 stiffness + lumped weighted mass).  Used both for the Riesz
// representative of J' (the Y-gradient) and for the exact dual norm
// sup_phi J'(u)phi / ||phi||_Y = sqrt(g^T G^{-1} g).
struct YMetric {
  std::vector<double> diag, off;

  YMetric(const GridPtr& grid, const PotentialSpec& V) {
    const auto& r = grid->r;
    const std::size_t n = r.size();
    diag.assign(n, 0.0);
    off.assign(n > 0 ? n - 1 : 0, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double dr = r[i + 1] - r[i];
      const double m = 0.5 * (r[i + 1] * r[i + 1] - r[i] * r[i]);
      const double k = 2.0 * M_PI * m / (dr * dr);
      diag[i] += k;
      diag[i + 1] += k;
      off[i] -= k;
    }
    for (std::size_t i = 0; i < n; ++i)
      diag[i] += 2.0 * M_PI * grid->w[i] * V(r[i]);
  }

  std::vector<double> solve(std::vector<double> rhs) const {
    solve_tridiagonal(diag, off, rhs);
    return rhs;
  }
};

inline double dual_norm(const YMetric& metric, const std::vector<double>& g) {
  auto x = metric.solve(g);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * x[i];
  return std::sqrt(std::max(0.0, acc));
}

// Smooth random probe directions: random nodal noise damped by a few
// Jacobi sweeps so the Y norm stays moderate.
inline RadialFunction random_probe(const GridPtr& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t n = grid->size();
  std::vector<double> v(n);
  for (auto& x : v) x = gauss(rng);
  for (int sweep = 0; sweep < 4; ++sweep) {
    std::vector<double> s(v);
    for (std::size_t i = 1; i + 1 < n; ++i)
      s[i] = 0.25 * v[i - 1] + 0.5 * v[i] + 0.25 * v[i + 1];
    s[0] = 0.5 * (v[0] + v[1]);
    s[n - 1] = 0.5 * (v[n - 2] + v[n - 1]);
    v.swap(s);
  }
  return RadialFunction(grid, std::move(v));
}

}  // namespace solver_detail

inline RadialFunction gaussian_init(const GridPtr& grid,
                                    const PotentialSpec& V) {
  auto u = RadialFunction::sample(grid, [](double r) { return std::exp(-r * r); });
  const double nrm = std::sqrt(y_norm_sq(u, V));
  for (auto& x : u.v) x /= nrm;
  return u;
}

// The cutoff start mirroring the minimax-estimate construction: 1 on
// B_{1/2}, smooth taper to 0 on B_1.
inline RadialFunction cutoff_init(const GridPtr& grid) {
  return RadialFunction::sample(grid, [](double r) {
    if (r <= 0.5) return 1.0;
    if (r >= 1.0) return 0.0;
    const double t = (r - 0.5) / 0.5;
    return 1.0 - t * t * (3.0 - 2.0 * t);  // smoothstep taper
  });
}

// Ground-state candidate by Nehari-projected descent: project onto the
// Nehari set via the fibering maximizer, take a Y-gradient step with
// Armijo backtracking on the projected energy, re-project.  Produces a
// numerical candidate plus diagnostic flags; it never claims existence.
inline Solution solve_ground_state(const ProblemSpec& spec,
                                   const GridPtr& grid, const RieszKernel& ker,
                                   const RadialFunction& init,
                                   double tol = 1e-6, int max_iter = 5000,
                                   std::uint64_t seed = 42,
                                   std::function<void(int, double, double)>
                                       trace = nullptr) {
  spec.validate();
  init.check_finite();
  bool nonzero = false;
  for (double x : init.v) {
    if (x < 0.0)
      throw std::invalid_argument("solve_ground_state: init must be >= 0");
    if (x != 0.0) nonzero = true;
  }
  if (!nonzero)
    throw std::invalid_argument("solve_ground_state: init must be nonzero");

  const solver_detail::YMetric metric(grid, spec.V);

  auto project = [&](RadialFunction u) {
    const auto [t, J] = fibering_maximize(u, spec, ker);
    for (auto& x : u.v) x *= t;
    return std::make_pair(std::move(u), J);
  };

  Solution sol;
  sol.u = init;
  auto [u, J_cur] = project(sol.u);

  double step = 1.0;
  int stagnant = 0;
  int it = 0;
  for (; it < max_iter; ++it) {
    const auto grad = gradient_J(u, spec, ker);
    const double res = solver_detail::dual_norm(metric, grad.v);
    if (trace) trace(it, J_cur, res);
    if (res < tol) {
      sol.converged = true;
      break;
    }

    // Near the critical point the preconditioner is upgraded from the
    // Y-metric Gram to the full Hessian (Newton), guarded by a residual
    // decrease test; plain descent alone stalls at ~1e-3.
    if (res < 5e-2) {
      auto H = hessian_J(u, spec, ker);
      std::vector<double> d = grad.v;
      bool have_dir = true;
      try {
        solve_dense(H, d);
      } catch (const std::runtime_error&) {
        have_dir = false;
      }
      bool newton_ok = false;
      if (have_dir) {
        for (double damp : {1.0, 0.5, 0.25, 0.125}) {
          RadialFunction cand(grid, u.v);
          bool any = false;
          for (std::size_t i = 0; i < cand.size(); ++i) {
            cand.v[i] = std::max(0.0, u.v[i] - damp * d[i]);
            any = any || cand.v[i] != 0.0;
          }
          if (!any) continue;
          try {
            auto [pu, pJ] = project(std::move(cand));
            const auto g2 = gradient_J(pu, spec, ker);
            if (solver_detail::dual_norm(metric, g2.v) < res) {
              u = std::move(pu);
              J_cur = pJ;
              newton_ok = true;
              break;
            }
          } catch (const std::runtime_error&) {
          }
        }
      }
      if (newton_ok) {
        stagnant = 0;
        continue;
      }
    }

    // Y-gradient (Riesz representative of J' in the Y inner product).
    const auto dir = metric.solve(grad.v);
    double gd = 0.0;
    for (std::size_t i = 0; i < dir.size(); ++i) gd += grad.v[i] * dir[i];

    bool accepted = false;
    double s = std::min(step * 2.0, 1e3);
    for (int bt = 0; bt < 60; ++bt, s *= 0.5) {
      RadialFunction cand(grid, u.v);
      bool any = false;
      for (std::size_t i = 0; i < cand.size(); ++i) {
        cand.v[i] = std::max(0.0, u.v[i] - s * dir[i]);
        any = any || cand.v[i] != 0.0;
      }
      if (!any) continue;
      try {
        auto [pu, pJ] = project(std::move(cand));
        if (pJ <= J_cur - 1e-4 * s * gd || pJ < J_cur - 1e-15 * std::abs(J_cur)) {
          u = std::move(pu);
          J_cur = pJ;
          step = s;
          accepted = true;
          break;
        }
      } catch (const std::runtime_error&) {
        // overflow or lost projection at this trial step; shrink
      }
    }
    if (!accepted) {
      if (++stagnant >= 50) {
        sol.failure = "stagnation: 50 consecutive non-improving steps";
        break;
      }
    } else {
      stagnant = 0;
    }
  }
  if (!sol.converged && sol.failure.empty() && it >= max_iter)
    sol.failure = "not converged within max_iter";

  sol.u = u;
  sol.iterations = it;
  sol.energy = energy_J(u, spec, ker);
  const auto grad = gradient_J(u, spec, ker);
  sol.residual_norm = solver_detail::dual_norm(metric, grad.v);

  std::mt19937_64 rng(seed);
  double probe_sup = 0.0;
  for (int k = 0; k < 20; ++k) {
    auto phi = solver_detail::random_probe(grid, rng);
    const double nphi = std::sqrt(y_norm_sq(phi, spec.V));
    probe_sup =
        std::max(probe_sup, std::abs(derivative_J(u, spec, ker, phi)) / nphi);
  }
  sol.probe_residual = probe_sup;

  sol.theta = spec.f.theta_or_fitted();
  // The compactness ceiling is tied to the exponential-critical exponent;
  // without one there is no ceiling to violate.
  sol.c0 = spec.f.alpha0 > 0.0
               ? c0_threshold(spec.mu, spec.Q.exponent_origin(),
                              spec.f.alpha0, sol.theta)
               : std::numeric_limits<double>::infinity();
  sol.level_ok = sol.energy.J < sol.c0;
  sol.ps_bound_ok = sol.energy.norm_sq <=
                    2.0 * sol.theta / (sol.theta - 1.0) * sol.energy.J *
                        (1.0 + 1e-6);
  return sol;
}

// Lemma-4.2 style bound at a critical point: ||u||^2 <= (2 theta/(theta-1)) J(u).
inline std::pair<double, bool> ps_bound_check(const Solution& sol,
                                              double theta,
                                              double rel_tol = 1e-6) {
  if (!sol.converged)
    throw std::invalid_argument("ps_bound_check: solution not converged");
  if (!(theta > 1.0)) throw std::domain_error("ps_bound_check: theta <= 1");
  const double bound = 2.0 * theta / (theta - 1.0) * sol.energy.J;
  return {bound, sol.energy.norm_sq <= bound * (1.0 + rel_tol)};
}

inline LevelReport level_check(const Solution& sol, const ProblemSpec& spec) {
  if (!sol.converged)
    throw std::invalid_argument("level_check: solution not converged");
  LevelReport rep;
  rep.J = sol.energy.J;
  const double b0 = spec.Q.exponent_origin();
  rep.c0 = c0_threshold(spec.mu, b0, spec.f.alpha0, sol.theta);
  rep.refined_bound = refined_level_bound(spec.mu, b0, spec.f.alpha0);
  rep.margin_c0 = rep.c0 - rep.J;
  rep.margin_refined = rep.refined_bound - rep.J;
  rep.below_c0 = rep.J < rep.c0;
  rep.below_refined = rep.J < rep.refined_bound;
  return rep;
}

// Samples J along the ray t -> t u_dir on [0, t_max]: an upper bound for
// the mountain-pass level along that path.  Overflow truncates the scan.
inline double path_max(const RadialFunction& u_dir, const ProblemSpec& spec,
                       const RieszKernel& ker, double t_max, int n_samples) {
  u_dir.check_finite();
  bool nonzero = false;
  for (double x : u_dir.v) nonzero = nonzero || x != 0.0;
  if (!nonzero) throw std::invalid_argument("path_max: zero direction");
  if (n_samples < 1) throw std::invalid_argument("path_max: n_samples < 1");
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= n_samples; ++k) {
    const double t = t_max * double(k) / double(n_samples);
    RadialFunction s(u_dir.grid, u_dir.v);
    for (auto& x : s.v) x *= t;
    try {
      best = std::max(best, energy_J(s, spec, ker).J);
    } catch (const std::runtime_error&) {
      break;  // overflow along the path: truncate with what we have
    }
  }
  return best;
}

}  // namespace choq
