#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace choq {

// Adaptive 1-D quadrature based on nested Gauss(7)/Kronrod(15) rules.
// Used for angular kernel integrals and nonlinearity tables; integrands
// must be finite on the open interval.
namespace detail {

// Kronrod-15 nodes/weights on [-1,1]; Gauss-7 weights embedded at the
// odd-indexed nodes.
inline constexpr double kKronrodNodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898,  0.405845151377397,  0.586087235467691,
    0.741531185599394,  0.864864423359769,  0.949107912342759,
    0.991455371120813};
inline constexpr double kKronrodWeights[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529};
inline constexpr double kGaussWeights[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870};

template <typename F>
void gauss_kronrod(const F& f, double a, double b, double& kronrod,
                   double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double gk = 0.0, g = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double fx = f(c + h * kKronrodNodes[i]);
    gk += kKronrodWeights[i] * fx;
    if (i % 2 == 1) g += kGaussWeights[i / 2] * fx;
  }
  kronrod = gk * h;
  err = std::abs((gk - g) * h);
}

template <typename F>
double adapt(const F& f, double a, double b, double tol_abs, int depth) {
  double v, e;
  gauss_kronrod(f, a, b, v, e);
  if (e <= tol_abs || depth <= 0) return v;
  // Keep the per-interval tolerance fixed: halving it each level forces a
  // full tree near integrable singularities.  GK15 error estimates are
  // conservative enough that the summed error stays near the request.
  const double c = 0.5 * (a + b);
  return adapt(f, a, c, tol_abs, depth - 1) +
         adapt(f, c, b, tol_abs, depth - 1);
}

}  // namespace detail

// Integrates f over [a,b] to relative tolerance rel_tol (with respect to
// a first whole-interval estimate). Recursion depth is capped; weakly
// singular endpoints converge geometrically under bisection.
template <typename F>
double integrate_adaptive(const F& f, double a, double b,
                          double rel_tol = 1e-10, int max_depth = 60) {
  if (!(a < b)) {
    if (a == b) return 0.0;
    throw std::invalid_argument("integrate_adaptive: a > b");
  }
  double v0, e0;
  detail::gauss_kronrod(f, a, b, v0, e0);
  const double scale = std::max(std::abs(v0), 1e-300);
  if (e0 <= rel_tol * scale) return v0;
  return detail::adapt(f, a, b, rel_tol * scale, max_depth);
}

// Solves the symmetric tridiagonal system (diag, off) x = b in place.
// Thomas algorithm; requires positive-definite input.
inline void solve_tridiagonal(const std::vector<double>& diag,
                              const std::vector<double>& off,
                              std::vector<double>& x) {
  const std::size_t n = diag.size();
  if (n == 0) return;
  std::vector<double> c(n, 0.0), d(n, 0.0);
  double denom = diag[0];
  if (denom == 0.0) throw std::runtime_error("tridiagonal: zero pivot");
  c[0] = (n > 1) ? off[0] / denom : 0.0;
  d[0] = x[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - off[i - 1] * c[i - 1];
    if (denom == 0.0) throw std::runtime_error("tridiagonal: zero pivot");
    if (i < n - 1) c[i] = off[i] / denom;
    d[i] = (x[i] - off[i - 1] * d[i - 1]) / denom;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
}

// Dense LU with partial pivoting; A is n*n row-major and is destroyed.
inline void solve_dense(std::vector<double>& A, std::vector<double>& x) {
  const std::size_t n = x.size();
  if (A.size() != n * n) throw std::invalid_argument("solve_dense: size");
  std::vector<std::size_t> piv(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(A[k * n + k]);
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(A[i * n + k]) > best) {
        best = std::abs(A[i * n + k]);
        p = i;
      }
    if (best == 0.0) throw std::runtime_error("solve_dense: singular matrix");
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j)
        std::swap(A[k * n + j], A[p * n + j]);
      std::swap(x[k], x[p]);
    }
    const double pivot = A[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = A[i * n + k] / pivot;
      if (m == 0.0) continue;
      const double* rk = &A[k * n];
      double* ri = &A[i * n];
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= m * rk[j];
      x[i] -= m * x[k];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double acc = x[i];
    const double* ri = &A[i * n];
    for (std::size_t j = i + 1; j < n; ++j) acc -= ri[j] * x[j];
    x[i] = acc / ri[i];
  }
}

}  // namespace choq
