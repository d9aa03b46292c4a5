#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "choqlab/grid.hpp"
#include "choqlab/quadrature.hpp"

namespace choq {

// Matched piecewise power law c*r^{e0} for r <= 1, c*r^{einf} for r > 1
// (continuous at r = 1), constant, or tabulated.  Covers every exponent
// pair admissible under (V0)/(Q0) with a single coefficient.
struct PotentialSpec {
  enum class Role { V, Q };
  enum class Form { Constant, Power, Tabulated };

  Role role = Role::V;
  Form form = Form::Constant;
  double c = 1.0;
  double e0 = 0.0;    // exponent near the origin (a0 or b0)
  double einf = 0.0;  // exponent at infinity (a or b)
  std::vector<double> tab_r, tab_val;  // Tabulated form, log-interp between

  static PotentialSpec constant(Role role, double value) {
    PotentialSpec p;
    p.role = role;
    p.form = Form::Constant;
    p.c = value;
    return p;
  }
  static PotentialSpec power(Role role, double c, double e0, double einf) {
    PotentialSpec p;
    p.role = role;
    p.form = Form::Power;
    p.c = c;
    p.e0 = e0;
    p.einf = einf;
    return p;
  }

  double operator()(double r) const {
    if (!(r > 0.0)) throw std::domain_error("PotentialSpec: r must be > 0");
    switch (form) {
      case Form::Constant:
        return c;
      case Form::Power:
        return c * std::pow(r, r <= 1.0 ? e0 : einf);
      case Form::Tabulated: {
        if (tab_r.size() < 2 || tab_r.size() != tab_val.size())
          throw std::invalid_argument("PotentialSpec: bad table");
        auto it = std::lower_bound(tab_r.begin(), tab_r.end(), r);
        if (it == tab_r.begin()) return tab_val.front();
        if (it == tab_r.end()) return tab_val.back();
        const std::size_t j = std::size_t(it - tab_r.begin());
        const double t = (std::log(r) - std::log(tab_r[j - 1])) /
                         (std::log(tab_r[j]) - std::log(tab_r[j - 1]));
        return tab_val[j - 1] + t * (tab_val[j] - tab_val[j - 1]);
      }
    }
    throw std::logic_error("PotentialSpec: unknown form");
  }

  double exponent_origin() const {
    return form == Form::Constant ? 0.0 : e0;
  }
  double exponent_infinity() const {
    return form == Form::Constant ? 0.0 : einf;
  }
};

// Nonlinearity families.  ExpCritical is the shipped model
//   f(s) = lambda * s^p * (e^{alpha0 s^2} - 1)  for s >= 0,  f = 0 for s < 0,
// which has exactly alpha0-critical exponential growth.  PurePower
//   F(s) = coef * s^{q_hom}  (f = F')
// is kept as the homogeneous oracle family for fibering tests.
struct NonlinearitySpec {
  enum class Family { ExpCritical, PurePower };

  Family family = Family::ExpCritical;
  // ExpCritical parameters
  double lambda = 1.0;
  double p = 2.0;
  double alpha0 = 4.0 * M_PI;
  // PurePower parameters
  double coef = 1.0;
  double q_hom = 2.0;
  // (f2)..(f5) descriptors
  double theta = 0.0;  // 0 = fit numerically via fitted_theta()
  std::optional<double> xi, q_exp;             // (f3)
  std::optional<double> vartheta, M0, s0;      // (f4)
  std::optional<double> beta0;                 // (f5)

  static NonlinearitySpec exp_critical(double lambda, double p,
                                       double alpha0) {
    NonlinearitySpec n;
    n.family = Family::ExpCritical;
    n.lambda = lambda;
    n.p = p;
    n.alpha0 = alpha0;
    return n;
  }
  static NonlinearitySpec pure_power(double coef, double q) {
    NonlinearitySpec n;
    n.family = Family::PurePower;
    n.coef = coef;
    n.q_hom = q;
    n.alpha0 = 0.0;
    return n;
  }

  // Overflow is an error, not a saturation: silent clamping would corrupt
  // every energy comparison downstream.
  static void check_exp_range(double expo) {
    if (expo > 700.0)
      throw std::runtime_error(
          "nonlinearity: exp overflow (alpha0*s^2 = " + std::to_string(expo) +
          ")");
  }

  double f(double s) const {
    if (s <= 0.0) return 0.0;
    switch (family) {
      case Family::ExpCritical: {
        const double e = alpha0 * s * s;
        check_exp_range(e);
        return lambda * std::pow(s, p) * std::expm1(e);
      }
      case Family::PurePower:
        return coef * q_hom * std::pow(s, q_hom - 1.0);
    }
    throw std::logic_error("NonlinearitySpec: unknown family");
  }

  double fprime(double s) const {
    if (s <= 0.0) return 0.0;
    switch (family) {
      case Family::ExpCritical: {
        const double e = alpha0 * s * s;
        check_exp_range(e);
        const double ex = std::exp(e);
        return lambda * (p * std::pow(s, p - 1.0) * (ex - 1.0) +
                         2.0 * alpha0 * std::pow(s, p + 1.0) * ex);
      }
      case Family::PurePower:
        return coef * q_hom * (q_hom - 1.0) * std::pow(s, q_hom - 2.0);
    }
    throw std::logic_error("NonlinearitySpec: unknown family");
  }

  // Primitive F(s) = int_0^s f.  For ExpCritical this is the everywhere-
  // convergent positive series sum_k alpha0^k s^{p+2k+1} / (k! (p+2k+1)).
  double F(double s) const {
    if (s <= 0.0) return 0.0;
    switch (family) {
      case Family::ExpCritical: {
        const double a = alpha0 * s * s;
        check_exp_range(a);
        double term = a;  // (alpha0 s^2)^k / k! at k=1
        double acc = term / (p + 3.0);
        const double sp1 = std::pow(s, p + 1.0);
        for (int k = 2; k < 4000; ++k) {
          term *= a / double(k);
          const double contrib = term / (p + 2.0 * k + 1.0);
          acc += contrib;
          if (contrib < acc * 1e-17 && double(k) > a) break;
        }
        return lambda * sp1 * acc;
      }
      case Family::PurePower:
        return coef * std::pow(s, q_hom);
    }
    throw std::logic_error("NonlinearitySpec: unknown family");
  }

  // Largest theta valid in (f2): inf over s of s f(s)/F(s), estimated on
  // log-spaced samples with a safety margin.
  double fitted_theta(double s_max = 10.0, int samples = 400) const {
    if (family == Family::ExpCritical)
      s_max = std::min(s_max, std::sqrt(650.0 / alpha0));
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
      const double s =
          std::exp(std::log(1e-6) +
                   (std::log(s_max) - std::log(1e-6)) * i / (samples - 1));
      const double Fs = F(s);
      if (Fs <= 0.0) continue;
      best = std::min(best, s * f(s) / Fs);
    }
    if (!std::isfinite(best) || best <= 1.0)
      throw std::runtime_error("fitted_theta: no admissible theta found");
    return best - 1e-6;
  }

  double theta_or_fitted() const { return theta > 1.0 ? theta : fitted_theta(); }
};

struct ProblemSpec {
  double mu = 1.0;
  PotentialSpec V = PotentialSpec::constant(PotentialSpec::Role::V, 1.0);
  PotentialSpec Q = PotentialSpec::constant(PotentialSpec::Role::Q, 1.0);
  NonlinearitySpec f;

  void validate() const {
    if (!(mu > 0.0 && mu < 2.0))
      throw std::domain_error("ProblemSpec: mu must be in (0,2)");
  }
};

struct CheckEntry {
  std::string name;
  bool pass = false;
  double margin = 0.0;     // signed distance to the constraint boundary
  double witness_r = 0.0;  // radius realizing the reported extremum, if any
  std::string note;
  bool applicable = true;  // false when the condition's parameters are undeclared
};

struct AdmissibilityReport {
  std::vector<CheckEntry> checks;
  bool all_pass = true;
  void add(CheckEntry e) {
    all_pass = all_pass && e.pass;
    checks.push_back(std::move(e));
  }
};

// Verifies (V0)/(Q0) on the given spec: the algebraic exponent
// constraints, plus sampled boundedness of the ratios V/r^{a0}, V/r^{a},
// Q/r^{b0}, Q/r^{b} on log-spaced radii.  Failures are report entries,
// never exceptions.
inline AdmissibilityReport check_admissible(const ProblemSpec& spec,
                                            int samples = 256,
                                            bool require_liminf_Q = false) {
  spec.validate();
  AdmissibilityReport rep;
  const double a0 = spec.V.exponent_origin(), a = spec.V.exponent_infinity();
  const double b0 = spec.Q.exponent_origin(), b = spec.Q.exponent_infinity();

  rep.add({"(V0) a0 > -2", a0 > -2.0, a0 + 2.0, 0.0, ""});
  rep.add({"(V0) a > -2", a > -2.0, a + 2.0, 0.0, ""});
  rep.add({"(Q0) b0 > -(4-mu)/2", b0 > -(4.0 - spec.mu) / 2.0,
           b0 + (4.0 - spec.mu) / 2.0, 0.0, ""});
  rep.add({"(Q0) b < a(4-mu)/4", b < a * (4.0 - spec.mu) / 4.0,
           a * (4.0 - spec.mu) / 4.0 - b, 0.0,
           b == a * (4.0 - spec.mu) / 4.0 ? "borderline: equality, strict inequality required"
                                          : ""});

  auto sampled_ratio = [&](const PotentialSpec& w, double expo, double lo,
                           double hi, bool want_sup) {
    double best = want_sup ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
    double at = lo;
    for (int i = 0; i < samples; ++i) {
      const double r = std::exp(std::log(lo) +
                                (std::log(hi) - std::log(lo)) * i /
                                    (samples - 1));
      const double ratio = w(r) / std::pow(r, expo);
      if (want_sup ? (ratio > best) : (ratio < best)) {
        best = ratio;
        at = r;
      }
    }
    return std::make_pair(best, at);
  };

  {
    auto [sup, at] = sampled_ratio(spec.V, a0, 1e-8, 1.0, true);
    rep.add({"(V0) limsup_{r->0} V/r^{a0} < inf", std::isfinite(sup), 0.0, at,
             "sampled sup = " + std::to_string(sup)});
  }
  {
    auto [inf, at] = sampled_ratio(spec.V, a, 1.0, 1e6, false);
    rep.add({"(V0) liminf_{r->inf} V/r^{a} > 0", inf > 0.0, inf, at,
             "sampled inf = " + std::to_string(inf)});
  }
  {
    auto [sup, at] = sampled_ratio(spec.Q, b0, 1e-8, 1.0, true);
    rep.add({"(Q0) limsup_{r->0} Q/r^{b0} < inf", std::isfinite(sup), 0.0, at,
             "sampled sup = " + std::to_string(sup)});
  }
  {
    auto [sup, at] = sampled_ratio(spec.Q, b, 1.0, 1e6, true);
    rep.add({"(Q0) limsup_{r->inf} Q/r^{b} < inf", std::isfinite(sup), 0.0, at,
             "sampled sup = " + std::to_string(sup)});
  }
  if (require_liminf_Q) {
    auto [inf, at] = sampled_ratio(spec.Q, b0, 1e-8, 1.0, false);
    rep.add({"liminf_{r->0} Q/r^{b0} > 0", inf > 0.0, inf, at,
             "sampled inf = " + std::to_string(inf)});
  }
  return rep;
}

// Weighted Trudinger-Moser threshold 4*pi*(1 + 2 b0/(4 - mu)).
inline double tm_threshold(double mu, double b0) {
  if (!(mu > 0.0 && mu < 2.0)) throw std::domain_error("tm_threshold: mu");
  if (!(b0 > -(4.0 - mu) / 2.0))
    throw std::domain_error("tm_threshold: b0 <= -(4-mu)/2");
  return 4.0 * M_PI * (1.0 + 2.0 * b0 / (4.0 - mu));
}

// Compactness threshold c0 = ((4-mu)/alpha0)(1 + 2 b0/(4-mu)) pi (theta-1)/(2 theta).
inline double c0_threshold(double mu, double b0, double alpha0, double theta) {
  if (!(mu > 0.0 && mu < 2.0)) throw std::domain_error("c0_threshold: mu");
  if (!(b0 > -(4.0 - mu) / 2.0)) throw std::domain_error("c0_threshold: b0");
  if (!(alpha0 > 0.0)) throw std::domain_error("c0_threshold: alpha0");
  if (!(theta > 1.0)) throw std::domain_error("c0_threshold: theta <= 1");
  return (4.0 - mu) / alpha0 * (1.0 + 2.0 * b0 / (4.0 - mu)) * M_PI *
         (theta - 1.0) / (2.0 * theta);
}

// Refined level bound of the second existence regime:
// ((4-mu)/alpha0)(1 + 2 b0/(4-mu)) pi/2.
inline double refined_level_bound(double mu, double b0, double alpha0) {
  if (!(mu > 0.0 && mu < 2.0)) throw std::domain_error("refined_level_bound: mu");
  if (!(b0 > -(4.0 - mu) / 2.0)) throw std::domain_error("refined_level_bound: b0");
  if (!(alpha0 > 0.0)) throw std::domain_error("refined_level_bound: alpha0");
  return (4.0 - mu) / alpha0 * (1.0 + 2.0 * b0 / (4.0 - mu)) * M_PI / 2.0;
}

// xi_1 = sqrt(pi + ||V||_{L1(B_1)}) / ||Q||_{L1(B_{1/2})}, by quadrature.
inline double xi1_constant(const PotentialSpec& V, const PotentialSpec& Q,
                           const GridPtr& grid) {
  if (grid->r_max() < 1.0)
    throw std::invalid_argument("xi1_constant: grid must cover B_1");
  auto Vf = RadialFunction::sample(grid, [&](double r) { return V(r); });
  auto Qf = RadialFunction::sample(grid, [&](double r) { return Q(r); });
  Vf.check_finite();
  Qf.check_finite();
  const double normV = integrate_to(Vf, 1.0);
  const double normQ = integrate_to(Qf, 0.5);
  if (!(normQ > 0.0))
    throw std::runtime_error("xi1_constant: ||Q||_{L1(B_1/2)} vanished");
  return std::sqrt(M_PI + normV) / normQ;
}

// The lower bound on xi in the first existence theorem: max of xi_1 and
// the bracketed term built from ||Q||_{L1(B_1/2)}, (q-1)(xi_1^2/q)^{q/(q-1)}
// and c0.
inline double xi_requirement(double mu, double b0, double alpha0, double theta,
                             double q_exp, const PotentialSpec& V,
                             const PotentialSpec& Q, const GridPtr& grid) {
  if (!(q_exp > 1.0)) throw std::domain_error("xi_requirement: q <= 1");
  const double xi1 = xi1_constant(V, Q, grid);
  auto Qf = RadialFunction::sample(grid, [&](double r) { return Q(r); });
  const double normQ = integrate_to(Qf, 0.5);
  const double c0 = c0_threshold(mu, b0, alpha0, theta);
  const double numer = 0.5 * normQ * normQ * (q_exp - 1.0) *
                       std::pow(xi1 * xi1 / q_exp, q_exp / (q_exp - 1.0));
  const double second = std::pow(numer / c0, (q_exp - 1.0) / 2.0);
  return std::max(xi1, second);
}

struct GrowthReport {
  std::vector<CheckEntry> checks;
  bool all_declared_pass = true;  // only conditions whose parameters exist count
  void add(CheckEntry e) {
    if (e.applicable) all_declared_pass = all_declared_pass && e.pass;
    checks.push_back(std::move(e));
  }
};

// Numerically probes (f1)-(f5) and the alpha0-critical growth definition
// on log-spaced samples.  Limits are tested on finite windows; each entry
// names its window, since a sample can witness failure but never certify
// a limit.
inline GrowthReport check_growth(const NonlinearitySpec& nl, double mu,
                                 int samples = 400, double s_max = 6.0) {
  GrowthReport rep;
  if (nl.family == NonlinearitySpec::Family::ExpCritical)
    s_max = std::min(s_max, std::sqrt(500.0 / nl.alpha0));
  auto logspace = [&](double lo, double hi, int i, int n) {
    return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
  };

  // (f1): f(s)/s^{(2-mu)/2} -> 0 as s -> 0+; require the ratio at the
  // smallest sample to be tiny and decreasing over the window.
  {
    const double e1 = (2.0 - mu) / 2.0;
    double prev = -1.0;
    bool decreasing = true;
    double first = 0.0, last = 0.0, at = 0.0;
    for (int i = 0; i < 64; ++i) {
      const double s = logspace(1e-3, 1e-8, i, 64);  // descending
      const double ratio = nl.f(s) / std::pow(s, e1);
      if (i == 0) first = ratio;
      if (prev >= 0.0 && ratio > prev * (1.0 + 1e-9)) decreasing = false;
      prev = ratio;
      last = ratio;
      at = s;
    }
    rep.add({"(f1) f(s)/s^{(2-mu)/2} -> 0 (window [1e-8,1e-3])",
             decreasing && last < 0.01 * first, -last, at,
             "ratio at smallest sample = " + std::to_string(last)});
  }

  // (f2): theta F(s) <= f(s) s with the declared (or fitted) theta.
  {
    double theta;
    std::string note;
    try {
      theta = nl.theta_or_fitted();
      note = "theta = " + std::to_string(theta);
    } catch (const std::exception& ex) {
      rep.add({"(f2) theta F <= f s", false, 0.0, 0.0, ex.what()});
      theta = 0.0;
    }
    if (theta > 0.0) {
      double worst = std::numeric_limits<double>::infinity();
      double at = 0.0;
      for (int i = 0; i < samples; ++i) {
        const double s = logspace(1e-6, s_max, i, samples);
        const double Fs = nl.F(s);
        if (Fs <= 0.0) continue;
        const double m = nl.f(s) * s - theta * Fs;
        if (m < worst) {
          worst = m;
          at = s;
        }
      }
      rep.add({"(f2) theta F <= f s", worst >= -1e-12, worst, at, note});
    }
  }

  // (f3): F(s) >= xi s^q on [0,1], if (xi, q) are declared.
  if (nl.xi && nl.q_exp) {
    double worst = std::numeric_limits<double>::infinity();
    double at = 0.0;
    for (int i = 0; i < samples; ++i) {
      const double s = logspace(1e-6, 1.0, i, samples);
      const double m = nl.F(s) - *nl.xi * std::pow(s, *nl.q_exp);
      if (m < worst) {
        worst = m;
        at = s;
      }
    }
    rep.add({"(f3) F(s) >= xi s^q on [0,1]", worst >= 0.0, worst, at,
             "xi = " + std::to_string(*nl.xi) +
                 ", q = " + std::to_string(*nl.q_exp)});
  } else {
    rep.add({"(f3) F(s) >= xi s^q on [0,1]", false, 0.0, 0.0,
             "not declared (xi, q missing)", false});
  }

  // (f4): 0 < s^vartheta F(s) <= M0 f(s) for s >= s0.
  if (nl.vartheta && nl.M0 && nl.s0) {
    double worst = std::numeric_limits<double>::infinity();
    double at = 0.0;
    bool positive = true;
    for (int i = 0; i < samples; ++i) {
      const double s = logspace(*nl.s0, s_max, i, samples);
      const double lhs = std::pow(s, *nl.vartheta) * nl.F(s);
      if (!(lhs > 0.0)) positive = false;
      const double m = *nl.M0 * nl.f(s) - lhs;
      if (m < worst) {
        worst = m;
        at = s;
      }
    }
    rep.add({"(f4) 0 < s^vartheta F <= M0 f for s >= s0",
             positive && worst >= 0.0, worst, at,
             "window [" + std::to_string(*nl.s0) + "," +
                 std::to_string(s_max) + "]"});
  } else {
    rep.add({"(f4) 0 < s^vartheta F <= M0 f", false, 0.0, 0.0,
             "not declared (vartheta, M0, s0 missing)", false});
  }

  // (f5): liminf F(s)/e^{alpha0 s^2} >= beta0 > 0, tail window.
  {
    const double beta0 = nl.beta0.value_or(0.0);
    double worst = std::numeric_limits<double>::infinity();
    double at = 0.0;
    const double s_lo = 0.5 * s_max;
    for (int i = 0; i < 64; ++i) {
      const double s = logspace(s_lo, s_max, i, 64);
      const double ratio =
          nl.alpha0 > 0.0 ? nl.F(s) / std::exp(nl.alpha0 * s * s) : nl.F(s);
      if (ratio < worst) {
        worst = ratio;
        at = s;
      }
    }
    rep.add({"(f5) liminf F/e^{alpha0 s^2} >= beta0 (tail window)",
             nl.beta0.has_value() && worst >= beta0 && worst > 0.0,
             worst - beta0, at,
             "window [" + std::to_string(s_lo) + "," + std::to_string(s_max) +
                 "], min ratio = " + std::to_string(worst),
             nl.beta0.has_value()});
  }

  // Critical-growth probe: f/e^{alpha s^2} should decay on the tail for
  // alpha > alpha0 and grow for alpha < alpha0.
  if (nl.alpha0 > 0.0) {
    auto tail_trend = [&](double alpha) {
      const double s1 = 0.6 * s_max, s2 = s_max;
      const double g1 = nl.f(s1) / std::exp(alpha * s1 * s1);
      const double g2 = nl.f(s2) / std::exp(alpha * s2 * s2);
      return g2 / g1;  // < 1 decaying, > 1 growing
    };
    const double above = tail_trend(1.2 * nl.alpha0);
    const double below = tail_trend(0.8 * nl.alpha0);
    rep.add({"critical growth: decay above alpha0, growth below",
             above < 1.0 && below > 1.0, below - above, 0.0,
             "ratio above = " + std::to_string(above) +
                 ", below = " + std::to_string(below)});
  }

  // F' = f spot check by central differences.
  {
    double worst = 0.0, at = 0.0;
    for (int i = 0; i < 32; ++i) {
      const double s = logspace(1e-3, 0.8 * s_max, i, 32);
      const double h = 1e-6 * s;
      const double fd = (nl.F(s + h) - nl.F(s - h)) / (2.0 * h);
      const double rel = std::abs(fd - nl.f(s)) / std::max(1e-300, std::abs(nl.f(s)));
      if (rel > worst) {
        worst = rel;
        at = s;
      }
    }
    rep.add({"F' = f (central differences)", worst < 1e-6, 1e-6 - worst, at,
             "worst rel err = " + std::to_string(worst)});
  }

  return rep;
}

}  // namespace choq
