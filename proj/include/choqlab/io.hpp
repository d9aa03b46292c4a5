#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "choqlab/energy.hpp"
#include "choqlab/model.hpp"
#include "choqlab/moser.hpp"
#include "choqlab/solver.hpp"

namespace choq {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Batch run configuration, JSON schema v1.  All numeric fields are
// validated before any computation starts.
struct RunConfig {
  int schema = 1;
  ProblemSpec problem;
  double r_min = 1e-6, r_max = 50.0;
  std::size_t n_nodes = 1024;
  double tol = 1e-6;
  int max_iter = 5000;
  std::string init = "gaussian";  // or "cutoff"
  std::string out_dir = "out";
  std::vector<std::string> formats = {"json", "csv"};
  std::uint64_t seed = 42;
  std::string kernel_cache;  // optional path
  // moser / tm-probe controls
  std::vector<int> n_list = {10, 100, 1000, 10000};
  std::vector<double> alpha_list;
};

namespace io_detail {

inline PotentialSpec parse_potential(const json& j, PotentialSpec::Role role,
                                     const std::string& field) {
  PotentialSpec p;
  p.role = role;
  const std::string form = j.value("form", "constant");
  if (form == "constant") {
    p.form = PotentialSpec::Form::Constant;
    p.c = j.value("c", 1.0);
  } else if (form == "power") {
    p.form = PotentialSpec::Form::Power;
    p.c = j.value("c", 1.0);
    if (!j.contains("e0") || !j.contains("einf"))
      throw ConfigError(field + ": power form requires e0 and einf");
    p.e0 = j.at("e0").get<double>();
    p.einf = j.at("einf").get<double>();
  } else if (form == "tabulated") {
    p.form = PotentialSpec::Form::Tabulated;
    p.tab_r = j.at("r").get<std::vector<double>>();
    p.tab_val = j.at("values").get<std::vector<double>>();
  } else {
    throw ConfigError(field + ": unknown form '" + form + "'");
  }
  if (!(p.c > 0.0)) throw ConfigError(field + ": coefficient c must be > 0");
  return p;
}

inline json potential_to_json(const PotentialSpec& p) {
  json j;
  switch (p.form) {
    case PotentialSpec::Form::Constant:
      j["form"] = "constant";
      j["c"] = p.c;
      break;
    case PotentialSpec::Form::Power:
      j["form"] = "power";
      j["c"] = p.c;
      j["e0"] = p.e0;
      j["einf"] = p.einf;
      break;
    case PotentialSpec::Form::Tabulated:
      j["form"] = "tabulated";
      j["r"] = p.tab_r;
      j["values"] = p.tab_val;
      break;
  }
  return j;
}

inline NonlinearitySpec parse_nonlinearity(const json& j) {
  NonlinearitySpec n;
  const std::string family = j.value("family", "exp_critical");
  if (family == "exp_critical") {
    n.family = NonlinearitySpec::Family::ExpCritical;
    n.lambda = j.value("lambda", 1.0);
    n.p = j.value("p", 2.0);
    n.alpha0 = j.value("alpha0", 4.0 * M_PI);
    if (!(n.lambda > 0.0) || !(n.p >= 0.0) || !(n.alpha0 > 0.0))
      throw ConfigError("f: exp_critical needs lambda > 0, p >= 0, alpha0 > 0");
  } else if (family == "pure_power") {
    n.family = NonlinearitySpec::Family::PurePower;
    n.coef = j.value("coef", 1.0);
    n.q_hom = j.value("q", 2.0);
    n.alpha0 = 0.0;  // no exponential-critical exponent in this family
    if (!(n.coef > 0.0) || !(n.q_hom > 1.0))
      throw ConfigError("f: pure_power needs coef > 0, q > 1");
  } else {
    throw ConfigError("f: unknown family '" + family + "'");
  }
  n.theta = j.value("theta", 0.0);
  if (j.contains("xi")) n.xi = j.at("xi").get<double>();
  if (j.contains("q_exp")) n.q_exp = j.at("q_exp").get<double>();
  if (j.contains("vartheta")) n.vartheta = j.at("vartheta").get<double>();
  if (j.contains("M0")) n.M0 = j.at("M0").get<double>();
  if (j.contains("s0")) n.s0 = j.at("s0").get<double>();
  if (j.contains("beta0")) n.beta0 = j.at("beta0").get<double>();
  return n;
}

inline json nonlinearity_to_json(const NonlinearitySpec& n) {
  json j;
  if (n.family == NonlinearitySpec::Family::ExpCritical) {
    j["family"] = "exp_critical";
    j["lambda"] = n.lambda;
    j["p"] = n.p;
    j["alpha0"] = n.alpha0;
  } else {
    j["family"] = "pure_power";
    j["coef"] = n.coef;
    j["q"] = n.q_hom;
  }
  if (n.theta > 0.0) j["theta"] = n.theta;
  if (n.xi) j["xi"] = *n.xi;
  if (n.q_exp) j["q_exp"] = *n.q_exp;
  if (n.vartheta) j["vartheta"] = *n.vartheta;
  if (n.M0) j["M0"] = *n.M0;
  if (n.s0) j["s0"] = *n.s0;
  if (n.beta0) j["beta0"] = *n.beta0;
  return j;
}

}  // namespace io_detail

inline RunConfig parse_config(const json& j) {
  RunConfig c;
  c.schema = j.value("schema", 1);
  if (c.schema != 1) throw ConfigError("unsupported schema version");
  if (!j.contains("problem")) throw ConfigError("missing 'problem' section");
  const auto& pj = j.at("problem");
  if (!pj.contains("mu")) throw ConfigError("problem: missing 'mu'");
  c.problem.mu = pj.at("mu").get<double>();
  if (!(c.problem.mu > 0.0 && c.problem.mu < 2.0))
    throw ConfigError("problem: mu must be in (0,2)");
  if (pj.contains("V"))
    c.problem.V =
        io_detail::parse_potential(pj.at("V"), PotentialSpec::Role::V, "V");
  if (pj.contains("Q"))
    c.problem.Q =
        io_detail::parse_potential(pj.at("Q"), PotentialSpec::Role::Q, "Q");
  if (pj.contains("f")) c.problem.f = io_detail::parse_nonlinearity(pj.at("f"));

  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    c.r_min = g.value("r_min", c.r_min);
    c.r_max = g.value("r_max", c.r_max);
    c.n_nodes = g.value("n_nodes", c.n_nodes);
    if (!(c.r_min > 0.0) || !(c.r_min < c.r_max) || c.n_nodes < 16)
      throw ConfigError("grid: need 0 < r_min < r_max and n_nodes >= 16");
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    c.tol = s.value("tol", c.tol);
    c.max_iter = s.value("max_iter", c.max_iter);
    c.init = s.value("init", c.init);
    if (!(c.tol > 0.0) || c.max_iter < 1)
      throw ConfigError("solver: need tol > 0 and max_iter >= 1");
    if (c.init != "gaussian" && c.init != "cutoff")
      throw ConfigError("solver: init must be 'gaussian' or 'cutoff'");
  }
  if (j.contains("outputs")) {
    const auto& o = j.at("outputs");
    c.out_dir = o.value("dir", c.out_dir);
    if (o.contains("formats"))
      c.formats = o.at("formats").get<std::vector<std::string>>();
  }
  c.seed = j.value("seed", c.seed);
  c.kernel_cache = j.value("kernel_cache", std::string());
  if (j.contains("moser")) {
    const auto& m = j.at("moser");
    if (m.contains("n_list")) c.n_list = m.at("n_list").get<std::vector<int>>();
    if (m.contains("alpha_list"))
      c.alpha_list = m.at("alpha_list").get<std::vector<double>>();
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& ex) {
    throw ConfigError(std::string("config parse error: ") + ex.what());
  }
  return parse_config(j);
}

// Resolved config (input plus defaults), re-parseable to the same RunConfig.
inline json resolved_config(const RunConfig& c) {
  json j;
  j["schema"] = c.schema;
  j["problem"]["mu"] = c.problem.mu;
  j["problem"]["V"] = io_detail::potential_to_json(c.problem.V);
  j["problem"]["Q"] = io_detail::potential_to_json(c.problem.Q);
  j["problem"]["f"] = io_detail::nonlinearity_to_json(c.problem.f);
  j["grid"] = {{"r_min", c.r_min}, {"r_max", c.r_max}, {"n_nodes", c.n_nodes}};
  j["solver"] = {{"tol", c.tol}, {"max_iter", c.max_iter}, {"init", c.init}};
  j["outputs"] = {{"dir", c.out_dir}, {"formats", c.formats}};
  j["seed"] = c.seed;
  if (!c.kernel_cache.empty()) j["kernel_cache"] = c.kernel_cache;
  j["moser"] = {{"n_list", c.n_list}, {"alpha_list", c.alpha_list}};
  return j;
}

inline json report_to_json(const AdmissibilityReport& rep) {
  json j;
  j["all_pass"] = rep.all_pass;
  j["checks"] = json::array();
  for (const auto& c : rep.checks)
    j["checks"].push_back({{"name", c.name},
                           {"pass", c.pass},
                           {"margin", c.margin},
                           {"witness_r", c.witness_r},
                           {"note", c.note}});
  return j;
}

inline json report_to_json(const GrowthReport& rep) {
  json j;
  j["all_declared_pass"] = rep.all_declared_pass;
  j["checks"] = json::array();
  for (const auto& c : rep.checks)
    j["checks"].push_back({{"name", c.name},
                           {"pass", c.pass},
                           {"applicable", c.applicable},
                           {"margin", c.margin},
                           {"witness_s", c.witness_r},
                           {"note", c.note}});
  return j;
}

inline json solution_to_json(const Solution& sol) {
  json j;
  j["converged"] = sol.converged;
  j["iterations"] = sol.iterations;
  j["residual_norm"] = sol.residual_norm;
  j["probe_residual"] = sol.probe_residual;
  j["energy"] = {{"kinetic", sol.energy.kinetic},
                 {"potential", sol.energy.potential},
                 {"norm_sq", sol.energy.norm_sq},
                 {"nonlocal", sol.energy.nonlocal},
                 {"J", sol.energy.J}};
  j["theta"] = sol.theta;
  j["c0"] = sol.c0;
  j["level_ok"] = sol.level_ok;
  j["ps_bound_ok"] = sol.ps_bound_ok;
  if (!sol.failure.empty()) j["failure"] = sol.failure;
  return j;
}

inline void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write: " + path);
  out << body;
  if (!out) throw IoError("write failed: " + path);
}

inline void write_profile_csv(const std::string& path,
                              const RadialFunction& u,
                              const std::string& value_name = "value") {
  std::ostringstream os;
  os.precision(17);
  os << "r," << value_name << "\n";
  for (std::size_t i = 0; i < u.size(); ++i)
    os << u.grid->r[i] << "," << u.v[i] << "\n";
  write_text(path, os.str());
}

inline RadialFunction read_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> r, v;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("bad CSV line: " + line);
    r.push_back(std::stod(line.substr(0, comma)));
    v.push_back(std::stod(line.substr(comma + 1)));
  }
  auto grid = std::make_shared<const RadialGrid>(RadialGrid::from_nodes(r));
  return RadialFunction(grid, std::move(v));
}

// Minimal static SVG line plot: log-x polylines with axes.  Plots are
// artifacts, not interfaces.
inline void write_svg_plot(const std::string& path,
                           const std::vector<RadialFunction>& curves,
                           const std::vector<std::string>& labels,
                           const std::string& title) {
  const int W = 720, H = 440, ML = 60, MR = 20, MT = 40, MB = 40;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.size(); ++i) {
      xmin = std::min(xmin, std::log10(c.grid->r[i]));
      xmax = std::max(xmax, std::log10(c.grid->r[i]));
      ymin = std::min(ymin, c.v[i]);
      ymax = std::max(ymax, c.v[i]);
    }
  if (ymax == ymin) ymax = ymin + 1.0;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"15\">"
     << title << "</text>\n";
  os << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR
     << "\" y2=\"" << H - MB << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML
     << "\" y2=\"" << H - MB << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (ML + W - MR) / 2 << "\" y=\"" << H - 8
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"12\">log10 r</text>\n";
  for (std::size_t k = 0; k < curves.size(); ++k) {
    os << "<polyline fill=\"none\" stroke=\"" << colors[k % 4]
       << "\" stroke-width=\"1.5\" points=\"";
    const auto& c = curves[k];
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double px =
          ML + (std::log10(c.grid->r[i]) - xmin) / (xmax - xmin) * (W - ML - MR);
      const double py =
          H - MB - (c.v[i] - ymin) / (ymax - ymin) * (H - MT - MB);
      os << px << "," << py << " ";
    }
    os << "\"/>\n";
    if (k < labels.size())
      os << "<text x=\"" << W - MR - 150 << "\" y=\"" << MT + 18 * (k + 1)
         << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
         << colors[k % 4] << "\">" << labels[k] << "</text>\n";
  }
  os << "</svg>\n";
  write_text(path, os.str());
}

}  // namespace choq
