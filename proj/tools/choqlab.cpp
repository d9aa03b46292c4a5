// choqlab: batch front door for the planar weighted Choquard laboratory.
//
// Subcommands: check | solve | constants | moser | tm-probe | fibering.
// Exit codes: 0 success, 1 failed check / not converged / domain error,
// 2 malformed config or I/O failure.

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "choqlab/energy.hpp"
#include "choqlab/grid.hpp"
#include "choqlab/io.hpp"
#include "choqlab/model.hpp"
#include "choqlab/moser.hpp"
#include "choqlab/quadrature.hpp"
#include "choqlab/riesz.hpp"
#include "choqlab/solver.hpp"

namespace fs = std::filesystem;
using choq::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  std::int64_t seed_override = -1;
};

choq::RunConfig load_and_apply(const CommonArgs& args) {
  auto cfg = choq::load_config(args.config_path);
  if (!args.out_override.empty()) cfg.out_dir = args.out_override;
  if (args.seed_override >= 0) cfg.seed = std::uint64_t(args.seed_override);
  return cfg;
}

fs::path ensure_out_dir(const choq::RunConfig& cfg) {
  fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw choq::IoError("cannot create output directory: " + cfg.out_dir);
  return dir;
}

bool wants_format(const choq::RunConfig& cfg, const std::string& fmt) {
  for (const auto& f : cfg.formats)
    if (f == fmt) return true;
  return false;
}

std::string fmt_num(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

choq::RieszKernel obtain_kernel(const choq::RunConfig& cfg,
                                const choq::GridPtr& grid) {
  if (!cfg.kernel_cache.empty()) {
    if (auto k = choq::load_kernel(grid, cfg.problem.mu, cfg.kernel_cache))
      return std::move(*k);
  }
  auto ker = choq::assemble_kernel(grid, cfg.problem.mu);
  if (!cfg.kernel_cache.empty()) choq::save_kernel(ker, cfg.kernel_cache);
  return ker;
}

void print_report(const std::string& title, const json& rep) {
  std::cout << title << ":\n";
  for (const auto& c : rep.at("checks")) {
    const bool applicable = c.value("applicable", true);
    const char* tag = !applicable           ? "n/a "
                      : c.at("pass").get<bool>() ? "pass"
                                                 : "FAIL";
    std::cout << "  [" << tag << "] " << c.at("name").get<std::string>();
    const auto note = c.value("note", std::string());
    if (!note.empty()) std::cout << "  (" << note << ")";
    std::cout << "\n";
  }
}

int cmd_check(const CommonArgs& args) {
  auto cfg = load_and_apply(args);
  const auto adm = choq::check_admissible(cfg.problem);
  const auto gro = choq::check_growth(cfg.problem.f, cfg.problem.mu);
  json out;
  out["admissibility"] = choq::report_to_json(adm);
  out["growth"] = choq::report_to_json(gro);
  const bool ok = adm.all_pass && gro.all_declared_pass;
  out["all_pass"] = ok;
  const auto dir = ensure_out_dir(cfg);
  choq::write_text((dir / "checks.json").string(), out.dump(2) + "\n");
  print_report("admissibility", out["admissibility"]);
  print_report("growth", out["growth"]);
  std::cout << (ok ? "check: all mandatory conditions pass\n"
                   : "check: FAILED\n");
  return ok ? 0 : 1;
}

int cmd_constants(const CommonArgs& args) {
  auto cfg = load_and_apply(args);
  const double mu = cfg.problem.mu;
  const double b0 = cfg.problem.Q.exponent_origin();
  const double theta = cfg.problem.f.theta_or_fitted();
  const double alpha0 = cfg.problem.f.family ==
                                choq::NonlinearitySpec::Family::ExpCritical
                            ? cfg.problem.f.alpha0
                            : 4.0 * M_PI;
  // A fixed internal grid covering B_1 keeps the emitted constants
  // independent of the run grid.
  auto grid = choq::build_log_grid(1e-8, 2.0, 4096);

  json j;
  j["inputs"] = {{"mu", mu},
                 {"b0", b0},
                 {"alpha0", alpha0},
                 {"theta", theta},
                 {"seed", cfg.seed}};
  j["alpha_TM"] = choq::tm_threshold(mu, b0);
  j["c0"] = choq::c0_threshold(mu, b0, alpha0, theta);
  j["refined_level_bound"] = choq::refined_level_bound(mu, b0, alpha0);
  j["C_mu"] = choq::hls_constant(mu);
  j["xi1"] = choq::xi1_constant(cfg.problem.V, cfg.problem.Q, grid);
  if (cfg.problem.f.q_exp)
    j["xi_requirement"] =
        choq::xi_requirement(mu, b0, alpha0, theta, *cfg.problem.f.q_exp,
                             cfg.problem.V, cfg.problem.Q, grid);
  const auto dir = ensure_out_dir(cfg);
  choq::write_text((dir / "constants.json").string(), j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_solve(const CommonArgs& args) {
  auto cfg = load_and_apply(args);
  const auto adm = choq::check_admissible(cfg.problem);
  const auto gro = choq::check_growth(cfg.problem.f, cfg.problem.mu);
  if (!adm.all_pass || !gro.all_declared_pass) {
    std::cerr << "solve: admissibility/growth checks failed; run 'check'\n";
    return 1;
  }
  const auto dir = ensure_out_dir(cfg);
  auto grid = choq::build_log_grid(cfg.r_min, cfg.r_max, cfg.n_nodes);
  auto ker = obtain_kernel(cfg, grid);
  auto init = cfg.init == "cutoff" ? choq::cutoff_init(grid)
                                   : choq::gaussian_init(grid, cfg.problem.V);

  std::ostringstream log;
  log.precision(12);
  log << "# iter J residual\n";
  auto sol = choq::solve_ground_state(
      cfg.problem, grid, ker, init, cfg.tol, cfg.max_iter, cfg.seed,
      [&](int it, double J, double res) {
        log << it << " " << J << " " << res << "\n";
      });
  log << "# converged=" << (sol.converged ? 1 : 0)
      << " iterations=" << sol.iterations
      << " residual=" << sol.residual_norm << " seed=" << cfg.seed << "\n";
  if (!sol.failure.empty()) log << "# failure: " << sol.failure << "\n";

  json sj = choq::solution_to_json(sol);
  sj["seed"] = cfg.seed;
  sj["nehari_residual"] = choq::nehari_residual(sol.u, cfg.problem, ker);
  choq::write_text((dir / "solution.json").string(), sj.dump(2) + "\n");
  choq::write_text((dir / "run.log").string(), log.str());
  choq::write_profile_csv((dir / "profile.csv").string(), sol.u, "u");
  choq::write_text((dir / "resolved_config.json").string(),
                   choq::resolved_config(cfg).dump(2) + "\n");
  if (wants_format(cfg, "svg")) {
    const auto gF = choq::energy_detail::weighted_F(sol.u, cfg.problem);
    auto conv = choq::convolve(ker, choq::RadialFunction(grid, gF));
    choq::write_svg_plot((dir / "profile.svg").string(), {sol.u, conv},
                         {"u(r)", "riesz term"}, "ground-state candidate");
  }
  if (!sol.converged) {
    std::cerr << "solve: " << (sol.failure.empty() ? "not converged"
                                                   : sol.failure)
              << "; state dumped to " << (dir / "solution.json").string()
              << "\n";
    return 1;
  }
  std::cout << "solve: converged in " << sol.iterations
            << " iterations, J = " << sol.energy.J
            << ", residual = " << sol.residual_norm << "\n";
  return 0;
}

std::vector<double> effective_alphas(const choq::RunConfig& cfg) {
  if (!cfg.alpha_list.empty()) return cfg.alpha_list;
  const double a =
      choq::tm_threshold(cfg.problem.mu, cfg.problem.Q.exponent_origin());
  return {0.5 * a, 1.5 * a};
}

int cmd_moser(const CommonArgs& args) {
  auto cfg = load_and_apply(args);
  if (cfg.n_list.empty()) throw choq::ConfigError("moser: empty n_list");
  int n_max = 0;
  for (int n : cfg.n_list) n_max = std::max(n_max, n);
  const double r_min = std::min(cfg.r_min, 0.1 / double(n_max));
  auto grid = choq::moser_grid(r_min, cfg.n_nodes, cfg.n_list);
  const auto dir = ensure_out_dir(cfg);

  std::ostringstream csv;
  csv.precision(12);
  csv << "n,grad_norm_sq,I_n,delta_n,delta_n_log_n\n";
  for (int n : cfg.n_list) {
    const auto d = choq::moser_diagnostics(n, grid, cfg.problem.V);
    csv << d.n << "," << d.grad_norm_sq << "," << d.I_n << "," << d.delta_n
        << "," << d.delta_n_log_n << "\n";
  }
  choq::write_text((dir / "moser.csv").string(), csv.str());

  for (double alpha : effective_alphas(cfg)) {
    const auto seq = choq::tm_probe(cfg.problem, grid, alpha, cfg.n_list);
    std::ostringstream tp;
    tp.precision(12);
    tp << "n,value,overflow\n";
    for (const auto& e : seq)
      tp << e.n << "," << e.value << "," << (e.overflow ? 1 : 0) << "\n";
    choq::write_text(
        (dir / ("tm_probe_" + fmt_num(alpha) + ".csv")).string(), tp.str());
  }
  std::cout << "moser: wrote " << (dir / "moser.csv").string() << "\n";
  return 0;
}

int cmd_tm_probe(const CommonArgs& args) {
  auto cfg = load_and_apply(args);
  if (cfg.n_list.empty()) throw choq::ConfigError("tm-probe: empty n_list");
  int n_max = 0;
  for (int n : cfg.n_list) n_max = std::max(n_max, n);
  const double r_min = std::min(cfg.r_min, 0.1 / double(n_max));
  auto grid = choq::moser_grid(r_min, cfg.n_nodes, cfg.n_list);
  const auto dir = ensure_out_dir(cfg);

  json summary;
  summary["alpha_TM"] =
      choq::tm_threshold(cfg.problem.mu, cfg.problem.Q.exponent_origin());
  summary["probes"] = json::array();
  for (double alpha : effective_alphas(cfg)) {
    const auto seq = choq::tm_probe(cfg.problem, grid, alpha, cfg.n_list);
    std::ostringstream tp;
    tp.precision(12);
    tp << "n,value,overflow\n";
    for (const auto& e : seq)
      tp << e.n << "," << e.value << "," << (e.overflow ? 1 : 0) << "\n";
    choq::write_text(
        (dir / ("tm_probe_" + fmt_num(alpha) + ".csv")).string(), tp.str());
    const double ind = choq::tm_growth_indicator(seq);
    summary["probes"].push_back(
        {{"alpha", alpha},
         {"growth_indicator",
          std::isinf(ind) ? json("inf") : json(ind)}});
    std::cout << "alpha = " << alpha << ": growth indicator = " << ind
              << "\n";
  }
  choq::write_text((dir / "tm_probe_summary.json").string(),
                   summary.dump(2) + "\n");
  return 0;
}

int cmd_fibering(const CommonArgs& args) {
  auto cfg = load_and_apply(args);
  const auto dir = ensure_out_dir(cfg);
  auto grid = choq::build_log_grid(cfg.r_min, cfg.r_max, cfg.n_nodes);
  auto ker = obtain_kernel(cfg, grid);
  auto u = cfg.init == "cutoff" ? choq::cutoff_init(grid)
                                : choq::gaussian_init(grid, cfg.problem.V);
  const auto [t_star, J_star] = choq::fibering_maximize(u, cfg.problem, ker);

  std::ostringstream csv;
  csv.precision(12);
  csv << "t,J\n";
  const int samples = 200;
  for (int k = 0; k < samples; ++k) {
    const double t =
        t_star * std::pow(10.0, -2.0 + 3.0 * double(k) / (samples - 1));
    choq::RadialFunction s(grid, u.v);
    for (auto& x : s.v) x *= t;
    double J;
    try {
      J = choq::energy_J(s, cfg.problem, ker).J;
    } catch (const std::runtime_error&) {
      break;  // overflow along the ray: stop the scan
    }
    csv << t << "," << J << "\n";
  }
  choq::write_text((dir / "fibering.csv").string(), csv.str());
  json j = {{"t_star", t_star},
            {"J_at_t_star", J_star},
            {"init", cfg.init},
            {"seed", cfg.seed}};
  choq::write_text((dir / "fibering.json").string(), j.dump(2) + "\n");
  std::cout << "fibering: t* = " << t_star << ", J(t* u) = " << J_star
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for the planar weighted Choquard equation"};
  app.require_subcommand(1);

  CommonArgs args;
  int (*handler)(const CommonArgs&) = nullptr;
  const std::pair<const char*, int (*)(const CommonArgs&)> cmds[] = {
      {"check", &cmd_check},       {"solve", &cmd_solve},
      {"constants", &cmd_constants}, {"moser", &cmd_moser},
      {"tm-probe", &cmd_tm_probe}, {"fibering", &cmd_fibering}};
  for (const auto& [name, fn] : cmds) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "config JSON path")
        ->required();
    sub->add_option("--out", args.out_override, "output directory override");
    sub->add_option("--seed", args.seed_override, "seed override");
    sub->callback([&handler, fn = fn] { handler = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    return handler(args);
  } catch (const choq::ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 2;
  } catch (const choq::IoError& ex) {
    std::cerr << "io error: " << ex.what() << "\n";
    return 2;
  } catch (const std::domain_error& ex) {
    std::cerr << "domain error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
