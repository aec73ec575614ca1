// Command-line front end: run a scenario, sweep approximation fineness,
// emit inscribed-polytope files, or validate a config.
//
// Exit codes: 0 success, 2 config error, 3 non-convergence, 4 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "rgne/report_io.hpp"
#include "rgne/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitNumeric = 4;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> phase;
  std::optional<double> step_size;
  std::optional<double> tol;
  std::optional<std::string> out_dir;
};

rgne::ScenarioConfig load_config(const std::string& config_path,
                                 const std::string& builtin,
                                 const Overrides& ov) {
  nlohmann::json j;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in)
      throw rgne::Error(rgne::Errc::IoError,
                        "cannot open config file: " + config_path);
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw rgne::Error(rgne::Errc::InvalidArgument,
                        std::string("config: JSON parse error: ") + e.what());
    }
  } else if (builtin == "demo-demand-response") {
    j = rgne::builtin_demo_demand_response();
  } else {
    throw rgne::Error(rgne::Errc::InvalidArgument,
                      "unknown built-in scenario: " + builtin);
  }
  rgne::ScenarioConfig cfg = rgne::parse_scenario(j);
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.phase) cfg.phase = *ov.phase;
  if (ov.step_size) cfg.integrator.step_size = *ov.step_size;
  if (ov.tol) cfg.integrator.tol = *ov.tol;
  if (ov.out_dir) cfg.output_dir = *ov.out_dir;
  if (const char* env = std::getenv("RGNE_OUT_DIR"))
    if (!ov.out_dir) cfg.output_dir = env;
  return cfg;
}

void write_run_meta(std::ostream& os, const rgne::ScenarioConfig& cfg,
                    int vertices, const rgne::RunResult& res) {
  os << "scenario.players = " << cfg.players << '\n'
     << "scenario.budget = " << rgne::fmt_double(cfg.budget) << '\n'
     << "approximation.vertices = " << vertices << '\n'
     << "approximation.phase = " << rgne::fmt_double(cfg.phase)
     << "  # first vertex at parameter angle phase on the +x semiaxis\n"
     << "approximation.vertex_rule = regular-in-parameter-angle\n"
     << "init.rule = x(0): box-projected nominal; sigma(0) = 0, re-projected "
        "onto Omega; lambda(0) = zeta(0) = 0\n"
     << "integrator.scheme = "
     << (cfg.integrator.scheme == rgne::Scheme::ExplicitEuler ? "euler" : "rk4")
     << '\n'
     << "integrator.step_size = " << rgne::fmt_double(cfg.integrator.step_size)
     << '\n'
     << "integrator.tol = " << rgne::fmt_double(cfg.integrator.tol) << '\n'
     << "seed = " << cfg.seed << '\n'
     << "converged = " << (res.trajectory.converged ? "yes" : "no") << '\n'
     << "rounds = " << res.trajectory.rounds << '\n'
     << "final_time = " << rgne::fmt_double(res.trajectory.final_time) << '\n'
     << "final_deriv_norm = "
     << rgne::fmt_double(res.trajectory.final_deriv_norm) << '\n'
     << "wall_seconds = " << rgne::fmt_double(res.wall_seconds) << '\n';
}

int cmd_run(const rgne::ScenarioConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const rgne::UncertainGame game = rgne::build_game(cfg);
  if (!game.slater_ok())
    std::cerr << "warning: no strictly feasible interior point found "
                 "(Slater check failed); the instance may be infeasible\n";

  rgne::RunResult res = rgne::run_scenario(cfg, cfg.vertices);

  {
    std::ofstream os(fs::path(cfg.output_dir) / "trajectory.csv");
    rgne::write_trajectory_csv(os, res.eg, res.trajectory);
  }
  {
    std::ofstream os(fs::path(cfg.output_dir) / "kkt_report.txt");
    rgne::write_kkt_report(os, res.kkt);
  }
  {
    std::ofstream os(fs::path(cfg.output_dir) / "epsilon_report.txt");
    os << "# measured against the original worst case (ellipsoids)\n";
    rgne::write_epsilon_report(os, res.eps_ellipsoid);
    os << "\n# measured against the solved polytope game\n";
    rgne::write_epsilon_report(os, res.eps_polytope);
  }
  {
    std::ofstream os(fs::path(cfg.output_dir) / "run_meta.txt");
    write_run_meta(os, cfg, cfg.vertices, res);
  }

  std::cout << (res.trajectory.converged ? "converged" : "timed out")
            << " after " << res.trajectory.rounds << " rounds, ||y'|| = "
            << res.trajectory.final_deriv_norm << "\n"
            << "artifacts in " << cfg.output_dir << "\n";
  return res.trajectory.converged ? kExitOk : kExitNoConvergence;
}

int cmd_sweep(const rgne::ScenarioConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const auto rows = rgne::sweep_scenario(cfg);

  std::ofstream os(fs::path(cfg.output_dir) / "sweep.csv");
  os << "vertices,facets,h_max,theta_max,delta_angular,delta_hausdorff,"
        "eps_ellipsoid,eps_polytope,true_violation,iterations,wall_seconds,"
        "status\n";
  bool all_ok = true;
  for (const auto& r : rows) {
    os << r.vertices << ',' << r.facets << ',' << rgne::fmt_double(r.h_max)
       << ',' << rgne::fmt_double(r.theta_max) << ','
       << rgne::fmt_double(r.delta_angular) << ','
       << (r.delta_hausdorff ? rgne::fmt_double(*r.delta_hausdorff)
                             : std::string("unavailable"))
       << ',' << rgne::fmt_double(r.eps_ellipsoid) << ','
       << rgne::fmt_double(r.eps_polytope) << ','
       << rgne::fmt_double(r.true_violation) << ',' << r.iterations << ','
       << rgne::fmt_double(r.wall_seconds) << ',' << r.status << '\n';
    std::cout << "v=" << r.vertices << " eps=" << r.eps_ellipsoid
              << " h=" << r.h_max << " delta=" << r.delta_angular << " ["
              << r.status << "]\n";
    if (r.status != "ok") all_ok = false;
  }
  std::cout << "sweep written to "
            << (fs::path(cfg.output_dir) / "sweep.csv").string() << "\n";
  return all_ok ? kExitOk : kExitNoConvergence;
}

int cmd_approx(const rgne::ScenarioConfig& cfg, int refine_steps) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const rgne::Ellipsoid& e = cfg.uncertainty.front();
  rgne::Polytope p = rgne::inscribe_regular(e, cfg.vertices, cfg.phase);
  if (refine_steps > 0) p = rgne::refine_by_support_gap(e, std::move(p), refine_steps);

  const rgne::Polytope ref =
      rgne::inscribe_regular(e, rgne::kReferenceVertices, cfg.phase);
  const rgne::ApproxMetrics m = rgne::approx_metrics(e, p, ref);

  {
    std::ofstream os(fs::path(cfg.output_dir) / "polytope.txt");
    rgne::write_polytope(os, p);
  }
  {
    std::ofstream os(fs::path(cfg.output_dir) / "approx_metrics.txt");
    os << "vertices = " << p.vertices.size() << '\n'
       << "facets = " << m.facet_count << '\n'
       << "hausdorff = " << rgne::fmt_double(m.hausdorff) << '\n'
       << "theta_vs_" << rgne::kReferenceVertices
       << "gon = " << rgne::fmt_double(m.max_angle) << '\n'
       << "curvature_nu = " << rgne::fmt_double(m.curvature) << '\n';
  }
  std::cout << "polytope with " << p.vertices.size() << " vertices, h = "
            << m.hausdorff << ", written to " << cfg.output_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"worst-case generalized Nash equilibria via inscribed-polytope "
               "approximation and distributed projected dynamics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string builtin = "demo-demand-response";
  Overrides ov;
  std::string out_dir_flag;
  double phase_flag = 0.0, step_flag = 0.0, tol_flag = 0.0;
  std::uint64_t seed_flag = 0;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--config", config_path, "scenario config (JSON)");
    c->add_option("--builtin", builtin,
                  "built-in scenario when no --config is given");
    c->add_option("--out", out_dir_flag, "output directory override");
    c->add_option("--seed", seed_flag, "seed override")
        ->check(CLI::NonNegativeNumber);
    c->add_option("--phase", phase_flag,
                  "polygon orientation override (radians)");
    c->add_option("--step-size", step_flag, "integrator step override")
        ->check(CLI::PositiveNumber);
    c->add_option("--tol", tol_flag, "termination tolerance override")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "run the dynamics once");
  add_common(run);
  CLI::App* sweep = app.add_subcommand("sweep", "run over the vertex-count sweep");
  add_common(sweep);
  CLI::App* approx =
      app.add_subcommand("approx", "emit one inscribed polytope and its metrics");
  add_common(approx);
  int approx_vertices = 0, approx_refine = 0;
  approx->add_option("--vertices", approx_vertices, "vertex count")
      ->check(CLI::PositiveNumber);
  approx->add_option("--refine", approx_refine, "support-gap refinement steps")
      ->check(CLI::NonNegativeNumber);
  CLI::App* validate =
      app.add_subcommand("validate", "validate a config and exit");
  add_common(validate);

  CLI11_PARSE(app, argc, argv);

  auto fill_overrides = [&](const CLI::App* c) {
    if (c->count("--seed")) ov.seed = seed_flag;
    if (c->count("--phase")) ov.phase = phase_flag;
    if (c->count("--step-size")) ov.step_size = step_flag;
    if (c->count("--tol")) ov.tol = tol_flag;
    if (c->count("--out")) ov.out_dir = out_dir_flag;
  };

  try {
    if (app.got_subcommand(run)) {
      fill_overrides(run);
      return cmd_run(load_config(config_path, builtin, ov));
    }
    if (app.got_subcommand(sweep)) {
      fill_overrides(sweep);
      return cmd_sweep(load_config(config_path, builtin, ov));
    }
    if (app.got_subcommand(approx)) {
      fill_overrides(approx);
      rgne::ScenarioConfig cfg = load_config(config_path, builtin, ov);
      if (approx_vertices > 0) cfg.vertices = approx_vertices;
      return cmd_approx(cfg, approx_refine);
    }
    if (app.got_subcommand(validate)) {
      fill_overrides(validate);
      load_config(config_path, builtin, ov);
      std::cout << "config OK\n";
      return kExitOk;
    }
  } catch (const rgne::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case rgne::Errc::InvalidArgument:
      case rgne::Errc::DimensionMismatch:
      case rgne::Errc::IoError:
        return kExitConfig;
      case rgne::Errc::NotConverged:
        return kExitNoConvergence;
      default:
        return kExitNumeric;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitConfig;
}
