#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "crystal/drivers.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

std::ofstream open_csv(const crystal::RunConfig& cfg,
                       const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  const auto path = std::filesystem::path(cfg.out_dir) / name;
  std::ofstream out(path);
  if (!out) {
    throw crystal::ConfigError("cannot open output file: " + path.string());
  }
  return out;
}

int dispatch(const std::string& mode, const std::string& config_path,
             const std::string& out_dir) {
  using namespace crystal;
  const KeyValueConfig kv = KeyValueConfig::parse_file(config_path);
  RunConfig cfg = make_run_config(kv, mode);
  if (!out_dir.empty()) cfg.out_dir = out_dir;

  if (mode == "point") {
    auto csv = open_csv(cfg, "point.csv");
    run_point_driver(cfg, csv);
  } else if (mode == "drift") {
    const DriftSummary s = run_drift_study(cfg);
    std::cout << "drift: naive dt=" << cfg.dt_large
              << " dev_xi=" << s.naive_large.xi
              << " | relax dev_xi=" << s.relax_large.xi << "\n"
              << "drift: naive dt=" << cfg.dt_small
              << " dev_xi=" << s.naive_small.xi
              << " | relax dev_xi=" << s.relax_small.xi << "\n";
  } else if (mode == "error-surface") {
    auto grid = open_csv(cfg, "error_surface.csv");
    auto curve = open_csv(cfg, "error_bounds.csv");
    const ErrorSurfaceSummary s = run_error_surface(cfg, grid, curve);
    std::cout << "error surface: max = " << s.grid_max << " at (E1, E2) = ("
              << s.arg_E1 << ", " << s.arg_E2
              << "), relative = " << s.rel_error_percent << "%\n";
  } else if (mode == "fem") {
    run_fem_case(cfg);
  } else if (mode == "pole") {
    const PoleProjection p = project_pole_figure(cfg.pole_orientations);
    auto csv = open_csv(cfg, "pole.csv");
    csv << "x,y\n";
    for (const auto& xy : p.points) {
      char buf[80];
      std::snprintf(buf, sizeof(buf), "%.16e,%.16e\n", xy[0], xy[1]);
      csv << buf;
    }
    if (p.skipped > 0) {
      std::cout << "pole: skipped " << p.skipped
                << " pole(s) at the projection singularity\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-crystal finite-strain plasticity batch driver"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  const char* modes[] = {"point", "drift", "error-surface", "fem", "pole"};
  const char* blurbs[] = {
      "material-point strain-path run",
      "staggered-drift study (naive split vs dynamic relaxation)",
      "Pade logarithm error surface and bound curves",
      "displacement-controlled finite element case",
      "stereographic (111) pole projection"};
  for (int m = 0; m < 5; ++m) {
    CLI::App* sub = app.add_subcommand(modes[m], blurbs[m]);
    sub->add_option("--config", config_path, "run configuration file")
        ->required();
    sub->add_option("--out", out_dir, "output directory (default '.')");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string mode = app.get_subcommands().front()->get_name();

  try {
    return dispatch(mode, config_path, out_dir);
  } catch (const crystal::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const crystal::SolverError& err) {
    std::cerr << "solver failure: " << err.what() << "\n";
    return kExitSolver;
  }
}
