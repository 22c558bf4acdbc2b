#include "crystal/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "crystal/kinematics.hpp"
#include "crystal/mesh_io.hpp"
#include "crystal/voigt.hpp"

namespace crystal {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  const auto path = std::filesystem::path(cfg.out_dir) / name;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path.string());
  return out;
}

std::vector<Mat3> load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open F table: " + path);
  std::vector<Mat3> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Mat3 F;
    if (!(ls >> F(0, 0))) continue;
    if (!(ls >> F(0, 1) >> F(0, 2) >> F(1, 0) >> F(1, 1) >> F(1, 2) >>
          F(2, 0) >> F(2, 1) >> F(2, 2))) {
      throw ConfigError("F table: expected 9 numbers per row");
    }
    rows.push_back(F);
  }
  if (rows.empty()) throw ConfigError("F table: no rows");
  return rows;
}

void run_in_parallel(int jobs, const std::function<void(int)>& work) {
  const int workers = std::min(thread_count(), jobs);
  if (workers <= 1) {
    for (int j = 0; j < jobs; ++j) work(j);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int j = w; j < jobs; j += workers) work(j);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

int thread_count() {
  const int hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CRYSTAL_RELAX_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return std::min(hw, cap);
  }
  return hw;
}

RunConfig make_run_config(const KeyValueConfig& kv, const std::string& mode) {
  static const std::set<std::string> known = {
      "c11", "c12", "c44", "gamma_dot_0", "h0", "xi0", "xi_inf",
      "xi_inf_star", "q", "n", "theta", "phi", "dt", "steps", "path", "rate",
      "table_file", "eps_rel", "omega0", "max_substeps", "dt_large",
      "dt_small", "dt_ref", "passes", "total_time", "mesh", "length",
      "distortion", "newton_tol", "newton_max_iter", "orientations_file"};
  for (const auto& [key, value] : kv.entries()) {
    if (!known.count(key)) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }

  RunConfig cfg;
  cfg.mode = mode;

  MaterialParams defaults = MaterialParams::aluminum();
  cfg.material.gamma_dot_0 = kv.get_double("gamma_dot_0", defaults.gamma_dot_0);
  cfg.material.h0 = kv.get_double("h0", defaults.h0);
  cfg.material.xi0 = kv.get_double("xi0", defaults.xi0);
  cfg.material.xi_inf = kv.get_double("xi_inf", defaults.xi_inf);
  cfg.material.q = kv.get_double("q", defaults.q);
  cfg.material.n = kv.get_double("n", defaults.n);
  cfg.material.elasticity =
      elasticity_voigt(kv.get_double("c11", 106.75e9),
                       kv.get_double("c12", 60.41e9),
                       kv.get_double("c44", 28.34e9));
  cfg.material.h_ab = MaterialParams::coupling_matrix(cfg.material.q);
  // Saturation override used to force strain localization.
  if (kv.has("xi_inf_star")) {
    cfg.material.xi_inf = kv.get_double("xi_inf_star");
  }
  if (cfg.material.gamma_dot_0 <= 0 || cfg.material.h0 <= 0 ||
      cfg.material.xi0 <= 0 || cfg.material.xi_inf <= 0 ||
      cfg.material.n < 1) {
    throw ConfigError("material constants must be positive (n >= 1)");
  }

  cfg.orientation.theta = kv.get_angle("theta", 0.0);
  cfg.orientation.phi = kv.get_angle("phi", 0.0);

  cfg.dt = kv.get_double("dt", cfg.dt);
  cfg.steps = kv.get_int("steps", cfg.steps);
  if (cfg.dt <= 0 || cfg.steps < 1) {
    throw ConfigError("dt must be positive and steps >= 1");
  }
  cfg.path = kv.get_string("path", cfg.path);
  if (cfg.path != "uniaxial" && cfg.path != "shear" && cfg.path != "table") {
    throw ConfigError("path must be uniaxial, shear or table");
  }
  cfg.table_file = kv.get_string("table_file", "");
  if (cfg.path == "table" && cfg.table_file.empty()) {
    throw ConfigError("table path needs table_file");
  }

  const double default_rate = (mode == "drift") ? -0.08 : 0.08;
  cfg.rate = kv.get_double("rate", default_rate);

  cfg.stagger.eps_rel = kv.get_double("eps_rel", cfg.stagger.eps_rel);
  cfg.stagger.omega0 = kv.get_double("omega0", cfg.stagger.omega0);
  cfg.stagger.max_substeps =
      kv.get_int("max_substeps", cfg.stagger.max_substeps);
  if (cfg.stagger.omega0 <= 0 || cfg.stagger.omega0 >= 2 ||
      cfg.stagger.eps_rel <= 0) {
    throw ConfigError("need 0 < omega0 < 2 and eps_rel > 0");
  }

  cfg.dt_large = kv.get_double("dt_large", cfg.dt_large);
  cfg.dt_small = kv.get_double("dt_small", cfg.dt_small);
  cfg.dt_ref = kv.get_double("dt_ref", cfg.dt_ref);
  cfg.naive_passes = kv.get_int("passes", cfg.naive_passes);
  cfg.total_time = kv.get_double("total_time", cfg.total_time);

  cfg.mesh = kv.get_string("mesh", "single");
  cfg.length = kv.get_double("length", cfg.length);
  cfg.distortion = kv.get_double("distortion", cfg.distortion);
  cfg.fem.newton_tol = kv.get_double("newton_tol", cfg.fem.newton_tol);
  cfg.fem.newton_max_iter =
      kv.get_int("newton_max_iter", cfg.fem.newton_max_iter);
  cfg.fem.stagger = cfg.stagger;

  if (mode == "pole") {
    if (kv.has("orientations_file")) {
      std::ifstream in(kv.get_string("orientations_file"));
      if (!in) throw ConfigError("cannot open orientations_file");
      std::string line;
      while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string a, b;
        if (!(ls >> a >> b)) continue;
        cfg.pole_orientations.push_back({parse_angle(a), parse_angle(b)});
      }
    } else {
      cfg.pole_orientations.push_back(cfg.orientation);
    }
    if (cfg.pole_orientations.empty()) {
      throw ConfigError("pole mode: no orientations given");
    }
  }
  return cfg;
}

Mat3 path_deformation(const RunConfig& cfg, double t, int step_index) {
  if (cfg.path == "uniaxial") {
    Mat3 F = Mat3::Identity();
    F(2, 2) = 1.0 + cfg.rate * t;  // lateral components held at 1
    if (F(2, 2) <= 0.0) throw SolverError("uniaxial path: stretch <= 0");
    return F;
  }
  if (cfg.path == "shear") {
    Mat3 F = Mat3::Identity();
    F(0, 1) = cfg.rate * t;
    return F;
  }
  static thread_local std::vector<Mat3> table;
  static thread_local std::string table_path;
  if (table_path != cfg.table_file) {
    table = load_table(cfg.table_file);
    table_path = cfg.table_file;
  }
  if (step_index >= static_cast<int>(table.size())) {
    throw ConfigError("F table has fewer rows than steps");
  }
  return table[step_index];
}

MaterialState run_point_driver(const RunConfig& cfg, std::ostream& csv) {
  const SlipSystems systems = rotate_and_project(
      fcc_slip_systems(), cfg.orientation, cfg.material.elasticity);
  MaterialState state = MaterialState::initial(cfg.material);

  csv << "time";
  const char* comp[6] = {"11", "22", "33", "23", "13", "12"};
  for (const char* c : comp) csv << ",E" << c;
  for (const char* c : comp) csv << ",ep" << c;
  for (const char* c : comp) csv << ",sig" << c;
  for (int a = 1; a <= kSlipCount; ++a) csv << ",xi" << a;
  csv << ",substeps,omega_last\n";

  for (int s = 0; s < cfg.steps; ++s) {
    const double t = (s + 1) * cfg.dt;
    const Mat3 F = path_deformation(cfg, t, s);
    const Vec6 E = green_lagrange(F);
    const StrainState ss = pade_hencky(E);
    const StepResult step = relax_integrate(ss.eps, state, cfg.dt,
                                            cfg.material, systems,
                                            cfg.stagger, F);
    state = step.state;
    const Vec6 sigma = cfg.material.elasticity.C * (ss.eps - state.eps_p);

    csv << num(t);
    for (int i = 0; i < 6; ++i) csv << ',' << num(E[i]);
    for (int i = 0; i < 6; ++i) csv << ',' << num(state.eps_p[i]);
    for (int i = 0; i < 6; ++i) csv << ',' << num(sigma[i]);
    for (int a = 0; a < kSlipCount; ++a) csv << ',' << num(state.xi[a]);
    csv << ',' << step.trace.substeps << ','
        << num(step.trace.omegas.empty() ? 0.0 : step.trace.omegas.back())
        << '\n';
    csv.flush();
  }
  return state;
}

namespace {

MaterialState run_path(const RunConfig& cfg, double dt, bool relaxed,
                       std::ostream* csv) {
  const SlipSystems systems = rotate_and_project(
      fcc_slip_systems(), cfg.orientation, cfg.material.elasticity);
  MaterialState state = MaterialState::initial(cfg.material);
  const int steps = static_cast<int>(std::llround(cfg.total_time / dt));
  if (csv) {
    *csv << "time";
    for (int a = 1; a <= kSlipCount; ++a) *csv << ",xi" << a;
    *csv << "\n";
  }
  for (int s = 0; s < steps; ++s) {
    const double t = (s + 1) * dt;
    const Mat3 F = path_deformation(cfg, t, s);
    const Vec6 eps = pade_hencky(green_lagrange(F)).eps;
    if (relaxed) {
      state = relax_integrate(eps, state, dt, cfg.material, systems,
                              cfg.stagger, F)
                  .state;
    } else {
      state = naive_integrate(eps, state, dt, cfg.material, systems,
                              cfg.naive_passes, cfg.stagger, F);
    }
    if (csv) {
      *csv << num(t);
      for (int a = 0; a < kSlipCount; ++a) *csv << ',' << num(state.xi[a]);
      *csv << "\n";
    }
  }
  return state;
}

DriftDeviation deviation(const MaterialState& s, const MaterialState& ref) {
  DriftDeviation d;
  d.xi = (s.xi - ref.xi).norm() / ref.xi.norm();
  d.eps_p = (s.eps_p - ref.eps_p).norm() / std::max(ref.eps_p.norm(), 1e-16);
  return d;
}

}  // namespace

DriftSummary run_drift_study(const RunConfig& cfg) {
  auto ref_csv = open_out(cfg, "drift_ref.csv");
  const MaterialState ref = run_path(cfg, cfg.dt_ref, true, &ref_csv);

  DriftSummary out;
  const struct {
    const char* name;
    double dt;
    bool relaxed;
    DriftDeviation DriftSummary::* slot;
  } runs[] = {
      {"naive_large", cfg.dt_large, false, &DriftSummary::naive_large},
      {"relax_large", cfg.dt_large, true, &DriftSummary::relax_large},
      {"naive_small", cfg.dt_small, false, &DriftSummary::naive_small},
      {"relax_small", cfg.dt_small, true, &DriftSummary::relax_small},
  };
  for (const auto& r : runs) {
    auto csv = open_out(cfg, std::string("drift_") + r.name + ".csv");
    const MaterialState s = run_path(cfg, r.dt, r.relaxed, &csv);
    out.*(r.slot) = deviation(s, ref);
  }

  auto summary = open_out(cfg, "drift_summary.csv");
  summary << "method,dt,dev_xi_rel,dev_eps_p_rel\n";
  summary << "naive," << num(cfg.dt_large) << ',' << num(out.naive_large.xi)
          << ',' << num(out.naive_large.eps_p) << "\n";
  summary << "relax," << num(cfg.dt_large) << ',' << num(out.relax_large.xi)
          << ',' << num(out.relax_large.eps_p) << "\n";
  summary << "naive," << num(cfg.dt_small) << ',' << num(out.naive_small.xi)
          << ',' << num(out.naive_small.eps_p) << "\n";
  summary << "relax," << num(cfg.dt_small) << ',' << num(out.relax_small.xi)
          << ',' << num(out.relax_small.eps_p) << "\n";
  return out;
}

ErrorSurfaceSummary run_error_surface(const RunConfig&,
                                      std::ostream& grid_csv,
                                      std::ostream& curve_csv) {
  // The grid and curve ranges are fixed reporting conventions.
  constexpr int kN = 91;
  constexpr double kLo = -0.25, kHi = 0.65;
  const auto coord = [&](int i) {
    return kLo + (kHi - kLo) * i / (kN - 1);
  };

  std::vector<double> err(kN * kN);
  run_in_parallel(kN, [&](int i) {
    for (int j = 0; j < kN; ++j) {
      err[i * kN + j] = incompressible_error(coord(i), coord(j));
    }
  });

  ErrorSurfaceSummary out;
  grid_csv << "E1,E2,error\n";
  for (int i = 0; i < kN; ++i) {
    for (int j = 0; j < kN; ++j) {
      const double e = err[i * kN + j];
      grid_csv << num(coord(i)) << ',' << num(coord(j)) << ',' << num(e)
               << "\n";
      if (e > out.grid_max) {
        out.grid_max = e;
        out.arg_E1 = coord(i);
        out.arg_E2 = coord(j);
      }
    }
  }

  // Relative error at the argmax against the exact strain norm there.
  {
    const double E1 = out.arg_E1, E2 = out.arg_E2;
    const double g = 1.0 + 2.0 * E1 + 2.0 * E2 + 4.0 * E1 * E2;
    const double l1 = 0.5 * std::log1p(2.0 * E1);
    const double l2 = 0.5 * std::log1p(2.0 * E2);
    const double l3 = -0.5 * std::log(g);
    const double exact_norm = std::sqrt(l1 * l1 + l2 * l2 + l3 * l3);
    out.rel_error_percent = 100.0 * out.grid_max / exact_norm;
  }

  curve_csv << "normE,upper_bound,err_1d\n";
  for (int i = 0; i < kN; ++i) {
    const double t = 0.45 * i / (kN - 1);
    const LogErrorBounds b = log_error_diagnostics(t);
    curve_csv << num(t) << ',' << num(b.upper_bound) << ',' << num(b.err_1d)
              << "\n";
  }
  return out;
}

namespace {

Mesh builtin_mesh(const RunConfig& cfg) {
  if (cfg.mesh == "single") {
    Mesh mesh = make_block_mesh(1, 1, 1, cfg.length, cfg.length, cfg.length);
    for (int nd = 0; nd < 8; ++nd) {
      const Vec3& X = mesh.nodes[nd];
      if (X[2] == 0.0) {
        mesh.fixed.push_back({nd, 2, 0.0});
      } else {
        mesh.moving.push_back({nd, 2, cfg.rate});
      }
    }
    // Pin in-plane rigid modes at the base.
    mesh.fixed.push_back({0, 0, 0.0});
    mesh.fixed.push_back({0, 1, 0.0});
    mesh.fixed.push_back({1, 1, 0.0});
    return mesh;
  }
  return read_mesh_file(cfg.mesh);
}

}  // namespace

void run_fem_case(const RunConfig& cfg) {
  if (cfg.mesh == "patch") {
    const PatchTestReport report = patch_test(cfg.distortion, cfg.material);
    auto out = open_out(cfg, "patch_report.csv");
    out << "max_strain_dev_rel,max_stress_dev_rel,max_alpha\n"
        << num(report.max_strain_dev_rel) << ','
        << num(report.max_stress_dev_rel) << ',' << num(report.max_alpha)
        << "\n";
    return;
  }

  Mesh mesh = builtin_mesh(cfg);
  prepare_mesh(mesh, cfg.material);
  if (mesh.moving.empty()) {
    throw ConfigError("fem mesh has no moving (displacement-driven) dofs");
  }

  const SlipSystems systems = rotate_and_project(
      fcc_slip_systems(), cfg.orientation, cfg.material.elasticity);

  // Reporting conventions for box meshes: average strain from the moving
  // set's displacement over the z extent, average stress from the summed
  // reaction over the initial cross-section.
  double zmin = mesh.nodes[0][2], zmax = zmin;
  double xmin = mesh.nodes[0][0], xmax = xmin;
  double ymin = mesh.nodes[0][1], ymax = ymin;
  for (const auto& X : mesh.nodes) {
    zmin = std::min(zmin, X[2]); zmax = std::max(zmax, X[2]);
    xmin = std::min(xmin, X[0]); xmax = std::max(xmax, X[0]);
    ymin = std::min(ymin, X[1]); ymax = std::max(ymax, X[1]);
  }
  const double height = zmax - zmin;
  const double area = (xmax - xmin) * (ymax - ymin);
  const double move_rate = cfg.mesh == "single" ? cfg.rate
                                                : mesh.moving.front().value;

  const FemConfig& fem_cfg = cfg.fem;
  auto reactions = open_out(cfg, "reactions.csv");
  reactions << "step,time,ubar,Ebar33,reaction,sigma_bar33\n";

  for (int s = 0; s < cfg.steps; ++s) {
    FemHistory one;
    try {
      one = solve_displacement_control(mesh, cfg.dt, 1, cfg.material, systems,
                                       fem_cfg, s * cfg.dt);
    } catch (const SolverError& err) {
      throw SolverError("fem step " + std::to_string(s + 1) + ": " +
                            err.what(),
                        err.residual());
    }
    const StepRecord& rec = one.steps.back();
    const double ubar = move_rate * rec.time;
    double reaction = 0.0;
    for (const auto& c : mesh.moving) {
      reaction += rec.reaction[3 * c.node + c.dof];
    }
    reactions << (s + 1) << ',' << num(rec.time) << ',' << num(ubar) << ','
              << num(ubar / height) << ',' << num(reaction) << ','
              << num(reaction / area) << "\n";
    reactions.flush();
  }

  auto dump = open_out(cfg, "final_state.txt");
  dump << "# element gp norm_eps_p xi_1..xi_12\n";
  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    for (int gp = 0; gp < 8; ++gp) {
      const MaterialState& st = mesh.elements[e].gp_states[gp];
      dump << e << ' ' << gp << ' ' << num(strain_frobenius_norm(st.eps_p));
      for (int a = 0; a < kSlipCount; ++a) dump << ' ' << num(st.xi[a]);
      dump << "\n";
    }
  }
}

bool stereographic_project(const Vec3& pole, std::array<double, 2>& xy) {
  Vec3 p = pole.normalized();
  if (p[2] < 0.0) p = -p;  // poles are axes
  const double denom = 1.0 + p[2];
  if (denom <= 1e-12) return false;
  xy = {p[0] / denom, p[1] / denom};
  return true;
}

PoleProjection project_pole_figure(const std::vector<Orientation>& list) {
  static const std::array<Vec3, 4> family = {
      Vec3(1, 1, 1), Vec3(1, 1, -1), Vec3(1, -1, 1), Vec3(-1, 1, 1)};
  PoleProjection out;
  for (const auto& o : list) {
    const Mat3 Tt = rotation_matrix(o).transpose();
    for (const auto& pole : family) {
      std::array<double, 2> xy{};
      if (stereographic_project(Tt * pole.normalized(), xy)) {
        out.points.push_back(xy);
      } else {
        ++out.skipped;
      }
    }
  }
  return out;
}

}  // namespace crystal
