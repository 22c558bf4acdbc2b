#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "crystal/config.hpp"
#include "crystal/fem.hpp"
#include "crystal/lattice.hpp"
#include "crystal/stagger.hpp"

namespace crystal {

/// One batch run. Quantities in SI; angles in radians.
struct RunConfig {
  std::string mode;  // point | drift | error-surface | fem | pole
  MaterialParams material = MaterialParams::aluminum();
  Orientation orientation{};
  double dt = 1e-3;   // [s]
  int steps = 100;
  std::string path = "uniaxial";  // uniaxial | shear | table
  double rate = 0.08;             // stretch/shear rate [1/s] (fem: [m/s])
  std::string table_file;
  RelaxationConfig stagger;

  // drift mode
  double dt_large = 0.0075;  // [s]
  double dt_small = 0.0025;  // [s]
  double dt_ref = 1e-4;      // [s]
  int naive_passes = 2;
  double total_time = 1.5;   // [s]

  // fem mode
  std::string mesh;          // "single", "patch", or a mesh file path
  double length = 1e-3;      // [m] edge of the builtin single-element cube
  double distortion = 0.05;  // [m] builtin patch distortion
  FemConfig fem;

  // pole mode
  std::vector<Orientation> pole_orientations;

  std::string out_dir = ".";
};

/// Builds a RunConfig for `mode` from the flat key-value file; unknown
/// keys are rejected. Throws ConfigError.
RunConfig make_run_config(const KeyValueConfig& kv, const std::string& mode);

/// Prescribed deformation gradient of the strain path at time t
/// (step_index selects the row of a table path).
Mat3 path_deformation(const RunConfig& cfg, double t, int step_index);

/// Integrates one material point along the configured path, one CSV row
/// per step (17 significant digits, flushed row by row). Returns the
/// final state.
MaterialState run_point_driver(const RunConfig& cfg, std::ostream& csv);

struct DriftDeviation {
  double xi = 0.0;     // ||xi - xi_ref|| / ||xi_ref||
  double eps_p = 0.0;  // ||eps_p - eps_p_ref|| / ||eps_p_ref||
};

struct DriftSummary {
  DriftDeviation naive_large, relax_large;
  DriftDeviation naive_small, relax_small;
};

/// Runs the same loading path with the naive two-pass split and with
/// dynamic relaxation at both time steps, against a fine-step relaxed
/// reference; writes per-run trajectories and a summary CSV to out_dir.
DriftSummary run_drift_study(const RunConfig& cfg);

struct ErrorSurfaceSummary {
  double grid_max = 0.0;
  double arg_E1 = 0.0;
  double arg_E2 = 0.0;
  double rel_error_percent = 0.0;  // at the argmax, vs the exact strain norm
};

/// Tabulates the incompressible-case Pade error over the E1,E2 grid and
/// the 1D bound/error curves; returns grid max, argmax and the relative
/// error there.
ErrorSurfaceSummary run_error_surface(const RunConfig& cfg,
                                      std::ostream& grid_csv,
                                      std::ostream& curve_csv);

/// Displacement-controlled finite element case: reaction curve CSV plus a
/// final per-point state dump under out_dir.
void run_fem_case(const RunConfig& cfg);

struct PoleProjection {
  std::vector<std::array<double, 2>> points;
  int skipped = 0;  // poles at the projection antipode
};

/// Stereographic projection of one unit pole (upper hemisphere after
/// sign flip); returns false for the antipodal singularity.
bool stereographic_project(const Vec3& pole, std::array<double, 2>& xy);

/// Maps the (111)-family plane normals of each orientation through the
/// transpose transformation and projects them onto the unit disc.
PoleProjection project_pole_figure(const std::vector<Orientation>& list);

/// Parallel fan-out width honoring CRYSTAL_RELAX_THREADS.
int thread_count();

}  // namespace crystal
