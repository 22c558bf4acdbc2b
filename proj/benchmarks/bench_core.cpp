#include <benchmark/benchmark.h>

#include <numbers>

#include "crystal/fem.hpp"
#include "crystal/kinematics.hpp"
#include "crystal/stagger.hpp"
#include "crystal/voigt.hpp"

using namespace crystal;

namespace {

constexpr double kPi = std::numbers::pi;

struct Setup {
  MaterialParams params = MaterialParams::aluminum();
  SlipSystems systems;
  MaterialState state0;
  Vec6 eps_plastic;
  Mat3 F;

  Setup() {
    systems = rotate_and_project(fcc_slip_systems(), {0.25 * kPi, 0.0},
                                 params.elasticity);
    state0 = MaterialState::initial(params);
    F = Mat3::Identity();
    F(2, 2) = 1.002;  // just past yield
    eps_plastic = pade_hencky(green_lagrange(F)).eps;
  }
};

const Setup& setup() {
  static const Setup s;
  return s;
}

}  // namespace

static void BM_pade_hencky(benchmark::State& state) {
  const Vec6 E = green_lagrange(setup().F);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pade_hencky(E));
  }
}
BENCHMARK(BM_pade_hencky);

static void BM_solve_flow(benchmark::State& state) {
  const Setup& s = setup();
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_flow(s.eps_plastic, s.state0.eps_p,
                                        s.state0.xi, 1e-3, s.params,
                                        s.systems));
  }
}
BENCHMARK(BM_solve_flow);

static void BM_relax_integrate(benchmark::State& state) {
  const Setup& s = setup();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        relax_integrate(s.eps_plastic, s.state0, 1e-3, s.params, s.systems,
                        {}, s.F));
  }
}
BENCHMARK(BM_relax_integrate);

static void BM_naive_integrate_2(benchmark::State& state) {
  const Setup& s = setup();
  for (auto _ : state) {
    benchmark::DoNotOptimize(naive_integrate(s.eps_plastic, s.state0, 1e-3,
                                             s.params, s.systems, 2, {},
                                             s.F));
  }
}
BENCHMARK(BM_naive_integrate_2);

static void BM_stress_and_tangent(benchmark::State& state) {
  const Setup& s = setup();
  const StrainState ss = pade_hencky(green_lagrange(s.F));
  const StepResult step =
      relax_integrate(ss.eps, s.state0, 1e-3, s.params, s.systems, {}, s.F);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stress_and_tangent(ss.eps, step.state.eps_p,
                                                step.state.xi, 1e-3, s.params,
                                                s.systems, ss));
  }
}
BENCHMARK(BM_stress_and_tangent);

static void BM_element_force_stiffness(benchmark::State& state) {
  const Setup& s = setup();
  Mesh mesh = make_block_mesh(1, 1, 1, 1e-3, 1e-3, 1e-3);
  prepare_mesh(mesh, s.params);
  Eigen::VectorXd u(24);
  for (int n = 0; n < 8; ++n) {
    u.segment<3>(3 * n) = (s.F - Mat3::Identity()) * mesh.nodes[n];
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(element_force_stiffness(
        mesh, 0, u, 1e-3, s.params, s.systems, RelaxationConfig{}));
  }
}
BENCHMARK(BM_element_force_stiffness);

BENCHMARK_MAIN();
