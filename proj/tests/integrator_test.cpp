#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "springrod/systems.hpp"
#include "test_util.hpp"

using namespace springrod;

namespace {

/// 1D harmonic oscillator realized as a rod hanging on one axial spring:
/// anchor above the Plus end, force purely along the rod axis, so the COM
/// obeys M z'' = -K (z - z_eq) exactly (no gravity, no damping by default).
struct Oscillator {
  Topology topo;
  ParamSet params;
  std::vector<RodState> initial;
  double omega;
  double amplitude;

  // analytic COM height: z(t) = -A cos(omega t)
  double exact_z(double t) const { return -amplitude * std::cos(omega * t); }
};

Oscillator make_oscillator(double K, double M, double dt, double amplitude,
                           double damping = 0.0) {
  Oscillator osc;
  osc.topo.dt = dt;
  osc.topo.gravity = {0, 0, 0};
  osc.topo.rods = {RodGeometry{0.2, {0, 0, 1}}};
  osc.topo.springs.push_back({EndpointRef::anchor({0, 0, 1.1}),
                              EndpointRef::rod_end(0, End::Plus), 0});
  osc.params.springs = {{K, damping, 1.0}};
  osc.params.rods = {{M, thin_rod_inertia(M, 0.2)}};
  RodState s;
  s.p = {0, 0, -amplitude};
  osc.initial = {s};
  osc.omega = std::sqrt(K / M);
  osc.amplitude = amplitude;
  return osc;
}

double oscillator_energy(const Oscillator& osc, const RodState& s) {
  const double ext = -s.p.z;  // spring extension relative to rest
  return 0.5 * osc.params.rods[0].M * norm_squared(s.v) +
         0.5 * osc.params.springs[0].K * ext * ext;
}

}  // namespace

TEST(Step, FreeMotionKeepsVelocity) {
  RodState s;
  s.p = {1, 0, 0};
  s.v = {0.5, 0, 0};
  s.w = {0, 0.2, 0};
  const RodState next = step(s, {}, 0.01);
  EXPECT_DOUBLE_EQ(next.v.x, 0.5);
  EXPECT_DOUBLE_EQ(next.p.x, 1.005);
  EXPECT_DOUBLE_EQ(next.w.y, 0.2);
  EXPECT_NEAR(norm(next.q), 1.0, 1e-15);
}

TEST(Step, GravityUpdatesVelocityBeforePosition) {
  RodState s;
  const RodState next = step(s, {{0, 0, -9.81}, {}}, 0.001);
  EXPECT_DOUBLE_EQ(next.v.z, -0.00981);
  EXPECT_DOUBLE_EQ(next.p.z, -0.00981 * 0.001);  // semi-implicit: p uses v'
}

TEST(Step, QuaternionNormStaysUnit) {
  CounterRng rng(41, 0);
  RodState s = springrod::testing::random_state(rng);
  for (int i = 0; i < 1000; ++i) {
    s = step(s, {rng.normal_vec3(1.0), rng.normal_vec3(2.0)}, 0.01);
    ASSERT_NEAR(norm(s.q), 1.0, 1e-12);
  }
}

TEST(Step, ConstantSpinMatchesAxisAngleClosedForm) {
  RodState s;
  s.w = {0, 0, std::numbers::pi};
  const double dt = 1e-5;
  for (int i = 0; i < 100000; ++i) s = step(s, {}, dt);
  const Quat expected = from_axis_angle({0, 0, 1}, std::numbers::pi);
  // geodesic angle between accumulated and closed-form rotation
  const double angle =
      2.0 * std::acos(std::min(1.0, std::abs(dot(s.q, expected))));
  EXPECT_LE(angle, 1e-3);
}

TEST(Rollout, ZeroStepsKeepsInitialStateOnly) {
  const Oscillator osc = make_oscillator(4.0, 1.0, 1e-3, 0.1);
  const Trajectory traj =
      rollout(osc.topo, osc.params, osc.initial, {}, 0);
  EXPECT_EQ(traj.states.size(), 1u);
  EXPECT_EQ(traj.n_transitions(), 0u);
  EXPECT_DOUBLE_EQ(traj.states[0][0].p.z, -0.1);
}

TEST(Rollout, HarmonicOscillatorFrequency) {
  // K = 4 pi^2, M = 1 -> T = 1 s; dt = T/1000
  const Oscillator osc =
      make_oscillator(4.0 * std::numbers::pi * std::numbers::pi, 1.0, 1e-3, 0.1);
  const long n = 10000;  // 10 periods
  const Trajectory traj = rollout(osc.topo, osc.params, osc.initial, {}, n);
  int crossings = 0;
  for (std::size_t t = 1; t < traj.states.size(); ++t)
    if ((traj.states[t - 1][0].p.z < 0.0) != (traj.states[t][0].p.z < 0.0))
      ++crossings;
  const double duration = static_cast<double>(n) * osc.topo.dt;
  const double freq = static_cast<double>(crossings) / (2.0 * duration);
  EXPECT_NEAR(freq, 1.0, 0.01);
}

TEST(Rollout, FirstOrderConvergenceOnOscillator) {
  const double K = 4.0 * std::numbers::pi * std::numbers::pi;
  auto rms_error = [&](double dt) {
    const Oscillator osc = make_oscillator(K, 1.0, dt, 0.1);
    const long n = std::lround(1.0 / dt);
    const Trajectory traj = rollout(osc.topo, osc.params, osc.initial, {}, n);
    double sum = 0.0;
    for (long t = 1; t <= n; ++t) {
      const double err = traj.states[static_cast<std::size_t>(t)][0].p.z -
                         osc.exact_z(static_cast<double>(t) * dt);
      sum += err * err;
    }
    return std::sqrt(sum / static_cast<double>(n));
  };
  const double e1 = rms_error(1e-3);
  const double e2 = rms_error(5e-4);
  const double e3 = rms_error(2.5e-4);
  EXPECT_NEAR(e1 / e2, 2.0, 0.2);
  EXPECT_NEAR(e2 / e3, 2.0, 0.2);
}

TEST(Rollout, BoundedEnergyDriftUndamped) {
  const Oscillator osc =
      make_oscillator(4.0 * std::numbers::pi * std::numbers::pi, 1.0, 1e-3, 0.1);
  const Trajectory traj =
      rollout(osc.topo, osc.params, osc.initial, {}, 100000);
  double early_max = 0.0, running_max = 0.0;
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    const double e = oscillator_energy(osc, traj.states[t][0]);
    running_max = std::max(running_max, e);
    if (t == 1000) early_max = running_max;  // max over the first period
  }
  EXPECT_LE(running_max / early_max, 1.01);
}

TEST(Rollout, IcosahedronStaysFiniteAndUnitNorm) {
  const SystemSetup sys = make_icosahedron();
  const ParamSet params = icosahedron_true_params();
  CounterRng rng(42, 0);
  std::vector<RodState> initial = sys.nominal_states;
  for (RodState& s : initial) {
    s.p += rng.normal_vec3(0.05);
    s.v = rng.normal_vec3(0.1);
  }
  const Trajectory traj = rollout(sys.topology, params, initial, {}, 736);
  EXPECT_EQ(traj.states.size(), 737u);
  for (const auto& states : traj.states)
    for (const RodState& s : states) {
      ASSERT_TRUE(is_finite(s));
      ASSERT_NEAR(norm(s.q), 1.0, 1e-9);
    }
}

TEST(Rollout, DeterministicBitwise) {
  const SystemSetup sys = make_icosahedron();
  const ParamSet params = icosahedron_true_params();
  CounterRng rng(43, 0);
  std::vector<RodState> initial = sys.nominal_states;
  for (RodState& s : initial) s.p += rng.normal_vec3(0.03);
  const Trajectory a = rollout(sys.topology, params, initial, {}, 200);
  const Trajectory b = rollout(sys.topology, params, initial, {}, 200);
  for (std::size_t t = 0; t < a.states.size(); ++t)
    for (std::size_t i = 0; i < a.states[t].size(); ++i) {
      EXPECT_EQ(a.states[t][i].p.x, b.states[t][i].p.x);
      EXPECT_EQ(a.states[t][i].v.y, b.states[t][i].v.y);
      EXPECT_EQ(a.states[t][i].q.w, b.states[t][i].q.w);
      EXPECT_EQ(a.states[t][i].w.z, b.states[t][i].w.z);
    }
}

TEST(Rollout, InstabilityRaisesNonFiniteWithStepIndex) {
  // stiffness far beyond the stability limit at this dt
  const Oscillator osc = make_oscillator(1e12, 1.0, 1e-2, 0.1);
  try {
    rollout(osc.topo, osc.params, osc.initial, {}, 10000);
    FAIL() << "expected NonFiniteStateError";
  } catch (const NonFiniteStateError& e) {
    EXPECT_GT(e.step, 0);
  }
}
