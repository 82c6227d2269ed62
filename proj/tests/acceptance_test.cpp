// Acceptance suite: one test per criterion, one PASS/FAIL line each.
// The bundled icosahedron oracle dataset (1000 train + 100 test trajectories
// of 736 steps at dt = 1e-3) is generated once and shared.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "springrod/io/dataset.hpp"
#include "springrod/systems.hpp"
#include "test_util.hpp"

using namespace springrod;
using namespace springrod::sysid;
using namespace springrod::testing;

namespace {

constexpr std::uint64_t kDatasetSeed = 42;
constexpr long kTrainTraj = 1000;
constexpr long kTestTraj = 100;
constexpr long kSteps = 736;

struct Shared {
  SystemSetup sys = make_icosahedron();
  ParamSet truth = icosahedron_true_params();
  std::map<std::string, double> truth_composites;
  std::vector<Trajectory> train;
  std::vector<Trajectory> test;

  Shared() {
    truth_composites = composites_to_map(
        sys.topology, composites_from_params(sys.topology, truth));
    OracleSpec spec;
    spec.topology = sys.topology;
    spec.true_params = truth;
    spec.nominal_states = sys.nominal_states;
    spec.seed = kDatasetSeed;
    train = generate_dataset(spec, kTrainTraj, kSteps);
    test = generate_dataset(spec, kTestTraj, kSteps, kTrainTraj);
  }
};

const Shared& shared() {
  static const Shared data;
  return data;
}

void report(int criterion, const std::string& detail) {
  std::printf("[criterion %d] %s - %s\n", criterion,
              ::testing::Test::HasFailure() ? "FAIL" : "PASS",
              detail.c_str());
  std::fflush(stdout);
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

TEST(Acceptance, C1_DataEfficiency73Steps) {
  const Shared& data = shared();
  std::vector<double> errors;
  std::uint64_t samples = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    IdentifyOptions opts;
    opts.fraction = 1e-4;
    opts.seed = seed;
    const IdentifiedParams id = identify(data.sys.topology, data.train, opts);
    samples = id.n_samples;
    errors.push_back(
        max_relative_composite_error(id.composites, data.truth_composites));
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const double med = median(errors);
  EXPECT_GE(samples, 70u);
  EXPECT_LE(samples, 75u);
  EXPECT_LE(med, 1e-5);
  EXPECT_LT(elapsed, 60.0);

  const IdentifiedParams full = identify(data.sys.topology, data.train);
  const double full_err =
      max_relative_composite_error(full.composites, data.truth_composites);
  EXPECT_LE(full_err, 1e-10);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "median rel err over 10 seeds at fraction 1e-4 (%llu "
                "transitions): %.3e, 10 runs in %.2f s; full-fraction err "
                "%.3e",
                static_cast<unsigned long long>(samples), med, elapsed,
                full_err);
  report(1, buf);
}

TEST(Acceptance, C2_SweepFractionsAllBelow1em5) {
  const Shared& data = shared();
  std::string detail;
  for (double fraction : {0.1, 0.01, 0.001, 0.0001}) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      IdentifyOptions opts;
      opts.fraction = fraction;
      opts.seed = seed;
      const IdentifiedParams id =
          identify(data.sys.topology, data.train, opts);
      worst = std::max(worst, max_relative_composite_error(
                                  id.composites, data.truth_composites));
    }
    EXPECT_LE(worst, 1e-5) << "fraction " << fraction;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g:%.3g ", fraction, worst);
    detail += buf;
  }
  report(2, "worst rel err over 5 seeds per fraction: " + detail);
}

TEST(Acceptance, C3_ControlScalarGeneralization) {
  const SystemSetup sys =
      make_icosahedron(1.04, 1e-3, {0, 0, -9.81}, /*with_controls=*/true);
  const ParamSet truth = icosahedron_true_params(1.04, true);  // h = 2.5
  OracleSpec spec;
  spec.topology = sys.topology;
  spec.true_params = truth;
  spec.nominal_states = sys.nominal_states;
  spec.control = {true, 1.0, 50};
  spec.seed = 7;
  const auto fit_data = generate_dataset(spec, 3, 20000);
  const Trajectory holdout = generate_trajectory(spec, 100, 2000);

  IdentifiedParams frozen;
  frozen.composites = composites_to_map(
      sys.topology, composites_from_params(sys.topology, truth));
  frozen.decomposed = truth;
  const ControlFitResult fit =
      finetune_control_scale(sys.topology, frozen, fit_data);
  ASSERT_TRUE(fit.h.has_value());
  const double h_err = rel_err((*fit.h)[0], 2.5);
  EXPECT_LE(h_err, 1e-6);

  // engine = frozen true composites + the fitted control scale
  CompositeCoefficients comps =
      composites_from_params(sys.topology, truth);
  comps.ctl_block(0, 0).h_m = (*fit.h)[0] / truth.rods[0].M;
  comps.ctl_block(0, 0).h_i = (*fit.h)[0] / truth.rods[0].I;
  const Trajectory replay = rollout_composites(
      sys.topology, comps, holdout.states[0], holdout.commands, 2000);
  double worst_mse = 0.0;
  for (std::size_t t = 1; t < replay.states.size(); ++t) {
    const double mse = step_loss(replay.states[t], holdout.states[t]);
    ASSERT_TRUE(std::isfinite(mse));
    worst_mse = std::max(worst_mse, mse);
  }
  EXPECT_LE(worst_mse, 1e-6);
  char buf[144];
  std::snprintf(buf, sizeof buf,
                "h rel err %.3e from 3x20000 perturbed steps; worst "
                "per-scalar MSE over a 2000-step rollout %.3e",
                h_err, worst_mse);
  report(3, buf);
}

TEST(Acceptance, C4_KoopmanComparisonAtTinyFraction) {
  const Shared& data = shared();
  const Topology& topo = data.sys.topology;
  IdentifyOptions opts;
  opts.fraction = 1e-4;
  opts.seed = 0;
  const IdentifiedParams id = identify(topo, data.train, opts);
  const CompositeCoefficients comps =
      composites_from_map(topo, id.composites, false);
  const double modular_mse = one_step_mse(
      data.test, [&](std::span<const RodState> s, std::span<const Vec3> u) {
        return predict_step_composites(topo, comps, s, u);
      });
  const KoopmanModel koopman =
      koopman_fit(topo, data.train, /*degree=*/2, 1e-4, /*seed=*/0);
  const double koopman_mse = one_step_mse(
      data.test, [&](std::span<const RodState> s, std::span<const Vec3>) {
        return koopman.predict_step(topo, s);
      });
  EXPECT_TRUE(std::isfinite(koopman_mse));
  EXPECT_GE(koopman_mse, modular_mse);
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "one-step test MSE: modular %.3e vs koopman(deg 2) %.3e",
                modular_mse, koopman_mse);
  report(4, buf);
}

TEST(Acceptance, C5_IntegratorFirstOrderConvergence) {
  const double K = 4.0 * std::numbers::pi * std::numbers::pi;  // T = 1 s
  auto rms_error = [&](double dt) {
    Topology topo;
    topo.dt = dt;
    topo.rods = {RodGeometry{0.2, {0, 0, 1}}};
    topo.springs.push_back({EndpointRef::anchor({0, 0, 1.1}),
                            EndpointRef::rod_end(0, End::Plus), 0});
    ParamSet params;
    params.springs = {{K, 0.0, 1.0}};
    params.rods = {{1.0, thin_rod_inertia(1.0, 0.2)}};
    RodState s0;
    s0.p = {0, 0, -0.1};
    const long n = std::lround(1.0 / dt);
    const Trajectory traj = rollout(topo, params, {&s0, 1}, {}, n);
    double sum = 0.0;
    for (long t = 1; t <= n; ++t) {
      const double exact =
          -0.1 * std::cos(std::sqrt(K) * static_cast<double>(t) * dt);
      const double err =
          traj.states[static_cast<std::size_t>(t)][0].p.z - exact;
      sum += err * err;
    }
    return std::sqrt(sum / static_cast<double>(n));
  };
  const double e1 = rms_error(1e-3);
  const double e2 = rms_error(5e-4);
  const double e3 = rms_error(2.5e-4);
  EXPECT_NEAR(e1 / e2, 2.0, 0.2);
  EXPECT_NEAR(e2 / e3, 2.0, 0.2);
  char buf[96];
  std::snprintf(buf, sizeof buf,
                "halving ratios %.3f and %.3f (target 2 +/- 0.2)", e1 / e2,
                e2 / e3);
  report(5, buf);
}

TEST(Acceptance, C6_GradientCorrectness) {
  CounterRng rng(2024, 0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const RandomSystem sys = random_system(rng, trial % 2 == 1);
    const std::vector<double> analytic =
        param_gradient(sys.topology, sys.params, sys.states, sys.commands,
                       sys.truth)
            .flatten();
    const std::vector<double> fd = fd_param_gradient(
        sys.topology, sys.params, sys.states, sys.commands, sys.truth);
    double scale = 0.0;
    for (double v : analytic) scale = std::max(scale, std::abs(v));
    // floor absorbs finite-difference noise on structurally-zero components
    for (std::size_t j = 0; j < analytic.size(); ++j) {
      const double err = std::abs(analytic[j] - fd[j]) /
                         std::max({std::abs(analytic[j]), std::abs(fd[j]),
                                   1e-7 * (1.0 + scale)});
      worst = std::max(worst, err);
      EXPECT_LE(err, 1e-5) << "config " << trial << " param " << j;
    }
  }

  // gradient at the true parameters on oracle transitions
  const Shared& data = shared();
  double worst_grad = 0.0;
  const Trajectory& traj = data.train[0];
  for (std::size_t t = 0; t < 50; ++t) {
    const ParamGradient g =
        param_gradient(data.sys.topology, data.truth, traj.states[t], {},
                       traj.states[t + 1]);
    for (double v : g.flatten()) worst_grad = std::max(worst_grad, std::abs(v));
  }
  EXPECT_LE(worst_grad, 1e-10);
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "worst FD mismatch %.3e over 100 configs; |grad| at truth %.3e",
                worst, worst_grad);
  report(6, buf);
}

TEST(Acceptance, C7_OlsGradientDescentAgreement) {
  const SystemSetup sys = make_simple_element();  // 1 rod, 2 springs
  const ParamSet truth = simple_element_true_params();
  OracleSpec spec;
  spec.topology = sys.topology;
  spec.true_params = truth;
  spec.nominal_states = sys.nominal_states;
  spec.init = {0.05, 0.1, 0.3, 0.1};
  spec.seed = 11;
  const auto dataset = generate_dataset(spec, 2, 50);
  const auto transitions = collect_transitions(dataset);

  ParamSet init = truth;  // anchor fixed (rods, rest length frozen)
  init.springs[0].K *= 1.1;
  init.springs[0].c *= 1.1;
  GdOptions opts;
  opts.lr = 2e5;
  opts.n_iters = 10000;
  opts.train_rods = false;
  const GdResult gd =
      fit_gradient_descent(sys.topology, transitions, init, opts);

  const IdentifiedParams ols = identify(sys.topology, dataset);
  const auto gd_composites = composites_to_map(
      sys.topology, composites_from_params(sys.topology, gd.params));
  const double err =
      max_relative_composite_error(gd_composites, ols.composites);
  EXPECT_LE(err, 1e-6);
  char buf[96];
  std::snprintf(buf, sizeof buf,
                "converged GD vs closed-form OLS composite mismatch: %.3e",
                err);
  report(7, buf);
}

TEST(Acceptance, C8_InvariantSuite) {
  const Shared& data = shared();
  CounterRng rng(99, 0);

  // quaternion norms along a rollout
  const Trajectory& traj = data.train[1];
  for (std::size_t t = 0; t < traj.states.size(); t += 50)
    for (const RodState& s : traj.states[t])
      EXPECT_NEAR(norm(s.q), 1.0, 1e-9);

  // Newton's third law, exact
  for (int i = 0; i < 50; ++i) {
    const auto [fa, fb] =
        endpoint_forces({1.0, 0.0, rng.unit_vec3()}, 30.0 * rng.normal());
    EXPECT_EQ(fa.x, -fb.x);
    EXPECT_EQ(fa.y, -fb.y);
    EXPECT_EQ(fa.z, -fb.z);
  }

  // torque perpendicularity for endpoint forces
  for (int i = 0; i < 50; ++i) {
    const Vec3 r = rng.normal_vec3(0.5);
    const Accel acc = rod_acceleration(rng.normal_vec3(5.0),
                                       rng.normal_vec3(5.0), {}, r, r,
                                       {1.0, 0.2}, {});
    EXPECT_LE(std::abs(dot(acc.alpha, r)),
              1e-12 * norm(acc.alpha) * norm(r) + 1e-15);
  }

  // frame invariance of spring forces
  {
    std::vector<RodState> states = data.sys.nominal_states;
    for (RodState& s : states) {
      s.p += rng.normal_vec3(0.05);
      s.v = rng.normal_vec3(0.2);
    }
    const auto base =
        all_spring_forces(data.sys.topology, data.truth.springs, states);
    const Quat R = random_unit_quat(rng);
    std::vector<RodState> rotated(states.size());
    for (std::size_t i = 0; i < states.size(); ++i)
      rotated[i] = {rotate(R, states[i].p), rotate(R, states[i].v),
                    normalized(R * states[i].q), rotate(R, states[i].w)};
    const auto turned =
        all_spring_forces(data.sys.topology, data.truth.springs, rotated);
    double scale = 0.0;
    for (const auto& f : base) scale = std::max(scale, norm(f.plus));
    for (std::size_t i = 0; i < base.size(); ++i)
      EXPECT_LE(norm(turned[i].plus - rotate(R, base[i].plus)), 1e-10 * scale);
  }

  // lossless trajectory round trip
  {
    const std::filesystem::path file =
        std::filesystem::temp_directory_path() / "springrod_acceptance.jsonl";
    Trajectory small;
    small.dt = traj.dt;
    small.states.assign(traj.states.begin(), traj.states.begin() + 20);
    io::write_trajectory(small, file);
    const Trajectory back = io::read_trajectory(file);
    for (std::size_t t = 0; t < small.states.size(); ++t)
      for (std::size_t i = 0; i < small.states[t].size(); ++i) {
        EXPECT_EQ(back.states[t][i].p.x, small.states[t][i].p.x);
        EXPECT_EQ(back.states[t][i].q.w, small.states[t][i].q.w);
      }
    std::filesystem::remove(file);
  }

  // seeded determinism of generation and subsampling
  {
    OracleSpec spec;
    spec.topology = data.sys.topology;
    spec.true_params = data.truth;
    spec.nominal_states = data.sys.nominal_states;
    spec.seed = kDatasetSeed;
    const Trajectory regen = generate_trajectory(spec, 3, 40);
    for (std::size_t t = 0; t < regen.states.size(); ++t)
      for (std::size_t i = 0; i < regen.states[t].size(); ++i)
        EXPECT_EQ(regen.states[t][i].p.x, data.train[3].states[t][i].p.x);
    EXPECT_EQ(sample_indices(736000, 73, 5), sample_indices(736000, 73, 5));
  }

  report(8, "quaternion norms, force pairs, torque perpendicularity, frame "
            "invariance, serialization round trip, seeded determinism");
}
