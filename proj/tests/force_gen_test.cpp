#include <gtest/gtest.h>

#include "springrod/systems.hpp"
#include "test_util.hpp"

using namespace springrod;
using springrod::testing::random_state;
using springrod::testing::random_unit_quat;

TEST(Measure, RestLengthAlongZ) {
  const SpringMeasurement m =
      measure({0, 0, 0}, {0, 0, 0}, {0, 0, 0.637}, {0, 0, 0});
  EXPECT_DOUBLE_EQ(m.ell, 0.637);
  EXPECT_DOUBLE_EQ(m.sdot, 0.0);
  EXPECT_DOUBLE_EQ(m.u.z, 1.0);
}

TEST(Measure, AxialRelativeVelocityProjectsFully) {
  const SpringMeasurement m =
      measure({0, 0, 0}, {0, 0, -0.3}, {0, 0, 1}, {0, 0, 0.4});
  EXPECT_NEAR(m.sdot, 0.7, 1e-15);
}

TEST(Measure, PerpendicularRelativeVelocityProjectsToZero) {
  const SpringMeasurement m =
      measure({0, 0, 0}, {0, 0, 0}, {0, 0, 1}, {2.5, -1.0, 0});
  EXPECT_DOUBLE_EQ(m.sdot, 0.0);
}

TEST(Measure, CoincidentEndpointsThrow) {
  EXPECT_THROW(measure({1, 2, 3}, {}, {1, 2, 3}, {}, 5), DegenerateSpringError);
  try {
    measure({1, 2, 3}, {}, {1, 2, 3}, {}, 5);
  } catch (const DegenerateSpringError& e) {
    EXPECT_EQ(e.spring_index, 5);
  }
}

TEST(ScalarForce, ZeroAtRest) {
  EXPECT_DOUBLE_EQ(
      scalar_force({0.637, 0.0, {0, 0, 1}}, {100.0, 1.0, 0.637}, false), 0.0);
}

TEST(ScalarForce, HookePlusDamping) {
  // K=100, c=1, ell-L0 = 0.1, sdot = 0.2 -> 10.2
  EXPECT_NEAR(scalar_force({0.737, 0.2, {0, 0, 1}}, {100.0, 1.0, 0.637}, false),
              10.2, 1e-12);
}

TEST(ScalarForce, CableModeClampsCompression) {
  EXPECT_DOUBLE_EQ(
      scalar_force({0.5, 0.0, {0, 0, 1}}, {100.0, 1.0, 0.637}, true), 0.0);
}

TEST(ScalarForce, CableModeIsClampedSpringPointwise) {
  CounterRng rng(21, 0);
  const SpringParams p{80.0, 0.7, 0.9};
  for (int i = 0; i < 200; ++i) {
    const SpringMeasurement m{rng.uniform(0.2, 1.6), rng.normal(),
                              {0, 0, 1}};
    const double spring = scalar_force(m, p, false);
    EXPECT_DOUBLE_EQ(scalar_force(m, p, true), std::max(0.0, spring));
  }
}

TEST(ScalarForce, LinearInStiffnessAndDamping) {
  const SpringMeasurement m{0.8, -0.3, {0, 1, 0}};
  const double base = scalar_force(m, {0.0, 0.0, 0.5}, false);
  EXPECT_DOUBLE_EQ(base, 0.0);
  const double fk = scalar_force(m, {1.0, 0.0, 0.5}, false);
  const double fc = scalar_force(m, {0.0, 1.0, 0.5}, false);
  for (double k : {0.5, 2.0, 7.0})
    for (double c : {0.1, 3.0})
      EXPECT_NEAR(scalar_force(m, {k, c, 0.5}, false), k * fk + c * fc, 1e-12);
}

TEST(EndpointForces, ZeroForceGivesZeroVectors) {
  const auto [fa, fb] = endpoint_forces({1.0, 0.0, {0, 0, 1}}, 0.0);
  EXPECT_DOUBLE_EQ(norm(fa), 0.0);
  EXPECT_DOUBLE_EQ(norm(fb), 0.0);
}

TEST(EndpointForces, TensionPullsEndpointsTogether) {
  const auto [fa, fb] = endpoint_forces({1.0, 0.0, {0, 0, 1}}, 10.0);
  EXPECT_DOUBLE_EQ(fa.z, 10.0);
  EXPECT_DOUBLE_EQ(fb.z, -10.0);
}

TEST(EndpointForces, NewtonThirdLawExact) {
  CounterRng rng(22, 0);
  for (int i = 0; i < 100; ++i) {
    const Vec3 u = rng.unit_vec3();
    const auto [fa, fb] = endpoint_forces({1.0, 0.0, u}, rng.normal() * 20.0);
    EXPECT_EQ(fa.x + fb.x, 0.0);
    EXPECT_EQ(fa.y + fb.y, 0.0);
    EXPECT_EQ(fa.z + fb.z, 0.0);
  }
}

TEST(AllSpringForces, RestStateGivesZero) {
  // two-anchor element placed exactly at spring rest lengths
  SystemSetup sys = make_simple_element();
  Topology& topo = sys.topology;
  topo.gravity = {0, 0, 0};
  // anchors directly above the endpoints, springs vertical at rest length
  topo.springs[0].a = EndpointRef::anchor({0.5, 0, 0.9});
  topo.springs[1].a = EndpointRef::anchor({-0.5, 0, 0.9});
  const ParamSet params = simple_element_true_params();  // L0 = 0.9
  const auto forces =
      all_spring_forces(topo, params.springs, sys.nominal_states);
  EXPECT_NEAR(norm(forces[0].plus), 0.0, 1e-12);
  EXPECT_NEAR(norm(forces[0].minus), 0.0, 1e-12);
}

TEST(AllSpringForces, MatchesHandComposedTwoSpringElement) {
  const SystemSetup sys = make_simple_element();
  const ParamSet params = simple_element_true_params();
  CounterRng rng(23, 0);
  std::vector<RodState> states{random_state(rng, 0.2, 0.5)};
  states[0].q = normalized(rng.jitter_quat(0.3) * sys.nominal_states[0].q);
  const auto forces = all_spring_forces(sys.topology, params.springs, states);

  Vec3 expected_plus, expected_minus;
  for (const SpringDef& s : sys.topology.springs) {
    const auto [pa, va] = resolve_endpoint(sys.topology, s.a, states);
    const auto [pb, vb] = resolve_endpoint(sys.topology, s.b, states);
    const SpringMeasurement m = measure(pa, va, pb, vb);
    const double f = scalar_force(m, params.springs[0], false);
    // b side is the rod end; anchor side force is discarded
    const Vec3 fb = -f * m.u;
    if (s.b.end == End::Plus)
      expected_plus += fb;
    else
      expected_minus += fb;
  }
  EXPECT_NEAR(norm(forces[0].plus - expected_plus), 0.0, 1e-14);
  EXPECT_NEAR(norm(forces[0].minus - expected_minus), 0.0, 1e-14);
}

TEST(AllSpringForces, NewtonThirdLawOverRodRodSprings) {
  // no anchors: total spring force over all rods must vanish
  const SystemSetup sys = make_icosahedron();
  const ParamSet params = icosahedron_true_params();
  CounterRng rng(24, 0);
  std::vector<RodState> states = sys.nominal_states;
  for (RodState& s : states) {
    s.p += rng.normal_vec3(0.05);
    s.v = rng.normal_vec3(0.2);
  }
  const auto forces = all_spring_forces(sys.topology, params.springs, states);
  Vec3 total;
  for (const RodEndForces& f : forces) total += f.plus + f.minus;
  EXPECT_NEAR(norm(total), 0.0, 1e-12);
}

TEST(AllSpringForces, FrameInvariance) {
  const SystemSetup sys = make_icosahedron();
  const ParamSet params = icosahedron_true_params();
  CounterRng rng(25, 0);
  std::vector<RodState> states = sys.nominal_states;
  for (RodState& s : states) {
    s.p += rng.normal_vec3(0.05);
    s.v = rng.normal_vec3(0.2);
    s.w = rng.normal_vec3(0.2);
  }
  const auto base = all_spring_forces(sys.topology, params.springs, states);

  const Quat R = random_unit_quat(rng);
  std::vector<RodState> rotated(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    rotated[i].p = rotate(R, states[i].p);
    rotated[i].v = rotate(R, states[i].v);
    rotated[i].q = normalized(R * states[i].q);
    rotated[i].w = rotate(R, states[i].w);
  }
  const auto turned =
      all_spring_forces(sys.topology, params.springs, rotated);
  double scale = 0.0;
  for (const auto& f : base)
    scale = std::max({scale, norm(f.plus), norm(f.minus)});
  for (std::size_t i = 0; i < base.size(); ++i) {
    EXPECT_LE(norm(turned[i].plus - rotate(R, base[i].plus)), 1e-10 * scale);
    EXPECT_LE(norm(turned[i].minus - rotate(R, base[i].minus)), 1e-10 * scale);
  }
}

TEST(AllSpringForces, DegenerateSpringCarriesIndex) {
  Topology topo;
  topo.rods = {RodGeometry{1.0, {0, 0, 1}}};
  topo.springs.push_back({EndpointRef::anchor({0, 0, 0.5}),
                          EndpointRef::rod_end(0, End::Plus), 0});
  const std::vector<RodState> states(1);  // plus end exactly at the anchor
  const std::vector<SpringParams> params{{10.0, 0.1, 1.0}};
  try {
    all_spring_forces(topo, params, states);
    FAIL() << "expected DegenerateSpringError";
  } catch (const DegenerateSpringError& e) {
    EXPECT_EQ(e.spring_index, 0);
  }
}
