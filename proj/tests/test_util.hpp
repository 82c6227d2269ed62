#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "springrod/rng.hpp"
#include "springrod/springrod.hpp"

namespace springrod::testing {

/// Relative error with an absolute floor, so near-zero pairs compare sanely.
inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline Quat random_unit_quat(CounterRng& rng) {
  Quat q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
  return normalized(q);
}

inline RodState random_state(CounterRng& rng, double pos_scale = 1.0,
                             double vel_scale = 0.5) {
  RodState s;
  s.p = rng.normal_vec3(pos_scale);
  s.v = rng.normal_vec3(vel_scale);
  s.q = random_unit_quat(rng);
  s.w = rng.normal_vec3(vel_scale);
  return s;
}

/// Total kinetic energy under the scalar-inertia rod model.
inline double kinetic_energy(const ParamSet& params,
                             std::span<const RodState> states) {
  double e = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const RodParams& rp = params.rod(i);
    e += 0.5 * rp.M * norm_squared(states[i].v) +
         0.5 * rp.I * norm_squared(states[i].w);
  }
  return e;
}

/// Damped rollout until the kinetic energy falls below ke_tol and the net
/// force per rod balances gravity within force_tol (checked every `chunk`
/// steps). Returns the last states if max_steps elapse first.
std::vector<RodState> settle(const Topology& topo, const ParamSet& params,
                             std::vector<RodState> states, double ke_tol,
                             double force_tol, long max_steps,
                             long chunk = 5000);

/// Net spring force residual per rod against gravity: max_i |F_i + M g|.
double max_equilibrium_residual(const Topology& topo, const ParamSet& params,
                                std::span<const RodState> states);

/// Icosahedron hung from four tilted anchor cables (their own parameter
/// group), every rigid mode damped to first order. Settles to a genuine
/// static equilibrium under gravity.
struct AnchoredSystem {
  Topology topology;
  ParamSet params;
  std::vector<RodState> initial;
};
AnchoredSystem make_anchored_icosahedron();

/// One rod held by four stretched springs in general position, no gravity:
/// settles quickly to a genuinely prestressed static equilibrium (nonzero
/// tensions, zero net force).
AnchoredSystem make_prestressed_element();

/// Small random spring-rod system for gradient checks: 1-3 rods, rod-rod and
/// anchor springs, optional controls, well-separated geometry.
struct RandomSystem {
  Topology topology;
  ParamSet params;
  std::vector<RodState> states;
  std::vector<Vec3> commands;
  std::vector<RodState> truth;  ///< plausible next-state target
};
RandomSystem random_system(CounterRng& rng, bool with_controls,
                           bool cable_mode = false);

/// Central finite-difference gradient of the one-step loss with respect to
/// the flattened parameter vector.
std::vector<double> fd_param_gradient(const Topology& topo,
                                      const ParamSet& params,
                                      std::span<const RodState> states,
                                      std::span<const Vec3> commands,
                                      std::span<const RodState> truth,
                                      double step_scale = 1e-6);

}  // namespace springrod::testing
