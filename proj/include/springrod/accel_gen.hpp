#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "springrod/force_gen.hpp"
#include "springrod/params.hpp"

namespace springrod {

/// A commanded control force: raw command vector and the scale that converts
/// it to Newtons (actual force = h·u).
struct ControlInput {
  Vec3 u;
  double h = 1.0;
};

struct Accel {
  Vec3 a;      ///< m/s^2, world frame
  Vec3 alpha;  ///< rad/s^2, world frame
};

/// Linear and angular acceleration of one rod from the forces at its two
/// endpoints plus one control force:
///   a     = (f_plus + f_minus + f_u)/M + gravity
///   tau   = r x f_plus - r x f_minus + r_u x f_u
///   alpha = tau / I
/// r is the world-frame half-length vector of the Plus end, r_u the control
/// arm in world frame.
inline Accel rod_acceleration(const Vec3& f_plus, const Vec3& f_minus,
                              const Vec3& f_u, const Vec3& r_w,
                              const Vec3& r_u_w, const RodParams& params,
                              const Vec3& gravity) {
  const Vec3 a = (f_plus + f_minus + f_u) / params.M + gravity;
  const Vec3 tau = cross(r_w, f_plus) + cross(-r_w, f_minus) + cross(r_u_w, f_u);
  return {a, tau / params.I};
}

/// Inertia of a uniform thin rod about a perpendicular axis through its
/// center: M L^2 / 12.
inline double thin_rod_inertia(double M, double L) {
  if (!(M > 0.0) || !(L > 0.0))
    throw std::invalid_argument("thin_rod_inertia requires M > 0 and L > 0");
  return M * L * L / 12.0;
}

/// Total non-gravitational force and torque on one rod about its COM.
struct RodWrench {
  Vec3 force;
  Vec3 torque;
};

/// Aggregates spring endpoint forces and control forces into per-rod
/// wrenches; a tensegrity rod end may carry several cables, so the two-end
/// picture generalizes by summation.
inline std::vector<RodWrench> system_wrenches(
    const Topology& topo, const ParamSet& params,
    std::span<const RodState> states, std::span<const RodEndForces> forces,
    std::span<const Vec3> commands) {
  const std::size_t n = topo.rods.size();
  std::vector<RodWrench> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 r_w = half_length_vector(states[i], topo.rods[i]);
    out[i].force = forces[i].plus + forces[i].minus;
    out[i].torque = cross(r_w, forces[i].plus) - cross(r_w, forces[i].minus);
  }
  for (std::size_t k = 0; k < topo.controls.size(); ++k) {
    const ControlDef& ctl = topo.controls[k];
    const Vec3 u = k < commands.size() ? commands[k] : Vec3{};
    const double h = params.control_scale[static_cast<std::size_t>(ctl.group)];
    const Vec3 f_u = h * u;
    const auto i = static_cast<std::size_t>(ctl.rod_index);
    const Vec3 arm_w = rotate(states[i].q, topo.control_arm_body(ctl));
    out[i].force += f_u;
    out[i].torque += cross(arm_w, f_u);
  }
  return out;
}

/// Accelerations of every rod given accumulated spring forces and the
/// per-control-channel commands (one entry per ControlDef; empty means no
/// control forces this step).
inline std::vector<Accel> system_accelerations(
    const Topology& topo, const ParamSet& params,
    std::span<const RodState> states, std::span<const RodEndForces> forces,
    std::span<const Vec3> commands) {
  const std::vector<RodWrench> wrenches =
      system_wrenches(topo, params, states, forces, commands);
  std::vector<Accel> out(topo.rods.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const RodParams& rp = params.rod(i);
    out[i] = {wrenches[i].force / rp.M + topo.gravity,
              wrenches[i].torque / rp.I};
  }
  return out;
}

}  // namespace springrod
