#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "springrod/engine.hpp"

namespace springrod::sysid {

/// Geometric regression blocks for one rod at one instant. The engine's
/// accelerations are exactly linear in the composite coefficients with these
/// blocks as features:
///
///   a - gravity = sum_g [ (K/M) lin[g][0] + (c/M) lin[g][1]
///                       + (K L0/M) lin[g][2] ]  + sum_k (h/M) ctl_lin[k]
///   alpha       = sum_g [ (K/I) ang[g][0] + (c/I) ang[g][1]
///                       + (K L0/I) ang[g][2] ]  + sum_k (h/I) ctl_ang[k]
///
/// Blocks are sums over the springs of group g attached to this rod of the
/// signed axis direction scaled by the spring length / extension rate / -1,
/// and their lever-arm cross products for the angular equation.
///
/// Cable-mode clamping is not represented; features assume the linear force
/// law everywhere.
struct RodFeatures {
  std::vector<std::array<Vec3, 3>> lin;  ///< per spring group
  std::vector<std::array<Vec3, 3>> ang;  ///< per spring group
  std::vector<Vec3> ctl_lin;             ///< per control group
  std::vector<Vec3> ctl_ang;             ///< per control group
};

inline std::vector<RodFeatures> rod_features(const Topology& topo,
                                             std::span<const RodState> states,
                                             std::span<const Vec3> commands) {
  const std::size_t n = topo.rods.size();
  const auto groups = static_cast<std::size_t>(topo.spring_group_count());
  const auto ctl_groups = static_cast<std::size_t>(topo.control_group_count());
  std::vector<RodFeatures> out(n);
  for (auto& f : out) {
    f.lin.resize(groups);
    f.ang.resize(groups);
    f.ctl_lin.resize(ctl_groups);
    f.ctl_ang.resize(ctl_groups);
  }
  std::vector<Vec3> r_w(n);
  for (std::size_t i = 0; i < n; ++i)
    r_w[i] = half_length_vector(states[i], topo.rods[i]);

  for (std::size_t s = 0; s < topo.springs.size(); ++s) {
    const SpringDef& sd = topo.springs[s];
    const auto [pa, va] = resolve_endpoint(topo, sd.a, states);
    const auto [pb, vb] = resolve_endpoint(topo, sd.b, states);
    const SpringMeasurement m = measure(pa, va, pb, vb, static_cast<int>(s));
    const auto g = static_cast<std::size_t>(sd.group);
    for (int side = 0; side < 2; ++side) {
      const EndpointRef& ref = side == 0 ? sd.a : sd.b;
      if (ref.is_anchor()) continue;
      const double sign = side == 0 ? 1.0 : -1.0;
      const auto i = static_cast<std::size_t>(ref.rod_index);
      const Vec3 lever = ref.end == End::Plus ? r_w[i] : -r_w[i];
      const Vec3 lxu = cross(lever, m.u);
      RodFeatures& f = out[i];
      f.lin[g][0] += (sign * m.ell) * m.u;
      f.lin[g][1] += (sign * m.sdot) * m.u;
      f.lin[g][2] += -sign * m.u;
      f.ang[g][0] += (sign * m.ell) * lxu;
      f.ang[g][1] += (sign * m.sdot) * lxu;
      f.ang[g][2] += -sign * lxu;
    }
  }
  for (std::size_t k = 0; k < topo.controls.size(); ++k) {
    const ControlDef& ctl = topo.controls[k];
    const Vec3 u = k < commands.size() ? commands[k] : Vec3{};
    const auto i = static_cast<std::size_t>(ctl.rod_index);
    const Vec3 arm_w = rotate(states[i].q, topo.control_arm_body(ctl));
    const auto kg = static_cast<std::size_t>(ctl.group);
    out[i].ctl_lin[kg] += u;
    out[i].ctl_ang[kg] += cross(arm_w, u);
  }
  return out;
}

/// Regression targets for one rod over one recorded transition: the exact
/// inverse of the semi-implicit velocity updates,
///   lin = (v1 - v0)/dt - gravity,   ang = (w1 - w0)/dt.
struct RodTargets {
  Vec3 lin;
  Vec3 ang;
};

inline std::vector<RodTargets> transition_targets(
    const Topology& topo, std::span<const RodState> s0,
    std::span<const RodState> s1) {
  std::vector<RodTargets> out(s0.size());
  for (std::size_t i = 0; i < s0.size(); ++i) {
    out[i].lin = (s1[i].v - s0[i].v) / topo.dt - topo.gravity;
    out[i].ang = (s1[i].w - s0[i].w) / topo.dt;
  }
  return out;
}

/// One supervised example: consecutive states and the commands applied
/// between them.
struct Transition {
  std::vector<RodState> s0;
  std::vector<RodState> s1;
  std::vector<Vec3> u;
};

inline std::vector<Transition> collect_transitions(
    std::span<const Trajectory> dataset) {
  std::vector<Transition> out;
  for (const Trajectory& traj : dataset)
    for (std::size_t t = 0; t + 1 < traj.states.size(); ++t)
      out.push_back({traj.states[t], traj.states[t + 1],
                     t < traj.commands.size() ? traj.commands[t]
                                              : std::vector<Vec3>{}});
  return out;
}

/// Features and targets for every rod over one transition.
struct TransitionSample {
  std::vector<RodFeatures> features;
  std::vector<RodTargets> targets;
};

/// Turns a recorded trajectory into per-transition regression samples.
/// Throws InconsistentTrajectoryError when the trajectory does not match the
/// topology.
inline std::vector<TransitionSample> extract_samples(const Topology& topo,
                                                     const Trajectory& traj) {
  if (traj.states.size() < 2)
    throw InconsistentTrajectoryError(
        "trajectory needs at least 2 recorded states");
  if (traj.n_rods() != topo.rods.size())
    throw InconsistentTrajectoryError(
        "trajectory has " + std::to_string(traj.n_rods()) +
        " rods, topology has " + std::to_string(topo.rods.size()));
  if (traj.dt != topo.dt)
    throw InconsistentTrajectoryError(
        "trajectory dt " + std::to_string(traj.dt) + " != topology dt " +
        std::to_string(topo.dt));
  std::vector<TransitionSample> out;
  out.reserve(traj.n_transitions());
  for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
    const std::span<const Vec3> u =
        t < traj.commands.size() ? std::span<const Vec3>(traj.commands[t])
                                 : std::span<const Vec3>{};
    out.push_back({rod_features(topo, traj.states[t], u),
                   transition_targets(topo, traj.states[t], traj.states[t + 1])});
  }
  return out;
}

}  // namespace springrod::sysid
