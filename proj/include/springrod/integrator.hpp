#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "springrod/accel_gen.hpp"
#include "springrod/errors.hpp"

namespace springrod {

/// One semi-implicit Euler step. Velocity updates first and the new velocity
/// advances the position; the quaternion gets the first-order update
///   q' = normalize(q + (dt/2) * pure(w') * q)
/// with the already-updated angular velocity.
inline RodState step(const RodState& state, const Accel& acc, double dt) {
  RodState next;
  next.v = state.v + dt * acc.a;
  next.p = state.p + dt * next.v;
  next.w = state.w + dt * acc.alpha;
  const Quat dq = pure_quat(next.w) * state.q;
  next.q = normalized(Quat{state.q.w + 0.5 * dt * dq.w,
                           state.q.x + 0.5 * dt * dq.x,
                           state.q.y + 0.5 * dt * dq.y,
                           state.q.z + 0.5 * dt * dq.z});
  return next;
}

/// Recorded system history: states[t] is the full state at step t
/// (n_steps+1 entries) and commands[t] the raw control commands applied over
/// the transition t -> t+1 (n_steps entries, each sized like
/// topology.controls; empty overall when the system has no controls).
struct Trajectory {
  double dt = 0.0;
  std::vector<std::vector<RodState>> states;
  std::vector<std::vector<Vec3>> commands;

  std::size_t n_rods() const { return states.empty() ? 0 : states[0].size(); }
  std::size_t n_transitions() const {
    return states.empty() ? 0 : states.size() - 1;
  }
};

namespace detail {

inline void check_finite(std::span<const RodState> states, long step_index) {
  for (const RodState& s : states)
    if (!is_finite(s))
      throw NonFiniteStateError(
          step_index, "non-finite state at step " + std::to_string(step_index) +
                          " (integration unstable, reduce dt?)");
}

/// force_gen -> accel_gen -> step for one transition; shared by rollout and
/// engine::predict_step so both are bit-identical.
inline std::vector<RodState> advance(const Topology& topo,
                                     const ParamSet& params,
                                     std::span<const RodState> states,
                                     std::span<const Vec3> commands) {
  const std::vector<RodEndForces> forces =
      all_spring_forces(topo, params.springs, states);
  const std::vector<Accel> acc =
      system_accelerations(topo, params, states, forces, commands);
  std::vector<RodState> next(states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    next[i] = step(states[i], acc[i], topo.dt);
  return next;
}

}  // namespace detail

/// Simulates n_steps transitions, recording every state and every applied
/// command. `commands` may be empty (all-zero controls) or hold one entry per
/// step. Deterministic: identical inputs give bit-identical trajectories.
inline Trajectory rollout(const Topology& topo, const ParamSet& params,
                          std::span<const RodState> initial,
                          std::span<const std::vector<Vec3>> commands,
                          long n_steps) {
  Trajectory traj;
  traj.dt = topo.dt;
  traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.states.emplace_back(initial.begin(), initial.end());
  detail::check_finite(traj.states.back(), 0);
  const std::vector<Vec3> zero_commands(topo.controls.size());
  const bool has_controls = !topo.controls.empty();
  if (has_controls) traj.commands.reserve(static_cast<std::size_t>(n_steps));
  for (long t = 0; t < n_steps; ++t) {
    const std::vector<Vec3>& u =
        t < static_cast<long>(commands.size())
            ? commands[static_cast<std::size_t>(t)]
            : zero_commands;
    try {
      traj.states.push_back(
          detail::advance(topo, params, traj.states.back(), u));
    } catch (const DegenerateSpringError& e) {
      throw DegenerateSpringError(
          e.spring_index,
          std::string(e.what()) + " at step " + std::to_string(t));
    }
    detail::check_finite(traj.states.back(), t + 1);
    if (has_controls) traj.commands.push_back(u);
  }
  return traj;
}

}  // namespace springrod
