#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "springrod/engine.hpp"
#include "springrod/parallel.hpp"
#include "springrod/rng.hpp"

namespace springrod {

/// Gaussian jitter applied to the nominal states when sampling initial
/// conditions. Orientation jitter is an axis-angle perturbation.
struct InitSampler {
  double sigma_p = 0.05;  ///< m
  double sigma_v = 0.1;   ///< m/s
  double sigma_w = 0.0;   ///< rad/s
  double sigma_q = 0.0;   ///< rad
};

/// Piecewise-constant random directed perturbation commands: every
/// hold_steps steps each channel draws a fresh direction (uniform on the
/// sphere) and magnitude (uniform in [0, magnitude]).
struct ControlSampler {
  bool enabled = false;
  double magnitude = 1.0;
  int hold_steps = 50;
};

/// The ground-truth data source: the same engine run with hidden true
/// parameters. Replaces an external simulator so generated data is exactly
/// model-consistent.
struct OracleSpec {
  Topology topology;
  ParamSet true_params;
  std::vector<RodState> nominal_states;
  InitSampler init;
  ControlSampler control;
  std::uint64_t seed = 0;
};

namespace detail {

// Stream ids: trajectory j uses 2j for the initial state and 2j+1 for
// commands, so every trajectory is reproducible in isolation.
inline std::vector<RodState> sample_initial(const OracleSpec& spec,
                                            std::uint64_t traj_index) {
  CounterRng rng(spec.seed, 2 * traj_index);
  std::vector<RodState> states = spec.nominal_states;
  for (RodState& s : states) {
    s.p += rng.normal_vec3(spec.init.sigma_p);
    s.v += rng.normal_vec3(spec.init.sigma_v);
    if (spec.init.sigma_q > 0.0) s.q = normalized(rng.jitter_quat(spec.init.sigma_q) * s.q);
    if (spec.init.sigma_w > 0.0) s.w += rng.normal_vec3(spec.init.sigma_w);
  }
  return states;
}

inline std::vector<std::vector<Vec3>> sample_commands(const OracleSpec& spec,
                                                      std::uint64_t traj_index,
                                                      long n_steps) {
  const std::size_t channels = spec.topology.controls.size();
  if (!spec.control.enabled || channels == 0) return {};
  CounterRng rng(spec.seed, 2 * traj_index + 1);
  std::vector<std::vector<Vec3>> commands(
      static_cast<std::size_t>(n_steps), std::vector<Vec3>(channels));
  const long hold = std::max(1, spec.control.hold_steps);
  std::vector<Vec3> current(channels);
  for (long t = 0; t < n_steps; ++t) {
    if (t % hold == 0)
      for (std::size_t k = 0; k < channels; ++k)
        current[k] = rng.uniform(0.0, spec.control.magnitude) * rng.unit_vec3();
    commands[static_cast<std::size_t>(t)] = current;
  }
  return commands;
}

}  // namespace detail

/// Simulates trajectory `traj_index` of the oracle. Deterministic in
/// (spec.seed, traj_index) alone, so datasets are reproducible regardless of
/// how generation is scheduled.
inline Trajectory generate_trajectory(const OracleSpec& spec,
                                      std::uint64_t traj_index, long n_steps) {
  const std::vector<RodState> initial = detail::sample_initial(spec, traj_index);
  const std::vector<std::vector<Vec3>> commands =
      detail::sample_commands(spec, traj_index, n_steps);
  try {
    return rollout(spec.topology, spec.true_params, initial, commands, n_steps);
  } catch (const Error& e) {
    throw Error("trajectory " + std::to_string(traj_index) + ": " + e.what());
  }
}

/// Generates n_traj trajectories, ordered by trajectory index. base_index
/// offsets the per-trajectory streams so different splits draw disjoint
/// initial conditions from one seed.
inline std::vector<Trajectory> generate_dataset(const OracleSpec& spec,
                                                long n_traj,
                                                long steps_per_traj,
                                                std::uint64_t base_index = 0) {
  std::vector<Trajectory> out(static_cast<std::size_t>(n_traj));
  parallel_for(static_cast<std::size_t>(n_traj), [&](std::size_t j) {
    out[j] = generate_trajectory(spec, base_index + j, steps_per_traj);
  });
  return out;
}

}  // namespace springrod
