#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "springrod/sysid/features.hpp"

namespace springrod::sysid {

/// The identifiable ratios of the physical parameters. Only these composites
/// are observable from state trajectories (gravity cancels mass, so no
/// absolute force scale survives); they are also all the engine needs to
/// simulate, which is what `composite_accelerations` does.
///
/// Key naming: shared rod parameters -> "g0.K_over_M", "u0.h_over_M";
/// per-rod parameters -> "r2.g0.K_over_M", "r2.u0.h_over_M". Per-rod maps
/// contain only (rod, group) pairs that actually touch.
struct CompositeCoefficients {
  struct SpringBlock {
    double k_m = 0, c_m = 0, kl_m = 0;  ///< K/M, c/M, K·L0/M
    double k_i = 0, c_i = 0, kl_i = 0;  ///< K/I, c/I, K·L0/I
  };
  struct ControlBlock {
    double h_m = 0, h_i = 0;  ///< h/M, h/I
  };

  bool per_rod = false;
  int n_rods = 0;
  int n_groups = 0;
  int n_ctl_groups = 0;
  std::vector<SpringBlock> spring;  ///< n_groups or n_rods*n_groups
  std::vector<ControlBlock> ctl;    ///< n_ctl_groups or n_rods*n_ctl_groups

  SpringBlock& block(int rod, int g) {
    return spring[static_cast<std::size_t>(per_rod ? rod * n_groups + g : g)];
  }
  const SpringBlock& block(int rod, int g) const {
    return spring[static_cast<std::size_t>(per_rod ? rod * n_groups + g : g)];
  }
  ControlBlock& ctl_block(int rod, int k) {
    return ctl[static_cast<std::size_t>(per_rod ? rod * n_ctl_groups + k : k)];
  }
  const ControlBlock& ctl_block(int rod, int k) const {
    return ctl[static_cast<std::size_t>(per_rod ? rod * n_ctl_groups + k : k)];
  }
};

namespace detail {

/// spring groups touching each rod, and control groups acting on each rod.
struct Touching {
  std::vector<std::set<int>> groups;      // per rod
  std::vector<std::set<int>> ctl_groups;  // per rod
};

inline Touching touching(const Topology& topo) {
  Touching t;
  t.groups.resize(topo.rods.size());
  t.ctl_groups.resize(topo.rods.size());
  for (const SpringDef& s : topo.springs) {
    if (!s.a.is_anchor())
      t.groups[static_cast<std::size_t>(s.a.rod_index)].insert(s.group);
    if (!s.b.is_anchor())
      t.groups[static_cast<std::size_t>(s.b.rod_index)].insert(s.group);
  }
  for (const ControlDef& c : topo.controls)
    t.ctl_groups[static_cast<std::size_t>(c.rod_index)].insert(c.group);
  return t;
}

}  // namespace detail

inline CompositeCoefficients make_composites(const Topology& topo,
                                             bool per_rod) {
  CompositeCoefficients c;
  c.per_rod = per_rod;
  c.n_rods = static_cast<int>(topo.rods.size());
  c.n_groups = topo.spring_group_count();
  c.n_ctl_groups = topo.control_group_count();
  const int rod_mult = per_rod ? c.n_rods : 1;
  c.spring.resize(static_cast<std::size_t>(rod_mult * c.n_groups));
  c.ctl.resize(static_cast<std::size_t>(rod_mult * c.n_ctl_groups));
  return c;
}

/// Composite coefficients implied by a full physical ParamSet.
inline CompositeCoefficients composites_from_params(const Topology& topo,
                                                    const ParamSet& params,
                                                    bool per_rod = false) {
  if (!per_rod && !params.shared_rods())
    throw Error("shared composites require a shared rod parameter entry");
  CompositeCoefficients c = make_composites(topo, per_rod);
  const int rods = per_rod ? c.n_rods : 1;
  for (int r = 0; r < rods; ++r) {
    const RodParams& rp = params.rod(static_cast<std::size_t>(r));
    for (int g = 0; g < c.n_groups; ++g) {
      const SpringParams& sp = params.springs[static_cast<std::size_t>(g)];
      c.block(r, g) = {sp.K / rp.M,         sp.c / rp.M,
                       sp.K * sp.L0 / rp.M, sp.K / rp.I,
                       sp.c / rp.I,         sp.K * sp.L0 / rp.I};
    }
    for (int k = 0; k < c.n_ctl_groups; ++k) {
      const double h = params.control_scale[static_cast<std::size_t>(k)];
      c.ctl_block(r, k) = {h / rp.M, h / rp.I};
    }
  }
  return c;
}

inline std::map<std::string, double> composites_to_map(
    const Topology& topo, const CompositeCoefficients& c) {
  std::map<std::string, double> out;
  const detail::Touching touch = detail::touching(topo);
  auto emit = [&out](const std::string& prefix,
                     const CompositeCoefficients::SpringBlock& b) {
    out[prefix + "K_over_M"] = b.k_m;
    out[prefix + "c_over_M"] = b.c_m;
    out[prefix + "KL0_over_M"] = b.kl_m;
    out[prefix + "K_over_I"] = b.k_i;
    out[prefix + "c_over_I"] = b.c_i;
    out[prefix + "KL0_over_I"] = b.kl_i;
  };
  if (!c.per_rod) {
    for (int g = 0; g < c.n_groups; ++g)
      emit("g" + std::to_string(g) + ".", c.block(0, g));
    for (int k = 0; k < c.n_ctl_groups; ++k) {
      out["u" + std::to_string(k) + ".h_over_M"] = c.ctl_block(0, k).h_m;
      out["u" + std::to_string(k) + ".h_over_I"] = c.ctl_block(0, k).h_i;
    }
    return out;
  }
  for (int r = 0; r < c.n_rods; ++r) {
    for (int g : touch.groups[static_cast<std::size_t>(r)])
      emit("r" + std::to_string(r) + ".g" + std::to_string(g) + ".",
           c.block(r, g));
    for (int k : touch.ctl_groups[static_cast<std::size_t>(r)]) {
      const std::string prefix =
          "r" + std::to_string(r) + ".u" + std::to_string(k) + ".";
      out[prefix + "h_over_M"] = c.ctl_block(r, k).h_m;
      out[prefix + "h_over_I"] = c.ctl_block(r, k).h_i;
    }
  }
  return out;
}

inline CompositeCoefficients composites_from_map(
    const Topology& topo, const std::map<std::string, double>& map,
    bool per_rod) {
  CompositeCoefficients c = make_composites(topo, per_rod);
  auto value = [&map](const std::string& key) -> std::optional<double> {
    auto it = map.find(key);
    if (it == map.end()) return std::nullopt;
    return it->second;
  };
  const int rods = per_rod ? c.n_rods : 1;
  for (int r = 0; r < rods; ++r) {
    const std::string rp = per_rod ? "r" + std::to_string(r) + "." : "";
    for (int g = 0; g < c.n_groups; ++g) {
      const std::string prefix = rp + "g" + std::to_string(g) + ".";
      auto& b = c.block(r, g);
      b.k_m = value(prefix + "K_over_M").value_or(0.0);
      b.c_m = value(prefix + "c_over_M").value_or(0.0);
      b.kl_m = value(prefix + "KL0_over_M").value_or(0.0);
      b.k_i = value(prefix + "K_over_I").value_or(0.0);
      b.c_i = value(prefix + "c_over_I").value_or(0.0);
      b.kl_i = value(prefix + "KL0_over_I").value_or(0.0);
    }
    for (int k = 0; k < c.n_ctl_groups; ++k) {
      const std::string prefix = rp + "u" + std::to_string(k) + ".";
      auto& b = c.ctl_block(r, k);
      b.h_m = value(prefix + "h_over_M").value_or(0.0);
      b.h_i = value(prefix + "h_over_I").value_or(0.0);
    }
  }
  return c;
}

/// Accelerations predicted from composite coefficients alone; no absolute
/// masses or stiffnesses needed.
inline std::vector<Accel> composite_accelerations(
    const Topology& topo, const CompositeCoefficients& c,
    std::span<const RodState> states, std::span<const Vec3> commands) {
  const std::vector<RodFeatures> feats = rod_features(topo, states, commands);
  std::vector<Accel> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    Vec3 a = topo.gravity;
    Vec3 alpha;
    const int rod = static_cast<int>(i);
    for (int g = 0; g < c.n_groups; ++g) {
      const auto& b = c.block(rod, g);
      const auto& fl = feats[i].lin[static_cast<std::size_t>(g)];
      const auto& fa = feats[i].ang[static_cast<std::size_t>(g)];
      a += b.k_m * fl[0] + b.c_m * fl[1] + b.kl_m * fl[2];
      alpha += b.k_i * fa[0] + b.c_i * fa[1] + b.kl_i * fa[2];
    }
    for (int k = 0; k < c.n_ctl_groups; ++k) {
      const auto& b = c.ctl_block(rod, k);
      a += b.h_m * feats[i].ctl_lin[static_cast<std::size_t>(k)];
      alpha += b.h_i * feats[i].ctl_ang[static_cast<std::size_t>(k)];
    }
    out[i] = {a, alpha};
  }
  return out;
}

/// One engine step driven by composite coefficients.
inline std::vector<RodState> predict_step_composites(
    const Topology& topo, const CompositeCoefficients& c,
    std::span<const RodState> states, std::span<const Vec3> commands = {}) {
  const std::vector<Accel> acc =
      composite_accelerations(topo, c, states, commands);
  std::vector<RodState> next(states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    next[i] = step(states[i], acc[i], topo.dt);
  return next;
}

/// Multi-step rollout driven by composite coefficients, mirroring
/// integrator rollout.
inline Trajectory rollout_composites(
    const Topology& topo, const CompositeCoefficients& c,
    std::span<const RodState> initial,
    std::span<const std::vector<Vec3>> commands, long n_steps) {
  Trajectory traj;
  traj.dt = topo.dt;
  traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.states.emplace_back(initial.begin(), initial.end());
  const std::vector<Vec3> zero_commands(topo.controls.size());
  const bool has_controls = !topo.controls.empty();
  for (long t = 0; t < n_steps; ++t) {
    const std::vector<Vec3>& u =
        t < static_cast<long>(commands.size())
            ? commands[static_cast<std::size_t>(t)]
            : zero_commands;
    traj.states.push_back(
        predict_step_composites(topo, c, traj.states.back(), u));
    springrod::detail::check_finite(traj.states.back(), t + 1);
    if (has_controls) traj.commands.push_back(u);
  }
  return traj;
}

}  // namespace springrod::sysid
