#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "springrod/sysid/identify.hpp"

namespace springrod::sysid {

/// Result of the control-scale fit. The composites h/M, h/I are always
/// recoverable; the physical h only when the frozen identification carried
/// decomposed parameters (an anchor).
struct ControlFitResult {
  std::vector<double> h_over_M;       ///< per control group
  std::vector<double> h_over_I;       ///< per control group
  std::optional<std::vector<double>> h;
  std::uint64_t n_samples = 0;
};

/// Fits the command-to-force scale per control group on the residual
/// accelerations left after subtracting the frozen spring model, pooling the
/// linear and angular equations. All other coefficients stay frozen.
inline ControlFitResult finetune_control_scale(
    const Topology& topo, const IdentifiedParams& frozen,
    std::span<const Trajectory> dataset) {
  const int n_ctl = topo.control_group_count();
  if (n_ctl == 0) throw Error("topology has no controls");
  bool any_command = false;
  for (const Trajectory& traj : dataset)
    for (const auto& step_cmds : traj.commands)
      for (const Vec3& u : step_cmds)
        if (norm_squared(u) > 0.0) any_command = true;
  if (!any_command)
    throw NoExcitationError("all commands in the dataset are zero");

  const CompositeCoefficients spring_model =
      composites_from_map(topo, frozen.composites, frozen.per_rod);

  std::vector<std::string> names;
  for (int k = 0; k < n_ctl; ++k) {
    names.push_back("u" + std::to_string(k) + ".h_over_M");
  }
  for (int k = 0; k < n_ctl; ++k)
    names.push_back("u" + std::to_string(k) + ".h_over_I");
  // One pooled problem: columns [h/M per group, h/I per group]; linear
  // residual rows excite the first half, angular rows the second.
  RegressionProblem pooled(names);
  // Physical route, available when masses/inertias are known.
  RegressionProblem physical(
      std::vector<std::string>(names.begin(), names.begin() + n_ctl));
  const bool have_physical = frozen.decomposed.has_value();

  std::uint64_t n_transitions = 0;
  std::vector<double> row(static_cast<std::size_t>(2 * n_ctl));
  std::vector<double> prow(static_cast<std::size_t>(n_ctl));
  for (const Trajectory& traj : dataset) {
    for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
      const std::span<const Vec3> u =
          t < traj.commands.size() ? std::span<const Vec3>(traj.commands[t])
                                   : std::span<const Vec3>{};
      const std::vector<RodFeatures> feats =
          rod_features(topo, traj.states[t], u);
      const std::vector<RodTargets> targets =
          transition_targets(topo, traj.states[t], traj.states[t + 1]);
      for (std::size_t i = 0; i < feats.size(); ++i) {
        Vec3 res_lin = targets[i].lin;
        Vec3 res_ang = targets[i].ang;
        const int rod = static_cast<int>(i);
        for (int g = 0; g < spring_model.n_groups; ++g) {
          const auto& b = spring_model.block(rod, g);
          const auto& fl = feats[i].lin[static_cast<std::size_t>(g)];
          const auto& fa = feats[i].ang[static_cast<std::size_t>(g)];
          res_lin -= b.k_m * fl[0] + b.c_m * fl[1] + b.kl_m * fl[2];
          res_ang -= b.k_i * fa[0] + b.c_i * fa[1] + b.kl_i * fa[2];
        }
        for (int axis = 0; axis < 3; ++axis) {
          auto comp = [axis](const Vec3& v) {
            return axis == 0 ? v.x : axis == 1 ? v.y : v.z;
          };
          // linear-equation row
          std::fill(row.begin(), row.end(), 0.0);
          for (int k = 0; k < n_ctl; ++k)
            row[static_cast<std::size_t>(k)] =
                comp(feats[i].ctl_lin[static_cast<std::size_t>(k)]);
          pooled.add(row, comp(res_lin));
          // angular-equation row
          std::fill(row.begin(), row.end(), 0.0);
          for (int k = 0; k < n_ctl; ++k)
            row[static_cast<std::size_t>(n_ctl + k)] =
                comp(feats[i].ctl_ang[static_cast<std::size_t>(k)]);
          pooled.add(row, comp(res_ang));
          if (have_physical) {
            const RodParams& rp = frozen.decomposed->rod(i);
            for (int k = 0; k < n_ctl; ++k)
              prow[static_cast<std::size_t>(k)] =
                  comp(feats[i].ctl_lin[static_cast<std::size_t>(k)]) / rp.M;
            physical.add(prow, comp(res_lin));
            for (int k = 0; k < n_ctl; ++k)
              prow[static_cast<std::size_t>(k)] =
                  comp(feats[i].ctl_ang[static_cast<std::size_t>(k)]) / rp.I;
            physical.add(prow, comp(res_ang));
          }
        }
      }
      ++n_transitions;
    }
  }

  const OlsSolution sol = fit_ols_auto(pooled);
  ControlFitResult result;
  result.n_samples = n_transitions;
  result.h_over_M.resize(static_cast<std::size_t>(n_ctl));
  result.h_over_I.resize(static_cast<std::size_t>(n_ctl));
  for (int k = 0; k < n_ctl; ++k) {
    result.h_over_M[static_cast<std::size_t>(k)] = sol.beta(k, 0);
    result.h_over_I[static_cast<std::size_t>(k)] = sol.beta(n_ctl + k, 0);
  }
  if (have_physical) {
    const OlsSolution psol = fit_ols_auto(physical);
    std::vector<double> h(static_cast<std::size_t>(n_ctl));
    for (int k = 0; k < n_ctl; ++k) h[static_cast<std::size_t>(k)] = psol.beta(k, 0);
    result.h = std::move(h);
  }
  return result;
}

}  // namespace springrod::sysid
