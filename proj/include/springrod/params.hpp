#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "springrod/topology.hpp"

namespace springrod {

/// Hooke parameters of one spring group.
struct SpringParams {
  double K = 0.0;   ///< stiffness, N/m
  double c = 0.0;   ///< damping, N·s/m
  double L0 = 1.0;  ///< rest length, m
};

/// Mass properties of one rod: scalar mass and the inertia about any axis
/// through the COM perpendicular to the rod.
struct RodParams {
  double M = 1.0;  ///< kg
  double I = 1.0;  ///< kg·m^2
};

/// Every physical parameter of a system. `rods` holds either one entry per
/// rod or a single entry shared by all rods.
struct ParamSet {
  std::vector<SpringParams> springs;   ///< one per spring group
  std::vector<RodParams> rods;
  std::vector<double> control_scale;   ///< h per control group

  bool shared_rods() const { return rods.size() == 1; }
  const RodParams& rod(std::size_t i) const {
    return rods.size() == 1 ? rods[0] : rods[i];
  }
};

/// Size and positivity checks of a ParamSet against its topology.
inline std::vector<ValidationIssue> validate_params(const Topology& topo,
                                                    const ParamSet& params) {
  std::vector<ValidationIssue> issues;
  if (static_cast<int>(params.springs.size()) != topo.spring_group_count())
    issues.push_back({"expected " + std::to_string(topo.spring_group_count()) +
                      " spring parameter groups, got " +
                      std::to_string(params.springs.size())});
  if (params.rods.size() != 1 && params.rods.size() != topo.rods.size())
    issues.push_back({"rod parameters must be shared (1 entry) or per rod (" +
                      std::to_string(topo.rods.size()) + " entries), got " +
                      std::to_string(params.rods.size())});
  if (static_cast<int>(params.control_scale.size()) !=
      topo.control_group_count())
    issues.push_back({"expected " +
                      std::to_string(topo.control_group_count()) +
                      " control scales, got " +
                      std::to_string(params.control_scale.size())});
  for (std::size_t g = 0; g < params.springs.size(); ++g) {
    const SpringParams& s = params.springs[g];
    if (s.K < 0.0 || s.c < 0.0 || !(s.L0 > 0.0))
      issues.push_back({"spring group " + std::to_string(g) +
                        " needs K >= 0, c >= 0, L0 > 0"});
  }
  for (std::size_t i = 0; i < params.rods.size(); ++i)
    if (!(params.rods[i].M > 0.0) || !(params.rods[i].I > 0.0))
      issues.push_back({"rod parameters " + std::to_string(i) +
                        " need M > 0 and I > 0"});
  return issues;
}

}  // namespace springrod
