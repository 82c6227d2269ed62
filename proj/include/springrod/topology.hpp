#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "springrod/rod.hpp"

namespace springrod {

enum class End { Plus, Minus };

/// One attachment point of a spring: either an end of a rod or a fixed
/// world-frame anchor.
struct EndpointRef {
  enum class Kind { RodEnd, Anchor };

  Kind kind = Kind::RodEnd;
  int rod_index = 0;          ///< valid when kind == RodEnd
  End end = End::Plus;        ///< valid when kind == RodEnd
  Vec3 anchor_position;       ///< valid when kind == Anchor

  static EndpointRef rod_end(int rod, End e) {
    EndpointRef r;
    r.kind = Kind::RodEnd;
    r.rod_index = rod;
    r.end = e;
    return r;
  }
  static EndpointRef anchor(const Vec3& p) {
    EndpointRef r;
    r.kind = Kind::Anchor;
    r.anchor_position = p;
    return r;
  }
  bool is_anchor() const { return kind == Kind::Anchor; }
};

inline bool operator==(const EndpointRef& a, const EndpointRef& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == EndpointRef::Kind::RodEnd)
    return a.rod_index == b.rod_index && a.end == b.end;
  return a.anchor_position.x == b.anchor_position.x &&
         a.anchor_position.y == b.anchor_position.y &&
         a.anchor_position.z == b.anchor_position.z;
}

/// Spring (or cable) between two endpoints. Springs in the same group share
/// one (K, c, L0) parameter triple.
struct SpringDef {
  EndpointRef a;
  EndpointRef b;
  int group = 0;
};

/// Control-force attachment on a rod. The commanded vector acts at
/// `arm_body` (body frame); when absent the Plus endpoint is used.
struct ControlDef {
  int rod_index = 0;
  std::optional<Vec3> arm_body;
  int group = 0;
};

/// Immutable description of a spring-rod system: the element graph plus the
/// few global simulation constants.
struct Topology {
  std::vector<RodGeometry> rods;
  std::vector<SpringDef> springs;
  std::vector<ControlDef> controls;
  Vec3 gravity{0.0, 0.0, 0.0};  ///< m/s^2
  double dt = 1e-3;             ///< s
  bool cable_mode = false;      ///< springs exert tension only when true

  int spring_group_count() const {
    int g = -1;
    for (const auto& s : springs) g = std::max(g, s.group);
    return g + 1;
  }
  int control_group_count() const {
    int g = -1;
    for (const auto& c : controls) g = std::max(g, c.group);
    return g + 1;
  }

  /// Body-frame control arm with the Plus-endpoint default applied.
  Vec3 control_arm_body(const ControlDef& c) const {
    if (c.arm_body) return *c.arm_body;
    const RodGeometry& g = rods[static_cast<std::size_t>(c.rod_index)];
    return (0.5 * g.length) * g.body_axis;
  }
};

struct ValidationIssue {
  std::string message;
};

namespace detail {

inline bool endpoint_ok(const Topology& topo, const EndpointRef& ref) {
  if (ref.is_anchor()) return is_finite(ref.anchor_position);
  return ref.rod_index >= 0 &&
         ref.rod_index < static_cast<int>(topo.rods.size());
}

inline void check_groups_contiguous(const std::vector<int>& groups,
                                    const char* what,
                                    std::vector<ValidationIssue>& out) {
  if (groups.empty()) return;
  int max_group = *std::max_element(groups.begin(), groups.end());
  int min_group = *std::min_element(groups.begin(), groups.end());
  if (min_group < 0) {
    out.push_back({std::string(what) + " group ids must be non-negative"});
    return;
  }
  std::vector<bool> seen(static_cast<std::size_t>(max_group) + 1, false);
  for (int g : groups) seen[static_cast<std::size_t>(g)] = true;
  for (std::size_t g = 0; g < seen.size(); ++g)
    if (!seen[g])
      out.push_back({std::string(what) + " groups not contiguous: group " +
                     std::to_string(g) + " unused"});
}

}  // namespace detail

/// Collects every invariant violation instead of stopping at the first one.
/// An empty result means the topology is usable.
inline std::vector<ValidationIssue> validate(const Topology& topo) {
  std::vector<ValidationIssue> issues;
  if (!(topo.dt > 0.0))
    issues.push_back({"non-positive timestep dt=" + std::to_string(topo.dt)});
  if (!is_finite(topo.gravity)) issues.push_back({"gravity not finite"});
  for (std::size_t i = 0; i < topo.rods.size(); ++i) {
    const RodGeometry& g = topo.rods[i];
    if (!(g.length > 0.0))
      issues.push_back({"rod " + std::to_string(i) + " has non-positive length"});
    if (std::abs(norm(g.body_axis) - 1.0) > 1e-9)
      issues.push_back({"rod " + std::to_string(i) + " body_axis not unit"});
  }
  std::vector<int> spring_groups;
  for (std::size_t i = 0; i < topo.springs.size(); ++i) {
    const SpringDef& s = topo.springs[i];
    if (!detail::endpoint_ok(topo, s.a) || !detail::endpoint_ok(topo, s.b))
      issues.push_back({"spring " + std::to_string(i) +
                        " has a dangling endpoint reference"});
    if (s.a == s.b)
      issues.push_back({"spring " + std::to_string(i) +
                        " connects an endpoint to itself"});
    spring_groups.push_back(s.group);
  }
  detail::check_groups_contiguous(spring_groups, "spring", issues);
  std::vector<int> control_groups;
  for (std::size_t i = 0; i < topo.controls.size(); ++i) {
    const ControlDef& c = topo.controls[i];
    if (c.rod_index < 0 || c.rod_index >= static_cast<int>(topo.rods.size()))
      issues.push_back({"control " + std::to_string(i) +
                        " references missing rod " +
                        std::to_string(c.rod_index)});
    else if (c.arm_body && !is_finite(*c.arm_body))
      issues.push_back({"control " + std::to_string(i) + " arm not finite"});
    control_groups.push_back(c.group);
  }
  detail::check_groups_contiguous(control_groups, "control", issues);
  return issues;
}

/// Position and velocity of an endpoint reference under the given states.
/// Anchors are fixed world points with zero velocity.
inline std::pair<Vec3, Vec3> resolve_endpoint(
    const Topology& topo, const EndpointRef& ref,
    std::span<const RodState> states) {
  if (ref.is_anchor()) return {ref.anchor_position, Vec3{}};
  const auto i = static_cast<std::size_t>(ref.rod_index);
  const EndpointKinematics k = endpoint_kinematics(states[i], topo.rods[i]);
  if (ref.end == End::Plus) return {k.e_plus, k.ve_plus};
  return {k.e_minus, k.ve_minus};
}

}  // namespace springrod
