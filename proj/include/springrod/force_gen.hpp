#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "springrod/errors.hpp"
#include "springrod/params.hpp"
#include "springrod/topology.hpp"

namespace springrod {

/// Endpoints closer than this are treated as coincident; the spring axis is
/// undefined below it.
inline constexpr double kDegenerateSpringLength = 1e-9;

/// 1D reduction of a spring's 3D endpoint motion: current length, axial
/// extension rate, and the unit axis from endpoint a to endpoint b.
struct SpringMeasurement {
  double ell = 0.0;   ///< m
  double sdot = 0.0;  ///< m/s, positive when extending
  Vec3 u;             ///< unit vector a -> b
};

/// Projects relative endpoint position and velocity onto the spring axis.
/// Throws DegenerateSpringError when the endpoints coincide.
inline SpringMeasurement measure(const Vec3& pa, const Vec3& va,
                                 const Vec3& pb, const Vec3& vb,
                                 int spring_index = -1) {
  const Vec3 d = pb - pa;
  const double ell = norm(d);
  if (ell < kDegenerateSpringLength)
    throw DegenerateSpringError(
        spring_index, "spring " + std::to_string(spring_index) +
                          " endpoints coincide (length " +
                          std::to_string(ell) + " m)");
  const Vec3 u = d / ell;
  return {ell, dot(vb - va, u), u};
}

/// Hooke force with axial damping, tension positive:
///   f = K (ell - L0) + c sdot.
/// In cable mode a negative (compressive) value is clamped to zero.
inline double scalar_force(const SpringMeasurement& m, const SpringParams& p,
                           bool cable_mode) {
  const double f = p.K * (m.ell - p.L0) + p.c * m.sdot;
  if (cable_mode && f < 0.0) return 0.0;
  return f;
}

/// Maps the scalar force back to 3D. Positive tension pulls a toward b:
///   fa = +f u,  fb = -f u,  fa + fb = 0 exactly.
inline std::pair<Vec3, Vec3> endpoint_forces(const SpringMeasurement& m,
                                             double f) {
  const Vec3 fa = f * m.u;
  return {fa, -fa};
}

/// Spring forces accumulated onto each rod's two endpoints.
struct RodEndForces {
  Vec3 plus;
  Vec3 minus;
};

namespace detail {

inline void accumulate_endpoint_force(const EndpointRef& ref, const Vec3& f,
                                      std::vector<RodEndForces>& out) {
  if (ref.is_anchor()) return;  // forces on the world are discarded
  RodEndForces& rf = out[static_cast<std::size_t>(ref.rod_index)];
  if (ref.end == End::Plus)
    rf.plus += f;
  else
    rf.minus += f;
}

}  // namespace detail

/// Measures every spring, applies the force law, and accumulates endpoint
/// forces per rod in spring-index order (fixed order keeps rollouts
/// bit-reproducible).
inline std::vector<RodEndForces> all_spring_forces(
    const Topology& topo, std::span<const SpringParams> params,
    std::span<const RodState> states) {
  std::vector<RodEndForces> forces(topo.rods.size());
  for (std::size_t i = 0; i < topo.springs.size(); ++i) {
    const SpringDef& s = topo.springs[i];
    const auto [pa, va] = resolve_endpoint(topo, s.a, states);
    const auto [pb, vb] = resolve_endpoint(topo, s.b, states);
    const SpringMeasurement m = measure(pa, va, pb, vb, static_cast<int>(i));
    const double f = scalar_force(m, params[static_cast<std::size_t>(s.group)],
                                  topo.cable_mode);
    const auto [fa, fb] = endpoint_forces(m, f);
    detail::accumulate_endpoint_force(s.a, fa, forces);
    detail::accumulate_endpoint_force(s.b, fb, forces);
  }
  return forces;
}

}  // namespace springrod
