#pragma once

#include "springrod/quat.hpp"
#include "springrod/vec3.hpp"

namespace springrod {

/// Kinematic state of one rigid rod at one instant.
struct RodState {
  Vec3 p;   ///< center-of-mass position, m, world frame
  Vec3 v;   ///< linear velocity, m/s, world frame
  Quat q;   ///< world-from-body orientation
  Vec3 w;   ///< angular velocity, rad/s, world frame
};

inline bool is_finite(const RodState& s) {
  return is_finite(s.p) && is_finite(s.v) && is_finite(s.q) && is_finite(s.w);
}

/// Fixed geometry of a rod. The body axis convention is (0,0,1): the rod lies
/// along +z in its body frame, the Plus end at +length/2.
struct RodGeometry {
  double length = 1.0;           ///< m
  Vec3 body_axis{0.0, 0.0, 1.0}; ///< unit vector, body frame
};

/// World-frame vector from the center of mass to the Plus endpoint.
inline Vec3 half_length_vector(const RodState& state, const RodGeometry& geom) {
  return rotate(state.q, (0.5 * geom.length) * geom.body_axis);
}

struct EndpointKinematics {
  Vec3 e_plus;
  Vec3 e_minus;
  Vec3 ve_plus;
  Vec3 ve_minus;
};

/// Positions and velocities of the two rod endpoints:
///   e±  = p ± r,   ve± = v ± w × r,   r the half-length vector.
inline EndpointKinematics endpoint_kinematics(const RodState& state,
                                              const RodGeometry& geom) {
  const Vec3 r = half_length_vector(state, geom);
  const Vec3 wxr = cross(state.w, r);
  return {state.p + r, state.p - r, state.v + wxr, state.v - wxr};
}

}  // namespace springrod
