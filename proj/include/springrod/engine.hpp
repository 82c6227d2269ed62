#pragma once

#include <span>
#include <vector>

#include "springrod/integrator.hpp"

namespace springrod {

/// One full force -> acceleration -> integration pass. Equals
/// rollout(..., n_steps=1) bitwise; both share the same inner code path.
inline std::vector<RodState> predict_step(const Topology& topo,
                                          const ParamSet& params,
                                          std::span<const RodState> states,
                                          std::span<const Vec3> commands = {}) {
  return detail::advance(topo, params, states, commands);
}

/// MSE between two system states over all 13 scalars per rod
/// (p, v, q, w components), equally weighted.
inline double step_loss(std::span<const RodState> predicted,
                        std::span<const RodState> truth) {
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const RodState& a = predicted[i];
    const RodState& b = truth[i];
    const Vec3 dp = a.p - b.p;
    const Vec3 dv = a.v - b.v;
    const Vec3 dw = a.w - b.w;
    const double dqw = a.q.w - b.q.w, dqx = a.q.x - b.q.x,
                 dqy = a.q.y - b.q.y, dqz = a.q.z - b.q.z;
    sum += norm_squared(dp) + norm_squared(dv) + norm_squared(dw) + dqw * dqw +
           dqx * dqx + dqy * dqy + dqz * dqz;
  }
  return sum / (13.0 * static_cast<double>(predicted.size()));
}

}  // namespace springrod
