#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "springrod/gradient.hpp"
#include "springrod/sysid/features.hpp"

namespace springrod::sysid {

struct GdOptions {
  double lr = 1e-3;
  long n_iters = 1000;
  /// Freezing a block keeps those entries at their initial values; with the
  /// rod block frozen (known masses, the usual anchor) the objective is
  /// convex in the spring parameters. Rest lengths are frozen by default:
  /// they are geometric inputs, and their gradient scale (~K) would dominate
  /// the K/c directions.
  bool train_springs = true;
  bool train_rest_length = false;
  bool train_rods = true;
  bool train_controls = true;
};

struct GdResult {
  ParamSet params;
  std::vector<double> loss_curve;  ///< mean step loss per iteration (before the update)
};

/// Full-batch gradient descent on the mean one-step prediction loss, the
/// iterative counterpart of the closed-form fit. Plain fixed-rate updates:
/// an oversized lr genuinely diverges and raises DivergedError.
inline GdResult fit_gradient_descent(const Topology& topo,
                                     std::span<const Transition> transitions,
                                     const ParamSet& init,
                                     const GdOptions& opts = {}) {
  if (transitions.empty()) throw Error("gradient descent needs transitions");
  GdResult result;
  result.params = init;
  result.loss_curve.reserve(static_cast<std::size_t>(opts.n_iters));
  const double inv_n = 1.0 / static_cast<double>(transitions.size());
  for (long iter = 0; iter < opts.n_iters; ++iter) {
    double loss = 0.0;
    ParamGradient total;
    total.springs.resize(init.springs.size());
    total.rods.resize(init.rods.size());
    total.control_scale.resize(init.control_scale.size());
    for (const Transition& tr : transitions) {
      const std::vector<RodState> pred =
          predict_step(topo, result.params, tr.s0, tr.u);
      loss += step_loss(pred, tr.s1) * inv_n;
      const ParamGradient g =
          param_gradient(topo, result.params, tr.s0, tr.u, tr.s1);
      for (std::size_t i = 0; i < total.springs.size(); ++i) {
        total.springs[i].K += g.springs[i].K * inv_n;
        total.springs[i].c += g.springs[i].c * inv_n;
        total.springs[i].L0 += g.springs[i].L0 * inv_n;
      }
      for (std::size_t i = 0; i < total.rods.size(); ++i) {
        total.rods[i].M += g.rods[i].M * inv_n;
        total.rods[i].I += g.rods[i].I * inv_n;
      }
      for (std::size_t i = 0; i < total.control_scale.size(); ++i)
        total.control_scale[i] += g.control_scale[i] * inv_n;
    }
    if (!std::isfinite(loss))
      throw DivergedError(iter, "loss became non-finite at iteration " +
                                    std::to_string(iter) +
                                    " (learning rate too large?)");
    result.loss_curve.push_back(loss);
    if (opts.train_springs)
      for (std::size_t i = 0; i < result.params.springs.size(); ++i) {
        result.params.springs[i].K -= opts.lr * total.springs[i].K;
        result.params.springs[i].c -= opts.lr * total.springs[i].c;
        if (opts.train_rest_length)
          result.params.springs[i].L0 -= opts.lr * total.springs[i].L0;
      }
    if (opts.train_rods)
      for (std::size_t i = 0; i < result.params.rods.size(); ++i) {
        result.params.rods[i].M -= opts.lr * total.rods[i].M;
        result.params.rods[i].I -= opts.lr * total.rods[i].I;
      }
    if (opts.train_controls)
      for (std::size_t i = 0; i < result.params.control_scale.size(); ++i)
        result.params.control_scale[i] -= opts.lr * total.control_scale[i];
  }
  return result;
}

}  // namespace springrod::sysid
