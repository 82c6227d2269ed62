#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "springrod/sysid/identify.hpp"

namespace springrod::sysid {

/// Lift of the full system state into one rod's feature vector.
using LiftFn = std::function<std::vector<double>(
    const Topology&, std::span<const RodState>, std::size_t rod)>;

/// Monomial lift over a rod's local observables: the (length, extension
/// rate) of each attached spring plus the rod's linear and angular velocity
/// components, expanded to all monomials of total degree <= degree.
class MonomialLift {
 public:
  MonomialLift(const Topology& topo, int degree) : degree_(degree) {
    attached_.resize(topo.rods.size());
    for (std::size_t s = 0; s < topo.springs.size(); ++s) {
      const SpringDef& sd = topo.springs[s];
      if (!sd.a.is_anchor())
        attached_[static_cast<std::size_t>(sd.a.rod_index)].push_back(s);
      if (!sd.b.is_anchor())
        attached_[static_cast<std::size_t>(sd.b.rod_index)].push_back(s);
    }
    for (std::size_t i = 0; i < attached_.size(); ++i) {
      const int n_vars = static_cast<int>(2 * attached_[i].size() + 6);
      monomials_.push_back(enumerate(n_vars, degree));
    }
  }

  int n_features(std::size_t rod) const {
    return static_cast<int>(monomials_[rod].size());
  }

  std::vector<double> operator()(const Topology& topo,
                                 std::span<const RodState> states,
                                 std::size_t rod) const {
    std::vector<double> vars;
    vars.reserve(2 * attached_[rod].size() + 6);
    for (std::size_t s : attached_[rod]) {
      const SpringDef& sd = topo.springs[s];
      const auto [pa, va] = resolve_endpoint(topo, sd.a, states);
      const auto [pb, vb] = resolve_endpoint(topo, sd.b, states);
      const SpringMeasurement m = measure(pa, va, pb, vb, static_cast<int>(s));
      vars.push_back(m.ell);
      vars.push_back(m.sdot);
    }
    const RodState& st = states[rod];
    vars.insert(vars.end(), {st.v.x, st.v.y, st.v.z, st.w.x, st.w.y, st.w.z});
    std::vector<double> out;
    out.reserve(monomials_[rod].size());
    for (const auto& mono : monomials_[rod]) {
      double prod = 1.0;
      for (int v : mono) prod *= vars[static_cast<std::size_t>(v)];
      out.push_back(prod);
    }
    return out;
  }

 private:
  /// All multisets of variable indices of size 0..degree, in a fixed order
  /// (degree-major, lexicographic within a degree).
  static std::vector<std::vector<int>> enumerate(int n_vars, int degree) {
    std::vector<std::vector<int>> out{{}};  // the constant feature
    std::vector<std::vector<int>> current{{}};
    for (int d = 1; d <= degree; ++d) {
      std::vector<std::vector<int>> next;
      for (const auto& mono : current) {
        const int start = mono.empty() ? 0 : mono.back();
        for (int v = start; v < n_vars; ++v) {
          std::vector<int> m = mono;
          m.push_back(v);
          next.push_back(std::move(m));
        }
      }
      out.insert(out.end(), next.begin(), next.end());
      current = std::move(next);
    }
    return out;
  }

  int degree_;
  std::vector<std::vector<std::size_t>> attached_;  // per rod, spring-index order
  std::vector<std::vector<std::vector<int>>> monomials_;
};

/// Linear operator mapping lifted per-rod features to that rod's
/// accelerations (gravity subtracted). One operator per rod.
struct KoopmanModel {
  LiftFn lift;
  std::vector<Eigen::MatrixXd> weights;  ///< per rod: n_features x 6
  double ridge = 0.0;
  double condition = 0.0;  ///< max over rods

  std::vector<Accel> predict_accels(const Topology& topo,
                                    std::span<const RodState> states) const {
    std::vector<Accel> out(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      const std::vector<double> phi = lift(topo, states, i);
      Eigen::Map<const Eigen::VectorXd> pv(phi.data(),
                                           static_cast<Eigen::Index>(phi.size()));
      const Eigen::VectorXd y = weights[i].transpose() * pv;
      out[i] = {Vec3{y(0), y(1), y(2)} + topo.gravity, Vec3{y(3), y(4), y(5)}};
    }
    return out;
  }

  std::vector<RodState> predict_step(const Topology& topo,
                                     std::span<const RodState> states) const {
    const std::vector<Accel> acc = predict_accels(topo, states);
    std::vector<RodState> next(states.size());
    for (std::size_t i = 0; i < states.size(); ++i)
      next[i] = step(states[i], acc[i], topo.dt);
    return next;
  }
};

/// Fits a Koopman acceleration model on the same seeded transition subsample
/// identification would use. Lifted bases are usually underdetermined at
/// small fractions, so a rank-deficient fit falls back to a tiny ridge.
inline KoopmanModel koopman_fit_with_lift(
    const Topology& topo, std::span<const Trajectory> dataset, LiftFn lift,
    const std::function<int(std::size_t)>& n_features, double fraction = 1.0,
    std::uint64_t seed = 0) {
  std::vector<std::uint64_t> prefix{0};
  for (const Trajectory& traj : dataset)
    prefix.push_back(prefix.back() + traj.n_transitions());
  const std::uint64_t total = prefix.back();
  if (total == 0) throw Error("empty dataset");
  const std::uint64_t k = sample_count(total, fraction);
  if (k == 0) throw Error("fraction selects zero transitions");
  const std::vector<std::uint64_t> indices = sample_indices(total, k, seed);

  const std::size_t n_rods = topo.rods.size();
  std::vector<RegressionProblem> problems;
  for (std::size_t i = 0; i < n_rods; ++i) {
    std::vector<std::string> names;
    for (int f = 0; f < n_features(i); ++f)
      names.push_back("phi" + std::to_string(f));
    problems.emplace_back(std::move(names), 6);
  }
  double y[6];
  for (std::uint64_t g : indices) {
    const auto j = static_cast<std::size_t>(
        std::upper_bound(prefix.begin(), prefix.end(), g) - prefix.begin() - 1);
    const auto t = static_cast<std::size_t>(g - prefix[j]);
    const Trajectory& traj = dataset[j];
    const std::vector<RodTargets> targets =
        transition_targets(topo, traj.states[t], traj.states[t + 1]);
    for (std::size_t i = 0; i < n_rods; ++i) {
      const std::vector<double> phi = lift(topo, traj.states[t], i);
      y[0] = targets[i].lin.x;
      y[1] = targets[i].lin.y;
      y[2] = targets[i].lin.z;
      y[3] = targets[i].ang.x;
      y[4] = targets[i].ang.y;
      y[5] = targets[i].ang.z;
      problems[i].add(phi, y);
    }
  }

  KoopmanModel model;
  model.lift = std::move(lift);
  for (std::size_t i = 0; i < n_rods; ++i) {
    const OlsSolution sol =
        fit_ols_auto(problems[i], /*allow_rank_deficient=*/true);
    model.weights.push_back(sol.beta);
    model.ridge = std::max(model.ridge, sol.ridge);
    model.condition = std::max(model.condition, sol.condition);
  }
  return model;
}

/// Koopman baseline with the standard monomial basis of the given degree.
inline KoopmanModel koopman_fit(const Topology& topo,
                                std::span<const Trajectory> dataset,
                                int degree, double fraction = 1.0,
                                std::uint64_t seed = 0) {
  if (degree < 1) throw Error("koopman degree must be >= 1");
  auto lift = std::make_shared<MonomialLift>(topo, degree);
  return koopman_fit_with_lift(
      topo, dataset,
      [lift](const Topology& t, std::span<const RodState> s, std::size_t rod) {
        return (*lift)(t, s, rod);
      },
      [lift](std::size_t rod) { return lift->n_features(rod); }, fraction,
      seed);
}

/// Mean one-step prediction MSE of a next-state predictor over a dataset.
template <typename PredictFn>
double one_step_mse(std::span<const Trajectory> dataset, PredictFn&& predict) {
  double sum = 0.0;
  std::uint64_t count = 0;
  for (const Trajectory& traj : dataset) {
    for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
      const std::span<const Vec3> u =
          t < traj.commands.size() ? std::span<const Vec3>(traj.commands[t])
                                   : std::span<const Vec3>{};
      const std::vector<RodState> pred = predict(traj.states[t], u);
      sum += step_loss(pred, traj.states[t + 1]);
      ++count;
    }
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace springrod::sysid
