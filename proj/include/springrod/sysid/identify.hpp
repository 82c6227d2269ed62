#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "springrod/rng.hpp"
#include "springrod/sysid/composites.hpp"
#include "springrod/sysid/regression.hpp"

namespace springrod::sysid {

/// Stream id of the transition subsampler, fixed so every consumer of a
/// given seed (identification, baselines, sweeps) sees the same subsample.
inline constexpr std::uint64_t kSubsampleStream = 0xA11;

/// k distinct sorted indices drawn uniformly from [0, N) by selection
/// sampling; deterministic in (seed).
inline std::vector<std::uint64_t> sample_indices(std::uint64_t n,
                                                 std::uint64_t k,
                                                 std::uint64_t seed) {
  std::vector<std::uint64_t> out;
  out.reserve(k);
  CounterRng rng(seed, kSubsampleStream);
  std::uint64_t chosen = 0;
  for (std::uint64_t i = 0; i < n && chosen < k; ++i) {
    if (static_cast<double>(n - i) * rng.uniform() <
        static_cast<double>(k - chosen)) {
      out.push_back(i);
      ++chosen;
    }
  }
  return out;
}

/// Number of transitions a fraction selects: floor(f*N), all of them at f=1.
inline std::uint64_t sample_count(std::uint64_t n_transitions, double fraction) {
  if (fraction >= 1.0) return n_transitions;
  return static_cast<std::uint64_t>(fraction *
                                    static_cast<double>(n_transitions));
}

/// A known physical quantity that breaks the scale ambiguity: the mass of
/// one rod or the stiffness of one spring group.
struct Anchor {
  enum class Kind { Mass, Stiffness };
  Kind kind = Kind::Mass;
  double value = 1.0;
  int index = 0;  ///< rod index (Mass) or spring group (Stiffness)
};

struct IdentifyOptions {
  double fraction = 1.0;
  std::uint64_t seed = 0;
  bool per_rod = false;  ///< separate rod parameters per rod
  std::optional<Anchor> anchor;
};

/// Identification output. `composites` always; `decomposed` only when an
/// anchor pinned the scale.
struct IdentifiedParams {
  std::map<std::string, double> composites;
  std::map<std::string, double> implied_rest_length;  ///< "g0" -> KL0/K, a diagnostic
  std::optional<ParamSet> decomposed;
  std::optional<double> inertia_ratio_check;  ///< (I/M) / (L^2/12)
  double residual_rms = 0.0;       ///< max over fitted problems
  double condition_number = 0.0;   ///< max over fitted problems
  std::uint64_t n_samples = 0;     ///< transitions used
  double fraction = 1.0;
  std::uint64_t seed = 0;
  bool per_rod = false;
  bool controls_excluded = false;  ///< control blocks dropped (no excitation)
};

namespace detail {

inline std::vector<std::string> spring_block_names(const Topology& topo,
                                                   const std::string& denom,
                                                   std::span<const int> groups,
                                                   std::span<const int> ctls) {
  (void)topo;
  std::vector<std::string> names;
  for (int g : groups) {
    const std::string p = "g" + std::to_string(g) + ".";
    names.push_back(p + "K_over_" + denom);
    names.push_back(p + "c_over_" + denom);
    names.push_back(p + "KL0_over_" + denom);
  }
  for (int k : ctls)
    names.push_back("u" + std::to_string(k) + ".h_over_" + denom);
  return names;
}

}  // namespace detail

/// Accumulates transitions into the per-rod (or pooled) linear and angular
/// regression problems. Feed transitions in a fixed order for
/// bit-reproducible fits.
class IdentificationAccumulator {
 public:
  IdentificationAccumulator(const Topology& topo, bool per_rod,
                            bool include_controls)
      : topo_(topo), per_rod_(per_rod), include_controls_(include_controls) {
    const detail::Touching touch = detail::touching(topo);
    const int n_rods = static_cast<int>(topo.rods.size());
    if (per_rod_) {
      for (int r = 0; r < n_rods; ++r) {
        columns_.push_back(
            {std::vector<int>(touch.groups[static_cast<std::size_t>(r)].begin(),
                              touch.groups[static_cast<std::size_t>(r)].end()),
             include_controls_
                 ? std::vector<int>(
                       touch.ctl_groups[static_cast<std::size_t>(r)].begin(),
                       touch.ctl_groups[static_cast<std::size_t>(r)].end())
                 : std::vector<int>{}});
      }
    } else {
      std::vector<int> groups, ctls;
      for (int g = 0; g < topo.spring_group_count(); ++g) groups.push_back(g);
      if (include_controls_)
        for (int k = 0; k < topo.control_group_count(); ++k) ctls.push_back(k);
      columns_.push_back({groups, ctls});
    }
    for (const auto& col : columns_) {
      lin_.emplace_back(
          detail::spring_block_names(topo, "M", col.groups, col.ctls));
      ang_.emplace_back(
          detail::spring_block_names(topo, "I", col.groups, col.ctls));
    }
  }

  void add(std::span<const RodState> s0, std::span<const RodState> s1,
           std::span<const Vec3> commands) {
    const std::vector<RodFeatures> feats = rod_features(topo_, s0, commands);
    const std::vector<RodTargets> targets = transition_targets(topo_, s0, s1);
    std::vector<double> row;
    for (std::size_t i = 0; i < s0.size(); ++i) {
      const std::size_t prob = per_rod_ ? i : 0;
      const auto& col = columns_[prob];
      row.resize(3 * col.groups.size() + col.ctls.size());
      for (int axis = 0; axis < 3; ++axis) {
        fill_row(feats[i], col, /*angular=*/false, axis, row);
        lin_[prob].add(row, component(targets[i].lin, axis));
        fill_row(feats[i], col, /*angular=*/true, axis, row);
        ang_[prob].add(row, component(targets[i].ang, axis));
      }
    }
    ++n_transitions_;
  }

  /// Fits all problems and assembles the result (no anchor decomposition;
  /// identify() adds that).
  IdentifiedParams finish() const {
    IdentifiedParams result;
    result.per_rod = per_rod_;
    result.n_samples = n_transitions_;
    CompositeCoefficients comp = make_composites(topo_, per_rod_);
    for (std::size_t prob = 0; prob < columns_.size(); ++prob) {
      const auto& col = columns_[prob];
      const OlsSolution lin = fit_ols_auto(lin_[prob]);
      const OlsSolution ang = fit_ols_auto(ang_[prob]);
      result.residual_rms = std::max(
          {result.residual_rms, lin.residual_rms[0], ang.residual_rms[0]});
      result.condition_number =
          std::max({result.condition_number, lin.condition, ang.condition});
      const int rod = per_rod_ ? static_cast<int>(prob) : 0;
      for (std::size_t j = 0; j < col.groups.size(); ++j) {
        auto& b = comp.block(rod, col.groups[j]);
        b.k_m = lin.beta(static_cast<Eigen::Index>(3 * j), 0);
        b.c_m = lin.beta(static_cast<Eigen::Index>(3 * j + 1), 0);
        b.kl_m = lin.beta(static_cast<Eigen::Index>(3 * j + 2), 0);
        b.k_i = ang.beta(static_cast<Eigen::Index>(3 * j), 0);
        b.c_i = ang.beta(static_cast<Eigen::Index>(3 * j + 1), 0);
        b.kl_i = ang.beta(static_cast<Eigen::Index>(3 * j + 2), 0);
      }
      for (std::size_t j = 0; j < col.ctls.size(); ++j) {
        auto& b = comp.ctl_block(rod, col.ctls[j]);
        const auto idx = static_cast<Eigen::Index>(3 * col.groups.size() + j);
        b.h_m = lin.beta(idx, 0);
        b.h_i = ang.beta(idx, 0);
      }
    }
    result.composites = composites_to_map(topo_, comp);
    if (!include_controls_) {
      result.controls_excluded = topo_.control_group_count() > 0;
      std::erase_if(result.composites, [](const auto& kv) {
        return kv.first.find("u") == 0 || kv.first.find(".u") != std::string::npos;
      });
    }
    for (int g = 0; g < comp.n_groups; ++g) {
      const auto& b = comp.block(0, g);
      if (b.k_m != 0.0)
        result.implied_rest_length["g" + std::to_string(g)] = b.kl_m / b.k_m;
    }
    return result;
  }

  const Topology& topology() const { return topo_; }

 private:
  struct Columns {
    std::vector<int> groups;
    std::vector<int> ctls;
  };

  static double component(const Vec3& v, int axis) {
    return axis == 0 ? v.x : axis == 1 ? v.y : v.z;
  }

  void fill_row(const RodFeatures& f, const Columns& col, bool angular,
                int axis, std::vector<double>& row) const {
    std::size_t j = 0;
    for (int g : col.groups) {
      const auto& blocks =
          angular ? f.ang[static_cast<std::size_t>(g)]
                  : f.lin[static_cast<std::size_t>(g)];
      row[j++] = component(blocks[0], axis);
      row[j++] = component(blocks[1], axis);
      row[j++] = component(blocks[2], axis);
    }
    for (int k : col.ctls)
      row[j++] = component(angular ? f.ctl_ang[static_cast<std::size_t>(k)]
                                   : f.ctl_lin[static_cast<std::size_t>(k)],
                           axis);
  }

  const Topology& topo_;
  bool per_rod_;
  bool include_controls_;
  std::vector<Columns> columns_;
  std::deque<RegressionProblem> lin_;  // one problem, or one per rod
  std::deque<RegressionProblem> ang_;
  std::uint64_t n_transitions_ = 0;
};

namespace detail {

inline void decompose_shared(const Topology& topo,
                             const CompositeCoefficients& comp,
                             const Anchor& anchor, IdentifiedParams& result) {
  double M = 0.0;
  if (anchor.kind == Anchor::Kind::Mass) {
    M = anchor.value;
  } else {
    const auto& b = comp.block(0, anchor.index);
    if (b.k_m == 0.0) throw Error("stiffness anchor group has K/M == 0");
    M = anchor.value / b.k_m;
  }
  ParamSet p;
  p.rods.resize(1);
  p.rods[0].M = M;
  p.springs.resize(static_cast<std::size_t>(comp.n_groups));
  double I = 0.0;
  for (int g = 0; g < comp.n_groups; ++g) {
    const auto& b = comp.block(0, g);
    SpringParams& sp = p.springs[static_cast<std::size_t>(g)];
    sp.K = b.k_m * M;
    sp.c = b.c_m * M;
    sp.L0 = b.k_m != 0.0 ? b.kl_m / b.k_m : 0.0;
    if (g == 0) {
      if (b.k_i == 0.0) throw Error("cannot infer inertia: K/I == 0");
      I = sp.K / b.k_i;
    }
  }
  p.rods[0].I = I;
  p.control_scale.resize(static_cast<std::size_t>(comp.n_ctl_groups));
  for (int k = 0; k < comp.n_ctl_groups; ++k)
    p.control_scale[static_cast<std::size_t>(k)] = comp.ctl_block(0, k).h_m * M;
  const double L = topo.rods.empty() ? 0.0 : topo.rods[0].length;
  if (L > 0.0) result.inertia_ratio_check = (I / M) / (L * L / 12.0);
  result.decomposed = std::move(p);
}

inline void decompose_per_rod(const Topology& topo,
                              const CompositeCoefficients& comp,
                              const Anchor& anchor, IdentifiedParams& result) {
  const Touching touch = touching(topo);
  const int n_rods = comp.n_rods;
  const int n_groups = comp.n_groups;
  std::vector<double> M(static_cast<std::size_t>(n_rods), 0.0);
  std::vector<double> K(static_cast<std::size_t>(n_groups), 0.0);
  std::vector<bool> rod_known(static_cast<std::size_t>(n_rods), false);
  std::vector<bool> group_known(static_cast<std::size_t>(n_groups), false);
  std::deque<std::pair<bool, int>> queue;  // (is_rod, index)
  if (anchor.kind == Anchor::Kind::Mass) {
    M[static_cast<std::size_t>(anchor.index)] = anchor.value;
    rod_known[static_cast<std::size_t>(anchor.index)] = true;
    queue.emplace_back(true, anchor.index);
  } else {
    K[static_cast<std::size_t>(anchor.index)] = anchor.value;
    group_known[static_cast<std::size_t>(anchor.index)] = true;
    queue.emplace_back(false, anchor.index);
  }
  while (!queue.empty()) {
    const auto [is_rod, idx] = queue.front();
    queue.pop_front();
    if (is_rod) {
      for (int g : touch.groups[static_cast<std::size_t>(idx)]) {
        if (group_known[static_cast<std::size_t>(g)]) continue;
        const auto& b = comp.block(idx, g);
        K[static_cast<std::size_t>(g)] = b.k_m * M[static_cast<std::size_t>(idx)];
        group_known[static_cast<std::size_t>(g)] = true;
        queue.emplace_back(false, g);
      }
    } else {
      for (int r = 0; r < n_rods; ++r) {
        if (rod_known[static_cast<std::size_t>(r)]) continue;
        if (!touch.groups[static_cast<std::size_t>(r)].count(idx)) continue;
        const auto& b = comp.block(r, idx);
        if (b.k_m == 0.0) continue;
        M[static_cast<std::size_t>(r)] = K[static_cast<std::size_t>(idx)] / b.k_m;
        rod_known[static_cast<std::size_t>(r)] = true;
        queue.emplace_back(true, r);
      }
    }
  }
  for (bool known : rod_known)
    if (!known)
      throw Error("anchor does not reach every rod; cannot decompose");
  for (bool known : group_known)
    if (!known)
      throw Error("anchor does not reach every spring group; cannot decompose");

  ParamSet p;
  p.rods.resize(static_cast<std::size_t>(n_rods));
  p.springs.resize(static_cast<std::size_t>(n_groups));
  for (int g = 0; g < n_groups; ++g) {
    // any rod touching g carries the same group parameters
    for (int r = 0; r < n_rods; ++r) {
      if (!touch.groups[static_cast<std::size_t>(r)].count(g)) continue;
      const auto& b = comp.block(r, g);
      p.springs[static_cast<std::size_t>(g)] = {
          K[static_cast<std::size_t>(g)],
          b.c_m * M[static_cast<std::size_t>(r)],
          b.k_m != 0.0 ? b.kl_m / b.k_m : 0.0};
      break;
    }
  }
  for (int r = 0; r < n_rods; ++r) {
    p.rods[static_cast<std::size_t>(r)].M = M[static_cast<std::size_t>(r)];
    const auto& groups = touch.groups[static_cast<std::size_t>(r)];
    if (groups.empty())
      throw Error("rod " + std::to_string(r) +
                  " touches no spring; inertia unobservable");
    const int g = *groups.begin();
    const auto& b = comp.block(r, g);
    if (b.k_i == 0.0) throw Error("cannot infer inertia: K/I == 0");
    p.rods[static_cast<std::size_t>(r)].I =
        K[static_cast<std::size_t>(g)] / b.k_i;
  }
  p.control_scale.resize(static_cast<std::size_t>(comp.n_ctl_groups), 0.0);
  for (const ControlDef& c : topo.controls) {
    const auto k = static_cast<std::size_t>(c.group);
    if (p.control_scale[k] != 0.0) continue;
    p.control_scale[k] = comp.ctl_block(c.rod_index, c.group).h_m *
                         M[static_cast<std::size_t>(c.rod_index)];
  }
  result.decomposed = std::move(p);
}

}  // namespace detail

namespace detail {

inline void apply_anchor(const Topology& topo, const IdentifyOptions& opts,
                         IdentifiedParams& result) {
  if (!opts.anchor) return;
  const CompositeCoefficients comp =
      composites_from_map(topo, result.composites, opts.per_rod);
  if (opts.per_rod)
    decompose_per_rod(topo, comp, *opts.anchor, result);
  else
    decompose_shared(topo, comp, *opts.anchor, result);
}

}  // namespace detail

/// Identification over already-materialized transitions (used by the CLI's
/// streaming loader). Transitions must arrive in a fixed order for
/// bit-reproducible results.
inline IdentifiedParams identify_transitions(
    const Topology& topo, std::span<const Transition> transitions,
    const IdentifyOptions& opts = {}) {
  if (transitions.empty()) throw Error("no transitions to identify from");
  bool any_command = false;
  for (const Transition& tr : transitions)
    for (const Vec3& u : tr.u)
      if (norm_squared(u) > 0.0) any_command = true;
  IdentificationAccumulator acc(topo, opts.per_rod,
                                !topo.controls.empty() && any_command);
  for (const Transition& tr : transitions) acc.add(tr.s0, tr.s1, tr.u);
  IdentifiedParams result = acc.finish();
  result.fraction = opts.fraction;
  result.seed = opts.seed;
  detail::apply_anchor(topo, opts, result);
  return result;
}

/// Identifies composite coefficients from a dataset by closed-form least
/// squares on a seeded uniform subsample of the transitions, and decomposes
/// them into physical parameters when an anchor is supplied.
inline IdentifiedParams identify(const Topology& topo,
                                 std::span<const Trajectory> dataset,
                                 const IdentifyOptions& opts = {}) {
  if (!(opts.fraction > 0.0) || opts.fraction > 1.0)
    throw Error("fraction must be in (0, 1]");
  std::vector<std::uint64_t> prefix{0};
  for (const Trajectory& traj : dataset) {
    if (traj.n_rods() != topo.rods.size() && traj.n_transitions() > 0)
      throw InconsistentTrajectoryError("trajectory rod count mismatch");
    prefix.push_back(prefix.back() + traj.n_transitions());
  }
  const std::uint64_t total = prefix.back();
  const std::uint64_t k = sample_count(total, opts.fraction);
  if (k == 0)
    throw Error("fraction " + std::to_string(opts.fraction) +
                " selects zero of " + std::to_string(total) + " transitions");
  const std::vector<std::uint64_t> indices =
      sample_indices(total, k, opts.seed);

  // Control columns participate only when the selected commands excite them.
  bool any_command = false;
  if (!topo.controls.empty()) {
    for (std::uint64_t g : indices) {
      const auto traj_it =
          std::upper_bound(prefix.begin(), prefix.end(), g) - prefix.begin() - 1;
      const auto j = static_cast<std::size_t>(traj_it);
      const auto t = static_cast<std::size_t>(g - prefix[j]);
      if (t < dataset[j].commands.size())
        for (const Vec3& u : dataset[j].commands[t])
          if (norm_squared(u) > 0.0) any_command = true;
      if (any_command) break;
    }
  }

  IdentificationAccumulator acc(topo, opts.per_rod,
                                !topo.controls.empty() && any_command);
  for (std::uint64_t g : indices) {
    const auto traj_it =
        std::upper_bound(prefix.begin(), prefix.end(), g) - prefix.begin() - 1;
    const auto j = static_cast<std::size_t>(traj_it);
    const auto t = static_cast<std::size_t>(g - prefix[j]);
    const Trajectory& traj = dataset[j];
    acc.add(traj.states[t], traj.states[t + 1],
            t < traj.commands.size() ? std::span<const Vec3>(traj.commands[t])
                                     : std::span<const Vec3>{});
  }
  IdentifiedParams result = acc.finish();
  result.fraction = opts.fraction;
  result.seed = opts.seed;
  detail::apply_anchor(topo, opts, result);
  return result;
}

/// Max relative error between matching composite keys; keys present in
/// `expected` but absent from `actual` are counted as infinite error.
inline double max_relative_composite_error(
    const std::map<std::string, double>& actual,
    const std::map<std::string, double>& expected) {
  double worst = 0.0;
  for (const auto& [key, truth] : expected) {
    const auto it = actual.find(key);
    if (it == actual.end())
      return std::numeric_limits<double>::infinity();
    const double denom = std::abs(truth) > 0.0 ? std::abs(truth) : 1.0;
    worst = std::max(worst, std::abs(it->second - truth) / denom);
  }
  return worst;
}

}  // namespace springrod::sysid
