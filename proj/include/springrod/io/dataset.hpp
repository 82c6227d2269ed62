#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "springrod/io/trajectory.hpp"
#include "springrod/oracle.hpp"
#include "springrod/parallel.hpp"
#include "springrod/sysid/features.hpp"

namespace springrod::io {

/// Metadata describing a generated dataset directory. Everything needed to
/// regenerate or audit the data lives here.
struct DatasetManifest {
  std::string topology_file = "topology.json";
  std::optional<std::string> true_params_file;  ///< oracle runs only
  std::uint64_t seed = 0;
  double dt = 0.0;
  long steps_per_traj = 0;
  long n_train = 0;
  long n_val = 0;
  long n_test = 0;
  InitSampler init;
  ControlSampler control;
  std::string topology_hash;
};

inline json manifest_to_json(const DatasetManifest& m) {
  json j{{"schema_version", kSchemaVersion},
         {"topology_file", m.topology_file},
         {"seed", m.seed},
         {"dt", m.dt},
         {"steps_per_traj", m.steps_per_traj},
         {"split", {{"train", m.n_train}, {"val", m.n_val}, {"test", m.n_test}}},
         {"sampler",
          {{"sigma_p", m.init.sigma_p},
           {"sigma_v", m.init.sigma_v},
           {"sigma_w", m.init.sigma_w},
           {"sigma_q", m.init.sigma_q},
           {"control",
            {{"enabled", m.control.enabled},
             {"magnitude", m.control.magnitude},
             {"hold_steps", m.control.hold_steps}}}}},
         {"topology_hash", m.topology_hash}};
  if (m.true_params_file) j["true_params_file"] = *m.true_params_file;
  return j;
}

inline DatasetManifest manifest_from_json(const json& j) {
  detail::check_schema_version(j, "manifest");
  DatasetManifest m;
  m.topology_file = detail::require(j, "topology_file", "manifest");
  if (j.contains("true_params_file"))
    m.true_params_file = j["true_params_file"].get<std::string>();
  m.seed = detail::require(j, "seed", "manifest").get<std::uint64_t>();
  m.dt = detail::require(j, "dt", "manifest").get<double>();
  m.steps_per_traj =
      detail::require(j, "steps_per_traj", "manifest").get<long>();
  const json& split = detail::require(j, "split", "manifest");
  m.n_train = detail::require(split, "train", "split").get<long>();
  m.n_val = detail::require(split, "val", "split").get<long>();
  m.n_test = detail::require(split, "test", "split").get<long>();
  const json& sampler = detail::require(j, "sampler", "manifest");
  m.init.sigma_p = sampler.value("sigma_p", 0.05);
  m.init.sigma_v = sampler.value("sigma_v", 0.1);
  m.init.sigma_w = sampler.value("sigma_w", 0.0);
  m.init.sigma_q = sampler.value("sigma_q", 0.0);
  if (sampler.contains("control")) {
    const json& ctl = sampler["control"];
    m.control.enabled = ctl.value("enabled", false);
    m.control.magnitude = ctl.value("magnitude", 1.0);
    m.control.hold_steps = ctl.value("hold_steps", 50);
  }
  m.topology_hash = j.value("topology_hash", "");
  return m;
}

inline std::string trajectory_filename(long index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "traj_%06ld.jsonl", index);
  return buf;
}

/// Split names are the subdirectory names.
inline const char* kSplits[] = {"train", "val", "test"};

inline long split_count(const DatasetManifest& m, const std::string& split) {
  if (split == "train") return m.n_train;
  if (split == "val") return m.n_val;
  if (split == "test") return m.n_test;
  throw Error("unknown split '" + split + "'");
}

/// Stream-index offset of a split: val trajectories continue the train
/// numbering, test continues val, so all splits are disjoint draws.
inline std::uint64_t split_base_index(const DatasetManifest& m,
                                      const std::string& split) {
  if (split == "train") return 0;
  if (split == "val") return static_cast<std::uint64_t>(m.n_train);
  if (split == "test") return static_cast<std::uint64_t>(m.n_train + m.n_val);
  throw Error("unknown split '" + split + "'");
}

/// Generates and writes a full oracle dataset directory:
///   manifest.json, topology.json, true_params.json, train/, val/, test/.
/// Trajectories are generated and written in parallel; output is
/// deterministic in the manifest alone.
inline void generate_dataset_dir(const std::filesystem::path& dir,
                                 const OracleSpec& spec,
                                 const DatasetManifest& manifest) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const json topo_json = topology_to_json(spec.topology, spec.nominal_states);
  save_json_file((dir / manifest.topology_file).string(), topo_json);
  if (manifest.true_params_file)
    save_json_file((dir / *manifest.true_params_file).string(),
                   params_to_json(spec.true_params));
  DatasetManifest stamped = manifest;
  stamped.topology_hash = topology_hash(topo_json);
  save_json_file((dir / "manifest.json").string(), manifest_to_json(stamped));
  for (const char* split : kSplits) {
    const long count = split_count(stamped, split);
    if (count == 0) continue;
    fs::create_directories(dir / split);
    const std::uint64_t base = split_base_index(stamped, split);
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
      const Trajectory traj =
          generate_trajectory(spec, base + i, stamped.steps_per_traj);
      write_trajectory(traj,
                       dir / split / trajectory_filename(static_cast<long>(i)));
    });
  }
}

struct LoadedDataset {
  DatasetManifest manifest;
  TopologyConfig config;
  std::optional<ParamSet> true_params;
};

/// Loads manifest + topology and re-verifies the recorded topology hash
/// against the actual file contents.
inline LoadedDataset open_dataset(const std::filesystem::path& dir) {
  LoadedDataset d;
  d.manifest =
      manifest_from_json(load_json_file((dir / "manifest.json").string()));
  const json topo_json =
      load_json_file((dir / d.manifest.topology_file).string());
  if (!d.manifest.topology_hash.empty() &&
      topology_hash(topo_json) != d.manifest.topology_hash)
    throw SchemaError("dataset topology file does not match manifest hash (" +
                      topology_hash(topo_json) + " vs " +
                      d.manifest.topology_hash + ")");
  d.config = topology_from_json(topo_json);
  if (d.manifest.dt != d.config.topology.dt)
    throw SchemaError("manifest dt does not match topology dt");
  if (d.manifest.true_params_file)
    d.true_params = params_from_json(
        load_json_file((dir / *d.manifest.true_params_file).string()));
  return d;
}

/// Reads every trajectory of a split into memory (parallel across files).
inline std::vector<Trajectory> load_split(const std::filesystem::path& dir,
                                          const DatasetManifest& manifest,
                                          const std::string& split) {
  const long count = split_count(manifest, split);
  std::vector<Trajectory> out(static_cast<std::size_t>(count));
  parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
    out[i] =
        read_trajectory(dir / split / trajectory_filename(static_cast<long>(i)));
  });
  return out;
}

/// Loads only the transitions named by sorted global indices (trajectory
/// j transition t <-> global j*steps_per_traj + t), parsing just the needed
/// lines of each file. This is what keeps subsample-based fits fast on big
/// datasets.
inline std::vector<sysid::Transition> load_transitions(
    const std::filesystem::path& dir, const DatasetManifest& manifest,
    const std::string& split, const std::vector<std::uint64_t>& global_indices) {
  const auto steps = static_cast<std::uint64_t>(manifest.steps_per_traj);
  std::map<long, std::vector<long>> per_traj;  // traj -> transition indices
  for (std::uint64_t g : global_indices)
    per_traj[static_cast<long>(g / steps)].push_back(
        static_cast<long>(g % steps));
  std::vector<std::pair<long, std::vector<long>>> jobs(per_traj.begin(),
                                                       per_traj.end());
  std::vector<std::vector<sysid::Transition>> partial(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t jj) {
    const auto& [traj_index, transitions] = jobs[jj];
    // records needed: every t and t+1, deduplicated, sorted
    std::vector<long> needed;
    needed.reserve(2 * transitions.size());
    for (long t : transitions) {
      if (needed.empty() || needed.back() < t) needed.push_back(t);
      if (needed.back() < t + 1) needed.push_back(t + 1);
    }
    const SelectedRecords rec = read_selected_records(
        dir / split / trajectory_filename(traj_index), needed);
    std::vector<sysid::Transition>& out = partial[jj];
    out.reserve(transitions.size());
    for (long t : transitions) {
      const auto pos0 = static_cast<std::size_t>(
          std::lower_bound(needed.begin(), needed.end(), t) - needed.begin());
      const auto pos1 = static_cast<std::size_t>(
          std::lower_bound(needed.begin(), needed.end(), t + 1) -
          needed.begin());
      out.push_back(
          {rec.states[pos0], rec.states[pos1], rec.commands[pos0]});
    }
  });
  std::vector<sysid::Transition> out;
  out.reserve(global_indices.size());
  for (auto& p : partial)
    for (auto& tr : p) out.push_back(std::move(tr));
  return out;
}

}  // namespace springrod::io
