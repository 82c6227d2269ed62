// springrod command-line interface: oracle dataset generation, forward
// simulation, least-squares identification and its evaluation harness.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "springrod/io/csv.hpp"
#include "springrod/io/dataset.hpp"
#include "springrod/springrod.hpp"

namespace fs = std::filesystem;
using namespace springrod;

namespace {

std::string default_out(const std::string& given, const std::string& fallback) {
  if (!given.empty()) return given;
  if (const char* env = std::getenv("SPRINGROD_OUT_DIR"))
    return (fs::path(env) / fallback).string();
  throw Error("--out not given and SPRINGROD_OUT_DIR not set");
}

io::TopologyConfig load_config(const std::string& path) {
  return io::topology_from_json(io::load_json_file(path));
}

ParamSet load_params_checked(const std::string& path, const Topology& topo) {
  const ParamSet params = io::params_from_json(io::load_json_file(path));
  const auto issues = validate_params(topo, params);
  if (!issues.empty()) {
    std::string msg = "invalid parameters in " + path + ":";
    for (const auto& issue : issues) msg += "\n  - " + issue.message;
    throw SchemaError(msg);
  }
  return params;
}

sysid::Anchor parse_anchor(const std::string& text) {
  // forms: mass=1.2 | mass@0=1.2 | stiffness=120 | stiffness@2=120
  const auto eq = text.find('=');
  if (eq == std::string::npos)
    throw Error("anchor must look like mass=<v> or stiffness=<v>");
  std::string head = text.substr(0, eq);
  sysid::Anchor anchor;
  anchor.value = std::stod(text.substr(eq + 1));
  const auto at = head.find('@');
  if (at != std::string::npos) {
    anchor.index = std::stoi(head.substr(at + 1));
    head = head.substr(0, at);
  }
  if (head == "mass")
    anchor.kind = sysid::Anchor::Kind::Mass;
  else if (head == "stiffness")
    anchor.kind = sysid::Anchor::Kind::Stiffness;
  else
    throw Error("unknown anchor kind '" + head + "'");
  return anchor;
}

/// Composite coefficients from either an identification report or a full
/// parameter file.
sysid::CompositeCoefficients load_composites(const std::string& path,
                                             const Topology& topo,
                                             bool& per_rod) {
  const io::json j = io::load_json_file(path);
  if (j.contains("composites")) {
    const sysid::IdentifiedParams id = io::identified_from_json(j);
    per_rod = id.per_rod;
    return sysid::composites_from_map(topo, id.composites, id.per_rod);
  }
  if (j.contains("springs")) {
    const ParamSet params = io::params_from_json(j);
    per_rod = !params.shared_rods();
    return sysid::composites_from_params(topo, params, per_rod);
  }
  throw SchemaError(path + ": neither an identification report nor a parameter file");
}

/// Streaming identification: loads only the subsampled transitions.
sysid::IdentifiedParams identify_streaming(const fs::path& dir,
                                           const io::LoadedDataset& data,
                                           const sysid::IdentifyOptions& opts,
                                           const std::string& split) {
  const std::uint64_t total =
      static_cast<std::uint64_t>(io::split_count(data.manifest, split)) *
      static_cast<std::uint64_t>(data.manifest.steps_per_traj);
  if (total == 0) throw Error("split '" + split + "' is empty");
  const std::uint64_t k = sysid::sample_count(total, opts.fraction);
  if (k == 0)
    throw Error("fraction " + std::to_string(opts.fraction) +
                " selects zero of " + std::to_string(total) + " transitions");
  const auto indices = sysid::sample_indices(total, k, opts.seed);
  const auto transitions =
      io::load_transitions(dir, data.manifest, split, indices);
  return sysid::identify_transitions(data.config.topology, transitions, opts);
}

struct EvalAccum {
  std::vector<double> p, v, q, w;  // per step sums of squared error
  std::vector<long> count;         // rods*traj accumulated per step
};

int cmd_generate(const std::string& config_path, const std::string& params_path,
                 long n_traj, long n_val, long n_test, long steps,
                 std::uint64_t seed, const std::string& out, double sigma_p,
                 double sigma_v, double sigma_w, double sigma_q, bool perturb,
                 double perturb_mag, int hold) {
  const io::TopologyConfig cfg = load_config(config_path);
  if (!cfg.nominal_states)
    throw SchemaError(config_path +
                      ": config needs nominal_states for dataset generation");
  OracleSpec spec;
  spec.topology = cfg.topology;
  spec.true_params = load_params_checked(params_path, cfg.topology);
  spec.nominal_states = *cfg.nominal_states;
  spec.init = {sigma_p, sigma_v, sigma_w, sigma_q};
  spec.control = {perturb, perturb_mag, hold};
  spec.seed = seed;
  io::DatasetManifest manifest;
  manifest.true_params_file = "true_params.json";
  manifest.seed = seed;
  manifest.dt = cfg.topology.dt;
  manifest.steps_per_traj = steps;
  manifest.n_train = n_traj;
  manifest.n_val = n_val;
  manifest.n_test = n_test;
  manifest.init = spec.init;
  manifest.control = spec.control;
  io::generate_dataset_dir(out, spec, manifest);
  std::cout << "wrote " << n_traj << "+" << n_val << "+" << n_test
            << " trajectories of " << steps << " steps to " << out << "\n";
  return 0;
}

int cmd_identify(const std::string& data_dir, double fraction,
                 std::uint64_t seed, const std::string& anchor_text,
                 bool per_rod, const std::string& report_path,
                 const std::string& split) {
  const io::LoadedDataset data = io::open_dataset(data_dir);
  sysid::IdentifyOptions opts;
  opts.fraction = fraction;
  opts.seed = seed;
  opts.per_rod = per_rod;
  if (!anchor_text.empty()) opts.anchor = parse_anchor(anchor_text);
  const sysid::IdentifiedParams id =
      identify_streaming(data_dir, data, opts, split);
  io::save_json_file(report_path, io::identified_to_json(id));
  std::cout << "identified " << id.composites.size() << " composites from "
            << id.n_samples << " transitions (residual_rms "
            << id.residual_rms << ", condition " << id.condition_number
            << ")\n";
  if (data.true_params && data.true_params->shared_rods() && !per_rod) {
    const auto truth = sysid::composites_to_map(
        data.config.topology,
        sysid::composites_from_params(data.config.topology, *data.true_params));
    std::cout << "max relative composite error vs oracle truth: "
              << sysid::max_relative_composite_error(id.composites, truth)
              << "\n";
  }
  std::cout << "report written to " << report_path << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& params_path,
                 const std::string& init_path, long steps,
                 const std::string& out) {
  const io::TopologyConfig cfg = load_config(config_path);
  const ParamSet params = load_params_checked(params_path, cfg.topology);
  std::vector<RodState> initial;
  if (!init_path.empty()) {
    const io::json j = io::load_json_file(init_path);
    for (const io::json& s : io::detail::require(j, "rods", "initial state"))
      initial.push_back(io::rod_state_from_json(s));
  } else if (cfg.nominal_states) {
    initial = *cfg.nominal_states;
  } else {
    throw Error("no --init given and config has no nominal_states");
  }
  if (initial.size() != cfg.topology.rods.size())
    throw SchemaError("initial state rod count mismatch");
  const Trajectory traj = rollout(cfg.topology, params, initial, {}, steps);
  io::write_trajectory(traj, out);
  std::cout << "wrote " << traj.states.size() << " states to " << out << "\n";
  return 0;
}

int cmd_evaluate(const std::string& data_dir, const std::string& params_path,
                 long horizon, const std::string& out,
                 const std::string& split, const std::string& config_path) {
  const io::LoadedDataset data = io::open_dataset(data_dir);
  if (!config_path.empty()) {
    const io::json topo_json = io::load_json_file(config_path);
    if (io::topology_hash(topo_json) != data.manifest.topology_hash)
      throw SchemaError("supplied config does not match the dataset manifest "
                        "topology hash");
  }
  bool per_rod = false;
  const sysid::CompositeCoefficients comps =
      load_composites(params_path, data.config.topology, per_rod);
  const std::vector<Trajectory> trajs =
      io::load_split(data_dir, data.manifest, split);
  if (trajs.empty()) throw Error("split '" + split + "' is empty");
  if (horizon < 1) throw Error("--horizon must be >= 1");
  EvalAccum acc;
  acc.p.assign(static_cast<std::size_t>(horizon), 0.0);
  acc.v.assign(static_cast<std::size_t>(horizon), 0.0);
  acc.q.assign(static_cast<std::size_t>(horizon), 0.0);
  acc.w.assign(static_cast<std::size_t>(horizon), 0.0);
  acc.count.assign(static_cast<std::size_t>(horizon), 0);
  const Topology& topo = data.config.topology;
  for (const Trajectory& traj : trajs) {
    const long h =
        std::min<long>(horizon, static_cast<long>(traj.n_transitions()));
    std::vector<RodState> current = traj.states[0];
    for (long s = 0; s < h; ++s) {
      const std::span<const Vec3> u =
          static_cast<std::size_t>(s) < traj.commands.size()
              ? std::span<const Vec3>(traj.commands[static_cast<std::size_t>(s)])
              : std::span<const Vec3>{};
      current = sysid::predict_step_composites(topo, comps, current, u);
      const auto& truth = traj.states[static_cast<std::size_t>(s) + 1];
      const auto si = static_cast<std::size_t>(s);
      for (std::size_t i = 0; i < current.size(); ++i) {
        acc.p[si] += norm_squared(current[i].p - truth[i].p);
        acc.v[si] += norm_squared(current[i].v - truth[i].v);
        const Quat dq{current[i].q.w - truth[i].q.w,
                      current[i].q.x - truth[i].q.x,
                      current[i].q.y - truth[i].q.y,
                      current[i].q.z - truth[i].q.z};
        acc.q[si] += dot(dq, dq);
        acc.w[si] += norm_squared(current[i].w - truth[i].w);
        ++acc.count[si];
      }
    }
  }
  io::CsvWriter csv(out, {"step", "mse_p", "mse_v", "mse_q", "mse_w"});
  for (long s = 0; s < horizon; ++s) {
    const auto si = static_cast<std::size_t>(s);
    if (acc.count[si] == 0) break;
    const double np = 3.0 * static_cast<double>(acc.count[si]);
    const double nq = 4.0 * static_cast<double>(acc.count[si]);
    csv.row({static_cast<double>(s + 1), acc.p[si] / np, acc.v[si] / np,
             acc.q[si] / nq, acc.w[si] / np});
  }
  std::cout << "wrote per-step MSE over " << trajs.size() << " '" << split
            << "' trajectories to " << out << "\n";
  return 0;
}

int cmd_finetune(const std::string& data_dir, const std::string& frozen_path,
                 const std::string& report_path, const std::string& split) {
  const io::LoadedDataset data = io::open_dataset(data_dir);
  const sysid::IdentifiedParams frozen =
      io::identified_from_json(io::load_json_file(frozen_path));
  const std::vector<Trajectory> trajs =
      io::load_split(data_dir, data.manifest, split);
  const sysid::ControlFitResult fit =
      sysid::finetune_control_scale(data.config.topology, frozen, trajs);
  io::json j{{"schema_version", io::kSchemaVersion},
             {"h_over_M", fit.h_over_M},
             {"h_over_I", fit.h_over_I},
             {"n_samples", fit.n_samples}};
  if (fit.h) j["h"] = *fit.h;
  io::save_json_file(report_path, j);
  std::cout << "control scale fitted from " << fit.n_samples << " transitions";
  if (fit.h) {
    std::cout << "; h =";
    for (double h : *fit.h) std::cout << " " << h;
  }
  std::cout << "\n";
  return 0;
}

int cmd_koopman(const std::string& data_dir, int degree, double fraction,
                std::uint64_t seed, const std::string& report_path,
                const std::string& train_split, const std::string& eval_split) {
  const io::LoadedDataset data = io::open_dataset(data_dir);
  const std::vector<Trajectory> train =
      io::load_split(data_dir, data.manifest, train_split);
  const std::vector<Trajectory> test =
      io::load_split(data_dir, data.manifest, eval_split);
  if (test.empty()) throw Error("split '" + eval_split + "' is empty");
  const Topology& topo = data.config.topology;
  const sysid::KoopmanModel model =
      sysid::koopman_fit(topo, train, degree, fraction, seed);
  const double test_mse = sysid::one_step_mse(
      test, [&](std::span<const RodState> s, std::span<const Vec3>) {
        return model.predict_step(topo, s);
      });
  io::json j{{"schema_version", io::kSchemaVersion},
             {"degree", degree},
             {"fraction", fraction},
             {"seed", seed},
             {"ridge", model.ridge},
             {"condition", model.condition},
             {"one_step_test_mse", test_mse}};
  io::save_json_file(report_path, j);
  std::cout << "koopman degree " << degree << " one-step '" << eval_split
            << "' MSE: " << test_mse << "\n";
  return 0;
}

int cmd_sweep(const std::string& data_dir, const std::string& fractions_text,
              int n_seeds, std::uint64_t seed_base, const std::string& out,
              const std::string& split) {
  const io::LoadedDataset data = io::open_dataset(data_dir);
  if (!data.true_params)
    throw Error("sweep-efficiency needs an oracle dataset with true_params");
  if (!data.true_params->shared_rods())
    throw Error("sweep-efficiency expects shared rod parameters");
  const auto truth = sysid::composites_to_map(
      data.config.topology,
      sysid::composites_from_params(data.config.topology, *data.true_params));
  std::vector<double> fractions;
  {
    std::string token;
    std::istringstream in(fractions_text);
    while (std::getline(in, token, ',')) fractions.push_back(std::stod(token));
  }
  if (fractions.empty()) throw Error("no fractions given");
  io::CsvWriter csv(out, {"fraction", "samples", "mean_rel_err", "std_rel_err"});
  for (double fraction : fractions) {
    std::vector<double> errors;
    std::uint64_t samples = 0;
    for (int s = 0; s < n_seeds; ++s) {
      sysid::IdentifyOptions opts;
      opts.fraction = fraction;
      opts.seed = seed_base + static_cast<std::uint64_t>(s);
      const sysid::IdentifiedParams id =
          identify_streaming(data_dir, data, opts, split);
      errors.push_back(
          sysid::max_relative_composite_error(id.composites, truth));
      samples = id.n_samples;
    }
    const double mean = std::accumulate(errors.begin(), errors.end(), 0.0) /
                        static_cast<double>(errors.size());
    double var = 0.0;
    for (double e : errors) var += (e - mean) * (e - mean);
    const double stddev =
        errors.size() > 1
            ? std::sqrt(var / static_cast<double>(errors.size() - 1))
            : 0.0;
    csv.row({fraction, static_cast<double>(samples), mean, stddev});
    std::cout << "fraction " << fraction << ": " << samples
              << " samples, mean max rel err " << mean << " (std " << stddev
              << ")\n";
  }
  std::cout << "wrote sweep to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spring-rod physics engine and system identification"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "generate an oracle dataset");
  std::string gen_config, gen_params, gen_out;
  long gen_traj = 1000, gen_val = 0, gen_test = 0, gen_steps = 736;
  std::uint64_t gen_seed = 0;
  double gs_p = 0.05, gs_v = 0.1, gs_w = 0.0, gs_q = 0.0, gen_mag = 1.0;
  bool gen_perturb = false;
  int gen_hold = 50;
  gen->add_option("--config", gen_config, "topology config JSON")->required();
  gen->add_option("--params", gen_params, "true parameter JSON")->required();
  gen->add_option("--n-traj", gen_traj, "training trajectories");
  gen->add_option("--n-val", gen_val, "validation trajectories");
  gen->add_option("--n-test", gen_test, "test trajectories");
  gen->add_option("--steps", gen_steps, "steps per trajectory");
  gen->add_option("--seed", gen_seed, "dataset seed");
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--sigma-p", gs_p, "initial position jitter (m)");
  gen->add_option("--sigma-v", gs_v, "initial velocity jitter (m/s)");
  gen->add_option("--sigma-w", gs_w, "initial angular velocity jitter (rad/s)");
  gen->add_option("--sigma-q", gs_q, "initial orientation jitter (rad)");
  gen->add_flag("--perturb", gen_perturb, "sample random directed control commands");
  gen->add_option("--perturb-mag", gen_mag, "max command magnitude");
  gen->add_option("--hold", gen_hold, "steps a sampled command is held");

  // identify
  auto* ident = app.add_subcommand("identify", "least-squares identification");
  std::string id_data, id_anchor, id_report, id_split = "train";
  double id_fraction = 1.0;
  std::uint64_t id_seed = 0;
  bool id_per_rod = false;
  ident->add_option("--data", id_data, "dataset directory")->required();
  ident->add_option("--fraction", id_fraction, "fraction of transitions")
      ->check(CLI::Range(std::nextafter(0.0, 1.0), 1.0))
      ->required();
  ident->add_option("--seed", id_seed, "subsample seed");
  ident->add_option("--anchor", id_anchor,
                    "scale anchor: mass[@rod]=<v> or stiffness[@group]=<v>");
  ident->add_flag("--per-rod", id_per_rod, "separate rod parameters per rod");
  ident->add_option("--report", id_report, "output report JSON")->required();
  ident->add_option("--split", id_split, "split to fit on");

  // simulate
  auto* sim = app.add_subcommand("simulate", "forward rollout");
  std::string sim_config, sim_params, sim_init, sim_out;
  long sim_steps = 1000;
  sim->add_option("--config", sim_config)->required();
  sim->add_option("--params", sim_params)->required();
  sim->add_option("--init", sim_init, "initial state JSON (default: nominal)");
  sim->add_option("--steps", sim_steps)->required();
  sim->add_option("--out", sim_out, "output trajectory (jsonl)");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "per-step rollout MSE curves");
  std::string ev_data, ev_params, ev_out, ev_split = "test", ev_config;
  long ev_horizon = 1;
  eval->add_option("--data", ev_data)->required();
  eval->add_option("--params", ev_params,
                   "identification report or parameter JSON")
      ->required();
  eval->add_option("--horizon", ev_horizon)->required();
  eval->add_option("--out", ev_out, "output CSV");
  eval->add_option("--split", ev_split);
  eval->add_option("--config", ev_config, "cross-check topology hash");

  // finetune-control
  auto* fine = app.add_subcommand("finetune-control",
                                  "fit control scale, all else frozen");
  std::string fi_data, fi_frozen, fi_report, fi_split = "train";
  fine->add_option("--data", fi_data)->required();
  fine->add_option("--frozen", fi_frozen, "frozen identification report")
      ->required();
  fine->add_option("--report", fi_report)->required();
  fine->add_option("--split", fi_split);

  // koopman
  auto* koop = app.add_subcommand("koopman", "Koopman acceleration baseline");
  std::string ko_data, ko_report, ko_train = "train", ko_eval = "test";
  int ko_degree = 2;
  double ko_fraction = 1.0;
  std::uint64_t ko_seed = 0;
  koop->add_option("--data", ko_data)->required();
  koop->add_option("--degree", ko_degree, "monomial degree");
  koop->add_option("--fraction", ko_fraction, "training fraction");
  koop->add_option("--seed", ko_seed);
  koop->add_option("--report", ko_report)->required();
  koop->add_option("--train-split", ko_train);
  koop->add_option("--eval-split", ko_eval);

  // sweep-efficiency
  auto* sweep = app.add_subcommand("sweep-efficiency",
                                   "identification error vs training fraction");
  std::string sw_data, sw_fractions = "0.1,0.01,0.001,0.0001", sw_out,
              sw_split = "train";
  int sw_seeds = 10;
  std::uint64_t sw_seed_base = 0;
  sweep->add_option("--data", sw_data)->required();
  sweep->add_option("--fractions", sw_fractions, "comma-separated fractions");
  sweep->add_option("--seeds", sw_seeds, "seeds per fraction");
  sweep->add_option("--seed-base", sw_seed_base);
  sweep->add_option("--out", sw_out, "output CSV");
  sweep->add_option("--split", sw_split);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_generate(gen_config, gen_params, gen_traj, gen_val, gen_test,
                          gen_steps, gen_seed,
                          default_out(gen_out, "dataset"), gs_p, gs_v, gs_w,
                          gs_q, gen_perturb, gen_mag, gen_hold);
    if (ident->parsed())
      return cmd_identify(id_data, id_fraction, id_seed, id_anchor, id_per_rod,
                          id_report, id_split);
    if (sim->parsed())
      return cmd_simulate(sim_config, sim_params, sim_init, sim_steps,
                          default_out(sim_out, "trajectory.jsonl"));
    if (eval->parsed())
      return cmd_evaluate(ev_data, ev_params, ev_horizon,
                          default_out(ev_out, "evaluate.csv"), ev_split,
                          ev_config);
    if (fine->parsed()) return cmd_finetune(fi_data, fi_frozen, fi_report, fi_split);
    if (koop->parsed())
      return cmd_koopman(ko_data, ko_degree, ko_fraction, ko_seed, ko_report,
                         ko_train, ko_eval);
    if (sweep->parsed())
      return cmd_sweep(sw_data, sw_fractions, sw_seeds, sw_seed_base,
                       default_out(sw_out, "sweep.csv"), sw_split);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
