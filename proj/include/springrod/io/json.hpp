#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "springrod/params.hpp"
#include "springrod/sysid/identify.hpp"

namespace springrod::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline const json& require(const json& j, const char* key,
                           const char* context) {
  const auto it = j.find(key);
  if (it == j.end())
    throw SchemaError(std::string(context) + ": missing field '" + key + "'");
  return *it;
}

inline void check_schema_version(const json& j, const char* context) {
  const int v = require(j, "schema_version", context).get<int>();
  if (v != kSchemaVersion)
    throw SchemaError(std::string(context) + ": unsupported schema_version " +
                      std::to_string(v));
}

}  // namespace detail

inline json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline Vec3 vec3_from_json(const json& j, const char* context = "vec3") {
  if (!j.is_array() || j.size() != 3)
    throw SchemaError(std::string(context) + ": expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json to_json(const EndpointRef& ref) {
  if (ref.is_anchor()) return json{{"anchor", to_json(ref.anchor_position)}};
  return json{{"rod", ref.rod_index},
              {"end", ref.end == End::Plus ? "plus" : "minus"}};
}

inline EndpointRef endpoint_from_json(const json& j) {
  if (j.contains("anchor"))
    return EndpointRef::anchor(vec3_from_json(j["anchor"], "anchor"));
  const int rod = detail::require(j, "rod", "endpoint").get<int>();
  const std::string end = detail::require(j, "end", "endpoint").get<std::string>();
  if (end != "plus" && end != "minus")
    throw SchemaError("endpoint: end must be \"plus\" or \"minus\"");
  return EndpointRef::rod_end(rod, end == "plus" ? End::Plus : End::Minus);
}

inline json to_json(const RodState& s) {
  return json{{"p", to_json(s.p)},
              {"v", to_json(s.v)},
              {"q", json::array({s.q.w, s.q.x, s.q.y, s.q.z})},
              {"w", to_json(s.w)}};
}

inline RodState rod_state_from_json(const json& j) {
  RodState s;
  s.p = vec3_from_json(detail::require(j, "p", "state"), "p");
  s.v = vec3_from_json(detail::require(j, "v", "state"), "v");
  const json& q = detail::require(j, "q", "state");
  if (!q.is_array() || q.size() != 4)
    throw SchemaError("state: q must be [w, x, y, z]");
  s.q = {q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
         q[3].get<double>()};
  if (std::abs(norm(s.q) - 1.0) > 1e-9)
    throw SchemaError("state: non-unit quaternion (|q| = " +
                      std::to_string(norm(s.q)) + ")");
  s.w = vec3_from_json(detail::require(j, "w", "state"), "w");
  return s;
}

// ---------------------------------------------------------------------------
// topology config

inline json topology_to_json(
    const Topology& topo,
    const std::optional<std::vector<RodState>>& nominal_states = std::nullopt) {
  json rods = json::array();
  for (const RodGeometry& r : topo.rods) rods.push_back({{"length", r.length}});
  json springs = json::array();
  for (const SpringDef& s : topo.springs)
    springs.push_back(
        {{"a", to_json(s.a)}, {"b", to_json(s.b)}, {"group", s.group}});
  json controls = json::array();
  for (const ControlDef& c : topo.controls) {
    json jc{{"rod", c.rod_index}, {"group", c.group}};
    if (c.arm_body) jc["arm"] = to_json(*c.arm_body);
    controls.push_back(jc);
  }
  json j{{"schema_version", kSchemaVersion},
         {"rods", rods},
         {"springs", springs},
         {"controls", controls},
         {"gravity", to_json(topo.gravity)},
         {"dt", topo.dt},
         {"cable_mode", topo.cable_mode}};
  if (nominal_states) {
    json states = json::array();
    for (const RodState& s : *nominal_states) states.push_back(to_json(s));
    j["nominal_states"] = states;
  }
  return j;
}

struct TopologyConfig {
  Topology topology;
  std::optional<std::vector<RodState>> nominal_states;
};

inline TopologyConfig topology_from_json(const json& j) {
  detail::check_schema_version(j, "topology");
  TopologyConfig cfg;
  Topology& topo = cfg.topology;
  for (const json& r : detail::require(j, "rods", "topology")) {
    RodGeometry g;
    g.length = detail::require(r, "length", "rod").get<double>();
    topo.rods.push_back(g);
  }
  for (const json& s : detail::require(j, "springs", "topology")) {
    SpringDef def;
    def.a = endpoint_from_json(detail::require(s, "a", "spring"));
    def.b = endpoint_from_json(detail::require(s, "b", "spring"));
    def.group = s.value("group", 0);
    topo.springs.push_back(def);
  }
  if (j.contains("controls"))
    for (const json& c : j["controls"]) {
      ControlDef def;
      def.rod_index = detail::require(c, "rod", "control").get<int>();
      if (c.contains("arm")) def.arm_body = vec3_from_json(c["arm"], "arm");
      def.group = c.value("group", 0);
      topo.controls.push_back(def);
    }
  topo.gravity = vec3_from_json(detail::require(j, "gravity", "topology"));
  topo.dt = detail::require(j, "dt", "topology").get<double>();
  topo.cable_mode = j.value("cable_mode", false);
  if (j.contains("nominal_states")) {
    std::vector<RodState> states;
    for (const json& s : j["nominal_states"])
      states.push_back(rod_state_from_json(s));
    cfg.nominal_states = std::move(states);
  }
  const auto issues = validate(topo);
  if (!issues.empty()) {
    std::string msg = "invalid topology:";
    for (const auto& issue : issues) msg += "\n  - " + issue.message;
    throw SchemaError(msg);
  }
  if (cfg.nominal_states && cfg.nominal_states->size() != topo.rods.size())
    throw SchemaError("nominal_states size != rod count");
  return cfg;
}

// ---------------------------------------------------------------------------
// parameter set

inline json params_to_json(const ParamSet& p) {
  json springs = json::array();
  for (const SpringParams& s : p.springs)
    springs.push_back({{"K", s.K}, {"c", s.c}, {"L0", s.L0}});
  json rods = json::array();
  for (const RodParams& r : p.rods) rods.push_back({{"M", r.M}, {"I", r.I}});
  return json{{"schema_version", kSchemaVersion},
              {"springs", springs},
              {"rods", rods},
              {"control_scale", p.control_scale}};
}

inline ParamSet params_from_json(const json& j) {
  detail::check_schema_version(j, "params");
  ParamSet p;
  for (const json& s : detail::require(j, "springs", "params"))
    p.springs.push_back({detail::require(s, "K", "spring params").get<double>(),
                         detail::require(s, "c", "spring params").get<double>(),
                         detail::require(s, "L0", "spring params").get<double>()});
  for (const json& r : detail::require(j, "rods", "params"))
    p.rods.push_back({detail::require(r, "M", "rod params").get<double>(),
                      detail::require(r, "I", "rod params").get<double>()});
  if (j.contains("control_scale"))
    p.control_scale = j["control_scale"].get<std::vector<double>>();
  return p;
}

// ---------------------------------------------------------------------------
// identification report

inline json identified_to_json(const sysid::IdentifiedParams& id) {
  json j{{"schema_version", kSchemaVersion},
         {"composites", id.composites},
         {"implied_rest_length", id.implied_rest_length},
         {"residual_rms", id.residual_rms},
         {"condition_number", id.condition_number},
         {"n_samples", id.n_samples},
         {"fraction", id.fraction},
         {"seed", id.seed},
         {"per_rod", id.per_rod},
         {"controls_excluded", id.controls_excluded}};
  if (id.decomposed) j["decomposed"] = params_to_json(*id.decomposed);
  if (id.inertia_ratio_check) j["inertia_ratio_check"] = *id.inertia_ratio_check;
  return j;
}

inline sysid::IdentifiedParams identified_from_json(const json& j) {
  detail::check_schema_version(j, "report");
  sysid::IdentifiedParams id;
  id.composites =
      detail::require(j, "composites", "report").get<std::map<std::string, double>>();
  if (j.contains("implied_rest_length"))
    id.implied_rest_length =
        j["implied_rest_length"].get<std::map<std::string, double>>();
  id.residual_rms = j.value("residual_rms", 0.0);
  id.condition_number = j.value("condition_number", 0.0);
  id.n_samples = j.value("n_samples", std::uint64_t{0});
  id.fraction = j.value("fraction", 1.0);
  id.seed = j.value("seed", std::uint64_t{0});
  id.per_rod = j.value("per_rod", false);
  id.controls_excluded = j.value("controls_excluded", false);
  if (j.contains("decomposed")) id.decomposed = params_from_json(j["decomposed"]);
  if (j.contains("inertia_ratio_check"))
    id.inertia_ratio_check = j["inertia_ratio_check"].get<double>();
  return id;
}

// ---------------------------------------------------------------------------
// file helpers

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

/// FNV-1a 64-bit over the canonical (sorted-key) JSON dump; used to tie
/// dataset manifests to the exact topology they were generated from.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string topology_hash(const json& topology_json) {
  std::ostringstream hex;
  hex << "0x" << std::hex << fnv1a64(topology_json.dump());
  return hex.str();
}

}  // namespace springrod::io
