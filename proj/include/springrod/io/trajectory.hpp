#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "springrod/integrator.hpp"
#include "springrod/io/json.hpp"

namespace springrod::io {

namespace detail {

/// Shortest decimal representation that round-trips the exact double.
inline void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

inline void append_vec3(std::string& out, const Vec3& v) {
  append_double(out, v.x);
  out.push_back(',');
  append_double(out, v.y);
  out.push_back(',');
  append_double(out, v.z);
}

}  // namespace detail

/// Writes a trajectory as line-delimited JSON: a header line with dt and the
/// rod count, then one record per step
///   {"t":0,"rods":[[px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz],...],"u":[[...]]}
/// "u" holds the commands applied over the transition leaving this record
/// and is absent on the final record and for systems without controls.
/// Doubles are encoded as shortest round-trip decimals, so read-back is
/// bit-exact.
inline void write_trajectory(const Trajectory& traj,
                             const std::filesystem::path& path) {
  for (const auto& states : traj.states)
    for (const RodState& s : states)
      if (std::abs(norm(s.q) - 1.0) > 1e-9)
        throw SchemaError("refusing to write non-unit quaternion (|q| = " +
                          std::to_string(norm(s.q)) + ")");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  std::string line;
  line += R"({"schema_version":1,"dt":)";
  detail::append_double(line, traj.dt);
  line += ",\"n_rods\":" + std::to_string(traj.n_rods()) + "}\n";
  out << line;
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    line.clear();
    line += "{\"t\":" + std::to_string(t) + ",\"rods\":[";
    for (std::size_t i = 0; i < traj.states[t].size(); ++i) {
      const RodState& s = traj.states[t][i];
      if (i) line.push_back(',');
      line.push_back('[');
      detail::append_vec3(line, s.p);
      line.push_back(',');
      detail::append_vec3(line, s.v);
      line.push_back(',');
      detail::append_double(line, s.q.w);
      line.push_back(',');
      detail::append_double(line, s.q.x);
      line.push_back(',');
      detail::append_double(line, s.q.y);
      line.push_back(',');
      detail::append_double(line, s.q.z);
      line.push_back(',');
      detail::append_vec3(line, s.w);
      line.push_back(']');
    }
    line += "]";
    if (t < traj.commands.size() && !traj.commands[t].empty()) {
      line += ",\"u\":[";
      for (std::size_t k = 0; k < traj.commands[t].size(); ++k) {
        if (k) line.push_back(',');
        line.push_back('[');
        detail::append_vec3(line, traj.commands[t][k]);
        line.push_back(']');
      }
      line += "]";
    }
    line += "}\n";
    out << line;
  }
  if (!out) throw Error("write failed for " + path.string());
}

namespace detail {

inline RodState rod_state_from_record(const json& rod, long line) {
  if (!rod.is_array() || rod.size() != 13)
    throw ParseError("rod record must have 13 scalars", line);
  RodState s;
  s.p = {rod[0].get<double>(), rod[1].get<double>(), rod[2].get<double>()};
  s.v = {rod[3].get<double>(), rod[4].get<double>(), rod[5].get<double>()};
  s.q = {rod[6].get<double>(), rod[7].get<double>(), rod[8].get<double>(),
         rod[9].get<double>()};
  s.w = {rod[10].get<double>(), rod[11].get<double>(), rod[12].get<double>()};
  if (std::abs(norm(s.q) - 1.0) > 1e-9)
    throw SchemaError("non-unit quaternion (|q| = " + std::to_string(norm(s.q)) +
                      ") at line " + std::to_string(line));
  return s;
}

struct TrajectoryHeader {
  double dt = 0.0;
  std::size_t n_rods = 0;
};

inline TrajectoryHeader read_header(std::istream& in,
                                    const std::string& path) {
  std::string text;
  if (!std::getline(in, text)) throw ParseError(path + ": empty file", 1);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 1);
  }
  if (j.value("schema_version", 0) != kSchemaVersion)
    throw SchemaError(path + ": unsupported schema_version");
  TrajectoryHeader h;
  h.dt = detail::require(j, "dt", "trajectory header").get<double>();
  h.n_rods = detail::require(j, "n_rods", "trajectory header").get<std::size_t>();
  return h;
}

inline void parse_record(const json& j, long line, std::size_t n_rods,
                         std::vector<RodState>& states,
                         std::vector<Vec3>& commands) {
  const json& rods = require(j, "rods", "trajectory record");
  if (rods.size() != n_rods)
    throw SchemaError("rod count changed at line " + std::to_string(line));
  states.clear();
  states.reserve(n_rods);
  for (const json& rod : rods) states.push_back(rod_state_from_record(rod, line));
  commands.clear();
  if (j.contains("u"))
    for (const json& u : j["u"]) commands.push_back(vec3_from_json(u, "u"));
}

}  // namespace detail

/// Reads a full trajectory, re-verifying rod counts and quaternion norms.
/// ParseError (with a 1-based line number) for malformed lines, SchemaError
/// for valid JSON with invalid content.
inline Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  const detail::TrajectoryHeader header = detail::read_header(in, path.string());
  Trajectory traj;
  traj.dt = header.dt;
  std::string text;
  long line = 1;
  std::vector<RodState> states;
  std::vector<Vec3> commands;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ": " + e.what(), line);
    }
    const long t = detail::require(j, "t", "trajectory record").get<long>();
    if (t != static_cast<long>(traj.states.size()))
      throw SchemaError(path.string() + ": record t=" + std::to_string(t) +
                        " out of order at line " + std::to_string(line));
    detail::parse_record(j, line, header.n_rods, states, commands);
    traj.states.push_back(states);
    if (!commands.empty()) {
      if (traj.commands.size() != traj.states.size() - 1)
        throw SchemaError(path.string() + ": command records not contiguous");
      traj.commands.push_back(commands);
    }
  }
  if (traj.states.empty())
    throw SchemaError(path.string() + ": no state records");
  return traj;
}

/// Selectively parses only the records whose step index appears in `needed`
/// (sorted ascending); other lines are skipped unparsed. Returns states and
/// commands keyed by position in `needed`.
struct SelectedRecords {
  std::vector<std::vector<RodState>> states;
  std::vector<std::vector<Vec3>> commands;
};

inline SelectedRecords read_selected_records(
    const std::filesystem::path& path, const std::vector<long>& needed) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  const detail::TrajectoryHeader header = detail::read_header(in, path.string());
  SelectedRecords out;
  out.states.resize(needed.size());
  out.commands.resize(needed.size());
  std::string text;
  long line = 1;
  long t = -1;
  std::size_t cursor = 0;
  std::vector<RodState> states;
  std::vector<Vec3> commands;
  while (cursor < needed.size() && std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    ++t;
    if (t != needed[cursor]) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ": " + e.what(), line);
    }
    if (detail::require(j, "t", "trajectory record").get<long>() != t)
      throw SchemaError(path.string() + ": record index mismatch at line " +
                        std::to_string(line));
    detail::parse_record(j, line, header.n_rods, states, commands);
    out.states[cursor] = states;
    out.commands[cursor] = commands;
    ++cursor;
  }
  if (cursor != needed.size())
    throw SchemaError(path.string() + ": file ends before step " +
                      std::to_string(needed[cursor]));
  return out;
}

}  // namespace springrod::io
