#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "metaacl/meta.hpp"

namespace metaacl {

// shortest decimal representation that round-trips the exact double
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc{})
    throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

inline nlohmann::json snapshot_to_json(const TrajectorySnapshot& s) {
  nlohmann::json j;
  auto& weights = j["weights"] = nlohmann::json::array();
  auto& means = j["means"] = nlohmann::json::array();
  auto& covs = j["covariances"] = nlohmann::json::array();
  auto& utils = j["lp_utilities"] = nlohmann::json::array();
  for (const auto& c : s.gmm.components) {
    weights.push_back(c.weight);
    means.push_back(c.mean);
    covs.push_back(c.covariance);
    utils.push_back(c.lp_utility);
  }
  j["mean_reward"] = s.mean_reward;
  return j;
}

inline TrajectorySnapshot snapshot_from_json(const nlohmann::json& j) {
  TrajectorySnapshot s;
  const auto& weights = j.at("weights");
  const auto& means = j.at("means");
  const auto& covs = j.at("covariances");
  const auto& utils = j.at("lp_utilities");
  const std::size_t k = weights.size();
  if (means.size() != k || covs.size() != k || utils.size() != k)
    throw std::runtime_error("snapshot: mismatched component arrays");
  s.gmm.components.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto& c = s.gmm.components[i];
    c.weight = weights[i].get<double>();
    c.mean = means[i].get<std::vector<double>>();
    c.covariance = covs[i].get<std::vector<double>>();
    c.lp_utility = utils[i].get<double>();
    if (c.covariance.size() != c.mean.size() * c.mean.size())
      throw std::runtime_error("snapshot: covariance size mismatch");
  }
  s.mean_reward = j.at("mean_reward").get<double>();
  return s;
}

inline std::string trajectory_to_json_line(const TrainingTrajectory& t) {
  nlohmann::json j;
  j["student_meta"] = t.student_meta;
  j["kc_pre"] = t.kc_pre;
  j["kc_post"] = t.kc_post;
  j["j_s"] = t.j_s;
  auto& snaps = j["snapshots"] = nlohmann::json::array();
  for (const auto& s : t.snapshots) snaps.push_back(snapshot_to_json(s));
  return j.dump();
}

inline TrainingTrajectory trajectory_from_json_line(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  TrainingTrajectory t;
  t.student_meta = j.at("student_meta").get<std::int64_t>();
  t.kc_pre = j.at("kc_pre").get<KCVector>();
  t.kc_post = j.at("kc_post").get<KCVector>();
  t.j_s = j.at("j_s").get<double>();
  for (const auto& s : j.at("snapshots"))
    t.snapshots.push_back(snapshot_from_json(s));
  return t;
}

// history files are JSON Lines: one trajectory per line
inline void save_history(const std::string& path,
                         const std::vector<TrainingTrajectory>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& t : history) out << trajectory_to_json_line(t) << '\n';
  if (!out) throw std::runtime_error("failed while writing " + path);
}

inline std::vector<TrainingTrajectory> load_history(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<TrainingTrajectory> history;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    history.push_back(trajectory_from_json_line(line));
  }
  return history;
}

// Minimal CSV layer for the experiment outputs. Fields never contain commas
// or quotes, so no escaping is involved.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::runtime_error("csv: no column named " + name);
  }
};

inline void save_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw std::runtime_error("csv: ragged row in " + path);
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed while writing " + path);
}

inline CsvTable load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != table.header.size())
        throw std::runtime_error("csv: ragged row in " + path);
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("bad numeric field: " + s);
  return v;
}

inline std::int64_t parse_int(const std::string& s) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("bad integer field: " + s);
  return v;
}

}  // namespace metaacl
