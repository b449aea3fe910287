#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ggq/errors.hpp"
#include "ggq/features.hpp"
#include "ggq/mdp.hpp"

namespace ggq {

using nlohmann::json;

/// MDP document: {n_states, n_actions, gamma, transitions[s][a][s'], rewards[s][a][s'],
/// layout_tag, start_state, features?[feature][pair]}.
inline json mdp_to_json(const TabularMdp& mdp, const FeatureMap* features = nullptr) {
  const std::size_t ns = mdp.n_states();
  const std::size_t na = mdp.n_actions();
  json transitions = json::array();
  json rewards = json::array();
  for (StateId s = 0; s < ns; ++s) {
    json tp = json::array();
    json tr = json::array();
    for (ActionId a = 0; a < na; ++a) {
      const auto prow = mdp.transition_row(s, a);
      const auto rrow = mdp.reward_row(s, a);
      tp.push_back(std::vector<double>(prow.begin(), prow.end()));
      tr.push_back(std::vector<double>(rrow.begin(), rrow.end()));
    }
    transitions.push_back(std::move(tp));
    rewards.push_back(std::move(tr));
  }
  json doc = {{"n_states", ns},           {"n_actions", na},    {"gamma", mdp.discount()},
              {"transitions", transitions}, {"rewards", rewards}, {"layout_tag", mdp.layout_tag()},
              {"start_state", mdp.start_state()}};
  if (features) {
    json rows = json::array();
    const Matrix& t = features->table();
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(t.cols()));
      for (Eigen::Index c = 0; c < t.cols(); ++c) row[static_cast<std::size_t>(c)] = t(r, c);
      rows.push_back(std::move(row));
    }
    doc["features"] = std::move(rows);
  }
  return doc;
}

struct LoadedMdp {
  TabularMdp mdp;
  std::optional<FeatureMap> features;
};

namespace io_detail {
template <typename T>
T require(const json& doc, const char* key) {
  if (!doc.contains(key)) throw SchemaError(std::string("mdp.") + key + ": missing");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string("mdp.") + key + ": wrong type");
  }
}
}  // namespace io_detail

inline LoadedMdp mdp_from_json(const json& doc) {
  using io_detail::require;
  const auto ns = require<std::size_t>(doc, "n_states");
  const auto na = require<std::size_t>(doc, "n_actions");
  const auto gamma = require<double>(doc, "gamma");
  const auto tp = require<std::vector<std::vector<std::vector<double>>>>(doc, "transitions");
  const auto tr = require<std::vector<std::vector<std::vector<double>>>>(doc, "rewards");
  auto flatten = [&](const std::vector<std::vector<std::vector<double>>>& t, const char* key) {
    if (t.size() != ns) throw SchemaError(std::string("mdp.") + key + ": expected n_states rows");
    std::vector<double> flat;
    flat.reserve(ns * na * ns);
    for (std::size_t s = 0; s < ns; ++s) {
      if (t[s].size() != na)
        throw SchemaError(std::string("mdp.") + key + "[" + std::to_string(s) + "]: expected n_actions rows");
      for (std::size_t a = 0; a < na; ++a) {
        if (t[s][a].size() != ns)
          throw SchemaError(std::string("mdp.") + key + "[" + std::to_string(s) + "][" +
                            std::to_string(a) + "]: expected n_states entries");
        flat.insert(flat.end(), t[s][a].begin(), t[s][a].end());
      }
    }
    return flat;
  };
  const std::string tag = doc.value("layout_tag", std::string{});
  const auto start = doc.value("start_state", std::size_t{0});
  LoadedMdp out{TabularMdp(ns, na, flatten(tp, "transitions"), flatten(tr, "rewards"), gamma, tag, start),
                std::nullopt};
  if (doc.contains("features")) {
    const auto rows = require<std::vector<std::vector<double>>>(doc, "features");
    if (rows.empty()) throw SchemaError("mdp.features: empty");
    Matrix table(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ns * na));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != ns * na)
        throw SchemaError("mdp.features[" + std::to_string(r) + "]: expected n_states*n_actions entries");
      for (std::size_t c = 0; c < rows[r].size(); ++c)
        table(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    out.features.emplace(std::move(table), ns, na);
  }
  return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to a sibling temporary file and renames it over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline LoadedMdp load_mdp(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return mdp_from_json(doc);
}

}  // namespace ggq
