#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ggq/errors.hpp"
#include "ggq/io.hpp"

namespace ggq {

/**
 * Experiment description. Keys mirror the flat config document; the
 * presets directory holds complete examples.
 */
struct ExperimentConfig {
  std::string name = "experiment";

  // problem
  std::string env = "garnet";  ///< garnet | frozenlake | file
  std::uint64_t ns = 10;
  std::uint64_t na = 5;
  std::uint64_t branching = 10;
  std::uint64_t nf = 5;
  std::uint64_t mdp_seed = 1;
  bool slippery = false;
  std::string mdp_file;
  double gamma = 0.95;
  double sigma = 1.0;
  double radius = 100.0;

  // algorithms
  std::vector<std::string> algorithms = {"vanilla", "nested", "minibatch"};
  std::string sampler = "iid";
  std::string schedule = "constant";
  double alpha = 0.1;
  double beta = 0.5;
  double a = 0.5;
  double b = 0.5;
  std::uint64_t T = 1000;
  std::uint64_t budget = 0;  ///< samples per run; overrides T when positive
  std::uint64_t T_c = 10;
  std::uint64_t B = 5;       ///< nested-loop inner batch
  std::uint64_t M = 30;      ///< nested-loop outer batch
  std::uint64_t minibatch_B = 30;

  // protocol
  std::uint64_t seed = 0;
  std::uint64_t n_seeds = 1;
  bool final = true;
  std::uint64_t eval_every = 1;          ///< iterations between trace rows
  std::uint64_t eval_every_samples = 0;  ///< samples between trace rows; overrides eval_every when positive
  std::uint64_t mc_samples = 100;
  std::uint64_t grid_points = 101;
  bool plots = true;

  bool operator==(const ExperimentConfig&) const = default;
};

namespace config_detail {

using nlohmann::json;

inline std::string path(const std::string& key) { return "config." + key; }

inline std::uint64_t as_uint(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const auto i = v.get<std::int64_t>();
    if (i < 0) throw SchemaError(path(key) + ": expected a non-negative integer");
    return static_cast<std::uint64_t>(i);
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
  }
  throw SchemaError(path(key) + ": expected a non-negative integer");
}

inline double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) throw SchemaError(path(key) + ": expected a number");
  return v.get<double>();
}

inline bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw SchemaError(path(key) + ": expected true or false");
  return v.get<bool>();
}

inline std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw SchemaError(path(key) + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<std::string> as_names(const json& v, const std::string& key) {
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) throw SchemaError(path(key) + ": expected a string or an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string())
      throw SchemaError(path(key) + "[" + std::to_string(i) + "]: expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

/// Scalar of a flat TOML line: quoted string, boolean, integer or float.
inline json parse_toml_scalar(const std::string& text, const std::string& where) {
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') return text.substr(1, text.size() - 2);
  if (text == "true") return true;
  if (text == "false") return false;
  std::string digits;
  for (char c : text)
    if (c != '_') digits += c;
  try {
    std::size_t used = 0;
    if (digits.find_first_of(".eE") == std::string::npos &&
        digits.find("inf") == std::string::npos && digits.find("nan") == std::string::npos) {
      const long long i = std::stoll(digits, &used);
      if (used == digits.size()) return i;
    } else {
      const double d = std::stod(digits, &used);
      if (used == digits.size()) return d;
    }
  } catch (const std::exception&) {
  }
  throw SchemaError(where + ": cannot parse value '" + text + "'");
}

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

}  // namespace config_detail

/**
 * Flat TOML subset: `key = value` lines with strings, booleans, numbers and
 * single-line arrays of those; `#` comments. Tables are not supported.
 */
inline nlohmann::json parse_flat_toml(const std::string& text) {
  using namespace config_detail;
  json doc = json::object();
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') throw SchemaError(where + ": tables are not supported in config files");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw SchemaError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw SchemaError(where + ": expected key = value");
    if (doc.contains(key)) throw SchemaError(path(key) + ": duplicate key (" + where + ")");
    if (value.front() == '[') {
      if (value.back() != ']') throw SchemaError(path(key) + ": unterminated array (" + where + ")");
      json arr = json::array();
      std::string item;
      bool quoted = false;
      const std::string body = value.substr(1, value.size() - 2);
      for (std::size_t i = 0; i <= body.size(); ++i) {
        const char c = i < body.size() ? body[i] : ',';
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) {
          const std::string t = trim(item);
          if (!t.empty()) arr.push_back(parse_toml_scalar(t, path(key)));
          item.clear();
        } else {
          item += c;
        }
      }
      doc[key] = std::move(arr);
    } else {
      doc[key] = parse_toml_scalar(value, path(key));
    }
  }
  return doc;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  return {{"name", c.name},
          {"env", c.env},
          {"ns", c.ns},
          {"na", c.na},
          {"branching", c.branching},
          {"nf", c.nf},
          {"mdp_seed", c.mdp_seed},
          {"slippery", c.slippery},
          {"mdp_file", c.mdp_file},
          {"gamma", c.gamma},
          {"sigma", c.sigma},
          {"radius", c.radius},
          {"algorithms", c.algorithms},
          {"sampler", c.sampler},
          {"schedule", c.schedule},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"a", c.a},
          {"b", c.b},
          {"T", c.T},
          {"budget", c.budget},
          {"T_c", c.T_c},
          {"B", c.B},
          {"M", c.M},
          {"minibatch_B", c.minibatch_B},
          {"seed", c.seed},
          {"n_seeds", c.n_seeds},
          {"final", c.final},
          {"eval_every", c.eval_every},
          {"eval_every_samples", c.eval_every_samples},
          {"mc_samples", c.mc_samples},
          {"grid_points", c.grid_points},
          {"plots", c.plots}};
}

inline void validate_config(const ExperimentConfig& c) {
  using config_detail::path;
  static const std::set<std::string> envs = {"garnet", "frozenlake", "file"};
  static const std::set<std::string> algos = {"vanilla", "nested", "minibatch"};
  if (!envs.count(c.env)) throw SchemaError(path("env") + ": expected garnet, frozenlake or file");
  if (c.env == "file" && c.mdp_file.empty()) throw SchemaError(path("mdp_file") + ": required when env = \"file\"");
  if (c.algorithms.empty()) throw SchemaError(path("algorithms") + ": at least one algorithm required");
  for (std::size_t i = 0; i < c.algorithms.size(); ++i)
    if (!algos.count(c.algorithms[i]))
      throw SchemaError(path("algorithms") + "[" + std::to_string(i) + "]: unknown algorithm '" +
                        c.algorithms[i] + "'");
  if (c.sampler != "iid" && c.sampler != "markov") throw SchemaError(path("sampler") + ": expected iid or markov");
  if (c.schedule != "constant" && c.schedule != "polynomial" && c.schedule != "decaying")
    throw SchemaError(path("schedule") + ": expected constant, polynomial or decaying");
  if (!(c.gamma >= 0.0 && c.gamma < 1.0)) throw SchemaError(path("gamma") + ": must lie in [0, 1)");
  if (!(c.sigma > 0.0)) throw SchemaError(path("sigma") + ": must be positive");
  if (!(c.radius > 0.0)) throw SchemaError(path("radius") + ": must be positive");
  if (!(c.alpha >= 0.0)) throw SchemaError(path("alpha") + ": must be non-negative");
  if (!(c.beta >= 0.0)) throw SchemaError(path("beta") + ": must be non-negative");
  if (c.T < 1 && c.budget == 0) throw SchemaError(path("T") + ": must be >= 1");
  if (c.B < 1) throw SchemaError(path("B") + ": must be >= 1");
  if (c.M < 1) throw SchemaError(path("M") + ": must be >= 1");
  if (c.minibatch_B < 1) throw SchemaError(path("minibatch_B") + ": must be >= 1");
  if (c.n_seeds < 1) throw SchemaError(path("n_seeds") + ": must be >= 1");
  if (c.grid_points < 2) throw SchemaError(path("grid_points") + ": must be >= 2");
  if (c.nf < 1) throw SchemaError(path("nf") + ": must be >= 1");
}

inline ExperimentConfig config_from_json(const nlohmann::json& doc) {
  using namespace config_detail;
  if (!doc.is_object()) throw SchemaError("config: expected an object");
  ExperimentConfig c;
  for (const auto& [key, v] : doc.items()) {
    if (key == "name") c.name = as_string(v, key);
    else if (key == "env") c.env = as_string(v, key);
    else if (key == "ns") c.ns = as_uint(v, key);
    else if (key == "na") c.na = as_uint(v, key);
    else if (key == "branching") c.branching = as_uint(v, key);
    else if (key == "nf") c.nf = as_uint(v, key);
    else if (key == "mdp_seed") c.mdp_seed = as_uint(v, key);
    else if (key == "slippery") c.slippery = as_bool(v, key);
    else if (key == "mdp_file") c.mdp_file = as_string(v, key);
    else if (key == "gamma") c.gamma = as_real(v, key);
    else if (key == "sigma") c.sigma = as_real(v, key);
    else if (key == "radius") c.radius = as_real(v, key);
    else if (key == "algorithms" || key == "algorithm") c.algorithms = as_names(v, key);
    else if (key == "sampler") c.sampler = as_string(v, key);
    else if (key == "schedule") c.schedule = as_string(v, key);
    else if (key == "alpha") c.alpha = as_real(v, key);
    else if (key == "beta") c.beta = as_real(v, key);
    else if (key == "a") c.a = as_real(v, key);
    else if (key == "b") c.b = as_real(v, key);
    else if (key == "T") c.T = as_uint(v, key);
    else if (key == "budget") c.budget = as_uint(v, key);
    else if (key == "T_c") c.T_c = as_uint(v, key);
    else if (key == "B") c.B = as_uint(v, key);
    else if (key == "M") c.M = as_uint(v, key);
    else if (key == "minibatch_B") c.minibatch_B = as_uint(v, key);
    else if (key == "seed") c.seed = as_uint(v, key);
    else if (key == "n_seeds") c.n_seeds = as_uint(v, key);
    else if (key == "final") c.final = as_bool(v, key);
    else if (key == "eval_every") c.eval_every = as_uint(v, key);
    else if (key == "eval_every_samples") c.eval_every_samples = as_uint(v, key);
    else if (key == "mc_samples") c.mc_samples = as_uint(v, key);
    else if (key == "grid_points") c.grid_points = as_uint(v, key);
    else if (key == "plots") c.plots = as_bool(v, key);
    else throw SchemaError(path(key) + ": unknown key");
  }
  validate_config(c);
  return c;
}

/// Loads a config from a .json file or a flat .toml file.
inline ExperimentConfig load_config(const std::filesystem::path& file) {
  const std::string text = read_text_file(file);
  nlohmann::json doc;
  if (file.extension() == ".json") {
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(file.string() + ": " + e.what());
    }
  } else {
    doc = parse_flat_toml(text);
  }
  return config_from_json(doc);
}

// ---------------------------------------------------------------------------
// Presets

inline std::vector<std::string> preset_names() {
  return {"paper-garnet1", "paper-garnet2", "paper-lake1", "paper-lake2", "smoke"};
}

/**
 * Built-in experiment settings: alpha = 0.1, beta = 0.5, gamma = 0.95,
 * nested-loop M = 30, T_c = 10, B = 5, mini-batch B = 30, 40 seeds.
 * Sample budgets are chosen so the curves flatten at desk scale.
 */
inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.alpha = 0.1;
  c.beta = 0.5;
  c.gamma = 0.95;
  c.T_c = 10;
  c.B = 5;
  c.M = 30;
  c.minibatch_B = 30;
  c.n_seeds = 40;
  c.final = true;
  c.mc_samples = 100;
  c.budget = 12000;
  c.eval_every_samples = 120;
  c.grid_points = 101;
  if (name == "paper-garnet1") {
    c.env = "garnet";
    c.ns = 10; c.na = 5; c.branching = 10; c.nf = 5;
  } else if (name == "paper-garnet2") {
    c.env = "garnet";
    c.ns = 8; c.na = 10; c.branching = 5; c.nf = 4;
    c.mdp_seed = 7;
  } else if (name == "paper-lake1" || name == "paper-lake2") {
    c.env = "frozenlake";
    c.ns = 16; c.na = 4; c.branching = 0;
    c.nf = name == "paper-lake1" ? 4 : 5;
    c.mdp_seed = 1;
  } else if (name == "smoke") {
    c.env = "garnet";
    c.ns = 10; c.na = 5; c.branching = 10; c.nf = 5;
    c.n_seeds = 1;
    c.budget = 0;
    c.T = 10;
    c.eval_every_samples = 0;
    c.mc_samples = 10;
    c.grid_points = 2;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  validate_config(c);
  return c;
}

}  // namespace ggq
