#include "cdiff/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "presets.hpp"

namespace cdiff {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

std::vector<SchemaEntry> build_schema() {
  using K = ValueKind;
  return {
      {"scenario", K::Text, "custom", "free-form scenario name"},
      {"pipeline", K::Text, "ou-stationary", "which pipeline to run (see `cdiff list`)"},
      {"description", K::Text, "", "free text"},

      {"alpha.magnitude", K::Number, 1.0, "|alpha| > 0"},
      {"alpha.phase", K::Number, 0.0, "arg alpha in radians"},
      {"alpha.gamma", K::Number, 0.0, "correlation offset gamma >= 0"},

      {"particle.mass", K::Number, 1.0, "m >= 0 (> 0 outside relativistic runs)"},
      {"particle.charge", K::Number, 0.0, "q"},
      {"particle.dimension", K::Integer, 1, "spatial dimension n"},

      {"grid.topology", K::Text, "line", "line | ring"},
      {"grid.lower", K::Number, -6.0, "lower edge"},
      {"grid.upper", K::Number, 6.0, "upper edge"},
      {"grid.cells", K::Integer, 240, "cells per axis (>= 8)"},
      {"grid.dt", K::Number, 0.01, "PDE time step"},

      {"potential.kind", K::Text, "paired", "paired (from the catalog state) | none | quadratic"},
      {"potential.coefficient", K::Number, 0.5, "U = coefficient x^2 for kind = quadratic"},

      {"state.name", K::Text, "harmonic-ground", "catalog key"},
      {"state.sigma", K::Number, 1.0, "packet width"},
      {"state.center", K::Number, 0.0, "packet centre"},
      {"state.momentum", K::Number, 0.0, "momentum eigenvalue"},
      {"state.omega", K::Number, 1.0, "oscillator frequency"},
      {"state.level", K::Integer, 0, "excitation or ring wavenumber"},
      {"state.branch", K::Text, "minus", "plus | minus"},
      {"state.time", K::Number, 0.0, "evaluation time"},

      {"evolution.time", K::Number, 1.0, "PDE final time"},

      {"ensemble.paths", K::Integer, 100000, "number of paths N"},
      {"ensemble.steps", K::Integer, 500, "Euler-Maruyama steps"},
      {"ensemble.dt", K::Number, 0.01, "step size (d lambda for relativistic runs)"},
      {"ensemble.seed", K::Integer, 42, "counter-based RNG key"},
      {"ensemble.drift_mode", K::Text, "density-consistent", "density-consistent | literal"},
      {"ensemble.direction", K::Text, "forward", "forward | backward"},
      {"ensemble.snapshots", K::NumberList, json::array(), "snapshot times besides the endpoints"},
      {"ensemble.initial", K::Text, "density", "density | point"},
      {"ensemble.x0", K::Number, 0.0, "start point for initial = point"},

      {"histogram.lower", K::Number, -4.0, "histogram lower edge"},
      {"histogram.upper", K::Number, 4.0, "histogram upper edge"},
      {"histogram.cells", K::Integer, 32, "histogram bins"},

      {"noise.part", K::Text, "all", "all | covariance | realizability | brackets"},
      {"noise.phases", K::NumberList, json::array({0.0, kPi / 2, kPi / 4}), "phases for the covariance check"},
      {"noise.increments", K::Integer, 1000000, "increments per covariance check"},
      {"noise.step", K::Number, 0.01, "increment step"},
      {"noise.sweep_phases", K::Integer, 100, "phases in the realizability sweep"},
      {"noise.sweep_gammas", K::NumberList, json::array({0.0, 0.5}), "gamma values in the sweep"},
      {"noise.qv_increments", K::Integer, 100000, "increments per bracket estimate"},
      {"noise.qv_sizes", K::NumberList, json::array({1000, 4000, 16000, 64000}), "batch sizes for the convergence slope"},
      {"noise.qv_replicates", K::Integer, 64, "replicates per batch size"},

      {"refinement.cells", K::Integer, 100, "coarse cells for residual orders (fine = 2x)"},

      {"relativistic.mass_squared_sign", K::Integer, 1, "+1, 0 or -1"},
      {"relativistic.windows", K::NumberList, json::array({0.1, 0.5, 1.5, 3.0}), "coarse-graining windows"},
      {"relativistic.anchor", K::Number, 0.5, "affine parameter of the anchor snapshot"},
      {"relativistic.box", K::Number, 96.0, "periodic box length"},
      {"relativistic.cells", K::Integer, 24, "cells per spatial axis"},
      {"relativistic.packet_width", K::Number, 12.0, "std of |Phi|^2 per axis"},
      {"relativistic.carrier", K::Integer, 5, "carrier wavenumber index along x1"},
      {"relativistic.x0_lower", K::Number, -8.0, "drift table x0 range"},
      {"relativistic.x0_upper", K::Number, 12.0, "drift table x0 range"},
      {"relativistic.slices", K::Integer, 41, "drift table x0 slices"},

      {"uncertainty.trials", K::Integer, 20, "random superpositions"},
      {"uncertainty.levels", K::Integer, 4, "oscillator levels per superposition"},
      {"uncertainty.seed", K::Integer, 2024, "seed of the random coefficients"},
      {"uncertainty.report_phases", K::NumberList, json::array({0.3, -1.0}), "phases reported without assertion"},

      {"ring.max_winding", K::Integer, 3, "largest |k| checked"},

      {"outputs.directory", K::Text, "out", "output directory"},
      {"outputs.full_paths", K::Integer, 0, "paths written to ensembles/*.bin (0: none)"},

      {"criteria.covariance_standard_errors", K::Number, 3.0, ""},
      {"criteria.hyperplane_tolerance", K::Number, 1e-12, ""},
      {"criteria.psd_tolerance", K::Number, 1e-12, ""},
      {"criteria.determinant_tolerance", K::Number, 1e-12, ""},
      {"criteria.bracket_standard_errors", K::Number, 5.0, ""},
      {"criteria.qv_slope", K::Number, -0.5, ""},
      {"criteria.qv_slope_tolerance", K::Number, 0.1, ""},
      {"criteria.spreading_relative", K::Number, 1e-3, ""},
      {"criteria.norm_drift_per_step", K::Number, 1e-10, ""},
      {"criteria.residual_order", K::Number, 1.9, ""},
      {"criteria.variance_relative", K::Number, 0.02, ""},
      {"criteria.density_l1", K::Number, 0.02, ""},
      {"criteria.marginal_standard_errors", K::Number, 4.0, ""},
      {"criteria.slope_relative", K::Number, 0.05, ""},
      {"criteria.osmotic_relative", K::Number, 0.10, ""},
      {"criteria.duality", K::Number, 1e-4, ""},
      {"criteria.hj_zero", K::Number, 1e-10, ""},
      {"criteria.hj_order", K::Number, 2.0, ""},
      {"criteria.hj_sign_flip", K::Number, 1e-10, ""},
      {"criteria.uncertainty_gaussian", K::Number, 1e-6, ""},
      {"criteria.uncertainty_slack", K::Number, 1e-8, ""},
      {"criteria.energy_momentum_relative", K::Number, 0.01, ""},
      {"criteria.shell_residual", K::Number, 1e-12, ""},
  };
}

const SchemaEntry* find_entry(const std::string& key) {
  for (const auto& e : config_schema()) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

bool is_section(const std::string& key) {
  const std::string prefix = key + ".";
  return std::any_of(config_schema().begin(), config_schema().end(),
                     [&](const SchemaEntry& e) { return e.key.rfind(prefix, 0) == 0; });
}

std::string where(const std::string& source, int line) {
  return line > 0 ? source + ":" + std::to_string(line) : source;
}

json parse_leaf(const SchemaEntry& entry, const YAML::Node& node, const std::string& origin) {
  auto bad = [&](const std::string& expected) -> ConfigError {
    return ConfigError(origin + ": key '" + entry.key + "' expects " + expected);
  };
  try {
    switch (entry.kind) {
      case ValueKind::Number:
        if (!node.IsScalar()) throw bad("a number");
        return node.as<double>();
      case ValueKind::Integer: {
        if (!node.IsScalar()) throw bad("an integer");
        try {
          return node.as<long>();
        } catch (const YAML::Exception&) {
          const double v = node.as<double>();
          if (std::floor(v) != v || std::abs(v) > 9e15) throw bad("an integer");
          return static_cast<long>(v);
        }
      }
      case ValueKind::Text:
        if (!node.IsScalar()) throw bad("a string");
        return node.as<std::string>();
      case ValueKind::Flag:
        if (!node.IsScalar()) throw bad("true or false");
        return node.as<bool>();
      case ValueKind::NumberList: {
        if (!node.IsSequence()) throw bad("a list of numbers");
        json list = json::array();
        for (const auto& item : node) {
          if (!item.IsScalar()) throw bad("a list of numbers");
          list.push_back(item.as<double>());
        }
        return list;
      }
    }
  } catch (const YAML::Exception&) {
    throw bad(entry.kind == ValueKind::Number    ? "a number"
              : entry.kind == ValueKind::Integer ? "an integer"
              : entry.kind == ValueKind::Flag    ? "true or false"
              : entry.kind == ValueKind::Text    ? "a string"
                                                 : "a list of numbers");
  }
  throw bad("a value");
}

}  // namespace

const std::vector<SchemaEntry>& config_schema() {
  static const std::vector<SchemaEntry> schema = build_schema();
  return schema;
}

ScenarioConfig::ScenarioConfig() {
  for (const auto& e : config_schema()) values_[e.key] = e.fallback;
}

ScenarioConfig ScenarioConfig::parse(const std::string& text, const std::string& source) {
  ScenarioConfig cfg;
  cfg.source_ = source;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(where(source, e.mark.line + 1) + ": " + e.msg);
  }
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError(source + ": top level must be a mapping");

  std::function<void(const YAML::Node&, const std::string&)> walk = [&](const YAML::Node& map,
                                                                        const std::string& prefix) {
    for (const auto& kv : map) {
      const int line = kv.first.Mark().line + 1;
      std::string name;
      try {
        name = kv.first.as<std::string>();
      } catch (const YAML::Exception&) {
        throw ConfigError(where(source, line) + ": keys must be strings");
      }
      if (prefix.empty() && (name == "provenance" || name == "manifest")) continue;
      const std::string key = prefix.empty() ? name : prefix + "." + name;
      if (const SchemaEntry* entry = find_entry(key)) {
        if (cfg.lines_.count(key)) throw ConfigError(where(source, line) + ": duplicate key '" + key + "'");
        cfg.values_[key] = parse_leaf(*entry, kv.second, where(source, line));
        cfg.lines_[key] = line;
      } else if (is_section(key)) {
        if (!kv.second.IsMap()) {
          throw ConfigError(where(source, line) + ": key '" + key + "' must be a mapping");
        }
        walk(kv.second, key);
      } else {
        throw ConfigError(where(source, line) + ": unknown key '" + key + "'");
      }
    }
  };
  walk(root, "");
  return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("cannot read config file " + file.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str(), file.string());
}

void ScenarioConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' must have the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const SchemaEntry* entry = find_entry(key);
  if (!entry) throw ConfigError("override: unknown key '" + key + "'");
  YAML::Node node;
  try {
    node = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError("override '" + key + "': " + e.msg);
  }
  values_[key] = parse_leaf(*entry, node, "override");
  lines_.erase(key);
}

void ScenarioConfig::set(const std::string& key, const json& value) {
  if (!find_entry(key)) throw ConfigError("unknown key '" + key + "'");
  values_[key] = value;
}

void ScenarioConfig::fail(const std::string& key, const std::string& message) const {
  const auto it = lines_.find(key);
  throw ConfigError(where(source_, it == lines_.end() ? 0 : it->second) + ": key '" + key +
                    "' " + message);
}

double ScenarioConfig::number(const std::string& key) const { return values_.at(key).get<double>(); }
long ScenarioConfig::integer(const std::string& key) const { return values_.at(key).get<long>(); }
std::string ScenarioConfig::text(const std::string& key) const {
  return values_.at(key).get<std::string>();
}
bool ScenarioConfig::flag(const std::string& key) const { return values_.at(key).get<bool>(); }
std::vector<double> ScenarioConfig::numbers(const std::string& key) const {
  return values_.at(key).get<std::vector<double>>();
}

void ScenarioConfig::validate() const {
  auto one_of = [&](const std::string& key, std::initializer_list<const char*> allowed) {
    const std::string v = text(key);
    for (const char* a : allowed) {
      if (v == a) return;
    }
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    fail(key, "is '" + v + "'; expected one of: " + list);
  };
  auto positive = [&](const std::string& key) {
    const double v = number(key);
    if (!(v > 0.0) || !std::isfinite(v)) fail(key, "must be positive");
  };
  auto at_least = [&](const std::string& key, long lo) {
    if (integer(key) < lo) fail(key, "must be at least " + std::to_string(lo));
  };

  const auto pipes = pipeline_names();
  if (std::find(pipes.begin(), pipes.end(), text("pipeline")) == pipes.end()) {
    fail("pipeline", "names no known pipeline ('" + text("pipeline") + "')");
  }
  positive("alpha.magnitude");
  if (!std::isfinite(number("alpha.phase"))) fail("alpha.phase", "must be finite");
  if (!(number("alpha.gamma") >= 0.0)) fail("alpha.gamma", "must be >= 0");
  if (!(number("particle.mass") >= 0.0)) fail("particle.mass", "must be >= 0");
  if (integer("particle.dimension") < 1 || integer("particle.dimension") > 3) {
    fail("particle.dimension", "must be 1, 2 or 3");
  }
  one_of("grid.topology", {"line", "ring"});
  if (!(number("grid.upper") > number("grid.lower"))) fail("grid.upper", "must exceed grid.lower");
  at_least("grid.cells", 8);
  positive("grid.dt");
  one_of("potential.kind", {"paired", "none", "quadratic"});
  positive("state.sigma");
  positive("state.omega");
  one_of("state.branch", {"plus", "minus"});
  positive("evolution.time");
  at_least("ensemble.paths", 1);
  at_least("ensemble.steps", 1);
  positive("ensemble.dt");
  if (integer("ensemble.seed") < 0) fail("ensemble.seed", "must be non-negative");
  one_of("ensemble.drift_mode", {"density-consistent", "literal"});
  one_of("ensemble.direction", {"forward", "backward"});
  one_of("ensemble.initial", {"density", "point"});
  for (double t : numbers("ensemble.snapshots")) {
    if (!(t >= 0.0)) fail("ensemble.snapshots", "times must be non-negative");
  }
  if (!(number("histogram.upper") > number("histogram.lower"))) {
    fail("histogram.upper", "must exceed histogram.lower");
  }
  at_least("histogram.cells", 2);
  one_of("noise.part", {"all", "covariance", "realizability", "brackets"});
  at_least("noise.increments", 2);
  positive("noise.step");
  at_least("noise.sweep_phases", 1);
  at_least("noise.qv_increments", 2);
  at_least("noise.qv_replicates", 2);
  if (numbers("noise.qv_sizes").size() < 2) fail("noise.qv_sizes", "needs at least two sizes");
  for (double g : numbers("noise.sweep_gammas")) {
    if (!(g >= 0.0)) fail("noise.sweep_gammas", "values must be >= 0");
  }
  at_least("refinement.cells", 8);
  const long msq = integer("relativistic.mass_squared_sign");
  if (msq < -1 || msq > 1) fail("relativistic.mass_squared_sign", "must be -1, 0 or 1");
  if (numbers("relativistic.windows").empty()) fail("relativistic.windows", "must not be empty");
  for (double w : numbers("relativistic.windows")) {
    if (!(w > 0.0)) fail("relativistic.windows", "values must be positive");
  }
  positive("relativistic.box");
  at_least("relativistic.cells", 8);
  positive("relativistic.packet_width");
  at_least("relativistic.slices", 2);
  if (!(number("relativistic.x0_upper") > number("relativistic.x0_lower"))) {
    fail("relativistic.x0_upper", "must exceed relativistic.x0_lower");
  }
  at_least("uncertainty.trials", 1);
  at_least("uncertainty.levels", 1);
  at_least("ring.max_winding", 0);
  if (text("outputs.directory").empty()) fail("outputs.directory", "must not be empty");
  at_least("outputs.full_paths", 0);
  for (const auto& e : config_schema()) {
    if (e.key.rfind("criteria.", 0) == 0 && !std::isfinite(number(e.key))) fail(e.key, "must be finite");
  }
}

json ScenarioConfig::to_json() const {
  json out = json::object();
  for (const auto& [key, value] : values_) {
    json* node = &out;
    std::size_t start = 0;
    for (std::size_t dot = key.find('.'); dot != std::string::npos; dot = key.find('.', start)) {
      node = &(*node)[key.substr(start, dot - start)];
      start = dot + 1;
    }
    (*node)[key.substr(start)] = value;
  }
  return out;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : builtin_presets()) names.emplace_back(p.name);
  std::sort(names.begin(), names.end());
  return names;
}

bool is_preset(const std::string& name) {
  const auto& all = builtin_presets();
  return std::any_of(all.begin(), all.end(), [&](const Preset& p) { return name == p.name; });
}

std::string preset_text(const std::string& name) {
  for (const auto& p : builtin_presets()) {
    if (name == p.name) return p.text;
  }
  throw ConfigError("no preset named '" + name + "'");
}

ScenarioConfig load_config(const std::string& fileOrPreset) {
  if (std::filesystem::is_regular_file(fileOrPreset)) return ScenarioConfig::from_file(fileOrPreset);
  if (is_preset(fileOrPreset)) return ScenarioConfig::parse(preset_text(fileOrPreset), "preset:" + fileOrPreset);
  throw ConfigError("'" + fileOrPreset + "' is neither a readable file nor a preset name");
}

bool ScenarioReport::passed() const {
  return std::all_of(criteria.begin(), criteria.end(),
                     [](const Criterion& c) { return !c.asserted || c.passed; });
}

bool ScenarioReport::check(const std::string& name, double value, const std::string& relation,
                           double threshold, bool asserted, const std::string& note) {
  Criterion c{name, value, threshold, relation, asserted, false, note};
  if (std::isfinite(value)) {
    if (relation == "<") c.passed = value < threshold;
    else if (relation == "<=") c.passed = value <= threshold;
    else if (relation == ">") c.passed = value > threshold;
    else if (relation == ">=") c.passed = value >= threshold;
    else if (relation == "==") c.passed = value == threshold;
    else throw std::invalid_argument("unknown relation " + relation);
  }
  criteria.push_back(c);
  return c.passed;
}

json ScenarioReport::to_json() const {
  json list = json::array();
  for (const auto& c : criteria) {
    json item = {{"name", c.name},         {"value", c.value},       {"relation", c.relation},
                 {"threshold", c.threshold}, {"asserted", c.asserted}, {"pass", c.passed}};
    if (!c.note.empty()) item["note"] = c.note;
    list.push_back(std::move(item));
  }
  return {{"scenario", scenario},
          {"pipeline", pipeline},
          {"status", passed() ? "pass" : "fail"},
          {"criteria", std::move(list)},
          {"measurements", measurements}};
}

}  // namespace cdiff
