#ifndef CDIFF_SCENARIO_HPP
#define CDIFF_SCENARIO_HPP

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace cdiff {

/// Schema violations: unknown keys, wrong types, out-of-range values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValueKind { Number, Integer, Text, Flag, NumberList };

struct SchemaEntry {
  std::string key;  // dotted path, e.g. "alpha.phase"
  ValueKind kind;
  nlohmann::json fallback;
  std::string help;
};

/// Every accepted key with its default, in documentation order.
const std::vector<SchemaEntry>& config_schema();

/// Flat dotted-key view of a scenario file. Every schema key is always
/// present, so a config echoed back to disk is complete.
class ScenarioConfig {
 public:
  ScenarioConfig();

  /// Parses YAML text. Unknown keys raise ConfigError naming the key path and
  /// line; top-level `provenance` and `manifest` blocks are ignored.
  static ScenarioConfig parse(const std::string& text, const std::string& source);
  static ScenarioConfig from_file(const std::filesystem::path& file);

  /// "key=value" with a YAML scalar or flow sequence on the right.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const nlohmann::json& value);

  /// Physical and structural checks; throws ConfigError.
  void validate() const;

  double number(const std::string& key) const;
  long integer(const std::string& key) const;
  std::string text(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;

  /// Nested object holding every key (defaults included).
  nlohmann::json to_json() const;

  const std::string& source() const { return source_; }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

  std::map<std::string, nlohmann::json> values_;
  std::map<std::string, int> lines_;
  std::string source_ = "<defaults>";
};

std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
std::string preset_text(const std::string& name);

/// Reads a file if it exists, otherwise resolves a preset name.
ScenarioConfig load_config(const std::string& fileOrPreset);

struct Criterion {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<", "<=", ">", ">=" or "==" (value relation threshold)
  bool asserted = true;
  bool passed = true;
  std::string note;
};

struct ScenarioReport {
  std::string scenario;
  std::string pipeline;
  std::vector<Criterion> criteria;
  nlohmann::json measurements = nlohmann::json::object();

  bool passed() const;
  /// Adds a criterion, evaluates it and returns whether it passed.
  bool check(const std::string& name, double value, const std::string& relation, double threshold,
             bool asserted = true, const std::string& note = {});
  nlohmann::json to_json() const;
};

struct RunOptions {
  std::filesystem::path outDir;  // empty: outputs.directory from the config
  int threads = 1;
};

/// Runs the pipeline named by the config and writes manifest.json,
/// report.json, densities/*.csv, drift/*.csv (and curves/*.csv where
/// relevant) into the output directory.
ScenarioReport run_scenario(const ScenarioConfig& config, const RunOptions& options);

inline constexpr int kExitPass = 0;
inline constexpr int kExitCriteria = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitGuard = 3;

std::vector<std::string> pipeline_names();

}  // namespace cdiff

#endif  // CDIFF_SCENARIO_HPP
