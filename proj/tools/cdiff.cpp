// Command-line driver: run, list and validate scenario configs.

#include <iostream>

#include <CLI11.hpp>

#include "cdiff/core.hpp"
#include "cdiff/scenario.hpp"

using namespace cdiff;

namespace {

ScenarioConfig prepare(const std::string& config, const std::vector<std::string>& overrides,
                       long seed) {
  ScenarioConfig cfg = load_config(config);
  for (const auto& o : overrides) cfg.apply_override(o);
  if (seed >= 0) cfg.set("ensemble.seed", seed);
  cfg.validate();
  return cfg;
}

void print_report(const ScenarioReport& r) {
  for (const auto& c : r.criteria) {
    std::cout << (c.passed ? "pass " : "FAIL ") << (c.asserted ? "" : "(report) ") << c.name << " = "
              << c.value << ' ' << c.relation << ' ' << c.threshold << '\n';
  }
  std::cout << r.scenario << ": " << (r.passed() ? "all asserted criteria passed" : "criteria failed")
            << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complex diffusion scenarios"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  long seed = -1;
  int threads = 1;
  auto* run = app.add_subcommand("run", "run a scenario file or preset");
  run->add_option("config", config, "config file or preset name")->required();
  run->add_option("--seed", seed, "override ensemble.seed")->check(CLI::NonNegativeNumber);
  run->add_option("--out", out, "output directory");
  run->add_option("--override", overrides, "key=value applied after parsing");
  run->add_option("--threads", threads, "sampler threads; outputs do not depend on it")
      ->check(CLI::PositiveNumber);

  app.add_subcommand("list", "print preset names");

  std::string target;
  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("config", target, "config file or preset name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list")) {
      for (const auto& name : preset_names()) std::cout << name << '\n';
      return kExitPass;
    }
    if (app.got_subcommand("validate")) {
      prepare(target, {}, -1);
      std::cout << target << ": ok\n";
      return kExitPass;
    }
    const ScenarioConfig cfg = prepare(config, overrides, seed);
    const ScenarioReport report = run_scenario(cfg, {out, threads});
    print_report(report);
    return report.passed() ? kExitPass : kExitCriteria;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalGuard& e) {
    std::cerr << "numerical guard: " << e.what() << '\n';
    return kExitGuard;
  } catch (const InvalidSpec& e) {
    std::cerr << "invalid specification: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
