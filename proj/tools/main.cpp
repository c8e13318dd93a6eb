#include <algorithm>
#include <cstdio>
#include <cstdint>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "flowlab/config.hpp"
#include "flowlab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"flow map laboratory: runs verification suites from a scenario config"};

  std::string config_path;
  std::string suite_override;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool list = false;

  app.add_option("config", config_path, "path to the scenario config file");
  app.add_option("--suite", suite_override,
                 "run only this suite (overrides the config)");
  CLI::Option* seed_opt =
      app.add_option("--seed", seed_override, "seed override");
  app.add_option("--out", out_override, "output directory override");
  app.add_flag("--list", list, "print the built-in scenario gallery and exit");

  CLI11_PARSE(app, argc, argv);

  if (list) {
    std::fputs(flowlab::list_scenarios().c_str(), stdout);
    return 0;
  }
  if (config_path.empty()) {
    std::fputs("error: a config path is required (or --list)\n", stderr);
    return 2;
  }

  flowlab::ParseResult parsed = flowlab::parse_config_file(config_path);
  if (!parsed.ok()) {
    for (const flowlab::ConfigError& e : parsed.errors) {
      std::fprintf(stderr, "%s\n", e.format().c_str());
    }
    return 2;
  }
  flowlab::ScenarioConfig config = *parsed.config;

  if (!suite_override.empty()) {
    const auto& all = flowlab::known_suites();
    if (std::find(all.begin(), all.end(), suite_override) == all.end()) {
      std::fprintf(stderr, "error: unknown suite '%s'\n",
                   suite_override.c_str());
      return 2;
    }
    config.suites = {suite_override};
  }
  if (seed_opt->count() > 0) config.seed = seed_override;
  if (!out_override.empty()) config.out_dir = out_override;

  try {
    const flowlab::RunSummary summary = flowlab::run(config);
    std::fputs(flowlab::format_run_summary(summary).c_str(), stdout);
    return summary.passed ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
