#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowlab/fields.hpp"
#include "flowlab/geometry.hpp"

namespace flowlab {

// One [set <label>] section of the config; build() turns it into the
// measurable set the estimators consume.
struct SetSpec {
  std::string label;
  std::string kind = "ball";  // ball | box
  Vec3 center{};
  double radius = 0.0;
  Vec3 halfwidths{};
  int line = 0;  // line the section header sits on, for diagnostics

  MeasurableSet build() const;
};

struct TimePair {
  double s = 0.0;
  double t = 0.0;
};

// accepted suite names, in canonical execution order
const std::vector<std::string>& known_suites();

struct ScenarioConfig {
  std::string field_name = "rotation";
  // honored by the zero field only; the named fields fix their own domain
  std::optional<Domain> domain_override;
  std::vector<std::string> suites;  // declared order is execution order
  double step_size = 1e-3;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  double eps_max = 0.2;
  std::vector<double> eps_list{0.2, 0.1, 0.05};
  std::vector<TimePair> time_pairs{{1.0, 0.0}};
  int time_nodes = 9;
  int grid_cells = 32;
  // the convergence suite integrates mollified fields, which cost a cubed
  // quadrature order per velocity evaluation; it gets its own budget
  std::uint64_t convergence_samples = 4000;
  double convergence_step = 0.0125;
  int mollifier_order = 8;
  std::string out_dir = ".";
  std::vector<SetSpec> sets;

  VelocityField build_field() const;
  Enclosure build_enclosure() const;
};

struct ConfigError {
  int line = 0;         // 1-based; 0 when not tied to a line
  std::string section;  // "" at top level
  std::string message;

  std::string format() const;
};

struct ParseResult {
  // engaged iff errors is empty
  std::optional<ScenarioConfig> config;
  std::vector<ConfigError> errors;

  bool ok() const { return errors.empty(); }
};

// Sectioned key-value text; collects every error instead of stopping at the
// first.  Grammar documented in docs/config.md.
ParseResult parse_config(const std::string& text);
ParseResult parse_config_file(const std::string& path);

}  // namespace flowlab
