#include "flowlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace flowlab {

namespace {

std::string trim(std::string_view s) {
  const auto issp = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  std::size_t b = 0, e = s.size();
  while (b < e && issp(s[b])) ++b;
  while (e > b && issp(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool parse_double(const std::string& tok, double& out) {
  const char* b = tok.data();
  const char* e = b + tok.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e && std::isfinite(out);
}

bool parse_u64(const std::string& tok, std::uint64_t& out) {
  const char* b = tok.data();
  const char* e = b + tok.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

bool parse_int(const std::string& tok, int& out) {
  const char* b = tok.data();
  const char* e = b + tok.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

// shape keys shared by [domain] and [set <label>] sections
struct ShapeSpec {
  std::string kind = "ball";
  Vec3 center{};
  double radius = 0.0;
  Vec3 halfwidths{};
  bool radius_given = false;
  bool halfwidths_given = false;
};

// distance from an interior point to the domain boundary (0 outside)
double interior_margin(const Domain& d, const Vec3& x) {
  if (d.kind == Domain::Kind::Ball) {
    return std::max(0.0, d.radius - (x - d.center).norm());
  }
  const Vec3 off = x - d.center;
  double m = d.halfwidths.x - std::fabs(off.x);
  m = std::min(m, d.halfwidths.y - std::fabs(off.y));
  m = std::min(m, d.halfwidths.z - std::fabs(off.z));
  return std::max(0.0, m);
}

struct Parser {
  ScenarioConfig cfg;
  std::vector<ConfigError> errors;

  bool field_given = false;
  bool suites_given = false;
  bool sets_given = false;
  int eps_list_line = 0;
  std::string eps_list_section;
  int domain_line = 0;
  bool domain_given = false;
  ShapeSpec domain_shape;

  void err(int line, const std::string& section, std::string message) {
    errors.push_back({line, section, std::move(message)});
  }
};

bool parse_vec3(Parser& P, int line, const std::string& section,
                const std::string& key, const std::string& value, Vec3& out) {
  const auto toks = split_ws(value);
  double v[3];
  if (toks.size() != 3 || !parse_double(toks[0], v[0]) ||
      !parse_double(toks[1], v[1]) || !parse_double(toks[2], v[2])) {
    P.err(line, section, "key '" + key + "' expects three numbers");
    return false;
  }
  out = {v[0], v[1], v[2]};
  return true;
}

void handle_shape_key(Parser& P, ShapeSpec& shape, int line,
                      const std::string& section, const std::string& key,
                      const std::string& value) {
  if (key == "kind") {
    if (value != "ball" && value != "box") {
      P.err(line, section, "kind must be 'ball' or 'box', got '" + value + "'");
      return;
    }
    shape.kind = value;
  } else if (key == "center") {
    parse_vec3(P, line, section, key, value, shape.center);
  } else if (key == "radius") {
    double r = 0.0;
    if (!parse_double(value, r) || r <= 0.0) {
      P.err(line, section, "radius must be a positive number, got '" + value + "'");
      return;
    }
    shape.radius = r;
    shape.radius_given = true;
  } else if (key == "halfwidths") {
    if (parse_vec3(P, line, section, key, value, shape.halfwidths)) {
      if (shape.halfwidths.x <= 0.0 || shape.halfwidths.y <= 0.0 ||
          shape.halfwidths.z <= 0.0) {
        P.err(line, section, "halfwidths must all be positive");
        return;
      }
      shape.halfwidths_given = true;
    }
  } else {
    P.err(line, section, "unknown key '" + key + "'");
  }
}

void handle_run_key(Parser& P, int line, const std::string& section,
                    const std::string& key, const std::string& value) {
  ScenarioConfig& cfg = P.cfg;
  if (key == "field") {
    P.field_given = true;
    static const std::vector<std::string> known = {"rotation", "contraction",
                                                   "rough_shear", "zero"};
    if (std::find(known.begin(), known.end(), value) == known.end()) {
      P.err(line, section,
            "unknown field name '" + value +
                "' (known: rotation, contraction, rough_shear, zero)");
      return;
    }
    cfg.field_name = value;
  } else if (key == "suites") {
    std::vector<std::string> names = split_ws(value);
    if (names.empty()) {
      P.err(line, section, "suites list is empty");
      return;
    }
    bool ok = true;
    for (const std::string& name : names) {
      const auto& all = known_suites();
      if (std::find(all.begin(), all.end(), name) == all.end()) {
        P.err(line, section, "unknown suite '" + name + "'");
        ok = false;
      }
      if (std::count(names.begin(), names.end(), name) > 1) {
        P.err(line, section, "suite '" + name + "' listed more than once");
        ok = false;
        break;
      }
    }
    if (ok) {
      cfg.suites = std::move(names);
      P.suites_given = true;
    }
  } else if (key == "step_size") {
    double v = 0.0;
    if (!parse_double(value, v) || v <= 0.0) {
      P.err(line, section, "step_size must be a positive number, got '" + value + "'");
      return;
    }
    cfg.step_size = v;
  } else if (key == "samples") {
    std::uint64_t v = 0;
    if (!parse_u64(value, v) || v < 2) {
      P.err(line, section, "samples must be an integer >= 2, got '" + value + "'");
      return;
    }
    cfg.samples = v;
  } else if (key == "seed") {
    std::uint64_t v = 0;
    if (!parse_u64(value, v)) {
      P.err(line, section, "seed must be a nonnegative integer, got '" + value + "'");
      return;
    }
    cfg.seed = v;
  } else if (key == "eps_max") {
    double v = 0.0;
    if (!parse_double(value, v) || v <= 0.0) {
      P.err(line, section, "eps_max must be a positive number, got '" + value + "'");
      return;
    }
    cfg.eps_max = v;
  } else if (key == "eps_list") {
    const auto toks = split_ws(value);
    if (toks.empty()) {
      P.err(line, section, "eps_list is empty");
      return;
    }
    std::vector<double> eps;
    for (const std::string& tok : toks) {
      double v = 0.0;
      if (!parse_double(tok, v) || v <= 0.0) {
        P.err(line, section, "malformed eps_list entry '" + tok + "'");
        return;
      }
      eps.push_back(v);
    }
    for (std::size_t i = 0; i + 1 < eps.size(); ++i) {
      if (eps[i + 1] >= eps[i]) {
        P.err(line, section, "eps_list must be strictly decreasing");
        return;
      }
    }
    cfg.eps_list = std::move(eps);
    P.eps_list_line = line;
    P.eps_list_section = section;
  } else if (key == "time_pairs") {
    const auto toks = split_ws(value);
    if (toks.empty()) {
      P.err(line, section, "time_pairs is empty");
      return;
    }
    std::vector<TimePair> pairs;
    for (const std::string& tok : toks) {
      const auto colon = tok.find(':');
      TimePair p;
      if (colon == std::string::npos ||
          !parse_double(tok.substr(0, colon), p.s) ||
          !parse_double(tok.substr(colon + 1), p.t)) {
        P.err(line, section,
              "malformed time pair '" + tok + "' (expected s:t)");
        return;
      }
      pairs.push_back(p);
    }
    cfg.time_pairs = std::move(pairs);
  } else if (key == "time_nodes") {
    int v = 0;
    if (!parse_int(value, v) || v < 3) {
      P.err(line, section, "time_nodes must be an integer >= 3, got '" + value + "'");
      return;
    }
    cfg.time_nodes = v;
  } else if (key == "grid_cells") {
    int v = 0;
    if (!parse_int(value, v) || v < 8 || v > 128) {
      P.err(line, section, "grid_cells must be in [8, 128], got '" + value + "'");
      return;
    }
    cfg.grid_cells = v;
  } else if (key == "convergence_samples") {
    std::uint64_t v = 0;
    if (!parse_u64(value, v) || v < 2) {
      P.err(line, section,
            "convergence_samples must be an integer >= 2, got '" + value + "'");
      return;
    }
    cfg.convergence_samples = v;
  } else if (key == "convergence_step") {
    double v = 0.0;
    if (!parse_double(value, v) || v <= 0.0) {
      P.err(line, section,
            "convergence_step must be a positive number, got '" + value + "'");
      return;
    }
    cfg.convergence_step = v;
  } else if (key == "mollifier_order") {
    int v = 0;
    if (!parse_int(value, v) || v < 8 || v > 24) {
      P.err(line, section,
            "mollifier_order must be in [8, 24], got '" + value + "'");
      return;
    }
    cfg.mollifier_order = v;
  } else if (key == "out") {
    if (value.empty()) {
      P.err(line, section, "out must not be empty");
      return;
    }
    cfg.out_dir = value;
  } else {
    P.err(line, section, "unknown key '" + key + "'");
  }
}

Domain shape_to_domain(const ShapeSpec& shape) {
  if (shape.kind == "box") return Domain::box(shape.center, shape.halfwidths);
  return Domain::ball(shape.center, shape.radius);
}

void finish(Parser& P) {
  ScenarioConfig& cfg = P.cfg;

  if (!P.field_given) {
    P.err(0, "", "missing required key 'field'");
  }

  if (P.domain_given) {
    if (!P.domain_shape.radius_given && P.domain_shape.kind == "ball") {
      P.err(P.domain_line, "domain", "ball domain needs a radius");
    } else if (!P.domain_shape.halfwidths_given &&
               P.domain_shape.kind == "box") {
      P.err(P.domain_line, "domain", "box domain needs halfwidths");
    } else if (cfg.field_name != "zero") {
      P.err(P.domain_line, "domain",
            "field '" + cfg.field_name +
                "' fixes its own domain; [domain] applies to the zero field only");
    } else {
      cfg.domain_override = shape_to_domain(P.domain_shape);
    }
  }

  for (const double eps : cfg.eps_list) {
    if (eps > cfg.eps_max) {
      std::ostringstream msg;
      msg << "eps_list entry " << eps << " exceeds eps_max " << cfg.eps_max
          << " (mollification radii must fit the enclosure margin)";
      P.err(P.eps_list_line, P.eps_list_section, msg.str());
    }
  }

  if (!P.suites_given) cfg.suites = known_suites();

  if (std::find(cfg.suites.begin(), cfg.suites.end(), "convergence") !=
          cfg.suites.end() &&
      cfg.eps_list.size() < 2) {
    P.err(0, "", "the convergence suite needs at least two eps_list entries");
  }

  for (std::size_t i = 0; i < cfg.sets.size(); ++i) {
    for (std::size_t j = i + 1; j < cfg.sets.size(); ++j) {
      if (cfg.sets[i].label == cfg.sets[j].label) {
        P.err(cfg.sets[j].line, "set " + cfg.sets[j].label,
              "duplicate set label '" + cfg.sets[j].label +
                  "' (also defined at line " +
                  std::to_string(cfg.sets[i].line) + ")");
      }
    }
  }

  // geometric validation needs the resolved domain; skip when the field or
  // domain already failed
  if (!P.errors.empty()) return;

  const Domain domain = cfg.build_field().domain;

  if (!P.sets_given) {
    SetSpec probe;
    probe.label = "probe";
    probe.kind = "ball";
    probe.center = domain.center;
    probe.radius = 0.3 * interior_margin(domain, domain.center);
    cfg.sets.push_back(probe);
  }

  for (const SetSpec& set : cfg.sets) {
    double circum = 0.0;
    if (set.kind == "ball") {
      if (set.radius <= 0.0) {
        P.err(set.line, "set " + set.label,
              "set '" + set.label + "' needs a positive radius");
        continue;
      }
      circum = set.radius;
    } else {
      if (set.halfwidths.x <= 0.0 || set.halfwidths.y <= 0.0 ||
          set.halfwidths.z <= 0.0) {
        P.err(set.line, "set " + set.label,
              "set '" + set.label + "' needs positive halfwidths");
        continue;
      }
      circum = set.halfwidths.norm();
    }
    if (interior_margin(domain, set.center) <= circum) {
      P.err(set.line, "set " + set.label,
            "set '" + set.label + "' must sit strictly inside the domain");
    }
  }
}

}  // namespace

const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> names = {
      "flow-diagnostics", "transport", "commutator", "reynolds", "convergence"};
  return names;
}

MeasurableSet SetSpec::build() const {
  if (kind == "box") return MeasurableSet::box(label, center, halfwidths);
  return MeasurableSet::ball(label, center, radius);
}

VelocityField ScenarioConfig::build_field() const {
  if (field_name == "rotation") return rotation_field();
  if (field_name == "contraction") return contraction_field();
  if (field_name == "rough_shear") return rough_shear_field();
  if (field_name == "zero") {
    return zero_field(domain_override ? *domain_override
                                      : Domain::ball({0, 0, 0}, 1.0));
  }
  throw std::invalid_argument("unknown field name '" + field_name + "'");
}

Enclosure ScenarioConfig::build_enclosure() const {
  return make_enclosure(build_field().domain, eps_max);
}

std::string ConfigError::format() const {
  std::string out = "config error";
  if (line > 0) out += " at line " + std::to_string(line);
  if (!section.empty()) out += " [" + section + "]";
  out += ": " + message;
  return out;
}

ParseResult parse_config(const std::string& text) {
  Parser P;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;

  // "run" is the top-level namespace; [run] reopens it explicitly
  enum class Section { Run, DomainShape, Set, Broken };
  Section section = Section::Run;
  std::string display;  // "" for top level
  SetSpec scratch;      // sink for keys in a broken section
  SetSpec* cur_set = &scratch;

  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        P.err(lineno, display, "unterminated section header");
        section = Section::Broken;
        continue;
      }
      const std::string inner = trim(line.substr(1, line.size() - 2));
      if (inner == "run") {
        section = Section::Run;
        display = "run";
      } else if (inner == "domain") {
        section = Section::DomainShape;
        display = "domain";
        P.domain_given = true;
        P.domain_line = lineno;
      } else if (inner.rfind("set", 0) == 0 &&
                 (inner.size() == 3 || inner[3] == ' ' || inner[3] == '\t')) {
        const std::string label = trim(inner.substr(3));
        if (label.empty()) {
          P.err(lineno, "set", "set section needs a label: [set <label>]");
          section = Section::Broken;
          continue;
        }
        SetSpec spec;
        spec.label = label;
        spec.line = lineno;
        P.cfg.sets.push_back(spec);
        P.sets_given = true;
        cur_set = &P.cfg.sets.back();
        section = Section::Set;
        display = "set " + label;
      } else {
        P.err(lineno, "", "unknown section [" + inner + "]");
        section = Section::Broken;
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      P.err(lineno, display, "expected 'key = value' or a section header");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      P.err(lineno, display, "empty key before '='");
      continue;
    }

    switch (section) {
      case Section::Run:
        handle_run_key(P, lineno, display, key, value);
        break;
      case Section::DomainShape:
        handle_shape_key(P, P.domain_shape, lineno, display, key, value);
        break;
      case Section::Set: {
        ShapeSpec shape;
        shape.kind = cur_set->kind;
        shape.center = cur_set->center;
        shape.radius = cur_set->radius;
        shape.halfwidths = cur_set->halfwidths;
        handle_shape_key(P, shape, lineno, display, key, value);
        cur_set->kind = shape.kind;
        cur_set->center = shape.center;
        cur_set->radius = shape.radius;
        cur_set->halfwidths = shape.halfwidths;
        break;
      }
      case Section::Broken:
        break;  // the header already produced the error
    }
  }

  finish(P);

  ParseResult result;
  result.errors = std::move(P.errors);
  if (result.errors.empty()) result.config = std::move(P.cfg);
  return result;
}

ParseResult parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ParseResult result;
    result.errors.push_back({0, "", "cannot read config file '" + path + "'"});
    return result;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace flowlab
