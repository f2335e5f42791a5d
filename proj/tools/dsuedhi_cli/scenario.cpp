#include "dsuedhi_cli/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <vector>

#include "dsuedhi/error.hpp"
#include "dsuedhi/io.hpp"

namespace dsuedhi::cli {

namespace fs = std::filesystem;

namespace {

struct Key {
  const char* section;
  const char* name;
  std::function<void(Scenario&, const std::string&, const fs::path&, std::size_t)> set;
  std::function<std::string(const Scenario&)> get;
};

double number(const std::string& v, std::size_t line, const char* name) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  return io::parse_double(v, line, name);
}

std::size_t count(const std::string& v, std::size_t line, const char* name) {
  return io::parse_index(v, line, name);
}

bool flag(const std::string& v, std::size_t line, const char* name) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError(line, "invalid boolean '" + v + "' for " + std::string(name));
}

std::string fmt(double v) { return std::isinf(v) ? "inf" : io::format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

fs::path resolve(const std::string& v, const fs::path& base) {
  fs::path p(v);
  return p.is_absolute() || base.empty() ? p : (base / p).lexically_normal();
}

#define DSUEDHI_NUM(SEC, NAME, FIELD)                                                  \
  Key {                                                                                \
    SEC, NAME,                                                                         \
        [](Scenario& s, const std::string& v, const fs::path&, std::size_t l) {        \
          s.FIELD = number(v, l, NAME);                                                \
        },                                                                             \
        [](const Scenario& s) { return fmt(s.FIELD); }                                 \
  }
#define DSUEDHI_COUNT(SEC, NAME, FIELD)                                                \
  Key {                                                                                \
    SEC, NAME,                                                                         \
        [](Scenario& s, const std::string& v, const fs::path&, std::size_t l) {        \
          s.FIELD = count(v, l, NAME);                                                 \
        },                                                                             \
        [](const Scenario& s) { return fmt(s.FIELD); }                                 \
  }
#define DSUEDHI_FLAG(SEC, NAME, FIELD)                                                 \
  Key {                                                                                \
    SEC, NAME,                                                                         \
        [](Scenario& s, const std::string& v, const fs::path&, std::size_t l) {        \
          s.FIELD = flag(v, l, NAME);                                                  \
        },                                                                             \
        [](const Scenario& s) { return fmt(s.FIELD); }                                 \
  }
#define DSUEDHI_PATH(SEC, NAME, FIELD)                                                 \
  Key {                                                                                \
    SEC, NAME,                                                                         \
        [](Scenario& s, const std::string& v, const fs::path& base, std::size_t) {     \
          s.FIELD = v.empty() ? fs::path() : resolve(v, base);                         \
        },                                                                             \
        [](const Scenario& s) { return s.FIELD.string(); }                             \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"scenario", "id",
       [](Scenario& s, const std::string& v, const fs::path&, std::size_t l) {
         if (v.empty()) throw ParseError(l, "scenario id must not be empty");
         s.id = v;
       },
       [](const Scenario& s) { return s.id; }},
      DSUEDHI_PATH("scenario", "network", network),
      DSUEDHI_PATH("scenario", "demand", demand),
      DSUEDHI_PATH("scenario", "paths", paths),
      DSUEDHI_PATH("scenario", "output", output),
      DSUEDHI_NUM("time", "horizon_s", horizon_s),
      DSUEDHI_NUM("time", "interval_s", interval_s),
      DSUEDHI_NUM("choice", "theta", choice.theta),
      DSUEDHI_NUM("choice", "mu_early", choice.mu_early),
      DSUEDHI_NUM("choice", "mu_late", choice.mu_late),
      DSUEDHI_NUM("choice", "time_unit_s", choice.time_unit),
      {"classes", "instant_share",
       [](Scenario& s, const std::string& v, const fs::path&, std::size_t l) {
         if (v.empty() || v == "file") {
           s.instant_share.reset();
         } else {
           s.instant_share = number(v, l, "instant_share");
         }
       },
       [](const Scenario& s) { return s.instant_share ? fmt(*s.instant_share) : "file"; }},
      DSUEDHI_NUM("classes", "demand_scale", demand_scale),
      DSUEDHI_NUM("solver", "tolerance", solver.tolerance),
      DSUEDHI_NUM("solver", "step_up", solver.step_up),
      DSUEDHI_NUM("solver", "step_down", solver.step_down),
      DSUEDHI_COUNT("solver", "max_iterations", solver.max_iterations),
      {"solver", "init",
       [](Scenario& s, const std::string& v, const fs::path&, std::size_t l) {
         if (v == "free_flow") {
           s.solver.init = InitPolicy::FreeFlow;
         } else if (v == "uniform") {
           s.solver.init = InitPolicy::Uniform;
         } else {
           throw ParseError(l, "init must be free_flow or uniform");
         }
       },
       [](const Scenario& s) {
         return std::string(s.solver.init == InitPolicy::FreeFlow ? "free_flow" : "uniform");
       }},
      DSUEDHI_COUNT("paths", "k_max", path_options.k_max),
      DSUEDHI_NUM("paths", "time_ratio", path_options.time_ratio),
      DSUEDHI_NUM("paths", "length_ratio", path_options.length_ratio),
      DSUEDHI_NUM("metrics", "trim_fraction", trim.fraction),
      DSUEDHI_COUNT("dnl", "substeps", dnl.substeps),
      DSUEDHI_NUM("dnl", "max_step_s", dnl.max_step),
      DSUEDHI_COUNT("dnl", "clearance_intervals", dnl.clearance_intervals),
      DSUEDHI_NUM("dnl", "max_source_queue", dnl.max_source_queue),
      DSUEDHI_FLAG("output", "dump_curves", dump_curves),
      DSUEDHI_FLAG("output", "dump_forecasts", dump_forecasts),
  };
  return table;
}

#undef DSUEDHI_NUM
#undef DSUEDHI_COUNT
#undef DSUEDHI_FLAG
#undef DSUEDHI_PATH

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const Key* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : keys()) {
    if (section == k.section && name == k.name) return &k;
  }
  return nullptr;
}

std::string env_name(const Key& k) {
  std::string n = std::string("DSUEDHI_") + k.section + "_" + k.name;
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return n;
}

}  // namespace

Scenario parse_scenario(std::istream& in, const fs::path& base_dir) {
  Scenario s;
  std::string section;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find_first_of("#;");
    const auto text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ParseError(line, "unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      bool known = false;
      for (const auto& k : keys()) known = known || section == k.section;
      if (!known) throw ParseError(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected key = value");
    if (section.empty()) throw ParseError(line, "key outside of a section");
    const auto name = trim(text.substr(0, eq));
    const auto* key = find_key(section, name);
    if (!key) throw ParseError(line, "unknown key '" + name + "' in [" + section + "]");
    key->set(s, trim(text.substr(eq + 1)), base_dir, line);
  }
  return s;
}

Scenario load_scenario(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open " + file.string());
  auto s = parse_scenario(in, file.parent_path());
  apply_environment(s);
  return s;
}

void apply_environment(Scenario& s) {
  for (const auto& k : keys()) {
    const auto name = env_name(k);
    if (const char* v = std::getenv(name.c_str())) {
      try {
        k.set(s, trim(v), fs::current_path(), 0);
      } catch (const ParseError& e) {
        throw ParseError(0, name + ": " + e.what());
      }
    }
  }
}

void write_scenario(std::ostream& out, const Scenario& s) {
  std::string section;
  for (const auto& k : keys()) {
    if (section != k.section) {
      if (!section.empty()) out << '\n';
      section = k.section;
      out << '[' << section << "]\n";
    }
    out << k.name << " = " << k.get(s) << '\n';
  }
}

Problem build_problem(const Scenario& s) {
  if (s.network.empty()) throw ValidationError("scenario has no network file");
  if (s.demand.empty()) throw ValidationError("scenario has no demand file");
  const auto links = io::read_links_file(s.network.string());
  const auto demand = io::read_demand_file(s.demand.string());
  Network net = validate_network({}, links, demand);
  if (s.demand_scale != 1.0) net = net.with_demand_scaled(s.demand_scale);
  if (s.instant_share) {
    if (!(*s.instant_share >= 0.0 && *s.instant_share <= 1.0)) {
      throw ValidationError("instant share must lie in [0, 1]");
    }
    net = net.with_forecast_share(1.0 - *s.instant_share);
  }
  s.trim.validate();
  validate(s.solver);
  PathSet paths;
  if (!s.paths.empty()) {
    std::ifstream in(s.paths);
    if (!in) throw Error("cannot open " + s.paths.string());
    paths = io::read_paths(in, net);
  } else {
    paths = enumerate_all_paths(net, s.path_options);
  }
  TimeGrid grid(s.horizon_s, s.interval_s);
  return Problem(std::move(net), std::move(paths), grid, s.choice, s.dnl);
}

}  // namespace dsuedhi::cli
