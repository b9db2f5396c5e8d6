#include "holoreg/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "holoreg/errors.hpp"

namespace holoreg {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

const std::map<std::string, double>& unit_table(Dimension dim) {
  static const std::map<std::string, double> frequency{
      {"Hz", two_pi},     {"kHz", two_pi * 1e3}, {"MHz", two_pi * 1e6},
      {"GHz", two_pi * 1e9}, {"rad/s", 1.0},     {"krad/s", 1e3},
  };
  static const std::map<std::string, double> time{
      {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9},
  };
  static const std::map<std::string, double> field{
      {"T", 1.0}, {"mT", 1e-3}, {"uT", 1e-6},
  };
  static const std::map<std::string, double> temperature{
      {"K", 1.0}, {"mK", 1e-3},
  };
  static const std::map<std::string, double> length{
      {"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6},
  };
  static const std::map<std::string, double> none{};
  switch (dim) {
    case Dimension::AngularFrequency: return frequency;
    case Dimension::Time: return time;
    case Dimension::Field: return field;
    case Dimension::Temperature: return temperature;
    case Dimension::Length: return length;
    default: return none;
  }
}

}  // namespace

double parse_quantity(const std::string& text, Dimension dimension) {
  std::istringstream in(trim(text));
  double value = 0.0;
  if (!(in >> value)) throw ConfigError("expected a number in '" + text + "'");
  std::string unit;
  in >> unit;
  std::string extra;
  if (in >> extra) throw ConfigError("trailing content in quantity '" + text + "'");

  if (dimension == Dimension::Dimensionless) {
    if (!unit.empty()) throw ConfigError("'" + text + "' should be dimensionless");
    return value;
  }
  const auto& table = unit_table(dimension);
  if (unit.empty())
    throw ConfigError("missing unit in '" + text + "' (expected one of e.g. '" +
                      table.begin()->first + "')");
  const auto it = table.find(unit);
  if (it == table.end()) throw ConfigError("unknown unit '" + unit + "' in '" + text + "'");
  return value * it->second;
}

RawConfig RawConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

RawConfig RawConfig::parse_string(const std::string& text) {
  RawConfig cfg;
  cfg.text_ = text;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("malformed section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value' at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key at line " + std::to_string(lineno));
    cfg.sections_[section].emplace_back(key, value);
  }
  return cfg;
}

bool RawConfig::has_section(const std::string& section) const {
  return sections_.count(section) > 0;
}

bool RawConfig::has(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  if (it == sections_.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(),
                     [&](const auto& kv) { return kv.first == key; });
}

std::string RawConfig::get(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  if (it != sections_.end())
    for (const auto& [k, v] : it->second)
      if (k == key) return v;
  throw ConfigError("missing config key [" + section + "] " + key);
}

std::string RawConfig::get_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double RawConfig::quantity(const std::string& section, const std::string& key,
                           Dimension dim) const {
  try {
    return parse_quantity(get(section, key), dim);
  } catch (const ConfigError& err) {
    throw ConfigError("[" + section + "] " + key + ": " + err.what());
  }
}

double RawConfig::quantity_or(const std::string& section, const std::string& key, Dimension dim,
                              double fallback) const {
  if (!has(section, key)) return fallback;
  return quantity(section, key, dim);
}

std::vector<std::string> RawConfig::all(const std::string& section, const std::string& key) const {
  std::vector<std::string> out;
  const auto it = sections_.find(section);
  if (it != sections_.end())
    for (const auto& [k, v] : it->second)
      if (k == key) out.push_back(v);
  return out;
}

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

ProgramStep parse_step(const std::string& text) {
  const auto words = split_words(text);
  if (words.empty()) throw ConfigError("empty program step");
  const std::string& op = words[0];
  auto need = [&](std::size_t n) {
    if (words.size() != n)
      throw ConfigError("program step '" + text + "': wrong argument count");
  };
  if (op == "store") {
    need(3);
    return ProgramStep::store(words[1], std::stoi(words[2]));
  }
  if (op == "retrieve") {
    need(2);
    return ProgramStep::retrieve(words[1]);
  }
  if (op == "gate") {
    need(3);
    const std::string& name = words[2];
    if (name == "h") return ProgramStep::gate1(words[1], std::numbers::pi, 0.0, 1.0 / std::numbers::sqrt2);
    if (name == "x") return ProgramStep::gate1(words[1], std::numbers::pi, 0.0, 0.0);
    if (name == "y") return ProgramStep::gate1(words[1], std::numbers::pi, 0.5 * std::numbers::pi, 0.0);
    if (name == "z") return ProgramStep::gate1(words[1], std::numbers::pi, 0.0, 1.0);
    if (name == "s") return ProgramStep::gate1(words[1], 0.5 * std::numbers::pi, 0.0, 1.0);
    throw ConfigError("unknown gate '" + name + "'");
  }
  if (op == "rot") {
    if (words.size() != 5 && words.size() != 4)
      throw ConfigError("rot step needs: rot <qubit> <angle> <axis_phase> [axis_z]");
    return ProgramStep::gate1(words[1], std::stod(words[2]), std::stod(words[3]),
                              words.size() == 5 ? std::stod(words[4]) : 0.0);
  }
  if (op == "gate2") {
    need(3);
    return ProgramStep::gate2(words[1], words[2]);
  }
  if (op == "cool") {
    need(2);
    return ProgramStep::cool(std::stoi(words[1]));
  }
  if (op == "idle") {
    need(3);
    return ProgramStep::idle(parse_quantity(words[1] + " " + words[2], Dimension::Time));
  }
  if (op == "echo_idle") {
    if (words.size() != 5 && words.size() != 7)
      throw ConfigError("echo_idle needs: echo_idle <dur> <unit> <interval> <unit> [eps1 eps2]");
    const double dur = parse_quantity(words[1] + " " + words[2], Dimension::Time);
    const double interval = parse_quantity(words[3] + " " + words[4], Dimension::Time);
    double e1 = 0.0, e2 = 0.0;
    if (words.size() == 7) {
      e1 = std::stod(words[5]);
      e2 = std::stod(words[6]);
    }
    return ProgramStep::echo_idle(dur, interval, e1, e2);
  }
  throw ConfigError("unknown program step '" + op + "'");
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& w : split_words(s)) out.push_back(std::stoi(w));
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& w : split_words(s)) out.push_back(std::stod(w));
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  ExperimentConfig cfg = from_raw(RawConfig::parse_file(path));
  cfg.source_path = path;
  return cfg;
}

ExperimentConfig ExperimentConfig::from_raw(const RawConfig& raw) {
  ExperimentConfig cfg;
  cfg.raw_text = raw.text();

  if (raw.has("constants", "g_factor"))
    cfg.constants.g_factor = raw.quantity("constants", "g_factor", Dimension::Dimensionless);
  cfg.constants.validate();

  cfg.device.omega_c = raw.quantity_or("device", "omega_c", Dimension::AngularFrequency,
                                       two_pi * 5e9);
  cfg.device.kappa = raw.quantity_or("device", "kappa", Dimension::AngularFrequency, 0.0);
  cfg.device.bias_field = raw.quantity_or("device", "bias_field", Dimension::Field, 0.18);
  cfg.device.length = raw.quantity_or("device", "length", Dimension::Length, 0.0);
  cfg.device.g_cpb = raw.quantity_or("device", "g_cpb", Dimension::AngularFrequency, 0.0);
  cfg.device.delta_cpb =
      raw.quantity_or("device", "cpb_detuning", Dimension::AngularFrequency, 0.0);

  if (raw.has_section("ensemble")) {
    cfg.has_ensemble = true;
    cfg.ensemble.n_spins = static_cast<std::size_t>(
        raw.quantity("ensemble", "n_spins", Dimension::Dimensionless));
    cfg.ensemble.length =
        raw.quantity_or("ensemble", "length", Dimension::Length, cfg.device.length);
    if (cfg.ensemble.length <= 0)
      throw ConfigError("sample length must be given in [ensemble] or [device]");
    if (cfg.device.length <= 0) cfg.device.length = cfg.ensemble.length;
    const std::string profile = raw.get_or("ensemble", "profile", "uniform");
    if (profile == "uniform")
      cfg.ensemble.profile = CouplingProfile::Uniform;
    else if (profile == "cavity-mode")
      cfg.ensemble.profile = CouplingProfile::CavityMode;
    else
      throw ConfigError("unknown coupling profile '" + profile + "'");
    const std::string placement = raw.get_or("ensemble", "placement", "grid");
    if (placement == "grid")
      cfg.ensemble.placement = Placement::Grid;
    else if (placement == "random")
      cfg.ensemble.placement = Placement::UniformRandom;
    else
      throw ConfigError("unknown placement '" + placement + "'");
    cfg.ensemble.coupling_scale =
        raw.quantity_or("ensemble", "coupling", Dimension::AngularFrequency, two_pi * 20.0);
    cfg.ensemble_seed = static_cast<std::uint64_t>(
        raw.quantity_or("ensemble", "seed", Dimension::Dimensionless, 1));
  }

  const std::string scheme = raw.get_or("layout", "scheme", "stride3");
  if (scheme == "stride3")
    cfg.scheme = ModeScheme::Stride3;
  else if (scheme == "dense")
    cfg.scheme = ModeScheme::Dense;
  else
    throw ConfigError("unknown mode scheme '" + scheme + "'");
  cfg.mode_count = static_cast<std::size_t>(
      raw.quantity_or("layout", "count", Dimension::Dimensionless, 8));
  if (cfg.mode_count == 0) throw ConfigError("register needs at least one mode");
  cfg.crosstalk_budget =
      raw.quantity_or("layout", "crosstalk_budget", Dimension::Dimensionless, 1e-2);
  cfg.layout_discrete = raw.get_or("layout", "discrete", "off") == "on";

  const std::string kind = raw.get_or("engine", "kind", "exact");
  if (kind == "exact")
    cfg.engine = EngineKind::Exact;
  else if (kind == "register")
    cfg.engine = EngineKind::Register;
  else if (kind == "classical")
    cfg.engine = EngineKind::Classical;
  else
    throw ConfigError("unknown engine '" + kind + "'");
  cfg.max_excitations = static_cast<int>(
      raw.quantity_or("engine", "max_excitations", Dimension::Dimensionless, 1));
  cfg.fock_levels =
      static_cast<int>(raw.quantity_or("engine", "fock_levels", Dimension::Dimensionless, 3));
  cfg.idle_detuning_factor =
      raw.quantity_or("engine", "idle_detuning_factor", Dimension::Dimensionless, 100.0);
  cfg.krylov_tol = raw.quantity_or("engine", "krylov_tol", Dimension::Dimensionless, 1e-13);
  cfg.crosstalk = raw.get_or("engine", "crosstalk", "off") == "on";
  cfg.gradient_duration =
      raw.quantity_or("engine", "gradient_duration", Dimension::Time, 0.0);

  if (raw.has_section("noise")) {
    cfg.noise.temperature =
        raw.quantity_or("noise", "temperature", Dimension::Temperature, 0.0);
    cfg.noise.thermal_p = raw.quantity_or("noise", "p", Dimension::Dimensionless, 0.0);
    cfg.noise.sigma_inhomogeneity =
        raw.quantity_or("noise", "inhomogeneity", Dimension::AngularFrequency, 0.0);
    cfg.noise.dipolar_rate = raw.quantity_or("noise", "dipolar_rate",
                                             Dimension::AngularFrequency, two_pi * 50e3);
    cfg.noise.eps1 = raw.quantity_or("noise", "eps1", Dimension::Dimensionless, 0.0);
    cfg.noise.eps2 = raw.quantity_or("noise", "eps2", Dimension::Dimensionless, 0.0);
    cfg.noise.shots =
        static_cast<int>(raw.quantity_or("noise", "shots", Dimension::Dimensionless, 100));
    cfg.noise.validate();
  }

  for (const auto& step : raw.all("program", "step"))
    cfg.program.steps.push_back(parse_step(step));
  cfg.initial_location = raw.get_or("program", "initial", "cavity");
  if (cfg.initial_location != "cavity" && cfg.initial_location != "cpb")
    throw ConfigError("initial location must be cavity or cpb");
  cfg.initial_state = raw.get_or("program", "state", "one");
  if (cfg.initial_state != "one" && cfg.initial_state != "plus")
    throw ConfigError("initial state must be one or plus");
  const std::string expect = raw.get_or("program", "expect", "none");
  if (expect == "none") {
    cfg.expect = ExpectKind::None;
  } else if (expect == "roundtrip") {
    cfg.expect = ExpectKind::Roundtrip;
  } else {
    const auto words = split_words(expect);
    if (words.size() == 3 && words[0] == "bell") {
      cfg.expect = ExpectKind::Bell;
      cfg.expect_qubit_a = words[1];
      cfg.expect_qubit_b = words[2];
    } else {
      throw ConfigError("expect must be none, roundtrip, or 'bell <qA> <qB>'");
    }
  }

  if (raw.has_section("demo")) {
    cfg.demo.tilt_angle =
        raw.quantity_or("demo", "tilt_angle", Dimension::Dimensionless, 0.05);
    if (raw.has("demo", "store"))
      cfg.demo.store_windings = parse_int_list(raw.get("demo", "store"));
    if (raw.has("demo", "retrieve"))
      cfg.demo.retrieve_windings = parse_int_list(raw.get("demo", "retrieve"));
  }

  if (raw.has_section("sweep")) {
    cfg.sweep_experiment = raw.get("sweep", "experiment");
    cfg.sweep_grid = parse_double_list(raw.get("sweep", "grid"));
    cfg.sweep_shots =
        static_cast<int>(raw.quantity_or("sweep", "shots", Dimension::Dimensionless, 1));
    if (cfg.sweep_grid.size() < 2 && cfg.sweep_experiment != "")
      throw ConfigError("sweep grid needs at least two points");
  }

  cfg.seed =
      static_cast<std::uint64_t>(raw.quantity_or("run", "seed", Dimension::Dimensionless, 1));
  cfg.jobs = static_cast<int>(raw.quantity_or("run", "jobs", Dimension::Dimensionless, 1));
  cfg.out_dir = raw.get_or("run", "out", ".");
  cfg.format = raw.get_or("run", "format", "structured");
  if (cfg.format != "structured" && cfg.format != "tabular")
    throw ConfigError("format must be structured or tabular");
  return cfg;
}

}  // namespace holoreg
