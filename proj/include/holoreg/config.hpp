#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "holoreg/constants.hpp"
#include "holoreg/device.hpp"
#include "holoreg/ensemble.hpp"
#include "holoreg/modes.hpp"
#include "holoreg/noise.hpp"
#include "holoreg/protocols.hpp"

namespace holoreg {

enum class Dimension {
  Dimensionless,
  AngularFrequency,  // "5 GHz" -> 2 pi x 5e9 rad/s; "3 rad/s" taken literally
  Time,
  Field,
  Temperature,
  Length,
};

/// Parses "<number> [unit]" with parse-time unit checking against the
/// expected dimension. Frequencies given in Hz units are cycles and are
/// converted to angular frequency.
double parse_quantity(const std::string& text, Dimension dimension);

/// Sectioned key = value text with '#' comments; key order is preserved
/// (repeated keys are allowed, e.g. program steps).
class RawConfig {
 public:
  static RawConfig parse_file(const std::string& path);
  static RawConfig parse_string(const std::string& text);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double quantity(const std::string& section, const std::string& key, Dimension dim) const;
  double quantity_or(const std::string& section, const std::string& key, Dimension dim,
                     double fallback) const;
  std::vector<std::string> all(const std::string& section, const std::string& key) const;

  const std::string& text() const { return text_; }

 private:
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections_;
  std::string text_;
};

enum class EngineKind { Exact, Register, Classical };

enum class ExpectKind { None, Roundtrip, Bell };

/// Fully validated experiment description; every default is resolved here so
/// reports can echo the effective configuration.
struct ExperimentConfig {
  PhysicalConstants constants;
  DeviceParams device;

  bool has_ensemble = false;
  EnsembleSpec ensemble;
  std::uint64_t ensemble_seed = 1;

  ModeScheme scheme = ModeScheme::Stride3;
  std::size_t mode_count = 8;
  double crosstalk_budget = 1e-2;
  bool layout_discrete = false;  // Gram from the actual geometry

  EngineKind engine = EngineKind::Exact;
  int max_excitations = 1;
  int fock_levels = 3;
  double idle_detuning_factor = 100.0;
  double krylov_tol = 1e-13;
  bool crosstalk = false;
  double gradient_duration = 0.0;  // 0 = auto

  NoiseConfig noise;

  RegisterProgram program;
  std::string initial_location = "cavity";  // cavity | cpb
  std::string initial_state = "one";        // one | plus
  ExpectKind expect = ExpectKind::None;
  std::string expect_qubit_a, expect_qubit_b;

  ClassicalDemoSpec demo;

  std::string sweep_experiment;
  std::vector<double> sweep_grid;
  int sweep_shots = 1;

  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out_dir = ".";
  std::string format = "structured";  // structured | tabular

  std::string source_path;
  std::string raw_text;

  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig from_raw(const RawConfig& raw);
};

}  // namespace holoreg
