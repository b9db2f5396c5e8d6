#pragma once

#include <string>

#include <json.hpp>

#include "holoreg/config.hpp"

namespace holoreg {

/// Self-describing run document: config echo, per-operation log, results,
/// and diagnostics. Re-running the same config and seed reproduces the
/// report byte for byte apart from the "timing" object.
class SimReport {
 public:
  static constexpr int schema_version = 1;

  SimReport(const std::string& command, const ExperimentConfig& config);

  nlohmann::json& doc() { return doc_; }
  const nlohmann::json& doc() const { return doc_; }
  nlohmann::json& results() { return doc_["results"]; }

  void set_wall_clock_ms(double ms) { doc_["timing"]["wall_clock_ms"] = ms; }

  /// Deterministic serialization with the timing object removed.
  std::string canonical_text() const;
  std::string full_text() const;

  /// Atomic write (temp file + rename). With tabular enabled, flat .tsv
  /// companions are emitted for any tabular results.
  void write(const std::string& path, bool tabular) const;

  /// Structural schema check; throws ConfigError on violation.
  static void validate_schema(const nlohmann::json& doc);
  static nlohmann::json read_file(const std::string& path);

 private:
  nlohmann::json doc_;
};

/// Writes text to path atomically via a sibling temp file + rename.
void atomic_write(const std::string& path, const std::string& text);

}  // namespace holoreg
