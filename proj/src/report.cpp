#include "holoreg/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "holoreg/errors.hpp"

namespace holoreg {

SimReport::SimReport(const std::string& command, const ExperimentConfig& config) {
  doc_["schema_version"] = schema_version;
  doc_["command"] = command;
  doc_["seed"] = config.seed;
  doc_["config"]["path"] = config.source_path;
  doc_["config"]["text"] = config.raw_text;
  doc_["results"] = nlohmann::json::object();
  doc_["operations"] = nlohmann::json::array();
  doc_["diagnostics"] = nlohmann::json::object();
  doc_["timing"]["wall_clock_ms"] = 0.0;
}

std::string SimReport::canonical_text() const {
  nlohmann::json copy = doc_;
  copy.erase("timing");
  return copy.dump(2) + "\n";
}

std::string SimReport::full_text() const { return doc_.dump(2) + "\n"; }

void SimReport::write(const std::string& path, bool tabular) const {
  validate_schema(doc_);
  atomic_write(path, full_text());
  if (!tabular) return;
  // flat companions for anything that looks like a table
  for (const auto& [key, value] : doc_["results"].items()) {
    if (!value.is_object() || !value.contains("columns") || !value.contains("rows")) continue;
    std::ostringstream tsv;
    bool first = true;
    for (const auto& col : value["columns"]) {
      tsv << (first ? "" : "\t") << col.get<std::string>();
      first = false;
    }
    tsv << "\n";
    for (const auto& row : value["rows"]) {
      first = true;
      for (const auto& cell : row) {
        tsv << (first ? "" : "\t") << cell.dump();
        first = false;
      }
      tsv << "\n";
    }
    atomic_write(path + "." + key + ".tsv", tsv.str());
  }
}

void SimReport::validate_schema(const nlohmann::json& doc) {
  auto require = [&](const char* key, bool ok) {
    if (!ok) throw ConfigError(std::string("report schema violation at '") + key + "'");
  };
  require("schema_version", doc.contains("schema_version") &&
                                doc["schema_version"].is_number_integer() &&
                                doc["schema_version"].get<int>() == schema_version);
  require("command", doc.contains("command") && doc["command"].is_string());
  require("seed", doc.contains("seed") && doc["seed"].is_number());
  require("config", doc.contains("config") && doc["config"].is_object() &&
                        doc["config"].contains("text"));
  require("results", doc.contains("results") && doc["results"].is_object());
  require("operations", doc.contains("operations") && doc["operations"].is_array());
  require("diagnostics", doc.contains("diagnostics") && doc["diagnostics"].is_object());
  require("timing", doc.contains("timing") && doc["timing"].is_object());
}

nlohmann::json SimReport::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open report " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError("malformed report " + path + ": " + err.what());
  }
  return doc;
}

void atomic_write(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SimulationError("cannot write " + tmp);
    out << text;
    if (!out.good()) throw SimulationError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw SimulationError("cannot rename " + tmp + " to " + path);
}

}  // namespace holoreg
