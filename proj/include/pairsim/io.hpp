#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pairsim/types.hpp"

namespace pairsim {

inline constexpr const char* kCodeVersion = "1.0.0";
inline constexpr int kManifestSchemaVersion = 1;

// Resolved description of one run: which experiment, its flat parameter map
// (strings, parsed by the experiment), and the run-level knobs.
struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> parameters;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string output_dir = "pairsim-out";

  void validate() const;  // experiment named, threads >= 1
};

// Plain key = value configuration text with optional [parameters] section:
// top-level keys are experiment/seed/threads, everything inside [parameters]
// (or any unrecognized top-level key position) is an experiment parameter.
// '#' and ';' start comments.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "config");

// Reads either the key = value format above or a manifest.json produced by an
// earlier run (detected by a leading '{'), so any manifest replays bit-exactly.
ExperimentConfig load_config(const std::string& path);

// Applies one `key=value` override; the keys experiment/seed/threads address
// the run-level fields, anything else lands in the parameter map.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

std::string manifest_text(const ExperimentConfig& cfg);
ExperimentConfig config_from_manifest(const std::string& json_text);

// ---- typed access to the flat parameter map ------------------------------------

// Pulls typed values out of ExperimentConfig::parameters and records which
// keys were touched; finish() rejects any key the experiment never asked for.
class ParamReader {
 public:
  explicit ParamReader(const std::map<std::string, std::string>& params,
                       std::string experiment);

  std::string get_string(const std::string& key, const std::string& fallback);
  std::string require_string(const std::string& key);
  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  int require_int(const std::string& key);
  bool get_bool(const std::string& key, bool fallback);
  // comma-separated integers, e.g. "2,0,2,0"
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback);
  std::vector<int> require_int_list(const std::string& key);
  // comma-separated doubles
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback);
  // comma-separated site pairs, e.g. "0-2,1-3"
  std::vector<std::pair<int, int>> get_pair_list(const std::string& key,
                                                 const std::string& fallback);

  bool has(const std::string& key) const;
  void finish() const;  // throws ValidationError on unknown keys

 private:
  const std::map<std::string, std::string>& params_;
  std::string experiment_;
  mutable std::vector<std::string> seen_;
  const std::string* find(const std::string& key);
};

// ---- output files ---------------------------------------------------------------

// RFC-4180 table: header row plus data rows, CRLF line endings, fields quoted
// only when they need it. Numbers are rendered by format_double.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Shortest round-trip decimal form with C-locale '.' separator.
std::string format_double(double value);
std::string csv_text(const CsvTable& table);

// A run's complete output set, written atomically at the end of the run:
// manifest.json, summary.json and one CSV per registered name.
class OutputBundle {
 public:
  explicit OutputBundle(const ExperimentConfig& cfg);

  void add_csv(const std::string& filename, CsvTable table);
  // Non-finite values are serialized as JSON null.
  void add_scalar(const std::string& key, double value);
  void add_scalar(const std::string& key, const std::string& value);
  void add_scalar(const std::string& key, bool value);

  // Creates output_dir, then writes manifest.json, summary.json and the CSVs.
  // Returns the list of paths written.
  std::vector<std::string> write() const;

 private:
  ExperimentConfig cfg_;
  std::vector<std::pair<std::string, CsvTable>> tables_;
  std::vector<std::pair<std::string, std::string>> scalar_order_;  // key -> json literal
};

}  // namespace pairsim
