#include "pairsim/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

namespace pairsim {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream stream(s);
  while (std::getline(stream, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& wanted) {
  throw ValidationError("config: parameter '" + key + "' = '" + value + "' is not " + wanted);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value, "a number");
    return v;
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, value, "a number");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) bad_value(key, value, "an integer");
    return static_cast<int>(v);
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, value, "an integer");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "a boolean (true/false)");
}

void set_core_or_parameter(ExperimentConfig& cfg, const std::string& key,
                           const std::string& value) {
  if (key == "experiment") {
    cfg.experiment = value;
  } else if (key == "seed") {
    try {
      cfg.seed = std::stoull(value);
    } catch (const std::exception&) {
      bad_value(key, value, "an unsigned integer");
    }
  } else if (key == "threads") {
    cfg.threads = parse_int(key, value);
  } else {
    cfg.parameters[key] = value;
  }
}

std::string json_number(double value) {
  if (!std::isfinite(value)) return "null";
  nlohmann::json j = value;
  return j.dump();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (experiment.empty())
    throw ValidationError("config: no experiment named (set `experiment = ...`)");
  if (threads < 1) throw ValidationError("config: threads must be at least 1");
  if (output_dir.empty()) throw ValidationError("config: output directory is empty");
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  std::istringstream stream(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ValidationError(origin + ":" + std::to_string(line_no) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "parameters")
        throw ValidationError(origin + ":" + std::to_string(line_no) + ": unknown section [" +
                              section + "] (only [parameters] exists)");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(origin + ":" + std::to_string(line_no) +
                            ": expected `key = value`, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": empty key");
    if (section == "parameters")
      cfg.parameters[key] = value;
    else
      set_core_or_parameter(cfg, key, value);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config: cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return config_from_manifest(text);
  return parse_config_text(text, path);
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ValidationError("override '" + assignment + "' is not of the form key=value");
  set_core_or_parameter(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string manifest_text(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["code_version"] = kCodeVersion;
  j["experiment"] = cfg.experiment;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["parameters"] = nlohmann::json::object();
  for (const auto& [key, value] : cfg.parameters) j["parameters"][key] = value;
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_manifest(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("manifest: not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("experiment") || !j.contains("parameters"))
    throw ValidationError("manifest: missing experiment/parameters fields");
  if (j.value("schema_version", 0) != kManifestSchemaVersion)
    throw ValidationError("manifest: unsupported schema_version");
  ExperimentConfig cfg;
  cfg.experiment = j["experiment"].get<std::string>();
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.threads = j.value("threads", 1);
  for (const auto& [key, value] : j["parameters"].items()) {
    if (!value.is_string())
      throw ValidationError("manifest: parameter '" + key + "' must be a string");
    cfg.parameters[key] = value.get<std::string>();
  }
  return cfg;
}

// ---- ParamReader ---------------------------------------------------------------

ParamReader::ParamReader(const std::map<std::string, std::string>& params,
                         std::string experiment)
    : params_(params), experiment_(std::move(experiment)) {}

const std::string* ParamReader::find(const std::string& key) {
  seen_.push_back(key);
  const auto it = params_.find(key);
  return it == params_.end() ? nullptr : &it->second;
}

bool ParamReader::has(const std::string& key) const {
  return params_.find(key) != params_.end();
}

std::string ParamReader::get_string(const std::string& key, const std::string& fallback) {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

std::string ParamReader::require_string(const std::string& key) {
  const std::string* v = find(key);
  if (!v || v->empty())
    throw ValidationError(experiment_ + ": required parameter '" + key + "' is missing");
  return *v;
}

double ParamReader::get_double(const std::string& key, double fallback) {
  const std::string* v = find(key);
  return v ? parse_double(key, *v) : fallback;
}

int ParamReader::get_int(const std::string& key, int fallback) {
  const std::string* v = find(key);
  return v ? parse_int(key, *v) : fallback;
}

int ParamReader::require_int(const std::string& key) {
  return parse_int(key, require_string(key));
}

bool ParamReader::get_bool(const std::string& key, bool fallback) {
  const std::string* v = find(key);
  return v ? parse_bool(key, *v) : fallback;
}

std::vector<int> ParamReader::get_int_list(const std::string& key,
                                           const std::vector<int>& fallback) {
  const std::string* v = find(key);
  if (!v) return fallback;
  if (trim(*v).empty()) return {};
  std::vector<int> out;
  for (const std::string& item : split(*v, ',')) out.push_back(parse_int(key, item));
  return out;
}

std::vector<int> ParamReader::require_int_list(const std::string& key) {
  const std::string value = require_string(key);
  std::vector<int> out;
  for (const std::string& item : split(value, ',')) out.push_back(parse_int(key, item));
  return out;
}

std::vector<double> ParamReader::get_double_list(const std::string& key,
                                                 const std::vector<double>& fallback) {
  const std::string* v = find(key);
  if (!v) return fallback;
  if (trim(*v).empty()) return {};
  std::vector<double> out;
  for (const std::string& item : split(*v, ',')) out.push_back(parse_double(key, item));
  return out;
}

std::vector<std::pair<int, int>> ParamReader::get_pair_list(const std::string& key,
                                                            const std::string& fallback) {
  const std::string* v = find(key);
  const std::string value = v ? *v : fallback;
  std::vector<std::pair<int, int>> out;
  if (trim(value).empty()) return out;
  for (const std::string& item : split(value, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == item.size())
      bad_value(key, item, "a site pair like 0-2");
    out.emplace_back(parse_int(key, trim(item.substr(0, dash))),
                     parse_int(key, trim(item.substr(dash + 1))));
  }
  return out;
}

void ParamReader::finish() const {
  for (const auto& [key, value] : params_) {
    if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
      throw ValidationError(experiment_ + ": unknown parameter '" + key + "'");
  }
}

// ---- output files ---------------------------------------------------------------

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value,
                                    std::chars_format::general, 17);
  return std::string(buf, result.ptr);
}

namespace {

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (const char c : field) {
    quoted += c;
    if (c == '"') quoted += '"';
  }
  quoted += '"';
  return quoted;
}

void append_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += csv_field(row[i]);
  }
  out += "\r\n";
}

}  // namespace

std::string csv_text(const CsvTable& table) {
  std::string out;
  append_row(out, table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw Error("csv: row width does not match the header");
    append_row(out, row);
  }
  return out;
}

OutputBundle::OutputBundle(const ExperimentConfig& cfg) : cfg_(cfg) {}

void OutputBundle::add_csv(const std::string& filename, CsvTable table) {
  tables_.emplace_back(filename, std::move(table));
}

void OutputBundle::add_scalar(const std::string& key, double value) {
  scalar_order_.emplace_back(key, json_number(value));
}

void OutputBundle::add_scalar(const std::string& key, const std::string& value) {
  scalar_order_.emplace_back(key, nlohmann::json(value).dump());
}

void OutputBundle::add_scalar(const std::string& key, bool value) {
  scalar_order_.emplace_back(key, value ? "true" : "false");
}

std::vector<std::string> OutputBundle::write() const {
  namespace fs = std::filesystem;

  // Render everything first so a formatting failure leaves no partial output.
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("manifest.json", manifest_text(cfg_));

  // summary.json keeps insertion order so reruns are byte-identical
  std::string summary = "{\n";
  for (std::size_t i = 0; i < scalar_order_.size(); ++i) {
    summary += "  " + nlohmann::json(scalar_order_[i].first).dump() + ": " +
               scalar_order_[i].second;
    if (i + 1 < scalar_order_.size()) summary += ',';
    summary += '\n';
  }
  summary += "}\n";
  files.emplace_back("summary.json", summary);
  for (const auto& [name, table] : tables_) files.emplace_back(name, csv_text(table));

  std::error_code ec;
  fs::create_directories(cfg_.output_dir, ec);
  if (ec)
    throw Error("output: cannot create directory '" + cfg_.output_dir + "': " + ec.message());

  std::vector<std::string> written;
  for (const auto& [name, content] : files) {
    const fs::path path = fs::path(cfg_.output_dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("output: cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw Error("output: short write to '" + path.string() + "'");
    written.push_back(path.string());
  }
  return written;
}

}  // namespace pairsim
