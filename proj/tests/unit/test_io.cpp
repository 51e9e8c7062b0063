#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "pairsim/io.hpp"
#include "pairsim/types.hpp"

using namespace pairsim;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("pairsim-io-" + tag);
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_SUITE("io") {

TEST_CASE("config text parses core keys, sections and comments") {
  const std::string text =
      "# comment line\n"
      "experiment = glauber-run   ; trailing comment\n"
      "seed = 42\n"
      "threads = 3\n"
      "[parameters]\n"
      "h = 0.01\n"
      "mode = glauber\n"
      "\n"
      "num_sites = 50\n";
  const ExperimentConfig cfg = parse_config_text(text);
  CHECK(cfg.experiment == "glauber-run");
  CHECK(cfg.seed == 42);
  CHECK(cfg.threads == 3);
  CHECK(cfg.parameters.size() == 3);
  CHECK(cfg.parameters.at("h") == "0.01");
  CHECK(cfg.parameters.at("mode") == "glauber");
  CHECK(cfg.parameters.at("num_sites") == "50");
}

TEST_CASE("top-level unknown keys become parameters") {
  const ExperimentConfig cfg = parse_config_text("experiment = x\nn_max = 2\n");
  CHECK(cfg.parameters.at("n_max") == "2");
}

TEST_CASE("parse errors carry the origin and line number") {
  CHECK_THROWS_WITH_AS(parse_config_text("experiment = x\nbroken line\n", "demo.cfg"),
                       doctest::Contains("demo.cfg:2"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config_text("[weird]\n"), doctest::Contains("[weird]"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(parse_config_text("[parameters\n"), doctest::Contains("unterminated"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(parse_config_text("= 3\n"), doctest::Contains("empty key"),
                       ValidationError);
  CHECK_THROWS_AS(parse_config_text("experiment = x\nseed = notanumber\n"), ValidationError);
}

TEST_CASE("overrides hit core fields and parameters") {
  ExperimentConfig cfg = parse_config_text("experiment = x\n[parameters]\nh = 0\n");
  apply_override(cfg, "h=0.5");
  apply_override(cfg, "seed=9");
  apply_override(cfg, "experiment=glauber-run");
  apply_override(cfg, "new_key=7");
  CHECK(cfg.parameters.at("h") == "0.5");
  CHECK(cfg.seed == 9);
  CHECK(cfg.experiment == "glauber-run");
  CHECK(cfg.parameters.at("new_key") == "7");
  CHECK_THROWS_AS(apply_override(cfg, "justakey"), ValidationError);
  CHECK_THROWS_AS(apply_override(cfg, "=value"), ValidationError);
}

TEST_CASE("manifest round-trips the full configuration") {
  ExperimentConfig cfg;
  cfg.experiment = "tebd-run";
  cfg.seed = 1234567890123456789ULL;
  cfg.threads = 4;
  cfg.parameters = {{"num_sites", "12"}, {"dt", "0.003"}, {"note", "with, comma"}};
  const std::string text = manifest_text(cfg);
  const ExperimentConfig back = config_from_manifest(text);
  CHECK(back.experiment == cfg.experiment);
  CHECK(back.seed == cfg.seed);
  CHECK(back.threads == cfg.threads);
  CHECK(back.parameters == cfg.parameters);
  // and the round trip is a fixed point at the text level too
  CHECK(manifest_text(back) == text);
}

TEST_CASE("manifest rejects junk") {
  CHECK_THROWS_AS(config_from_manifest("{not json"), ValidationError);
  CHECK_THROWS_AS(config_from_manifest("{\"schema_version\": 1}"), ValidationError);
  CHECK_THROWS_WITH_AS(
      config_from_manifest("{\"schema_version\": 99, \"experiment\": \"x\", "
                           "\"parameters\": {}}"),
      doctest::Contains("schema_version"), ValidationError);
  CHECK_THROWS_AS(config_from_manifest("{\"schema_version\": 1, \"experiment\": \"x\", "
                                       "\"parameters\": {\"k\": 3}}"),
                  ValidationError);
}

TEST_CASE("load_config reads both formats and flags missing files") {
  TempDir dir("load");
  std::filesystem::create_directories(dir.path);
  const std::string cfg_path = (dir.path / "run.cfg").string();
  {
    std::ofstream out(cfg_path, std::ios::binary);
    out << "experiment = darkstate-verify\nseed = 5\n";
  }
  const ExperimentConfig cfg = load_config(cfg_path);
  CHECK(cfg.experiment == "darkstate-verify");
  CHECK(cfg.seed == 5);

  const std::string manifest_path = (dir.path / "manifest.json").string();
  {
    std::ofstream out(manifest_path, std::ios::binary);
    out << manifest_text(cfg);
  }
  const ExperimentConfig replay = load_config(manifest_path);
  CHECK(replay.experiment == cfg.experiment);
  CHECK(replay.seed == cfg.seed);

  CHECK_THROWS_WITH_AS(load_config((dir.path / "absent.cfg").string()),
                       doctest::Contains("absent.cfg"), ValidationError);
}

TEST_CASE("param reader parses the typed getters") {
  const std::map<std::string, std::string> params = {
      {"alpha", "2.5"},     {"count", "7"},          {"flag", "true"},
      {"occ", "2,0,2,0"},   {"times", "0.5,1,2.25"}, {"pairs", "0-2, 1-3"},
      {"name", "lightcone"}};
  ParamReader pr(params, "demo");
  CHECK(pr.get_double("alpha", 0.0) == 2.5);
  CHECK(pr.get_int("count", 0) == 7);
  CHECK(pr.get_bool("flag", false));
  CHECK(pr.get_bool("missing", true));
  CHECK(pr.get_string("name", "") == "lightcone");
  CHECK(pr.get_int_list("occ", {}) == std::vector<int>{2, 0, 2, 0});
  CHECK(pr.get_double_list("times", {}) == std::vector<double>{0.5, 1.0, 2.25});
  const auto pairs = pr.get_pair_list("pairs", "");
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == std::pair<int, int>{0, 2});
  CHECK(pairs[1] == std::pair<int, int>{1, 3});
  pr.finish();  // every key above was read
}

TEST_CASE("param reader rejects malformed values with the key named") {
  const std::map<std::string, std::string> params = {{"alpha", "fast"}, {"pairs", "0+2"}};
  ParamReader pr(params, "demo");
  CHECK_THROWS_WITH_AS(pr.get_double("alpha", 0.0), doctest::Contains("alpha"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(pr.get_pair_list("pairs", ""), doctest::Contains("pairs"),
                       ValidationError);
}

TEST_CASE("param reader names unknown keys at finish") {
  const std::map<std::string, std::string> params = {{"known", "1"}, {"surprise", "2"}};
  ParamReader pr(params, "demo");
  CHECK(pr.get_int("known", 0) == 1);
  CHECK_THROWS_WITH_AS(pr.finish(), doctest::Contains("surprise"), ValidationError);
}

TEST_CASE("required keys throw when absent") {
  const std::map<std::string, std::string> params = {};
  ParamReader pr(params, "demo");
  CHECK_THROWS_WITH_AS(pr.require_string("initial"), doctest::Contains("initial"),
                       ValidationError);
  CHECK_THROWS_AS(pr.require_int_list("initial"), ValidationError);
}

TEST_CASE("format_double round-trips and is locale-independent") {
  const std::vector<double> values = {0.0,    1.0,          -2.5,          1e-300,
                                      0.1,    3.0 / 7.0,    -1.2345e17,    5e-324,
                                      1e308,  0.3333333333333333};
  for (const double v : values) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
    CHECK(s.find(',') == std::string::npos);
  }
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("csv output is RFC-4180 with CRLF and minimal quoting") {
  CsvTable table;
  table.header = {"t", "observable", "mean", "stderr"};
  table.rows = {{"0", "n[0]", "2", "0"}, {"0.5", "g2[0,2]", "-0.25", "0.001"}};
  const std::string text = csv_text(table);
  CHECK(text ==
        "t,observable,mean,stderr\r\n"
        "0,n[0],2,0\r\n"
        "0.5,\"g2[0,2]\",-0.25,0.001\r\n");

  CsvTable quoted;
  quoted.header = {"a"};
  quoted.rows = {{"say \"hi\""}, {"line\nbreak"}};
  CHECK(csv_text(quoted) == "a\r\n\"say \"\"hi\"\"\"\r\n\"line\nbreak\"\r\n");

  CsvTable ragged;
  ragged.header = {"a", "b"};
  ragged.rows = {{"1"}};
  CHECK_THROWS_AS(csv_text(ragged), Error);
}

TEST_CASE("output bundle writes manifest, summary and csv files") {
  TempDir dir("bundle");
  ExperimentConfig cfg;
  cfg.experiment = "darkstate-verify";
  cfg.seed = 11;
  cfg.parameters = {{"num_sites", "4"}};
  cfg.output_dir = (dir.path / "out").string();

  OutputBundle bundle(cfg);
  bundle.add_scalar("experiment", std::string("darkstate-verify"));
  bundle.add_scalar("residual", 1.5e-12);
  bundle.add_scalar("diverged", std::numeric_limits<double>::infinity());
  bundle.add_scalar("undefined", std::nan(""));
  bundle.add_scalar("ok", true);
  CsvTable table;
  table.header = {"t", "observable", "mean", "stderr"};
  table.rows = {{"0", "defect_density", "0.5", "0"}};
  bundle.add_csv("density.csv", table);

  const std::vector<std::string> written = bundle.write();
  REQUIRE(written.size() == 3);
  CHECK(std::filesystem::exists(dir.path / "out" / "manifest.json"));
  CHECK(std::filesystem::exists(dir.path / "out" / "summary.json"));
  CHECK(std::filesystem::exists(dir.path / "out" / "density.csv"));

  const std::string summary = slurp((dir.path / "out" / "summary.json").string());
  CHECK(summary.find("\"residual\": 1.5e-12") != std::string::npos);
  CHECK(summary.find("\"diverged\": null") != std::string::npos);
  CHECK(summary.find("\"undefined\": null") != std::string::npos);
  CHECK(summary.find("\"ok\": true") != std::string::npos);
  // keys appear in insertion order
  CHECK(summary.find("experiment") < summary.find("residual"));
  CHECK(summary.find("residual") < summary.find("diverged"));

  const std::string manifest = slurp((dir.path / "out" / "manifest.json").string());
  const ExperimentConfig replay = config_from_manifest(manifest);
  CHECK(replay.experiment == cfg.experiment);
  CHECK(replay.seed == cfg.seed);
  CHECK(replay.parameters == cfg.parameters);

  // second write is byte-identical
  const std::string csv_before = slurp((dir.path / "out" / "density.csv").string());
  bundle.write();
  CHECK(slurp((dir.path / "out" / "density.csv").string()) == csv_before);
  CHECK(slurp((dir.path / "out" / "summary.json").string()) == summary);
}

TEST_CASE("config validation flags empty and bad fields") {
  ExperimentConfig cfg;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.experiment = "x";
  cfg.threads = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.threads = 1;
  cfg.output_dir = "";
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.output_dir = "out";
  CHECK_NOTHROW(cfg.validate());
}

}  // TEST_SUITE
