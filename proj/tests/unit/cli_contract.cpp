// End-to-end contract tests for the `pairsim` command-line tool.  The test
// binary receives the path of the tool as its first argument and drives it
// through popen, checking exit codes, the files it writes, and reproducibility.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace {

std::string g_cli;  // absolute path of the pairsim binary under test

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (const char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += "'";
  return out;
}

CliResult run_cli(const std::vector<std::string>& args, const std::string& workdir = "") {
  std::string command;
  if (!workdir.empty()) command += "cd " + shell_quote(workdir) + " && ";
  command += shell_quote(g_cli);
  for (const std::string& arg : args) command += " " + shell_quote(arg);
  command += " 2>&1";

  CliResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buffer[4096];
  std::size_t got = 0;
  while ((got = fread(buffer, 1, sizeof buffer, pipe)) > 0) result.output.append(buffer, got);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("pairsim-cli-" + tag);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(static_cast<bool>(out));
  out << text;
}

const char* kQuickGlauberConfig =
    "experiment = glauber-run\n"
    "seed = 7\n"
    "\n"
    "[parameters]\n"
    "mode = exact\n"
    "num_sites = 30\n"
    "h = 0\n"
    "t_final = 5\n"
    "grid_points = 11\n"
    "t_min = 0.1\n"
    "n_hist = 16\n"
    "init = random\n";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("--list-recipes prints every recipe and exits cleanly") {
  const CliResult r = run_cli({"--list-recipes"});
  CHECK(r.exit_code == 0);
  for (const char* name : {"fig2-small", "fig2-lightcone", "fig3-classical",
                           "fig3-quantum-agreement", "fig3d-healing-comparison", "cqed-sweep"}) {
    CHECK_MESSAGE(r.output.find(name) != std::string::npos, name);
  }
}

TEST_CASE("bad invocations exit with code 2 and say why") {
  SUBCASE("no recipe and no config") {
    const CliResult r = run_cli({});
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("error:") != std::string::npos);
  }
  SUBCASE("unknown recipe is named") {
    const CliResult r = run_cli({"fig9-imaginary"});
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("fig9-imaginary") != std::string::npos);
  }
  SUBCASE("missing config file is named") {
    const CliResult r = run_cli({"--config", "/nonexistent/run.cfg"});
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("/nonexistent/run.cfg") != std::string::npos);
  }
  SUBCASE("recipe and config together are rejected") {
    TempDir dir("xor");
    write_file(dir.path / "run.cfg", kQuickGlauberConfig);
    const CliResult r = run_cli({"fig3-classical", "--config", dir.sub("run.cfg")});
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("malformed configs are rejected before anything is written") {
  TempDir dir("malformed");
  write_file(dir.path / "broken.cfg",
             "experiment = glauber-run\n"
             "this line has no equals sign\n");
  const std::string out_dir = dir.sub("out");
  const CliResult r = run_cli({"--config", dir.sub("broken.cfg"), "--out", out_dir});
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("broken.cfg:2") != std::string::npos);
  CHECK(!std::filesystem::exists(out_dir));
}

TEST_CASE("unknown parameter keys are rejected by name, writing nothing") {
  TempDir dir("unknown-key");
  write_file(dir.path / "run.cfg", std::string(kQuickGlauberConfig) + "wombat = 3\n");
  const std::string out_dir = dir.sub("out");
  const CliResult r = run_cli({"--config", dir.sub("run.cfg"), "--out", out_dir});
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("wombat") != std::string::npos);
  CHECK(!std::filesystem::exists(out_dir));
}

TEST_CASE("a config run writes its artifacts and reproduces bit for bit") {
  TempDir dir("repro");
  write_file(dir.path / "run.cfg", kQuickGlauberConfig);

  const std::string out_a = dir.sub("a");
  const CliResult first = run_cli({"--config", dir.sub("run.cfg"), "--out", out_a});
  CHECK(first.exit_code == 0);
  CHECK(first.output.find("wrote") != std::string::npos);
  for (const char* name : {"manifest.json", "summary.json", "density.csv"}) {
    CHECK(std::filesystem::exists(std::filesystem::path(out_a) / name));
  }

  SUBCASE("rerunning the same config is byte-identical") {
    const std::string out_b = dir.sub("b");
    const CliResult second = run_cli({"--config", dir.sub("run.cfg"), "--out", out_b});
    CHECK(second.exit_code == 0);
    for (const char* name : {"density.csv", "summary.json", "manifest.json"}) {
      CHECK(slurp(std::filesystem::path(out_a) / name) ==
            slurp(std::filesystem::path(out_b) / name));
    }
  }

  SUBCASE("replaying the manifest is byte-identical") {
    const std::string out_c = dir.sub("c");
    const CliResult replay =
        run_cli({"--config", (std::filesystem::path(out_a) / "manifest.json").string(), "--out",
                 out_c});
    CHECK(replay.exit_code == 0);
    for (const char* name : {"density.csv", "summary.json", "manifest.json"}) {
      CHECK(slurp(std::filesystem::path(out_a) / name) ==
            slurp(std::filesystem::path(out_c) / name));
    }
  }

  SUBCASE("--set and --seed override the config and land in the manifest") {
    const std::string out_d = dir.sub("d");
    const CliResult r = run_cli({"--config", dir.sub("run.cfg"), "--set", "h=0.5", "--seed", "9",
                                 "--out", out_d});
    CHECK(r.exit_code == 0);
    const std::string manifest = slurp(std::filesystem::path(out_d) / "manifest.json");
    CHECK(manifest.find("\"h\": \"0.5\"") != std::string::npos);
    CHECK(manifest.find("\"seed\": 9") != std::string::npos);
    CHECK(slurp(std::filesystem::path(out_d) / "density.csv") !=
          slurp(std::filesystem::path(out_a) / "density.csv"));
  }

  SUBCASE("--threads 4 matches the serial run bit for bit") {
    const std::string out_e = dir.sub("e");
    const CliResult r =
        run_cli({"--config", dir.sub("run.cfg"), "--threads", "4", "--out", out_e});
    CHECK(r.exit_code == 0);
    CHECK(slurp(std::filesystem::path(out_e) / "density.csv") ==
          slurp(std::filesystem::path(out_a) / "density.csv"));
    CHECK(slurp(std::filesystem::path(out_e) / "summary.json") ==
          slurp(std::filesystem::path(out_a) / "summary.json"));
  }
}

TEST_CASE("runtime failures exit with code 3 and write nothing") {
  TempDir dir("rt");
  // The relaxation analysis cannot converge on a window far shorter than the
  // relaxation time, so the run must fail after validation has passed.
  write_file(dir.path / "run.cfg",
             "experiment = glauber-run\n"
             "seed = 4\n"
             "[parameters]\n"
             "mode = glauber\n"
             "h = 0.01\n"
             "num_sites = 200\n"
             "t_final = 2\n"
             "grid_points = 21\n"
             "t_min = 0.05\n"
             "n_hist = 200\n"
             "relaxation = true\n");
  const std::string out_dir = dir.sub("out");
  const CliResult r = run_cli({"--config", dir.sub("run.cfg"), "--out", out_dir});
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("runtime error:") != std::string::npos);
  CHECK(!std::filesystem::exists(out_dir));
}

TEST_CASE("recipes run end to end when scaled down") {
  TempDir dir("recipes");
  SUBCASE("fig3-classical produces a power-law exponent") {
    const CliResult r = run_cli({"fig3-classical", "--set", "num_sites=50", "--set",
                                 "t_final=50", "--set", "n_hist=20", "--set", "fit_t_lo=1",
                                 "--set", "fit_t_hi=50", "--out", dir.sub("classical")});
    CHECK(r.exit_code == 0);
    const std::string summary = slurp(dir.path / "classical" / "summary.json");
    CHECK(summary.find("\"exponent\":") != std::string::npos);
  }
  SUBCASE("fig2-small checks trajectories against the master equation") {
    const CliResult r = run_cli({"fig2-small", "--set", "n_traj=8", "--set", "t_final=1",
                                 "--set", "measure_stride=100", "--out", dir.sub("small")});
    CHECK(r.exit_code == 0);
    CHECK(std::filesystem::exists(dir.path / "small" / "exact.csv"));
    CHECK(std::filesystem::exists(dir.path / "small" / "observables.csv"));
  }
  SUBCASE("fig3-quantum-agreement compares against the classical chain") {
    const CliResult r = run_cli({"fig3-quantum-agreement", "--set", "num_sites=4", "--set",
                                 "initial=0,1,1,0", "--set", "t_final=0.6", "--set", "n_traj=4",
                                 "--set", "classical_histories=20", "--set", "measure_stride=50",
                                 "--out", dir.sub("agreement")});
    CHECK(r.exit_code == 0);
    CHECK(std::filesystem::exists(dir.path / "agreement" / "classical.csv"));
  }
  SUBCASE("a recipe without --out writes into a directory named after it") {
    const CliResult r = run_cli({"fig3-classical", "--set", "num_sites=20", "--set",
                                 "t_final=10", "--set", "n_hist=5", "--set", "fit=none"},
                                dir.str());
    CHECK(r.exit_code == 0);
    CHECK(std::filesystem::exists(dir.path / "fig3-classical" / "manifest.json"));
  }
}

}  // TEST_SUITE

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-pairsim-binary> [doctest options]\n", argv[0]);
    return 64;
  }
  g_cli = std::filesystem::absolute(argv[1]).string();
  doctest::Context context;
  std::vector<char*> args;
  args.push_back(argv[0]);
  for (int i = 2; i < argc; ++i) args.push_back(argv[i]);
  context.applyCommandLine(static_cast<int>(args.size()), args.data());
  return context.run();
}
