#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "cptq/config.hpp"

namespace fs = std::filesystem;
using namespace cptq;

namespace {

struct Output {
  int status = -1;
  std::string text;
};

Output run_cli(const std::string& args) {
  const std::string cmd = std::string(CPTQ_CLI_PATH) + " " + args + " 2>&1";
  Output out;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) out.text += buf.data();
  const int raw = pclose(pipe);
  out.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cptq_cli_" + std::to_string(getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Numeric column `col` of the data rows (after the comment block and header line).
std::vector<double> csv_column(const fs::path& p, const std::string& col) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::string> names;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (names.empty()) {
      names = cells;
      continue;
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == col) values.push_back(std::stod(cells.at(i)));
    }
  }
  return values;
}

}  // namespace

TEST_CASE("config: defaults, file merge and relative paths") {
  const fs::path dir = scratch("merge");
  write_file(dir / "run.cfg",
             "# comment\nutility.minus.kind = power   # trailing\nutility.minus.alpha = 2.0\nvalue.law = laws/a.csv\n");
  Config c = Config::defaults();
  CHECK(c.get("utility.minus.kind") == "logarithmic");
  c.merge_file(dir / "run.cfg");
  CHECK(c.get("utility.minus.kind") == "power");
  CHECK(c.number("utility.minus.alpha") == 2.0);
  CHECK(c.get("value.law") == (dir / "laws/a.csv").lexically_normal().string());
  CHECK(c.number("optimize.lower_bound") == -std::numeric_limits<double>::infinity());
  CHECK(c.flag("optimize.enforce_existence"));
}

TEST_CASE("config: unknown keys and malformed values are rejected") {
  Config c = Config::defaults();
  std::istringstream bad_key("utility.minus.alhpa = 2\n");
  CHECK_THROWS_AS(c.merge(bad_key, "inline"), ConfigError);
  std::istringstream no_eq("utility.minus.alpha 2\n");
  CHECK_THROWS_AS(c.merge(no_eq, "inline"), ConfigError);
  c.set("x0", "one");
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.set("x0", "1");
  c.set("utility.minus.kind", "cubic");
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.set("utility.minus.kind", "power");
  c.set("utility.minus.alpha", "0");
  CHECK_THROWS_AS(validate(c), ParameterError);
  CHECK_THROWS_AS(c.set("no.such.key", "1"), ConfigError);
}

TEST_CASE("config: environment overrides") {
  CHECK(Config::env_name("utility.minus.alpha") == "CPTQ_UTILITY_MINUS_ALPHA");
  const std::map<std::string, std::string> env{{"CPTQ_UTILITY_MINUS_ALPHA", " 3.5 "}, {"CPTQ_X0", "2"},
                                               {"CPTQ_UNRELATED", "x"}};
  Config c = Config::defaults();
  c.apply_env([&](const char* name) -> const char* {
    auto it = env.find(name);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  CHECK(c.number("utility.minus.alpha") == 3.5);
  CHECK(c.number("x0") == 2.0);
}

TEST_CASE("config: discrete kernel from lists") {
  Config c = Config::defaults();
  c.set("kernel.model", "discrete");
  c.set("kernel.states", "0.5, 1.5");
  c.set("kernel.probs", "0.5,0.5");
  CHECK(build_kernel(c).mean() == doctest::Approx(1.0));
}

TEST_CASE("cli: check on power alpha = 2, beta = 1 gives a liminf yes") {
  const fs::path dir = scratch("check");
  write_file(dir / "p.cfg",
             "utility.minus.kind = power\nutility.minus.alpha = 2\ndistortion.minus.kind = power\n"
             "distortion.minus.beta = 1\n");
  const Output r = run_cli("check --config " + (dir / "p.cfg").string() + " --out " + dir.string());
  CHECK(r.status == 0);
  CHECK(r.text.find("liminf_condition: yes") != std::string::npos);
  const auto report = nlohmann::json::parse(slurp(dir / "check.json"));
  CHECK(report["config"]["utility.minus.alpha"] == "2");
  CHECK(report["cptq_version"] == kVersion);
  bool found = false;
  for (const auto& v : report["verdicts"]) {
    if (v["name"] == "liminf_condition") {
      found = true;
      CHECK(v["holds"] == "yes");
    }
  }
  CHECK(found);
}

TEST_CASE("cli: demo-nonattain gap column strictly decreases") {
  const fs::path dir = scratch("demo");
  const Output r = run_cli("demo-nonattain --out " + dir.string());
  CHECK(r.status == 0);
  CHECK(r.text.find("not attainable") != std::string::npos);
  const auto gap = csv_column(dir / "nonattain.csv", "gap");
  REQUIRE(gap.size() > 10);
  for (std::size_t i = 1; i < gap.size(); ++i) CHECK(gap[i] < gap[i - 1]);
  const std::string svg = slurp(dir / "nonattain.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find(std::string("cptq ") + kVersion) != std::string::npos);
}

TEST_CASE("cli: value on the two-atom law") {
  const fs::path dir = scratch("value");
  write_file(dir / "law.csv", "value,prob\n2,0.25\n0,0.75\n");
  write_file(dir / "v.cfg",
             "value.law = law.csv\nutility.plus.kind = power\nutility.plus.alpha = 1\n"
             "distortion.plus.kind = power\ndistortion.plus.beta = 2\n");
  const Output r = run_cli("value --config " + (dir / "v.cfg").string() + " --out " + dir.string());
  CHECK(r.status == 0);
  const auto total = csv_column(dir / "value.csv", "total");
  REQUIRE(total.size() == 1);
  CHECK(total[0] == doctest::Approx(0.125).epsilon(1e-12));
  const std::string text = slurp(dir / "value.csv");
  CHECK(text.rfind(std::string("# cptq ") + kVersion + "\n# command = value\n", 0) == 0);
  CHECK(text.find("# distortion.plus.beta = 2\n") != std::string::npos);
}

TEST_CASE("cli: exit codes") {
  const fs::path dir = scratch("codes");
  CHECK(run_cli("check --set utility.minus.alhpa=2 --out " + dir.string()).status == 2);
  CHECK(run_cli("check --config " + (dir / "missing.cfg").string()).status == 2);
  CHECK(run_cli("frobnicate").status == 2);
  CHECK(run_cli("value --out " + dir.string()).status == 2);  // no law configured
  // the default preferences fail the existence check of the solver
  CHECK(run_cli("optimize --set optimize.n=16 --out " + dir.string()).status == 2);
  // a budget below the lower bound leaves nothing to optimize over
  const Output r = run_cli(
      "optimize --set optimize.enforce_existence=false --set optimize.lower_bound=0 --set x0=-1 --set optimize.n=16 "
      "--out " +
      dir.string());
  CHECK(r.status == 3);
}

TEST_CASE("cli: environment overrides reach the run") {
  const fs::path dir = scratch("env");
  const std::string line = "CPTQ_UTILITY_MINUS_ALPHA=0.5 CPTQ_DISTORTION_MINUS_KIND=identity " +
                           std::string(CPTQ_CLI_PATH) + " check --set utility.minus.kind=power --out " + dir.string() +
                           " > /dev/null 2>&1";
  REQUIRE(std::system(line.c_str()) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "check.json"));
  CHECK(report["config"]["utility.minus.alpha"] == "0.5");
  CHECK(report["config"]["distortion.minus.kind"] == "identity");
}

TEST_CASE("cli: fixed seed gives byte-identical CSVs") {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  const std::string args =
      "optimize --seed 7 --set optimize.enforce_existence=false --set optimize.n=64 --set optimize.restarts=4 "
      "--set utility.minus.kind=power --set utility.minus.alpha=0.7 --set distortion.minus.kind=power "
      "--set distortion.minus.beta=1.3 --set optimize.lower_bound=-2 --set optimize.upper_bound=3";
  REQUIRE(run_cli(args + " --out " + a.string()).status == 0);
  REQUIRE(run_cli(args + " --out " + b.string()).status == 0);
  for (const char* f : {"portfolio.csv", "diagnostics.csv"}) {
    const std::string x = slurp(a / f);
    CHECK(!x.empty());
    CHECK(x == slurp(b / f));
  }
  CHECK(slurp(a / "portfolio.csv").find("# seed = 7\n") != std::string::npos);
}
