#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "phmc/config.hpp"
#include "phmc/error.hpp"
#include "phmc/experiment.hpp"
#include "phmc/io.hpp"

using namespace phmc;
namespace fs = std::filesystem;

namespace {

fs::path tmp_root() {
  fs::path p(PHMC_TEST_TMP);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = tmp_root() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

fs::path write_config(const std::string& name, const nlohmann::json& cfg) { return write_file(name, cfg.dump(2)); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + PHMC_CLI_PATH + "\" " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_out(const std::string& name) {
  const fs::path p = tmp_root() / name;
  fs::remove_all(p);
  return p;
}

std::string first_lines(const fs::path& p, int n) {
  std::ifstream in(p);
  std::string line, out;
  for (int i = 0; i < n && std::getline(in, line); ++i) out += line + "\n";
  return out;
}

nlohmann::json tps_sample_config() {
  return {{"seed", 17},
          {"model",
           {{"model", "tps"},
            {"tau", 2.0},
            {"d", 1},
            {"m", 4},
            {"potential", {{"name", "normal_mixture"}, {"params", {{"means", {{-1.0}, {1.0}}}, {"quadratic_shift", 1.0}}}}}}},
          {"kernel", {{"T", 1.0}, {"dt", 0.1}}},
          {"steps", 50},
          {"trajectory", true}};
}

}  // namespace

TEST_CASE("TOML subset") {
  const auto j = parse_toml(R"(
# comment
seed = 42
name = "run"   # trailing comment
path = 'C:\raw'
ratio = 1_000.5
big = inf
flags = [true, false,
         true]
[model]
model = "pimd"
a = -0.1
potential = { name = "normal_mixture", params = { components = 20 } }
[kernel.inner]
x.y = 3
)");
  CHECK(j["seed"] == 42);
  CHECK(j["name"] == "run");
  CHECK(j["path"] == "C:\\raw");
  CHECK(j["ratio"].get<double>() == 1000.5);
  CHECK(std::isinf(j["big"].get<double>()));
  CHECK(j["flags"].size() == 3);
  CHECK(j["model"]["a"].get<double>() == -0.1);
  CHECK(j["model"]["potential"]["params"]["components"] == 20);
  CHECK(j["kernel"]["inner"]["x"]["y"] == 3);
  CHECK_THROWS_AS(parse_toml("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[[arr]]\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("a = \n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("a = \"open\n"), ConfigError);
  try {
    parse_toml("ok = 1\nbad line\n");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("config files by extension") {
  const auto t = write_file("cfg.toml", "seed = 3\n[kernel]\nT = 0.5\n");
  CHECK(load_config(t)["kernel"]["T"].get<double>() == 0.5);
  const auto js = write_file("cfg.json", R"({"seed": 3})");
  CHECK(load_config(js)["seed"] == 3);
  const auto bad = write_file("bad.json", "{ nope");
  CHECK_THROWS_AS(load_config(bad), ConfigError);
  CHECK_THROWS_AS(load_config(tmp_root() / "missing.json"), ConfigError);
}

TEST_CASE("number formatting round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5, 123456789.0}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(csv_schema_line("chain") == "# phmc-csv chain v1");
}

TEST_CASE("svg output is a standalone document") {
  const std::string svg = render_svg({"t", "x", "y", true, {{"a", {1, 2, 3}, {1, 0.1, 0.01}}}});
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("sample writes versioned outputs") {
  const auto cfg = write_config("sample.json", tps_sample_config());
  const auto out = fresh_out("sample_a");
  REQUIRE(run_cli("sample -c " + cfg.string() + " -o " + out.string()) == 0);
  CHECK(first_lines(out / "chain.csv", 2) == "# phmc-csv chain v1\nstep,accepted,k,energy,mode_0,mode_1,mode_2,mode_3\n");
  CHECK(first_lines(out / "trajectory.csv", 2) == "# phmc-csv trajectory v1\nstep,t,mode,q,v\n");
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["command"] == "sample");
  CHECK(manifest["seed"] == 17);
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest["version"] == library_version());
  CHECK(manifest["outputs"].size() == 4);
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary["steps"] == 50);

  const auto again = fresh_out("sample_b");
  REQUIRE(run_cli("sample -c " + cfg.string() + " -o " + again.string()) == 0);
  for (const char* f : {"chain.csv", "trajectory.csv", "summary.json", "manifest.json"})
    CHECK(slurp(out / f) == slurp(again / f));

  const auto other = fresh_out("sample_c");
  REQUIRE(run_cli("sample -c " + cfg.string() + " -o " + other.string() + " --seed 18") == 0);
  CHECK(slurp(out / "chain.csv") != slurp(other / "chain.csv"));
}

TEST_CASE("TOML configs drive the same run") {
  const auto cfg = write_file("sample.toml", R"(
seed = 17
steps = 50
trajectory = true
[model]
model = "tps"
tau = 2.0
d = 1
m = 4
potential = { name = "normal_mixture", params = { means = [[-1.0], [1.0]], quadratic_shift = 1.0 } }
[kernel]
T = 1.0
dt = 0.1
)");
  const auto a = fresh_out("toml_a");
  const auto b = fresh_out("toml_b");
  const auto jcfg = write_config("sample2.json", tps_sample_config());
  REQUIRE(run_cli("sample -c " + cfg.string() + " -o " + a.string()) == 0);
  REQUIRE(run_cli("sample -c " + jcfg.string() + " -o " + b.string()) == 0);
  CHECK(slurp(a / "chain.csv") == slurp(b / "chain.csv"));
}

TEST_CASE("couple writes the distance series") {
  nlohmann::json c = tps_sample_config();
  c["initial"] = {{"x", "zero"}, {"y", {{"constant", {1.0}}}}};
  c["coupling"] = {{"gamma", "1/T"}, {"n", 2}};
  c["steps"] = 20;
  c["replicas"] = 3;
  const auto cfg = write_config("couple.json", c);
  const auto out = fresh_out("couple");
  REQUIRE(run_cli("couple -c " + cfg.string() + " -o " + out.string()) == 0);
  CHECK(first_lines(out / "couple.csv", 2) ==
        "# phmc-csv couple v1\nstep,distance,shift_event,accepted_x,accepted_y,coalesced\n");
  CHECK(first_lines(out / "decay.csv", 2) == "# phmc-csv decay v1\nstep,mean_distance,se,log_mean\n");
  CHECK(first_lines(out / "distance_plot.csv", 2) == "# phmc-csv plot v1\nx,y,series\n");
  CHECK(fs::exists(out / "distance.svg"));
}

TEST_CASE("coupling-times layout") {
  nlohmann::json c = tps_sample_config();
  c.erase("trajectory");
  c["initial"] = {{"x", "zero"}, {"y", {{"constant", {1.0}}}}};
  c["coupling"] = {{"gamma_rules", {"one-over-T"}}, {"n", 1}, {"threshold", 1e-6}};
  c["T_grid"] = {0.5, 1.0};
  c["replicas"] = 2;
  c["max_steps"] = 2000;
  const auto cfg = write_config("ct.json", c);
  const auto out = fresh_out("ct");
  REQUIRE(run_cli("coupling-times -c " + cfg.string() + " -o " + out.string()) == 0);
  std::ifstream in(out / "coupling_times.csv");
  std::string line;
  int rows = -2;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
  CHECK(first_lines(out / "coupling_times_summary.csv", 2) ==
        "# phmc-csv coupling-times-summary v1\ngamma_rule,T,mean,median,se,censored,replicas\n");
  std::ifstream sin(out / "coupling_times_summary.csv");
  int srows = -2;
  while (std::getline(sin, line)) ++srows;
  CHECK(srows == 2);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["results"]["minima"].contains("one-over-T"));
}

TEST_CASE("constants and condition checks") {
  nlohmann::json c = tps_sample_config();
  c["theory"] = {{"T", 1e-5}, {"delta", 1e-3}, {"M1", 1.0}};
  c["model"]["m"] = 8;
  const auto cfg = write_config("const.json", c);
  const auto out = fresh_out("const");
  REQUIRE(run_cli("constants -c " + cfg.string() + " -o " + out.string()) == 0);
  const auto j = nlohmann::json::parse(slurp(out / "constants.json"));
  CHECK(j.contains("R"));
  CHECK(j["m"] == 8);
  CHECK(j["condition_ok"] == true);
  CHECK(j.contains("mixing_time"));

  const auto ok = fresh_out("cond_ok");
  CHECK(run_cli("check-conditions -c " + cfg.string() + " -o " + ok.string()) == 0);
  CHECK(nlohmann::json::parse(slurp(ok / "conditions.json"))["all_ok"] == true);

  c["theory"]["T"] = 0.5;
  const auto bad_cfg = write_config("const_bad.json", c);
  const auto bad = fresh_out("cond_bad");
  CHECK(run_cli("check-conditions -c " + bad_cfg.string() + " -o " + bad.string()) == 1);
  CHECK(nlohmann::json::parse(slurp(bad / "conditions.json"))["all_ok"] == false);
}

TEST_CASE("exit codes and cleanup") {
  const auto out = fresh_out("fail");
  nlohmann::json c = tps_sample_config();
  c.erase("seed");
  CHECK(run_cli("sample -c " + write_config("noseed.json", c).string() + " -o " + out.string()) == 2);
  CHECK_FALSE(fs::exists(out));

  c = tps_sample_config();
  c["kernel"]["dt"] = -1.0;
  CHECK(run_cli("sample -c " + write_config("baddt.json", c).string() + " -o " + out.string()) == 2);
  CHECK_FALSE(fs::exists(out));

  CHECK(run_cli("sample -c " + (tmp_root() / "does_not_exist.json").string() + " -o " + out.string()) == 2);
  CHECK(run_cli("sample -o " + out.string()) == 2);
  CHECK(run_cli("frobnicate") == 2);

  c = tps_sample_config();
  c["model"]["potential"] = {{"name", "quadratic"}, {"params", {{"curvature", 1e9}}}};
  c["kernel"] = {{"T", 60.0}, {"dt", 1.0}, {"metropolis", false}};
  c["initial"] = {{"x", {{"constant", {1.0}}}}};
  c["steps"] = 5;
  CHECK(run_cli("sample -c " + write_config("diverge.json", c).string() + " -o " + out.string()) == 3);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("partial outputs are removed but foreign files are kept") {
  const auto out = fresh_out("keep");
  fs::create_directories(out);
  std::ofstream(out / "mine.txt") << "keep";
  nlohmann::json c = tps_sample_config();
  c["model"]["potential"] = {{"name", "quadratic"}, {"params", {{"curvature", 1e9}}}};
  c["kernel"] = {{"T", 60.0}, {"dt", 1.0}, {"metropolis", false}};
  c["initial"] = {{"x", {{"constant", {1.0}}}}};
  CHECK(run_cli("sample -c " + write_config("diverge2.json", c).string() + " -o " + out.string()) == 3);
  CHECK(fs::exists(out / "mine.txt"));
  CHECK_FALSE(fs::exists(out / "trajectory.csv"));
  CHECK_FALSE(fs::exists(out / "chain.csv"));
  CHECK_FALSE(fs::exists(out / "manifest.json"));
}

TEST_CASE("tune") {
  nlohmann::json c = tps_sample_config();
  c["model"]["potential"] = "zero";
  c["kernel"] = {{"T", 0.7}, {"target_acceptance", 0.99}, {"tune_steps", 200}};
  const auto out = fresh_out("tune_zero");
  REQUIRE(run_cli("tune -c " + write_config("tune0.json", c).string() + " -o " + out.string()) == 0);
  CHECK(nlohmann::json::parse(slurp(out / "tune.json"))["dt"].get<double>() == 0.7);

  c = tps_sample_config();
  c["model"]["m"] = 16;
  c["kernel"] = {{"T", 1.0}, {"target_acceptance", 0.9}, {"tune_steps", 300}};
  const auto cfg = write_config("tune1.json", c);
  const auto a = fresh_out("tune_a"), b = fresh_out("tune_b");
  REQUIRE(run_cli("tune -c " + cfg.string() + " -o " + a.string()) == 0);
  REQUIRE(run_cli("tune -c " + cfg.string() + " -o " + b.string()) == 0);
  CHECK(slurp(a / "tune.json") == slurp(b / "tune.json"));
  const auto j = nlohmann::json::parse(slurp(a / "tune.json"));
  CHECK(j["acceptance"].get<double>() >= 0.9);
  std::vector<std::pair<double, double>> trace;
  for (const auto& t : j["trace"]) trace.emplace_back(t["dt"].get<double>(), t["acceptance"].get<double>());
  std::sort(trace.begin(), trace.end());
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) CHECK(trace[i + 1].second <= trace[i].second);
}

TEST_CASE("validate fails fast on bad arguments and passes on the quick suite") {
  const auto out = fresh_out("validate");
  CHECK(run_cli("validate --quick --seed 5 -o " + out.string()) == 0);
  const auto j = nlohmann::json::parse(slurp(out / "validate.json"));
  CHECK(j["all_ok"] == true);
  CHECK(first_lines(out / "validate.csv", 2) == "# phmc-csv validate v1\ncheck,ok\n");
}

TEST_CASE("run_experiment reports config errors as exit code 2") {
  std::ostringstream log;
  RunOptions o;
  o.out = tmp_root() / "direct";
  CHECK(run_experiment(nlohmann::json::array(), o, log) == exit_config);
  CHECK(run_experiment({{"command", "sample"}, {"seed", 1}}, o, log) == exit_config);
  CHECK(run_experiment({{"command", "nope"}, {"seed", 1}}, o, log) == exit_config);
  CHECK(log.str().find("config error") != std::string::npos);
}
