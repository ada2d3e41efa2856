#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <sys/wait.h>
#include <sstream>
#include <string>
#include <vector>

#include "fedspectrum/cli.hpp"
#include "test_support.hpp"

using namespace fedspectrum;
using fedspectrum::testing::TempDir;
using fedspectrum::testing::read_file;
using fedspectrum::testing::scenario_file;
using fedspectrum::testing::write_file;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fedspectrum");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

const std::string kDefault = scenario_file("default.json").string();

}  // namespace

TEST_CASE("run writes one row per sensor plus a global row", "[cli]") {
  TempDir tmp("cli_run");
  const auto r = invoke({"run", "--scenario", kDefault, "--topology", "isolated", "--out-dir", tmp.path().string(),
                         "--training-slots", "200", "--eval-slots", "100"});
  REQUIRE(r.code == 0);
  const auto csv = read_file(tmp / "metrics.csv");
  REQUIRE(line_count(csv) == 1 + 14 + 1);
  REQUIRE(csv.find("isolated-1,isolated,1,global,") != std::string::npos);
  REQUIRE(std::filesystem::exists(tmp / "run_summary.json"));
  REQUIRE_FALSE(std::filesystem::exists(tmp / "models.json"));

  SECTION("refuses to overwrite without --force") {
    const auto again = invoke({"run", "--scenario", kDefault, "--topology", "isolated", "--out-dir",
                               tmp.path().string(), "--training-slots", "200", "--eval-slots", "100"});
    REQUIRE(again.code == 1);
    REQUIRE(again.err.find("--force") != std::string::npos);
    const auto forced = invoke({"run", "--scenario", kDefault, "--topology", "isolated", "--out-dir",
                                tmp.path().string(), "--training-slots", "200", "--eval-slots", "100", "--force"});
    REQUIRE(forced.code == 0);
    REQUIRE(read_file(tmp / "metrics.csv") == csv);
  }
  SECTION("model export") {
    TempDir other("cli_models");
    const auto e = invoke({"run", "--scenario", kDefault, "--topology", "central", "--out-dir", other.path().string(),
                           "--training-slots", "200", "--eval-slots", "100", "--export-models"});
    REQUIRE(e.code == 0);
    const auto models = nlohmann::json::parse(read_file(other / "models.json"));
    REQUIRE(models.size() == 14);
  }
}

TEST_CASE("run reports usage and runtime errors", "[cli]") {
  TempDir tmp("cli_err");
  SECTION("missing scenario file names the path") {
    const auto r = invoke({"run", "--scenario", "/nonexistent/scn.json", "--topology", "gossip", "--out-dir",
                           tmp.path().string()});
    REQUIRE(r.code == 1);
    REQUIRE(r.err.find("/nonexistent/scn.json") != std::string::npos);
  }
  SECTION("unknown topology is a usage error") {
    const auto r = invoke({"run", "--scenario", kDefault, "--topology", "mesh", "--out-dir", tmp.path().string()});
    REQUIRE(r.code == 2);
  }
  SECTION("missing required flag is a usage error") {
    REQUIRE(invoke({"run", "--scenario", kDefault, "--out-dir", tmp.path().string()}).code == 2);
    REQUIRE(invoke({}).code == 2);
  }
  SECTION("invalid scenario names the field") {
    write_file(tmp / "bad.json", R"({"seed":1,"n_sensors":0,"n_primary_users":3})");
    const auto r = invoke({"run", "--scenario", (tmp / "bad.json").string(), "--topology", "gossip", "--out-dir",
                           (tmp / "out").string()});
    REQUIRE(r.code == 1);
    REQUIRE(r.err.find("n_sensors") != std::string::npos);
  }
  SECTION("malformed JSON") {
    write_file(tmp / "broken.json", "{\"seed\": 1,\n \"n_sensors\": }");
    const auto r = invoke({"run", "--scenario", (tmp / "broken.json").string(), "--topology", "gossip", "--out-dir",
                           (tmp / "out").string()});
    REQUIRE(r.code == 1);
  }
}

TEST_CASE("generate", "[cli]") {
  TempDir tmp("cli_gen");
  const auto r = invoke({"generate", "--scenario", kDefault, "--sensor-id", "0", "--n-slots", "100", "--out-dir",
                         tmp.path().string()});
  REQUIRE(r.code == 0);
  REQUIRE(r.out.find("rows_written=100") != std::string::npos);
  const auto first = read_file(tmp / "dataset.csv");
  REQUIRE(line_count(first) == 101);
  REQUIRE(first.rfind("slot,f1,f2,f3,label\n", 0) == 0);

  const auto again = invoke({"generate", "--scenario", kDefault, "--sensor-id", "0", "--n-slots", "100", "--out-dir",
                             tmp.path().string(), "--output", "again.csv"});
  REQUIRE(again.code == 0);
  REQUIRE(read_file(tmp / "again.csv") == first);

  const auto rows = read_dataset(tmp / "dataset.csv");
  REQUIRE(rows.size() == 100);
  REQUIRE(rows.back().slot == 99);

  SECTION("unknown sensor") {
    REQUIRE(invoke({"generate", "--scenario", kDefault, "--sensor-id", "14", "--out-dir", tmp.path().string(),
                    "--output", "x.csv"})
                .code == 1);
  }
  SECTION("unwritable output directory") {
    write_file(tmp / "plainfile", "x");
    const auto bad = invoke({"generate", "--scenario", kDefault, "--out-dir", (tmp / "plainfile" / "sub").string()});
    REQUIRE(bad.code == 1);
  }
}

TEST_CASE("compare", "[cli]") {
  TempDir tmp("cli_cmp");
  const std::vector<std::string> base = {"compare", "--scenario", kDefault, "--training-slots", "200",
                                         "--eval-slots", "100"};
  auto with = [&](std::vector<std::string> extra) {
    auto a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return invoke(a);
  };

  SECTION("single seed gives three rows and the aspect table") {
    const auto r = with({"--seeds", "1", "--out-dir", (tmp / "one").string()});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(read_file(tmp / "one" / "comparison.json"));
    REQUIRE(j["rows"].size() == 3);
    for (const auto& aspect : comparison_aspects()) REQUIRE(r.out.find(aspect) != std::string::npos);
    REQUIRE(read_file(tmp / "one" / "comparison.txt").size() > 0);
  }
  SECTION("three seeds reproduce byte-identical outputs") {
    REQUIRE(with({"--seeds", "1,2,3", "--out-dir", (tmp / "a").string()}).code == 0);
    REQUIRE(with({"--seeds", "1,2,3", "--out-dir", (tmp / "b").string(), "--sequential"}).code == 0);
    REQUIRE(read_file(tmp / "a" / "comparison.json") == read_file(tmp / "b" / "comparison.json"));
    REQUIRE(read_file(tmp / "a" / "metrics.csv") == read_file(tmp / "b" / "metrics.csv"));
    REQUIRE(line_count(read_file(tmp / "a" / "metrics.csv")) == 1 + 3 * 3 * 15);
  }
  SECTION("seeds are required") {
    REQUIRE(with({"--out-dir", (tmp / "c").string()}).code == 2);
  }
}

TEST_CASE("installed binary", "[cli]") {
  TempDir tmp("cli_bin");
  const std::string cmd = std::string("\"") + FEDSPECTRUM_CLI_PATH + "\" run --scenario \"" + kDefault +
                          "\" --topology gossip --training-slots 100 --eval-slots 50 --out-dir \"" +
                          tmp.path().string() + "\" > /dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  REQUIRE(std::filesystem::exists(tmp / "metrics.csv"));
  const std::string bad = std::string("\"") + FEDSPECTRUM_CLI_PATH + "\" run --topology gossip > /dev/null 2>&1";
  const int status = std::system(bad.c_str());
  REQUIRE(WEXITSTATUS(status) == 2);
}
