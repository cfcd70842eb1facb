#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "fairplay/standings.hpp"

using namespace fairplay;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fairplay-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("impute prints the worked example") {
  const auto r = run({"impute", test::fixture_path()});
  REQUIRE(r.code == cli::kExitOk);
  for (const char* v : {"0.700", "0.689", "0.663", "0.504", "0.355", "0.800", "w(5) = 0.625"}) {
    CHECK(r.out.find(v) != std::string::npos);
  }
  CHECK(r.out.find("95% CI") != std::string::npos);
  CHECK(r.out.find("[0.354, 1.000]") != std::string::npos);
  // Pure function of file bytes and flags.
  CHECK(run({"impute", test::fixture_path()}).out == r.out);
}

TEST_CASE("impute with forfeit and report policies") {
  const auto r = run({"impute", test::fixture_path(), "--method", "forfeit", "--format", "csv"});
  REQUIRE(r.code == 0);
  const auto parsed = parse_crosstable_csv(r.out);
  for (const auto& row : parsed.rows) {
    for (const auto& g : row.imputed_games) {
      if (!row.withdrawn) CHECK(g.score == 1.0);
    }
  }
  CHECK(run({"report", test::fixture_path(), "--report", "earned"}).out.find("–") != std::string::npos);
  CHECK(run({"report", test::fixture_path(), "--report", "half"}).code == 0);
}

TEST_CASE("CSV output round trips to the same standings") {
  const auto f = test::bucharest();
  const auto rows = apply_policy(f.table, f.withdrawn, Method::kBayesBlup);
  const auto r = run({"impute", test::fixture_path(), "--format", "csv"});
  const auto parsed = parse_crosstable_csv(r.out);
  CHECK(parsed.table == [&] {
    // Rounds are not part of the CSV.
    Crosstable t = f.table;
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t j = i + 1; j < t.size(); ++j)
        if (auto s = t.result(i, j)) {
          t.clear(i, j);
          t.record(i, j, GameScore::played(*s));
        }
    return t;
  }());
  CHECK(parsed.rows == rows);
}

TEST_CASE("impute --out writes standings.csv") {
  const auto dir = scratch("out");
  REQUIRE(run({"impute", test::fixture_path(), "--out", dir.string()}).code == 0);
  CHECK(fs::exists(dir / "standings.csv"));
  CHECK(slurp(dir / "standings.csv") == run({"impute", test::fixture_path(), "--format", "csv"}).out);
}

TEST_CASE("zero played games falls back with a warning") {
  const auto dir = scratch("zero");
  std::ofstream(dir / "t.json") << R"({"players":[{"id":"a","rating":2700},{"id":"b","rating":2600}],
    "games":[],"withdrawn":"a"})";
  const auto r = run({"impute", (dir / "t.json").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("degenerate-context") != std::string::npos);
  CHECK(r.out.find("0.360") != std::string::npos);  // Elo expectation of b vs a
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"impute"}).code == cli::kExitUsage);
  CHECK(run({"impute", test::fixture_path(), "--bogus"}).code == cli::kExitUsage);
  CHECK(run({"impute", test::fixture_path(), "--method", "coinflip"}).code == cli::kExitUsage);
  CHECK(run({"impute", test::fixture_path(), "--k", "abc"}).code == cli::kExitUsage);
  CHECK(run({"impute", test::fixture_path(), "--k", "-1"}).code == cli::kExitData);
  CHECK(run({"impute", test::fixture_path(), "--report", "nope"}).code == cli::kExitData);
  CHECK(run({"impute", "/nonexistent.json"}).code == cli::kExitRuntime);
  CHECK(run({"--help"}).code == cli::kExitOk);

  const auto dir = scratch("bad");
  std::ofstream(dir / "bad.json") << "{\n  \"players\": [\n    {\"id\": \"a\", \"rating\": \"x\"}\n  ]\n}";
  const auto r = run({"impute", (dir / "bad.json").string()});
  CHECK(r.code == cli::kExitData);
  CHECK(r.err.find("players[0].rating") != std::string::npos);
  std::ofstream(dir / "syntax.json") << "{\n  \"players\": [,]\n}";
  const auto s = run({"impute", (dir / "syntax.json").string()});
  CHECK(s.code == cli::kExitData);
  CHECK(s.err.find("line 2") != std::string::npos);
}

TEST_CASE("sensitivity") {
  const auto r = run({"sensitivity", test::fixture_path()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("0.765") != std::string::npos);
  CHECK(r.out.find("0.616") != std::string::npos);
  const auto single = run({"sensitivity", test::fixture_path(), "--k-values", "3"});
  CHECK(single.out.find("0.700") != std::string::npos);
  CHECK(run({"sensitivity", test::fixture_path(), "--k-values", "1,0"}).code == cli::kExitData);
}

TEST_CASE("simulate writes deterministic reports") {
  const auto a = scratch("sim-a");
  const auto b = scratch("sim-b");
  REQUIRE(run({"simulate", "--n-per-scenario", "100", "--seed", "42", "--out", a.string()}).code == 0);
  REQUIRE(run({"simulate", "--n-per-scenario", "100", "--seed", "42", "--out", b.string()}).code == 0);
  for (const char* f : {"rmse_by_scenario.csv", "bias_by_scenario.csv", "summary.csv",
                        "rule_comparison.csv", "summary.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const auto rmse = slurp(a / "rmse_by_scenario.csv");
  CHECK(std::count(rmse.begin(), rmse.end(), '\n') == 19);
  for (const auto& entry : fs::directory_iterator(a)) {
    CHECK(entry.path().filename().string().front() != '.');  // no temporaries left
  }

  // FAIRPLAY_SEED overrides --seed.
  const auto c = scratch("sim-c");
  setenv("FAIRPLAY_SEED", "42", 1);
  REQUIRE(run({"simulate", "--n-per-scenario", "100", "--seed", "7", "--out", c.string()}).code == 0);
  unsetenv("FAIRPLAY_SEED");
  CHECK(slurp(c / "rmse_by_scenario.csv") == rmse);

  const auto d = scratch("sim-d");
  REQUIRE(run({"simulate", "--n-per-scenario", "20", "--out", d.string(), "--format", "text"}).code == 0);
  CHECK(fs::exists(d / "summary.txt"));
  CHECK(fs::exists(d / "summary.json"));

  CHECK(run({"simulate", "--n-per-scenario", "0", "--out", d.string()}).code == cli::kExitData);
  CHECK(run({"simulate", "--n-per-scenario", "5", "--out", "/proc/forbidden"}).code == cli::kExitRuntime);
}

TEST_CASE("simulate reads a config file") {
  const auto dir = scratch("cfg");
  std::ofstream(dir / "cfg.json") << R"({"seed": 42, "tournamentsPerScenario": 100, "fields": ["narrow"],
    "timings": [5], "forms": [0], "out": ")" << (dir / "out").string() << R"("})";
  const auto r = run({"simulate", "--config", (dir / "cfg.json").string()});
  REQUIRE(r.code == 0);
  const auto rmse = slurp(dir / "out" / "rmse_by_scenario.csv");
  CHECK(std::count(rmse.begin(), rmse.end(), '\n') == 2);
  std::ofstream(dir / "bad.json") << R"({"fields": ["round"]})";
  CHECK(run({"simulate", "--config", (dir / "bad.json").string()}).code == cli::kExitData);
}
