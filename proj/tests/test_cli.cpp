#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sbp/report.hpp"
#include "tools/cli.hpp"

using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = sbp::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string model(const std::string& name) { return std::string(SBP_TEST_MODELS_DIR) + "/" + name; }

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("sequences csv for the 1/2 birth-death chain") {
  const auto r = run({"sequences", "--N", "10", "--lambda", "0", "--model", model("birth_death_1_2.json")});
  REQUIRE(r.code == 0);
  std::stringstream ss(r.out);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "n,F0_sign,F0_log,F0,m,d");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(ss, line)) rows.push_back(split_line(line));
  REQUIRE(rows.size() == 11);
  CHECK(rows[3] == std::vector<std::string>{"3", "1", "2.0794415416798357", "8", "15", "7"});
}

TEST_CASE("sequences with a signed lambda") {
  const auto plus = run({"sequences", "--N", "3", "--lambda", "0.5", "--sign", "+", "--format", "json", "--model",
                         model("uniform_catastrophe.json")});
  REQUIRE(plus.code == 0);
  const auto j = json::parse(plus.out);
  CHECK(j["c"] == "constant(0.5)");
  CHECK(j["rows"].size() == 4);
  CHECK(run({"sequences", "--lambda", "0.5", "--sign", "x", "--model", model("uniform_catastrophe.json")}).code == 2);
}

TEST_CASE("analyze reports strong ergodicity and re-parses") {
  const auto r = run({"analyze", "--model", model("uniform_catastrophe.json"), "--N", "1000"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["verdicts"]["strongly_ergodic"]["status"] == "Holds");
  const auto report = j.get<sbp::AnalysisReport>();
  CHECK(json(report) == j);
}

TEST_CASE("analyze in human format") {
  const auto r = run({"analyze", "--model", model("birth_death_1_2.json"), "--N", "300", "--format", "human"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("verdicts.strongly_ergodic.status: Fails") != std::string::npos);
  CHECK(r.out.find("quantities.d.value: 1\n") != std::string::npos);
}

TEST_CASE("laplace of the return time is 0.8 for n >= 1") {
  const auto r = run({"laplace", "--of", "return", "--lambda", "0.5", "--N", "500", "--model",
                      model("uniform_catastrophe_a2_b3.json")});
  REQUIRE(r.code == 0);
  const auto v = json::parse(r.out)["values"].get<sbp::MomentVector>();
  for (std::size_t n = 1; n <= 20; ++n) {
    REQUIRE(v.resolved[n]);
    CHECK(v.values[n].value == doctest::Approx(0.8).epsilon(1e-9));
  }
}

TEST_CASE("exponential moment and moments subcommands") {
  const auto e = run({"expmoment", "--lambda", "0.5", "--model", model("uniform_catastrophe.json")});
  REQUIRE(e.code == 0);
  const auto j = json::parse(e.out);
  CHECK(j["feasible"]["status"] == "Holds");
  CHECK(j["values"]["values"][1].get<double>() == doctest::Approx(2.0));

  const auto m = run({"moments", "--i0", "0", "--ell", "2", "--model", model("birth_death_1_2.json")});
  REQUIRE(m.code == 0);
  CHECK(json::parse(m.out)["at_target"].get<double>() == doctest::Approx(8.0).epsilon(1e-8));
}

TEST_CASE("poisson with presets") {
  const auto r = run({"poisson", "--model", model("birth_death_1_2.json"), "--c-preset", "minus", "0.5", "--f",
                      "laplace", "--g0", "0.5", "--N", "5"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["g"][1].get<double>() == doctest::Approx(0.75));
  CHECK(j["residual"].get<double>() <= 1e-12);
  const auto expr = run({"poisson", "--model", model("birth_death_1_2.json"), "--f", "i^2 - 1", "--g0", "1"});
  CHECK(expr.code == 0);
  CHECK(run({"poisson", "--model", model("birth_death_1_2.json"), "--c-preset", "plus"}).code == 2);
  CHECK(run({"poisson", "--model", model("birth_death_1_2.json"), "--f", "i +* 2"}).code == 3);
}

TEST_CASE("simulate estimates") {
  const auto r = run({"simulate", "--model", model("two_state.json"), "--start", "0", "--stop", "return0",
                      "--samples", "100000", "--seed", "5"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(std::abs(j["mean"].get<double>() - 2.0) <= 3 * j["std_error"].get<double>());
  CHECK(j["capped_fraction"].get<double>() == 0.0);

  const auto same = run({"simulate", "--model", model("two_state.json"), "--start", "0", "--stop", "return0",
                         "--samples", "100000", "--seed", "5"});
  CHECK(same.out == r.out);

  const auto hit = run({"simulate", "--model", model("birth_death_1_2.json"), "--start", "3", "--stop", "hit", "3",
                        "--samples", "10"});
  REQUIRE(hit.code == 0);
  CHECK(json::parse(hit.out)["mean"].get<double>() == 0.0);

  const auto horizon = run({"simulate", "--model", model("birth_death_1_2.json"), "--start", "2", "--stop",
                            "horizon", "5", "--samples", "1000"});
  CHECK(horizon.code == 0);
  CHECK(run({"simulate", "--model", model("two_state.json"), "--stop", "forever"}).code == 2);
}

TEST_CASE("validate echoes the normalized spec") {
  const auto r = run({"validate", "--spec", R"({"kind": "birth_death", "up": 1, "down": "i + 1"})"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["model"]["kind"] == "birth_death");
  CHECK(j["model"]["down"] == "i + 1");
}

TEST_CASE("errors are JSON objects with categorized exit codes") {
  auto expect_error = [](const Result& r, int code, const std::string& kind) {
    CHECK(r.code == code);
    CHECK(r.out.empty());
    const auto j = json::parse(r.err);
    CHECK(j["error"]["kind"] == kind);
  };
  expect_error(run({}), 2, "UsageError");
  expect_error(run({"analyze", "--bogus"}), 2, "UsageError");
  expect_error(run({"analyze"}), 2, "UsageError");
  expect_error(run({"analyze", "--model", "/nonexistent.json"}), 3, "SpecError");
  expect_error(run({"validate", "--spec", R"({"kind": "birth_death", "up": 1, "down": 1, "typo": 2})"}), 3,
               "SpecError");
  expect_error(run({"expmoment", "--lambda", "5", "--model", model("uniform_catastrophe.json")}), 4,
               "RateBoundViolated");
  expect_error(run({"moments", "--ell", "2", "--model", model("birth_death_2_1.json")}), 4, "PreviousOrderInfinite");
}

TEST_CASE("thread count from the environment") {
  ::setenv("SBP_THREADS", "zero", 1);
  CHECK(run({"sequences", "--N", "3", "--model", model("birth_death_1_2.json")}).code == 2);
  ::setenv("SBP_THREADS", "2", 1);
  CHECK(run({"sequences", "--N", "3", "--model", model("birth_death_1_2.json")}).code == 0);
  ::unsetenv("SBP_THREADS");
}

TEST_CASE("reproduce filter and strict policy") {
  const auto one = run({"reproduce", "--filter", "finite-oracle"});
  CHECK(one.code == 0);
  CHECK(one.out.rfind("PASS  finite-oracle", 0) == 0);
  const auto small = run({"reproduce", "--filter", "mean-return", "--N", "50"});
  CHECK(small.code == 0);
  CHECK(small.out.rfind("INCONCLUSIVE", 0) == 0);
  CHECK(run({"reproduce", "--filter", "mean-return", "--N", "50", "--strict"}).code == 1);
  CHECK(run({"reproduce", "--filter", "no-such-check"}).code == 2);
  const auto j = json::parse(run({"reproduce", "--filter", "finite-oracle", "--format", "json"}).out);
  CHECK(j[0]["outcome"] == "PASS");
}

}  // TEST_SUITE
