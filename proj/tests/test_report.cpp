#include <string>

#include "doctest.h"
#include "sbp/errors.hpp"
#include "sbp/report.hpp"

using namespace sbp;
using nlohmann::json;

namespace {

SingleBirthModel birth_death(double up, double down) {
  return model_birth_death([up](std::size_t) { return up; }, [down](std::size_t) { return down; });
}

VerdictEntry entry(Status s) {
  VerdictEntry e;
  e.verdict.status = s;
  return e;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("catastrophe example report") {
  AnalysisOptions o;
  o.exp_lambda = 0.5;
  o.laplace_lambda = 0.5;
  const auto r = analyze(model_uniform_catastrophe(1, 1, 1), o);
  CHECK(r.unique.verdict.status == Status::Holds);
  CHECK(r.recurrent.verdict.status == Status::Holds);
  CHECK(r.ergodic.verdict.status == Status::Holds);
  CHECK(r.strongly_ergodic.verdict.status == Status::Holds);
  REQUIRE(r.exp_ergodic.has_value());
  CHECK(r.exp_ergodic->verdict.status == Status::Holds);
  CHECK(r.mz_condition.verdict.status == Status::Holds);
  REQUIRE(r.d.has_value());
  CHECK(r.d->value.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.E0_sigma0->value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.laplace.has_value());
  CHECK(r.quantity_errors.empty());
}

TEST_CASE("explosive and null-drift reports") {
  const auto sq = analyze(model_constant_column([](std::size_t) { return 1.0; },
                                                [](std::size_t n) { return (n + 1.0) * (n + 1.0); }));
  CHECK(sq.unique.verdict.status == Status::Fails);
  CHECK(sq.recurrent.verdict.status == Status::Fails);
  CHECK(sq.strongly_ergodic.verdict.status == Status::Fails);
  CHECK(sq.mz_condition.error.has_value());

  const auto bd = analyze(birth_death(1, 2));
  CHECK(bd.ergodic.verdict.status == Status::Holds);
  CHECK(bd.strongly_ergodic.verdict.status == Status::Fails);
}

TEST_CASE("tabulated models are truncated at their horizon") {
  std::vector<RateRow> rows;
  rows.emplace_back(1.0, std::map<std::size_t, double>{});
  for (std::size_t i = 1; i < 60; ++i) rows.emplace_back(1.0, std::map<std::size_t, double>{{i - 1, 2.0}});
  const auto r = analyze(SingleBirthModel::tabulated(rows));
  CHECK(r.options.criteria.N == 59);
  CHECK(!r.notes.empty());
}

TEST_CASE("consistency ladder") {
  AnalysisReport r;
  r.strongly_ergodic = entry(Status::Holds);
  r.ergodic = entry(Status::Inconclusive);
  r.recurrent = entry(Status::Inconclusive);
  r.unique = entry(Status::Inconclusive);
  enforce_consistency(r);
  CHECK(r.ergodic.verdict.status == Status::Holds);
  CHECK(r.recurrent.verdict.status == Status::Holds);
  CHECK(r.unique.verdict.status == Status::Holds);

  AnalysisReport f;
  f.strongly_ergodic = entry(Status::Inconclusive);
  f.ergodic = entry(Status::Inconclusive);
  f.recurrent = entry(Status::Inconclusive);
  f.unique = entry(Status::Fails);
  enforce_consistency(f);
  CHECK(f.strongly_ergodic.verdict.status == Status::Fails);
  CHECK(f.recurrent.verdict.status == Status::Fails);

  AnalysisReport c;
  c.strongly_ergodic = entry(Status::Inconclusive);
  c.ergodic = entry(Status::Holds);
  c.recurrent = entry(Status::Fails);
  c.unique = entry(Status::Holds);
  enforce_consistency(c);
  CHECK(c.ergodic.verdict.status == Status::Inconclusive);
  CHECK(!c.notes.empty());
}

TEST_CASE("JSON round trip") {
  AnalysisOptions o;
  o.exp_lambda = 0.25;
  o.laplace_lambda = 0.5;
  o.criteria.N = 300;
  for (const auto& model : {model_uniform_catastrophe(1, 1, 1), birth_death(1, 2),
                            model_constant_column([](std::size_t) { return 1.0; },
                                                  [](std::size_t n) { return (n + 1.0) * (n + 1.0); })}) {
    const auto r = analyze(model, o, json{{"kind", "test"}});
    const std::string text = dump_json(json(r));
    const auto back = json::parse(text).get<AnalysisReport>();
    CHECK(back == r);
  }
}

TEST_CASE("number formatting") {
  CHECK(dump_json(json(0.1), 0) == "0.10000000000000001");
  CHECK(dump_json(json{{"a", json::array({1, 2.5})}}, 0) == "{\"a\":[1,2.5]}");
  CHECK(decode_number(encode_number(1.0 / 0.0)) == 1.0 / 0.0);
  CHECK(format_human(json{{"x", 0.123456789}}) == "x: 0.123457\n");
}

TEST_CASE("human format lists every JSON leaf") {
  AnalysisOptions o;
  o.criteria.N = 200;
  o.exp_lambda = 0.5;
  const auto r = analyze(model_uniform_catastrophe(1, 1, 1), o);
  const json j = r;
  const std::string text = format_human(j);
  std::size_t leaves = 0;
  std::function<void(const json&, const std::string&)> visit = [&](const json& x, const std::string& path) {
    if (x.is_object()) {
      for (const auto& [k, v] : x.items()) visit(v, path.empty() ? k : path + "." + k);
    } else if (x.is_array() && std::any_of(x.begin(), x.end(), [](const json& e) { return e.is_structured(); })) {
      for (std::size_t i = 0; i < x.size(); ++i) visit(x[i], path + "[" + std::to_string(i) + "]");
    } else {
      ++leaves;
      CHECK_MESSAGE(text.find(path + ": ") != std::string::npos, path);
    }
  };
  visit(j, "");
  CHECK(leaves > 20);
}

TEST_CASE("reports are deterministic") {
  AnalysisOptions o;
  o.criteria.N = 300;
  auto a = analyze(birth_death(1, 2), o);
  auto b = analyze(birth_death(1, 2), o);
  a.wall_time_seconds = b.wall_time_seconds = 0.0;
  CHECK(a == b);
}

}  // TEST_SUITE
