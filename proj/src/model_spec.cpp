#include "sbp/model_spec.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sbp/errors.hpp"
#include "sbp/expression.hpp"

namespace sbp {

namespace {

using nlohmann::json;

void check_keys(const json& doc, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) throw SpecError("unknown key \"" + key + "\" for kind \"" +
                                             doc.value("kind", std::string("?")) + "\"");
  }
}

double number(const json& doc, const std::string& key) {
  if (!doc.contains(key)) throw SpecError("missing key \"" + key + "\"");
  const json& v = doc.at(key);
  if (!v.is_number()) throw SpecError("\"" + key + "\" must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw SpecError("\"" + key + "\" must be finite");
  return x;
}

/// A rate given either as a number or as an expression in i.
struct RateSource {
  json echo;
  RateFunction fn;
};

RateSource rate_source(const json& doc, const std::string& key) {
  if (!doc.contains(key)) throw SpecError("missing key \"" + key + "\"");
  const json& v = doc.at(key);
  if (v.is_number()) {
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw SpecError("\"" + key + "\" must be finite");
    return {x, [x](std::size_t) { return x; }};
  }
  if (v.is_string()) {
    Expression e = Expression::parse(v.get<std::string>());
    return {e.text(), [e](std::size_t i) { return e(static_cast<double>(i)); }};
  }
  throw SpecError("\"" + key + "\" must be a number or an expression string");
}

std::optional<std::size_t> horizon_of(const json& doc) {
  if (!doc.contains("horizon") || doc.at("horizon").is_null()) return std::nullopt;
  const json& h = doc.at("horizon");
  if (!h.is_number_integer() || h.get<long long>() <= 0) {
    throw SpecError("\"horizon\" must be a positive integer");
  }
  return static_cast<std::size_t>(h.get<long long>());
}

RateFunction with_q01(RateFunction up, std::optional<double> q01) {
  if (!q01) return up;
  return [up = std::move(up), v = *q01](std::size_t i) { return i == 0 ? v : up(i); };
}

SingleBirthModel with_horizon(const SingleBirthModel& m, std::optional<std::size_t> horizon) {
  return horizon ? m.tabulate(*horizon) : m;
}

std::optional<double> optional_number(const json& doc, const std::string& key, json& echo) {
  if (!doc.contains(key)) return std::nullopt;
  const double v = number(doc, key);
  echo[key] = v;
  return v;
}

}  // namespace

ModelSpec parse_model_spec(const json& doc) {
  if (!doc.is_object()) throw SpecError("model spec must be a JSON object");
  if (!doc.contains("kind") || !doc.at("kind").is_string()) {
    throw SpecError("model spec needs a string \"kind\"");
  }
  const std::string kind = doc.at("kind").get<std::string>();
  json echo = json::object();
  echo["kind"] = kind;
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) throw SpecError("\"name\" must be a string");
    echo["name"] = doc.at("name");
  }
  const std::optional<std::size_t> horizon = horizon_of(doc);
  echo["horizon"] = horizon ? json(*horizon) : json(nullptr);
  std::vector<std::string> notes;

  auto finish = [&](SingleBirthModel m) {
    return ModelSpec{std::move(echo), with_horizon(m, horizon), std::move(notes)};
  };

  try {
    if (kind == "tabulated") {
      check_keys(doc, {"kind", "name", "horizon", "rows"});
      if (!doc.contains("rows") || !doc.at("rows").is_array()) throw SpecError("\"rows\" must be an array");
      std::vector<RateRow> rows;
      json rows_echo = json::array();
      for (std::size_t i = 0; i < doc.at("rows").size(); ++i) {
        const json& r = doc.at("rows")[i];
        if (!r.is_object()) throw SpecError("row " + std::to_string(i) + " must be an object");
        for (const auto& [key, value] : r.items()) {
          if (key != "up" && key != "down") {
            throw SpecError("unknown key \"" + key + "\" in row " + std::to_string(i));
          }
        }
        const double up = number(r, "up");
        std::map<std::size_t, double> down;
        if (r.contains("down")) {
          if (!r.at("down").is_object()) throw SpecError("\"down\" must be an object {\"j\": rate}");
          for (const auto& [key, value] : r.at("down").items()) {
            std::size_t pos = 0;
            unsigned long long j = 0;
            try {
              j = std::stoull(key, &pos);
            } catch (const std::exception&) {
              pos = 0;
            }
            if (pos == 0 || pos != key.size()) throw SpecError("down target \"" + key + "\" is not an index");
            if (!value.is_number()) throw SpecError("down rate for \"" + key + "\" must be a number");
            down[static_cast<std::size_t>(j)] = value.get<double>();
          }
        }
        rows.emplace_back(up, down);
        json d = json::object();
        for (const auto& [j, rate] : down) d[std::to_string(j)] = rate;
        rows_echo.push_back({{"up", up}, {"down", d}});
      }
      echo["rows"] = rows_echo;
      if (horizon && *horizon > rows.size()) {
        throw SpecError("horizon exceeds the number of tabulated rows");
      }
      if (horizon) rows.resize(*horizon);
      echo["horizon"] = rows.size();
      return ModelSpec{std::move(echo), SingleBirthModel::tabulated(std::move(rows)), std::move(notes)};
    }
    if (kind == "uniform_catastrophe") {
      check_keys(doc, {"kind", "name", "horizon", "a", "b", "q01"});
      const double a = number(doc, "a"), b = number(doc, "b"), q01 = number(doc, "q01");
      echo["a"] = a;
      echo["b"] = b;
      echo["q01"] = q01;
      return finish(model_uniform_catastrophe(a, b, q01));
    }
    if (kind == "constant_column") {
      check_keys(doc, {"kind", "name", "horizon", "q_i0", "up", "q01"});
      RateSource col = rate_source(doc, "q_i0");
      RateSource up = rate_source(doc, "up");
      echo["q_i0"] = col.echo;
      echo["up"] = up.echo;
      const auto q01 = optional_number(doc, "q01", echo);
      return finish(model_constant_column(col.fn, with_q01(up.fn, q01), "constant_column"));
    }
    if (kind == "birth_death") {
      check_keys(doc, {"kind", "name", "horizon", "up", "down", "q01"});
      RateSource up = rate_source(doc, "up");
      RateSource down = rate_source(doc, "down");
      echo["up"] = up.echo;
      echo["down"] = down.echo;
      const auto q01 = optional_number(doc, "q01", echo);
      return finish(model_birth_death(with_q01(up.fn, q01), down.fn, "birth_death"));
    }
    if (kind == "expression") {
      check_keys(doc, {"kind", "name", "horizon", "up", "down_prev", "down_zero", "down_each", "q01"});
      RateSource up = rate_source(doc, "up");
      echo["up"] = up.echo;
      std::optional<RateSource> prev, zero, each;
      if (doc.contains("down_prev")) echo["down_prev"] = (prev = rate_source(doc, "down_prev"))->echo;
      if (doc.contains("down_zero")) echo["down_zero"] = (zero = rate_source(doc, "down_zero"))->echo;
      if (doc.contains("down_each")) echo["down_each"] = (each = rate_source(doc, "down_each"))->echo;
      const auto q01 = optional_number(doc, "q01", echo);
      RateFunction upf = with_q01(up.fn, q01);
      auto rows = [upf, prev, zero, each](std::size_t i) {
        const double u = upf(i);
        if (!(u > 0.0) || !std::isfinite(u)) {
          throw DomainError("birth rate must be positive at i = " + std::to_string(i));
        }
        std::map<std::size_t, double> down;
        if (i > 0) {
          auto add = [&](std::size_t j, double r) {
            if (!std::isfinite(r) || r < 0.0) {
              throw DomainError("down rate must be finite and nonnegative at i = " + std::to_string(i));
            }
            down[j] += r;
          };
          if (each) {
            const double r = each->fn(i);
            for (std::size_t j = 0; j < i; ++j) add(j, r);
          }
          if (zero) add(0, zero->fn(i));
          if (prev) add(i - 1, prev->fn(i));
        }
        return RateRow(u, down);
      };
      notes.push_back("irreducibility of rate expressions is an unchecked hypothesis beyond the analysed prefix");
      return finish(SingleBirthModel::generated(rows, std::nullopt, "expression"));
    }
  } catch (const StructureError& e) {
    throw SpecError(std::string("invalid rates: ") + e.what());
  } catch (const DomainError& e) {
    throw SpecError(std::string("invalid parameters: ") + e.what());
  }
  throw SpecError("unknown kind \"" + kind + "\"");
}

ModelSpec load_model_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot read model spec \"" + path + "\"");
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw SpecError("model spec \"" + path + "\" is not valid JSON: " + e.what());
  }
  return parse_model_spec(doc);
}

}  // namespace sbp
