#include "sbp/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <limits>
#include <sstream>

#include "sbp/errors.hpp"

#ifndef SBP_VERSION
#define SBP_VERSION "0.0.0"
#endif

namespace sbp {

using nlohmann::json;

const char* library_version() { return SBP_VERSION; }

namespace {

ErrorInfo describe(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return {err->kind(), err->what()};
  return {"InternalError", e.what()};
}

VerdictEntry failed_entry(const ErrorInfo& info) {
  VerdictEntry e;
  e.error = info;
  e.verdict.diagnostics.notes.push_back(info.kind + ": " + info.message);
  return e;
}

// Runs `fn` and returns its error, if any, instead of throwing.
template <class Fn>
std::optional<ErrorInfo> capture(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return describe(e);
  }
  return std::nullopt;
}

}  // namespace

AnalysisReport analyze(const SingleBirthModel& model, const AnalysisOptions& options, json model_echo) {
  const auto t0 = std::chrono::steady_clock::now();
  AnalysisReport r;
  r.model_echo = std::move(model_echo);
  r.options = options;
  r.version = library_version();
  auto& opts = r.options.criteria;
  if (const auto h = model.horizon(); h && *h <= opts.N) {
    if (*h < 2) throw HorizonExceeded("the model needs at least two rows");
    r.notes.push_back("truncation lowered from " + std::to_string(opts.N) + " to the model horizon " +
                      std::to_string(*h - 1));
    opts.N = *h - 1;
  }
  const auto irreducible = model.check_irreducibility(opts.N + 1);
  if (!irreducible.irreducible_on_horizon) r.notes.push_back("irreducibility: " + irreducible.note);

  // Independent criteria run concurrently; the assignments below are the join.
  auto unique = std::async(std::launch::async, [&] { return uniqueness(model, opts); });
  auto mean = std::async(std::launch::async, [&] { return mean_return_time(model, opts); });
  auto ret = std::async(std::launch::async, [&] { return return_probability(model, opts); });
  auto mz = std::async(std::launch::async, [&] { return mz_sufficient_condition(model, opts); });
  std::future<ExpMoment> expm;
  std::future<MomentVector> lap;
  if (options.exp_lambda) {
    expm = std::async(std::launch::async, [&] { return exp_moment_return(model, *options.exp_lambda, opts); });
  }
  if (options.laplace_lambda) {
    lap = std::async(std::launch::async, [&] { return laplace_return(model, *options.laplace_lambda, opts); });
  }

  if (auto e = capture([&] { r.unique.verdict = unique.get(); })) r.unique = failed_entry(*e);

  MeanReturnTime m;
  if (auto e = capture([&] { m = mean.get(); })) {
    r.recurrent = r.ergodic = r.strongly_ergodic = failed_entry(*e);
    r.quantity_errors.emplace_back("mean_return_time", *e);
  } else {
    r.recurrent.verdict = m.recurrent;
    r.ergodic.verdict = m.ergodic;
    r.strongly_ergodic.verdict = m.strongly_ergodic;
    r.d = m.d;
    r.E0_sigma0 = m.E.values.empty() ? ExtendedReal::unknown() : m.E.values[0];
    r.sup_mean_return = m.sup;
    r.mean_return_time = std::move(m.E);
  }

  if (auto e = capture([&] { r.return_probability = ret.get(); })) r.quantity_errors.emplace_back("return_probability", *e);

  MzCondition mzc;
  if (auto e = capture([&] { mzc = mz.get(); })) {
    r.mz_condition = failed_entry(*e);
  } else {
    r.mz_condition.verdict = mzc.sufficient;
    r.mz_M = mzc.M;
  }

  if (options.exp_lambda) {
    ExpMoment em;
    if (auto e = capture([&] { em = expm.get(); })) {
      r.exp_ergodic = failed_entry(*e);
      r.quantity_errors.emplace_back("exp_moment", *e);
    } else {
      VerdictEntry entry;
      entry.verdict = em.feasible;
      if (em.feasible.status == Status::Fails) {
        // Infinite at this lambda says nothing about smaller ones.
        entry.verdict.status = Status::Inconclusive;
        entry.verdict.diagnostics.notes.push_back("exponential moment infinite at this lambda; smaller lambda untested");
      }
      r.exp_ergodic = entry;
      r.exp_moment = std::move(em.E);
    }
  }
  if (options.laplace_lambda) {
    if (auto e = capture([&] { r.laplace = lap.get(); })) r.quantity_errors.emplace_back("laplace", *e);
  }

  enforce_consistency(r);
  r.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void enforce_consistency(AnalysisReport& report) {
  struct Link {
    VerdictEntry* upper;
    VerdictEntry* lower;
    const char* upper_name;
    const char* lower_name;
  };
  std::vector<Link> links{{&report.strongly_ergodic, &report.ergodic, "strongly_ergodic", "ergodic"},
                          {&report.ergodic, &report.recurrent, "ergodic", "recurrent"},
                          {&report.recurrent, &report.unique, "recurrent", "unique"}};
  if (report.exp_ergodic) links.push_back({&*report.exp_ergodic, &report.ergodic, "exp_ergodic", "ergodic"});

  auto note = [&](VerdictEntry* e, const std::string& text) {
    e->verdict.diagnostics.notes.push_back(text);
    report.notes.push_back(text);
  };
  // An entry demoted by a contradiction takes no further part in propagation.
  std::vector<const VerdictEntry*> pinned;
  auto is_pinned = [&](const VerdictEntry* e) { return std::find(pinned.begin(), pinned.end(), e) != pinned.end(); };
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& l : links) {
      if (is_pinned(l.upper) || is_pinned(l.lower)) continue;
      auto& up = l.upper->verdict.status;
      auto& low = l.lower->verdict.status;
      const std::string rule = std::string(l.upper_name) + " => " + l.lower_name;
      if (up == Status::Holds && low == Status::Fails) {
        up = Status::Inconclusive;
        pinned.push_back(l.upper);
        note(l.upper, std::string(l.upper_name) + " demoted to Inconclusive: contradicts " + l.lower_name + " = Fails");
        changed = true;
      } else if (up == Status::Holds && low == Status::Inconclusive) {
        low = Status::Holds;
        note(l.lower, std::string(l.lower_name) + " = Holds implied by " + rule);
        changed = true;
      } else if (low == Status::Fails && up == Status::Inconclusive) {
        up = Status::Fails;
        note(l.upper, std::string(l.upper_name) + " = Fails implied by " + rule);
        changed = true;
      }
    }
  }
}

// ---- JSON ----

json encode_number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double decode_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw SpecError("not a number: " + s);
}

namespace {

json encode_all(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(encode_number(x));
  return a;
}

std::vector<double> decode_all(const json& a) {
  std::vector<double> v;
  for (const auto& x : a) v.push_back(decode_number(x));
  return v;
}

Status status_from(const std::string& s) {
  if (s == "Holds") return Status::Holds;
  if (s == "Fails") return Status::Fails;
  if (s == "Inconclusive") return Status::Inconclusive;
  throw SpecError("unknown status " + s);
}

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& x) {
  j[key] = x ? json(*x) : json(nullptr);
}

template <class T>
void get_optional(const json& j, const char* key, std::optional<T>& x) {
  if (j.contains(key) && !j.at(key).is_null()) x = j.at(key).get<T>();
  else x.reset();
}

}  // namespace

void to_json(json& j, const ExtendedReal& x) {
  switch (x.kind) {
    case ExtendedReal::Kind::Finite: j = encode_number(x.value); break;
    case ExtendedReal::Kind::PosInf: j = "+inf"; break;
    case ExtendedReal::Kind::Unknown: j = json{{"unknown", encode_number(x.value)}}; break;
  }
}

void from_json(const json& j, ExtendedReal& x) {
  if (j.is_string() && j.get<std::string>() == "+inf") x = ExtendedReal::infinity();
  else if (j.is_object()) x = ExtendedReal::unknown(decode_number(j.at("unknown")));
  else x = ExtendedReal::finite(decode_number(j));
}

void to_json(json& j, const Diagnostics& d) {
  j = json{{"truncation", d.truncation},
           {"last_partial_sums", encode_all(d.last_partial_sums)},
           {"ratio_estimates", encode_all(d.ratio_estimates)},
           {"kummer", d.kummer ? encode_number(*d.kummer) : json(nullptr)},
           {"notes", d.notes}};
}

void from_json(const json& j, Diagnostics& d) {
  d.truncation = j.at("truncation").get<std::size_t>();
  d.last_partial_sums = decode_all(j.at("last_partial_sums"));
  d.ratio_estimates = decode_all(j.at("ratio_estimates"));
  d.kummer.reset();
  if (!j.at("kummer").is_null()) d.kummer = decode_number(j.at("kummer"));
  d.notes = j.at("notes").get<std::vector<std::string>>();
}

void to_json(json& j, const Verdict& v) { j = json{{"status", to_string(v.status)}, {"diagnostics", v.diagnostics}}; }

void from_json(const json& j, Verdict& v) {
  v.status = status_from(j.at("status").get<std::string>());
  v.diagnostics = j.at("diagnostics").get<Diagnostics>();
}

void to_json(json& j, const LimitEstimate& e) {
  j = json{{"value", e.value},
           {"window_estimates", encode_all(e.window_estimates)},
           {"converged", e.converged},
           {"tolerance", encode_number(e.tolerance)},
           {"spread", encode_number(e.spread)}};
}

void from_json(const json& j, LimitEstimate& e) {
  e.value = j.at("value").get<ExtendedReal>();
  e.window_estimates = decode_all(j.at("window_estimates"));
  e.converged = j.at("converged").get<bool>();
  e.tolerance = decode_number(j.at("tolerance"));
  e.spread = decode_number(j.at("spread"));
}

void to_json(json& j, const MomentVector& v) {
  j = json{{"quantity", v.quantity},
           {"resolved_prefix", v.resolved_prefix()},
           {"values", v.values},
           {"uncertainty", encode_all(v.uncertainty)},
           {"resolved", v.resolved}};
}

void from_json(const json& j, MomentVector& v) {
  v.quantity = j.at("quantity").get<std::string>();
  v.values = j.at("values").get<std::vector<ExtendedReal>>();
  v.uncertainty = decode_all(j.at("uncertainty"));
  v.resolved = j.at("resolved").get<std::vector<bool>>();
}

void to_json(json& j, const ErrorInfo& e) { j = json{{"kind", e.kind}, {"message", e.message}}; }

void from_json(const json& j, ErrorInfo& e) {
  e.kind = j.at("kind").get<std::string>();
  e.message = j.at("message").get<std::string>();
}

void to_json(json& j, const VerdictEntry& e) {
  j = e.verdict;
  put_optional(j, "error", e.error);
}

void from_json(const json& j, VerdictEntry& e) {
  e.verdict = j.get<Verdict>();
  get_optional(j, "error", e.error);
}

void to_json(json& j, const CriteriaOptions& o) {
  j = json{{"N", o.N},
           {"window", o.window},
           {"ratio_tolerance", o.ratio_tolerance},
           {"divergence_threshold", o.divergence_threshold},
           {"kummer_margin", o.kummer_margin},
           {"max_order", o.max_order},
           {"resolution_tolerance", o.resolution_tolerance}};
}

void from_json(const json& j, CriteriaOptions& o) {
  o.N = j.at("N").get<std::size_t>();
  o.window = j.at("window").get<std::size_t>();
  o.ratio_tolerance = j.at("ratio_tolerance").get<double>();
  o.divergence_threshold = j.at("divergence_threshold").get<double>();
  o.kummer_margin = j.at("kummer_margin").get<double>();
  o.max_order = j.at("max_order").get<int>();
  o.resolution_tolerance = j.at("resolution_tolerance").get<double>();
}

void to_json(json& j, const AnalysisReport& r) {
  json params = r.options.criteria;
  put_optional(params, "exp_lambda", r.options.exp_lambda);
  put_optional(params, "laplace_lambda", r.options.laplace_lambda);

  json verdicts{{"unique", r.unique},
                {"recurrent", r.recurrent},
                {"ergodic", r.ergodic},
                {"strongly_ergodic", r.strongly_ergodic},
                {"mz_condition", r.mz_condition}};
  if (r.exp_ergodic) verdicts["exp_ergodic"] = *r.exp_ergodic;

  json q;
  put_optional(q, "d", r.d);
  put_optional(q, "E0_sigma0", r.E0_sigma0);
  q["sup_mean_return"] = r.sup_mean_return ? encode_number(*r.sup_mean_return) : json(nullptr);
  put_optional(q, "mz_M", r.mz_M);
  put_optional(q, "return_prob", r.return_probability);
  put_optional(q, "mean_return_time", r.mean_return_time);
  put_optional(q, "exp_moment", r.exp_moment);
  put_optional(q, "laplace", r.laplace);
  json errors = json::object();
  for (const auto& [name, info] : r.quantity_errors) errors[name] = info;
  q["errors"] = errors;

  j = json{{"model_echo", r.model_echo},
           {"parameters", params},
           {"verdicts", verdicts},
           {"quantities", q},
           {"notes", r.notes},
           {"version", r.version},
           {"wall_time_seconds", encode_number(r.wall_time_seconds)}};
}

void from_json(const json& j, AnalysisReport& r) {
  r = AnalysisReport{};
  r.model_echo = j.at("model_echo");
  const auto& p = j.at("parameters");
  r.options.criteria = p.get<CriteriaOptions>();
  get_optional(p, "exp_lambda", r.options.exp_lambda);
  get_optional(p, "laplace_lambda", r.options.laplace_lambda);

  const auto& v = j.at("verdicts");
  r.unique = v.at("unique").get<VerdictEntry>();
  r.recurrent = v.at("recurrent").get<VerdictEntry>();
  r.ergodic = v.at("ergodic").get<VerdictEntry>();
  r.strongly_ergodic = v.at("strongly_ergodic").get<VerdictEntry>();
  r.mz_condition = v.at("mz_condition").get<VerdictEntry>();
  get_optional(v, "exp_ergodic", r.exp_ergodic);

  const auto& q = j.at("quantities");
  get_optional(q, "d", r.d);
  get_optional(q, "E0_sigma0", r.E0_sigma0);
  if (!q.at("sup_mean_return").is_null()) r.sup_mean_return = decode_number(q.at("sup_mean_return"));
  get_optional(q, "mz_M", r.mz_M);
  get_optional(q, "return_prob", r.return_probability);
  get_optional(q, "mean_return_time", r.mean_return_time);
  get_optional(q, "exp_moment", r.exp_moment);
  get_optional(q, "laplace", r.laplace);
  for (const auto& [name, info] : q.at("errors").items()) r.quantity_errors.emplace_back(name, info.get<ErrorInfo>());

  r.notes = j.at("notes").get<std::vector<std::string>>();
  r.version = j.at("version").get<std::string>();
  r.wall_time_seconds = decode_number(j.at("wall_time_seconds"));
}

// ---- text output ----

namespace {

std::string format_double(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

void dump(std::ostringstream& out, const json& j, int indent, int depth) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << '{' << nl;
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out << ',' << nl;
        first = false;
        out << pad << json(k).dump() << sep;
        dump(out, v, indent, depth + 1);
      }
      out << nl << close << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      out << '[' << nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ',' << nl;
        out << pad;
        dump(out, j[i], indent, depth + 1);
      }
      out << nl << close << ']';
      return;
    }
    case json::value_t::number_float: out << format_double(j.get<double>(), 17); return;
    default: out << j.dump(); return;
  }
}

std::string scalar_text(const json& j) {
  if (j.is_number_float()) return format_double(j.get<double>(), 6);
  if (j.is_string()) return j.get<std::string>();
  return j.dump();
}

bool scalar_array(const json& j) {
  for (const auto& x : j) {
    if (x.is_structured()) return false;
  }
  return true;
}

void human(std::ostringstream& out, const json& j, const std::string& path) {
  if (j.is_object()) {
    if (j.empty()) out << path << ": {}\n";
    for (const auto& [k, v] : j.items()) human(out, v, path.empty() ? k : path + "." + k);
    return;
  }
  if (j.is_array()) {
    if (scalar_array(j)) {
      out << path << ": [";
      for (std::size_t i = 0; i < j.size(); ++i) out << (i ? ", " : "") << scalar_text(j[i]);
      out << "]\n";
      return;
    }
    for (std::size_t i = 0; i < j.size(); ++i) human(out, j[i], path + "[" + std::to_string(i) + "]");
    return;
  }
  out << path << ": " << scalar_text(j) << '\n';
}

}  // namespace

std::string dump_json(const json& j, int indent) {
  std::ostringstream out;
  dump(out, j, indent, 0);
  return out.str();
}

std::string format_human(const json& j) {
  std::ostringstream out;
  human(out, j, "");
  return out.str();
}

}  // namespace sbp
