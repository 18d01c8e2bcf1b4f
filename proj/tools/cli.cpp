#include "tools/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>

#include "CLI11.hpp"
#include "acceptance/suite.hpp"
#include "sbp/criteria.hpp"
#include "sbp/errors.hpp"
#include "sbp/expression.hpp"
#include "sbp/model_spec.hpp"
#include "sbp/poisson.hpp"
#include "sbp/report.hpp"
#include "sbp/sequences.hpp"
#include "sbp/simulator.hpp"

namespace sbp::cli {

namespace {

using nlohmann::json;

struct ModelOptions {
  std::string path;
  std::string inline_spec;
  std::size_t N = 1000;
  std::size_t window = 50;
  double ratio_tolerance = 1e-8;
  double divergence_threshold = 1e12;
  double kummer_margin = 0.1;
  double resolution_tolerance = 1e-8;
  int max_order = 6;
};

struct Config {
  ModelOptions model;
  std::string format;
  std::optional<int> threads;

  // sequences, poisson, laplace, expmoment, simulate
  double lambda = 0.0;
  std::string sign = "-";
  std::vector<std::string> c_preset{"zero"};
  std::string f = "0";
  double g0 = 0.0;
  std::string of = "return";

  // moments
  std::size_t i0 = 0;
  int ell = 1;

  // simulate
  std::size_t start = 0;
  std::vector<std::string> stop{"return0"};
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  std::optional<double> time_cap;
  std::size_t level_cap = 10000;
  bool has_lambda = false;

  // reproduce
  std::string filter;
  bool strict = false;
  std::optional<std::size_t> suite_N;
  std::string models_dir = acceptance::default_models_dir();
};

const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Usage: return "usage";
    case ErrorCategory::Model: return "model";
    case ErrorCategory::Numeric: return "numeric";
  }
  return "?";
}

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Usage: return 2;
    case ErrorCategory::Model: return 3;
    case ErrorCategory::Numeric: return 4;
  }
  return 1;
}

void write_error(std::ostream& err, const std::string& kind, const std::string& category, const std::string& message,
                 json extra = json::object()) {
  json e{{"kind", kind}, {"category", category}, {"message", message}};
  e.update(extra);
  err << dump_json(json{{"error", e}}, 0) << '\n';
}

void add_model_options(CLI::App* sub, Config& cfg) {
  auto* m = sub->add_option("--model", cfg.model.path, "Model spec file (JSON)");
  auto* s = sub->add_option("--spec", cfg.model.inline_spec, "Inline model spec (JSON text)");
  m->excludes(s);
  sub->add_option("--N", cfg.model.N, "Truncation level")->check(CLI::PositiveNumber);
  sub->add_option("--window", cfg.model.window, "Tail window for limits and series tests")->check(CLI::PositiveNumber);
  sub->add_option("--ratio-tol", cfg.model.ratio_tolerance, "Relative tolerance for settled limits");
  sub->add_option("--divergence", cfg.model.divergence_threshold, "Partial sum treated as divergent");
  sub->add_option("--kummer-margin", cfg.model.kummer_margin, "Kummer test margin");
  sub->add_option("--resolution-tol", cfg.model.resolution_tolerance, "Tolerance for resolved entries");
  sub->add_option("--max-order", cfg.model.max_order, "Largest moment order")->check(CLI::Range(1, 12));
}

void add_format(CLI::App* sub, Config& cfg, std::vector<std::string> allowed) {
  sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember(allowed));
}

ModelSpec load(const ModelOptions& o) {
  if (!o.inline_spec.empty()) {
    json doc;
    try {
      doc = json::parse(o.inline_spec);
    } catch (const json::exception& e) {
      throw SpecError(std::string("inline spec is not JSON: ") + e.what());
    }
    return parse_model_spec(doc);
  }
  if (o.path.empty()) throw UsageError("a model is required: --model <file> or --spec <json>");
  return load_model_spec(o.path);
}

CriteriaOptions criteria_options(const ModelOptions& o) {
  CriteriaOptions c;
  c.N = o.N;
  c.window = o.window;
  c.ratio_tolerance = o.ratio_tolerance;
  c.divergence_threshold = o.divergence_threshold;
  c.kummer_margin = o.kummer_margin;
  c.resolution_tolerance = o.resolution_tolerance;
  c.max_order = o.max_order;
  return c;
}

// Lowers N to the last available row of a tabulated model.
std::size_t fit_truncation(const SingleBirthModel& model, std::size_t N, std::vector<std::string>& notes) {
  if (const auto h = model.horizon(); h && *h <= N) {
    notes.push_back("truncation lowered from " + std::to_string(N) + " to the model horizon " + std::to_string(*h - 1));
    return *h - 1;
  }
  return N;
}

void emit(std::ostream& out, const json& j, const std::string& format) {
  if (format == "human") out << format_human(j);
  else out << dump_json(j) << '\n';
}

json scaled(const ScaledReal& x) {
  if (x.representable() || x.is_zero()) return encode_number(x.to_double());
  return x.to_string();
}

Coefficients preset_coefficients(const Config& cfg) {
  const auto& p = cfg.c_preset;
  double lambda = cfg.lambda;
  if (p.size() == 2) {
    const auto& t = p[1];
    const auto r = std::from_chars(t.data(), t.data() + t.size(), lambda);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size()) throw UsageError("bad lambda in --c-preset: " + t);
  }
  if (p[0] == "zero") {
    if (p.size() == 2) throw UsageError("--c-preset zero takes no value");
    return Coefficients::zero();
  }
  if (!(lambda > 0.0)) throw UsageError("--c-preset " + p[0] + " needs a positive lambda");
  if (p[0] == "plus") return Coefficients::constant(lambda);
  if (p[0] == "minus") return Coefficients::constant(-lambda);
  throw UsageError("--c-preset must be zero, plus <lambda> or minus <lambda>");
}

// f from a named problem or an expression in i.
std::vector<double> source_vector(const SingleBirthModel& model, const std::string& spec, double g0, std::size_t N) {
  std::vector<double> f(N + 1);
  auto down_to_zero = [&](std::size_t i) { return i == 0 ? 0.0 : model.rate(i, 0); };
  if (spec == "harmonic" || spec == "uniqueness") return f;
  if (spec == "recurrence") {
    for (std::size_t i = 0; i <= N; ++i) f[i] = down_to_zero(i);
  } else if (spec == "return-prob" || spec == "exp-moment" || spec == "laplace") {
    for (std::size_t i = 0; i <= N; ++i) f[i] = down_to_zero(i) * (g0 - 1.0);
  } else if (spec == "ergodicity" || spec == "strong-ergodicity") {
    for (std::size_t i = 0; i <= N; ++i) f[i] = down_to_zero(i) * g0 - 1.0;
  } else {
    const auto e = Expression::parse(spec);
    for (std::size_t i = 0; i <= N; ++i) f[i] = e(static_cast<double>(i));
  }
  return f;
}

// ---- subcommands ----

int cmd_validate(const Config& cfg, std::ostream& out) {
  const auto spec = load(cfg.model);
  emit(out, json{{"model", spec.normalized}, {"notes", spec.notes}}, cfg.format);
  return 0;
}

int cmd_analyze(const Config& cfg, std::ostream& out) {
  const auto spec = load(cfg.model);
  AnalysisOptions o;
  o.criteria = criteria_options(cfg.model);
  if (cfg.has_lambda) o.exp_lambda = cfg.lambda;
  o.laplace_lambda = o.exp_lambda;
  auto report = analyze(spec.model, o, spec.normalized);
  report.notes.insert(report.notes.begin(), spec.notes.begin(), spec.notes.end());
  emit(out, json(report), cfg.format);
  return 0;
}

int cmd_sequences(const Config& cfg, std::ostream& out, std::ostream& err) {
  const auto spec = load(cfg.model);
  std::vector<std::string> notes = spec.notes;
  const std::size_t N = fit_truncation(spec.model, cfg.model.N, notes);
  if (cfg.lambda < 0.0) throw UsageError("--lambda must be nonnegative; use --sign for the direction");
  if (cfg.sign != "+" && cfg.sign != "-") throw UsageError("--sign must be + or -");
  const Coefficients c =
      cfg.lambda == 0.0 ? Coefficients::zero() : Coefficients::constant(cfg.sign == "+" ? cfg.lambda : -cfg.lambda);
  const SequenceTable t(spec.model, c, N);
  const std::string format = cfg.format.empty() ? "csv" : cfg.format;
  if (format == "csv") {
    for (const auto& n : notes) err << "note: " << n << '\n';
    out << "n,F0_sign,F0_log,F0,m,d\n";
    for (std::size_t n = 0; n <= N; ++n) {
      const auto& f = t.f0()[n];
      char log_text[40];
      std::snprintf(log_text, sizeof log_text, "%.17g", f.log_magnitude());
      out << n << ',' << f.sign() << ',' << (f.is_zero() ? "-inf" : log_text) << ','
          << (f.representable() || f.is_zero() ? f.to_string(17) : "") << ',' << t.m()[n].to_string(17) << ','
          << t.d()[n].to_string(17) << '\n';
    }
    return 0;
  }
  json rows = json::array();
  for (std::size_t n = 0; n <= N; ++n) {
    const auto& f = t.f0()[n];
    rows.push_back({{"n", n},
                    {"F0_sign", f.sign()},
                    {"F0_log", encode_number(f.log_magnitude())},
                    {"F0", scaled(f)},
                    {"m", scaled(t.m()[n])},
                    {"d", scaled(t.d()[n])}});
  }
  emit(out,
       json{{"model", spec.normalized},
            {"c", c.label()},
            {"N", N},
            {"identity_defect", encode_number(t.identity_defect())},
            {"rows", rows},
            {"notes", notes}},
       format);
  return 0;
}

int cmd_poisson(const Config& cfg, std::ostream& out) {
  const auto spec = load(cfg.model);
  std::vector<std::string> notes = spec.notes;
  const std::size_t N = fit_truncation(spec.model, cfg.model.N, notes);
  const auto c = preset_coefficients(cfg);
  const auto f = source_vector(spec.model, cfg.f, cfg.g0, N);
  const auto s = solve_poisson({spec.model, c, f, cfg.g0, N});
  json g = json::array();
  for (const auto& x : s.g) g.push_back(scaled(x));
  emit(out,
       json{{"model", spec.normalized},
            {"c", c.label()},
            {"f", cfg.f},
            {"g0", encode_number(cfg.g0)},
            {"N", N},
            {"g", g},
            {"residual", encode_number(s.residual)},
            {"representable", s.representable},
            {"notes", notes}},
       cfg.format);
  return 0;
}

int cmd_moments(const Config& cfg, std::ostream& out) {
  const auto spec = load(cfg.model);
  auto o = criteria_options(cfg.model);
  std::vector<std::string> notes = spec.notes;
  o.N = fit_truncation(spec.model, o.N, notes);
  json j{{"model", spec.normalized}, {"ell", cfg.ell}, {"of", cfg.of}, {"N", o.N}};
  if (cfg.of == "lifetime") {
    j["E"] = lifetime_moment(spec.model, cfg.ell, o);
  } else {
    const auto h = hitting_moment(spec.model, cfg.i0, cfg.ell, o);
    j["i0"] = cfg.i0;
    j["at_target"] = h.at_target;
    j["E"] = h.E;
    j["order_limits"] = h.order_limits;
    j["order_tolerances"] = json::array();
    for (double t : h.order_tolerances) j["order_tolerances"].push_back(encode_number(t));
  }
  j["notes"] = notes;
  emit(out, j, cfg.format);
  return 0;
}

int cmd_transform(const Config& cfg, std::ostream& out, TransformDirection direction) {
  const auto spec = load(cfg.model);
  auto o = criteria_options(cfg.model);
  std::vector<std::string> notes = spec.notes;
  o.N = fit_truncation(spec.model, o.N, notes);
  if (!cfg.has_lambda) throw UsageError("--lambda is required");
  json j{{"model", spec.normalized}, {"lambda", encode_number(cfg.lambda)}, {"of", cfg.of}, {"N", o.N}};
  if (cfg.of == "lifetime") {
    j["values"] = lifetime_transforms(spec.model, cfg.lambda, direction, o);
  } else if (direction == TransformDirection::Laplace) {
    j["values"] = laplace_return(spec.model, cfg.lambda, o);
  } else {
    const auto e = exp_moment_return(spec.model, cfg.lambda, o);
    j["feasible"] = e.feasible;
    j["d_tilde"] = e.d_tilde;
    j["values"] = e.E;
  }
  j["notes"] = notes;
  emit(out, j, cfg.format);
  return 0;
}

std::size_t parse_index(const std::string& text, const char* what) {
  std::size_t v = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) throw UsageError(std::string("bad ") + what + ": " + text);
  return v;
}

int cmd_simulate(const Config& cfg, std::ostream& out) {
  const auto spec = load(cfg.model);
  EstimateOptions o;
  o.samples = cfg.samples;
  o.seed = cfg.seed;
  o.caps.time = cfg.time_cap;
  o.caps.level = cfg.level_cap;
  const auto& stop = cfg.stop;
  json j{{"model", spec.normalized}, {"start", cfg.start}, {"samples_requested", cfg.samples}, {"seed", cfg.seed}};
  EstimateWithError e;
  if (stop[0] == "return0") {
    if (stop.size() != 1) throw UsageError("--stop return0 takes no value");
    j["stop"] = "return0";
    if (cfg.has_lambda) {
      const auto of = cfg.of == "lifetime" ? TransformOf::Lifetime : TransformOf::ReturnTime;
      j["quantity"] = cfg.of == "lifetime" ? "E_n exp(lambda T), T the life time" : "E_n exp(lambda sigma_0)";
      j["lambda"] = encode_number(cfg.lambda);
      e = estimate_transform(spec.model, cfg.start, cfg.lambda, of, o);
    } else {
      j["quantity"] = "E_n sigma_0^" + std::to_string(cfg.ell);
      e = estimate_return_time_moment(spec.model, cfg.start, cfg.ell, o, 0);
    }
  } else if (stop[0] == "hit") {
    if (stop.size() != 2) throw UsageError("--stop hit needs a target state");
    const std::size_t target = parse_index(stop[1], "target");
    j["stop"] = "hit " + stop[1];
    j["quantity"] = "E_n tau_" + stop[1] + "^" + std::to_string(cfg.ell);
    if (cfg.start == target) {
      if (cfg.samples == 0 || cfg.ell < 1) throw UsageError("samples and ell must be positive");
      e.samples = cfg.samples;
    } else {
      // From another state the first hit is the first return.
      e = estimate_return_time_moment(spec.model, cfg.start, cfg.ell, o, target);
    }
  } else if (stop[0] == "horizon") {
    if (stop.size() != 2) throw UsageError("--stop horizon needs a time");
    double T = 0.0;
    const auto& t = stop[1];
    const auto r = std::from_chars(t.data(), t.data() + t.size(), T);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size()) throw UsageError("bad horizon: " + t);
    j["stop"] = "horizon " + t;
    j["quantity"] = "E_n X_T";
    e = estimate_state_at(spec.model, cfg.start, T, o);
  } else {
    throw UsageError("--stop must be return0, hit <j> or horizon <T>");
  }
  j["mean"] = encode_number(e.mean);
  j["std_error"] = encode_number(e.std_error);
  j["samples"] = e.samples;
  j["capped"] = e.capped;
  j["capped_fraction"] = encode_number(e.capped_fraction);
  j["bias_warning"] = e.bias_warning;
  if (e.bracket_low) j["bracket_low"] = encode_number(*e.bracket_low);
  if (e.bracket_high) j["bracket_high"] = encode_number(*e.bracket_high);
  emit(out, j, cfg.format);
  return 0;
}

int cmd_reproduce(const Config& cfg, std::ostream& out) {
  acceptance::SuiteOptions o;
  o.N = cfg.suite_N;
  o.models_dir = cfg.models_dir;
  bool any = false, failed = false, unsettled = false;
  json rows = json::array();
  for (const auto& c : acceptance::criteria()) {
    if (c.id.find(cfg.filter) == std::string::npos) continue;
    any = true;
    const auto r = acceptance::run_one(c, o);
    failed = failed || r.outcome == acceptance::Outcome::Fail;
    unsettled = unsettled || r.outcome == acceptance::Outcome::Inconclusive;
    if (cfg.format == "json") {
      rows.push_back({{"id", r.id},
                      {"title", r.title},
                      {"outcome", acceptance::to_string(r.outcome)},
                      {"details", r.details},
                      {"seconds", r.seconds}});
    } else {
      out << acceptance::format_line(r) << '\n' << std::flush;
    }
  }
  if (!any) throw UsageError("no acceptance check matches '" + cfg.filter + "'");
  if (cfg.format == "json") out << dump_json(rows) << '\n';
  return failed || (cfg.strict && unsettled) ? 1 : 0;
}

void apply_threads(const Config& cfg) {
  std::optional<int> threads = cfg.threads;
  if (!threads) {
    if (const char* env = std::getenv("SBP_THREADS"); env && *env) {
      int v = 0;
      const std::string s(env);
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size() || v < 1)
        throw UsageError("SBP_THREADS must be a positive integer, got '" + s + "'");
      threads = v;
    }
  }
  if (threads) omp_set_num_threads(*threads);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Criteria, moments and transforms for single birth processes"};
  app.name("sbp");
  app.require_subcommand(1);
  Config cfg;
  app.add_option("--threads", cfg.threads, "Worker threads (default: SBP_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Parse a model spec and print its normalized form");
  add_model_options(validate, cfg);
  add_format(validate, cfg, {"json", "human"});

  auto* an = app.add_subcommand("analyze", "Full classification report");
  add_model_options(an, cfg);
  add_format(an, cfg, {"json", "human"});
  an->add_option("--lambda", cfg.lambda, "Also evaluate exponential ergodicity and the transforms at lambda")
      ->check(CLI::PositiveNumber);

  auto* seq = app.add_subcommand("sequences", "F0, m and d under c = 0 or c = +-lambda");
  add_model_options(seq, cfg);
  add_format(seq, cfg, {"csv", "json", "human"});
  seq->add_option("--lambda", cfg.lambda, "Magnitude of the constant c (0 gives c = 0)");
  seq->add_option("--sign", cfg.sign, "Sign of c: + or -");

  auto* poi = app.add_subcommand("poisson", "Solve (Q + c) g = f from g0");
  add_model_options(poi, cfg);
  add_format(poi, cfg, {"json", "human"});
  poi->add_option("--c-preset", cfg.c_preset, "zero, plus <lambda> or minus <lambda>")->expected(1, 2);
  poi->add_option("--lambda", cfg.lambda, "Lambda for --c-preset plus/minus");
  poi->add_option("--f", cfg.f,
                  "Expression in i, or one of harmonic, uniqueness, recurrence, return-prob, ergodicity, "
                  "strong-ergodicity, exp-moment, laplace");
  poi->add_option("--g0", cfg.g0, "Initial value g_0");

  auto* mom = app.add_subcommand("moments", "Polynomial moments of hitting or life times");
  add_model_options(mom, cfg);
  add_format(mom, cfg, {"json", "human"});
  mom->add_option("--i0", cfg.i0, "Target state");
  mom->add_option("--ell", cfg.ell, "Moment order")->check(CLI::PositiveNumber);
  mom->add_option("--of", cfg.of, "hitting or lifetime")->check(CLI::IsMember({"hitting", "lifetime"}));

  auto* lap = app.add_subcommand("laplace", "E_n exp(-lambda T) for the return time or the life time");
  add_model_options(lap, cfg);
  add_format(lap, cfg, {"json", "human"});
  lap->add_option("--of", cfg.of, "return or lifetime")->check(CLI::IsMember({"return", "lifetime"}));

  auto* expm = app.add_subcommand("expmoment", "E_n exp(lambda T) for the return time or the life time");
  add_model_options(expm, cfg);
  add_format(expm, cfg, {"json", "human"});
  expm->add_option("--of", cfg.of, "return or lifetime")->check(CLI::IsMember({"return", "lifetime"}));

  for (auto* sub : {lap, expm})
    sub->add_option("--lambda", cfg.lambda, "Transform argument")->required()->check(CLI::PositiveNumber);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate from simulated paths");
  add_model_options(sim, cfg);
  add_format(sim, cfg, {"json", "human"});
  sim->add_option("--start", cfg.start, "Initial state");
  sim->add_option("--stop", cfg.stop, "return0, hit <j> or horizon <T>")->expected(1, 2);
  sim->add_option("--samples", cfg.samples, "Number of paths");
  sim->add_option("--seed", cfg.seed, "Generator seed");
  sim->add_option("--ell", cfg.ell, "Moment order of the stopping time")->check(CLI::PositiveNumber);
  sim->add_option("--lambda", cfg.lambda, "Estimate E exp(lambda T) instead (signed)");
  sim->add_option("--of", cfg.of, "return or lifetime (with --lambda)")
      ->check(CLI::IsMember({"return", "lifetime"}));
  sim->add_option("--time-cap", cfg.time_cap, "Absolute time cap")->check(CLI::PositiveNumber);
  sim->add_option("--level-cap", cfg.level_cap, "Level cap");

  auto* rep = app.add_subcommand("reproduce", "Run the acceptance checks and print a table");
  add_format(rep, cfg, {"human", "json"});
  rep->add_option("--filter", cfg.filter, "Run checks whose id contains this text");
  rep->add_flag("--strict", cfg.strict, "Inconclusive checks also give a nonzero exit");
  rep->add_option("--N", cfg.suite_N, "Truncation override for every check")->check(CLI::PositiveNumber);
  rep->add_option("--models", cfg.models_dir, "Directory of bundled model files");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    write_error(err, "UsageError", "usage", e.what());
    return 2;
  }

  cfg.has_lambda = false;
  for (auto* sub : {an, lap, expm, sim})
    if (sub->parsed() && sub->count("--lambda") > 0) cfg.has_lambda = true;

  try {
    apply_threads(cfg);
    if (cfg.format.empty() && !seq->parsed()) cfg.format = rep->parsed() ? "human" : "json";
    if (validate->parsed()) return cmd_validate(cfg, out);
    if (an->parsed()) return cmd_analyze(cfg, out);
    if (seq->parsed()) return cmd_sequences(cfg, out, err);
    if (poi->parsed()) return cmd_poisson(cfg, out);
    if (mom->parsed()) {
      if (cfg.of == "return") cfg.of = "hitting";
      return cmd_moments(cfg, out);
    }
    if (lap->parsed()) return cmd_transform(cfg, out, TransformDirection::Laplace);
    if (expm->parsed()) return cmd_transform(cfg, out, TransformDirection::ExpMoment);
    if (sim->parsed()) return cmd_simulate(cfg, out);
    if (rep->parsed()) return cmd_reproduce(cfg, out);
  } catch (const ConditionViolated& e) {
    write_error(err, e.kind(), category_name(e.category()), e.what(), json{{"index", e.index()}});
    return exit_code(e.category());
  } catch (const Error& e) {
    write_error(err, e.kind(), category_name(e.category()), e.what());
    return exit_code(e.category());
  } catch (const std::exception& e) {
    write_error(err, "InternalError", "internal", e.what());
    return 1;
  }
  return 2;
}

}  // namespace sbp::cli
