#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sbp::acceptance {

enum class Outcome { Pass, Fail, Inconclusive };
const char* to_string(Outcome o);

struct CheckResult {
  std::string id;
  std::string title;
  Outcome outcome = Outcome::Inconclusive;
  /// Measurements, then the failed or unsettled checks.
  std::vector<std::string> details;
  double seconds = 0.0;
};

struct SuiteOptions {
  /// Overrides the truncation level of every check that uses one.
  std::optional<std::size_t> N;
  /// Directory of bundled model files.
  std::string models_dir;
};

struct Criterion {
  std::string id;
  std::string title;
  std::function<CheckResult(const SuiteOptions&)> run;
};

const std::vector<Criterion>& criteria();

/// Runs every criterion whose id contains `filter`; an exception inside a
/// criterion becomes a Fail (or Inconclusive for InconclusiveSeries).
std::vector<CheckResult> run_suite(const SuiteOptions& options, const std::string& filter = "");
CheckResult run_one(const Criterion& criterion, const SuiteOptions& options);

/// "PASS  id  (1.23 s)  title: details"
std::string format_line(const CheckResult& r);

std::string default_models_dir();

}  // namespace sbp::acceptance
