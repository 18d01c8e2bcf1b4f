#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sbp/criteria.hpp"
#include "sbp/model.hpp"

namespace sbp {

struct ErrorInfo {
  std::string kind;
  std::string message;
  bool operator==(const ErrorInfo&) const = default;
};

/// One criterion in a report: its verdict, or the error that stopped it.
struct VerdictEntry {
  Verdict verdict;
  std::optional<ErrorInfo> error;
  bool operator==(const VerdictEntry&) const = default;
};

struct AnalysisOptions {
  CriteriaOptions criteria;
  /// Adds exponential ergodicity and E_n exp(lambda sigma_0).
  std::optional<double> exp_lambda;
  /// Adds E_n exp(-lambda sigma_0).
  std::optional<double> laplace_lambda;
  bool operator==(const AnalysisOptions&) const = default;
};

struct AnalysisReport {
  nlohmann::json model_echo;
  AnalysisOptions options;

  VerdictEntry unique;
  VerdictEntry recurrent;
  VerdictEntry ergodic;
  VerdictEntry strongly_ergodic;
  std::optional<VerdictEntry> exp_ergodic;
  VerdictEntry mz_condition;

  std::optional<LimitEstimate> d;
  std::optional<ExtendedReal> E0_sigma0;
  std::optional<double> sup_mean_return;
  std::optional<LimitEstimate> mz_M;
  std::optional<MomentVector> return_probability;
  std::optional<MomentVector> mean_return_time;
  std::optional<MomentVector> exp_moment;
  std::optional<MomentVector> laplace;
  /// Errors of quantity computations, keyed by quantity name.
  std::vector<std::pair<std::string, ErrorInfo>> quantity_errors;

  /// Model hypotheses that could not be checked and ladder adjustments.
  std::vector<std::string> notes;
  std::string version;
  double wall_time_seconds = 0.0;

  bool operator==(const AnalysisReport&) const = default;
};

/// Runs the criteria concurrently and joins them into one report.  Errors in
/// one entry are recorded without aborting the others.
AnalysisReport analyze(const SingleBirthModel& model, const AnalysisOptions& options = {},
                       nlohmann::json model_echo = nullptr);

/// Enforces strongly_ergodic => ergodic => recurrent => unique (and
/// exp_ergodic => ergodic) on the verdicts.  Holds propagates down the chain
/// into Inconclusive entries, Fails propagates up; a Holds above a Fails is a
/// contradiction and the upper entry is demoted to Inconclusive.  Each change
/// adds a note.
void enforce_consistency(AnalysisReport& report);

const char* library_version();

// JSON: doubles outside the finite range are written as "inf", "-inf" or "nan".
nlohmann::json encode_number(double x);
double decode_number(const nlohmann::json& j);

void to_json(nlohmann::json& j, const ExtendedReal& x);
void from_json(const nlohmann::json& j, ExtendedReal& x);
void to_json(nlohmann::json& j, const Diagnostics& d);
void from_json(const nlohmann::json& j, Diagnostics& d);
void to_json(nlohmann::json& j, const Verdict& v);
void from_json(const nlohmann::json& j, Verdict& v);
void to_json(nlohmann::json& j, const LimitEstimate& e);
void from_json(const nlohmann::json& j, LimitEstimate& e);
void to_json(nlohmann::json& j, const MomentVector& v);
void from_json(const nlohmann::json& j, MomentVector& v);
void to_json(nlohmann::json& j, const ErrorInfo& e);
void from_json(const nlohmann::json& j, ErrorInfo& e);
void to_json(nlohmann::json& j, const VerdictEntry& e);
void from_json(const nlohmann::json& j, VerdictEntry& e);
void to_json(nlohmann::json& j, const CriteriaOptions& o);
void from_json(const nlohmann::json& j, CriteriaOptions& o);
void to_json(nlohmann::json& j, const AnalysisReport& r);
void from_json(const nlohmann::json& j, AnalysisReport& r);

/// Serializes with every floating value at 17 significant digits.
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// One "path: value" line per leaf (numbers at 6 significant digits); arrays of
/// scalars go on one line.  Every field of the JSON form appears.
std::string format_human(const nlohmann::json& j);

}  // namespace sbp
