#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sbp/model.hpp"

namespace sbp {

/// A model built from a JSON document, plus the normalized form of that
/// document (all defaults filled in, keys in canonical order).
///
/// Recognized kinds and keys (anything else is a SpecError):
///   tabulated            rows: [{up, down: {"j": rate}}]
///   uniform_catastrophe  a, b, q01
///   constant_column      q_i0, up, [q01]
///   birth_death          up, down, [q01]
///   expression           up, [down_prev, down_zero, down_each, q01]
/// Every kind also accepts `name` and `horizon`.  Rates in the function
/// kinds are either numbers or expressions in `i`.
struct ModelSpec {
  nlohmann::json normalized;
  SingleBirthModel model;
  /// Hypotheses that could not be checked, e.g. irreducibility of a rate expression.
  std::vector<std::string> notes;
};

ModelSpec parse_model_spec(const nlohmann::json& doc);
/// Reads and parses a file; SpecError if it cannot be read or is not JSON.
ModelSpec load_model_spec(const std::string& path);

}  // namespace sbp
