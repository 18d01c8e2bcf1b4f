#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sbp {

/// Broad class of a failure; the CLI maps these to exit codes.
enum class ErrorCategory { Usage, Model, Numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string kind, const std::string& message)
      : std::runtime_error(message), category_(category), kind_(std::move(kind)) {}

  ErrorCategory category() const { return category_; }
  /// Stable machine-readable name, e.g. "StructureError".
  const std::string& kind() const { return kind_; }

 private:
  ErrorCategory category_;
  std::string kind_;
};

#define SBP_DEFINE_ERROR(Name, Category)                                   \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& message)                              \
        : Error(ErrorCategory::Category, #Name, message) {}                \
  };

SBP_DEFINE_ERROR(UsageError, Usage)
SBP_DEFINE_ERROR(StructureError, Model)
SBP_DEFINE_ERROR(DomainError, Model)
SBP_DEFINE_ERROR(SpecError, Model)
SBP_DEFINE_ERROR(HorizonExceeded, Model)
SBP_DEFINE_ERROR(NumericOverflow, Numeric)
SBP_DEFINE_ERROR(DegenerateBoundary, Numeric)
SBP_DEFINE_ERROR(InconclusiveSeries, Numeric)
SBP_DEFINE_ERROR(PreviousOrderInfinite, Numeric)
SBP_DEFINE_ERROR(NotExplosive, Numeric)
SBP_DEFINE_ERROR(RateBoundViolated, Numeric)
SBP_DEFINE_ERROR(FeasibilityViolated, Numeric)
SBP_DEFINE_ERROR(AllCapped, Numeric)

#undef SBP_DEFINE_ERROR

/// The exponential-moment side condition failed at a specific truncation index.
class ConditionViolated : public Error {
 public:
  ConditionViolated(std::size_t index, const std::string& message)
      : Error(ErrorCategory::Numeric, "ConditionViolated", message), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

}  // namespace sbp
