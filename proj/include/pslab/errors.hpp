#pragma once

#include <stdexcept>
#include <string>

namespace pslab {

/// Base for every failure raised by the toolkit. `kind()` is a stable tag used
/// by the CLI to pick an exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define PSLAB_ERROR(Name)                                               \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(#Name, what) {}      \
  };

PSLAB_ERROR(NearSingular)
PSLAB_ERROR(NoConvergence)
PSLAB_ERROR(Overflow)
PSLAB_ERROR(DegenerateInput)
PSLAB_ERROR(SizingError)
PSLAB_ERROR(GridError)
PSLAB_ERROR(FlavorMismatch)
PSLAB_ERROR(BelowAlphaMin)
PSLAB_ERROR(EmptyData)
PSLAB_ERROR(InvalidArgument)

#undef PSLAB_ERROR

/// Configuration problems carry the dotted path of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error("ConfigError", field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace pslab
