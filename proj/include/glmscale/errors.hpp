#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace glmscale {

enum class ErrorKind {
  InvalidArgument,
  Domain,
  DegenerateCanonicalization,
  SingularDesign,
  CurvatureOverflow,
  NoRoot,
  NonConvergence,
  StalledLineSearch,
  Parse,
  MissingColumn,
  InsufficientData,
  Io,
  Config,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library. Optional context fields are filled
// in by the operations that have them (row/column for CSV parsing, offending
// observation for overflow, condition estimate for singular designs).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  std::optional<std::size_t> row;
  std::optional<std::size_t> column;
  std::optional<std::size_t> index;
  std::optional<double> condition_estimate;
  std::optional<double> last_residual;

 private:
  ErrorKind kind_;
};

}  // namespace glmscale
