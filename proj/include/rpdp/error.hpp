#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rpdp {

enum class ErrorCode {
  // Data validation.
  MissingColumn,
  UnknownColumn,
  UnknownLevel,
  OutOfRange,
  NonFiniteNumeric,
  InvalidNumeric,
  MissingValue,
  EmptyDataset,
  SchemaMismatch,
  // Lookups and preconditions on names.
  UnknownTarget,
  UnknownFeature,
  NotCategorical,
  GroupEqualsFeature,
  // Configuration.
  InvalidSchema,
  InvalidConfig,
  InvalidMarginals,
  // Training and profiling.
  TooFewRows,
  EmptySubset,
  MixedGrids,
  EmptyInput,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Whether an error describes bad input data (as opposed to a bad request).
bool is_data_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  /// Rashomon iteration (1-based) the error surfaced in, when known.
  std::optional<std::size_t> iteration() const noexcept { return iteration_; }

  Error with_iteration(std::size_t iteration) const;

 private:
  ErrorCode code_;
  std::optional<std::size_t> iteration_;
};

}  // namespace rpdp
