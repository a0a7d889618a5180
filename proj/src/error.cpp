#include "rpdp/error.hpp"

namespace rpdp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::UnknownLevel: return "UnknownLevel";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NonFiniteNumeric: return "NonFiniteNumeric";
    case ErrorCode::InvalidNumeric: return "InvalidNumeric";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::UnknownTarget: return "UnknownTarget";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::NotCategorical: return "NotCategorical";
    case ErrorCode::GroupEqualsFeature: return "GroupEqualsFeature";
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidMarginals: return "InvalidMarginals";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::MixedGrids: return "MixedGrids";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_data_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn:
    case ErrorCode::UnknownColumn:
    case ErrorCode::UnknownLevel:
    case ErrorCode::OutOfRange:
    case ErrorCode::NonFiniteNumeric:
    case ErrorCode::InvalidNumeric:
    case ErrorCode::MissingValue:
    case ErrorCode::EmptyDataset:
    case ErrorCode::SchemaMismatch:
    case ErrorCode::TooFewRows:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

Error Error::with_iteration(std::size_t iteration) const {
  Error e(code_, "iteration " + std::to_string(iteration) + ": " + what());
  e.iteration_ = iteration;
  return e;
}

}  // namespace rpdp
