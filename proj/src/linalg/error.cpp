#include "tsdr/error.hpp"

namespace tsdr {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidMatrix: return "InvalidMatrix";
    case ErrorKind::DimensionError: return "DimensionError";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::GroupTooSmall: return "GroupTooSmall";
    case ErrorKind::EmptyData: return "EmptyData";
    case ErrorKind::ThresholdTooEarly: return "ThresholdTooEarly";
    case ErrorKind::ThresholdTooLate: return "ThresholdTooLate";
    case ErrorKind::CensoringSupportViolated: return "CensoringSupportViolated";
    case ErrorKind::ModelMisconfigured: return "ModelMisconfigured";
    case ErrorKind::MissingStatus: return "MissingStatus";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace tsdr
