// SPDX-License-Identifier: Apache-2.0
#include "finrag/error.hpp"

namespace finrag {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kConfig: return "Config";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kUnknownSource: return "UnknownSource";
    case ErrorCode::kBadTimestamp: return "BadTimestamp";
    case ErrorCode::kBadRecord: return "BadRecord";
    case ErrorCode::kDuplicateBar: return "DuplicateBar";
    case ErrorCode::kNonPositivePrice: return "NonPositivePrice";
    case ErrorCode::kMissingBar: return "MissingBar";
    case ErrorCode::kInsufficientHistory: return "InsufficientHistory";
    case ErrorCode::kUnparseable: return "Unparseable";
    case ErrorCode::kTransport: return "Transport";
    case ErrorCode::kSourceIndexOutOfRange: return "SourceIndexOutOfRange";
    case ErrorCode::kDegenerateWeights: return "DegenerateWeights";
    case ErrorCode::kNonFiniteOutput: return "NonFiniteOutput";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kZeroVolatility: return "ZeroVolatility";
    case ErrorCode::kEmptyLog: return "EmptyLog";
    case ErrorCode::kNoTradingDays: return "NoTradingDays";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message, std::size_t line) {
  std::string out(to_string(code));
  if (line > 0) out += "(line=" + std::to_string(line) + ")";
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::size_t line)
    : std::runtime_error(decorate(code, message, line)), code_(code), line_(line) {}

}  // namespace finrag
