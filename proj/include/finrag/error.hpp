// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace finrag {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kConfig,
  kMissingField,
  kUnknownSource,
  kBadTimestamp,
  kBadRecord,
  kDuplicateBar,
  kNonPositivePrice,
  kMissingBar,
  kInsufficientHistory,
  kUnparseable,
  kTransport,
  kSourceIndexOutOfRange,
  kDegenerateWeights,
  kNonFiniteOutput,
  kNonFiniteGradient,
  kZeroVolatility,
  kEmptyLog,
  kNoTradingDays,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a code; loaders also carry the
// 1-based line number of the offending record (0 when not applicable).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::size_t line = 0);

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

}  // namespace finrag
