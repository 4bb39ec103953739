// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdlib>
#include <memory>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace finrag::detail {

// Library diagnostics go to stderr so command output on stdout stays clean.
inline spdlog::logger& log() {
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto existing = spdlog::get("finrag");
    if (existing) return existing;
    auto created = spdlog::stderr_logger_mt("finrag");
    // FINRAG_LOG_LEVEL takes spdlog level names: trace, debug, info, warn, err, off
    const char* level = std::getenv("FINRAG_LOG_LEVEL");
    created->set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
    created->set_pattern("[%l] %v");
    return created;
  }();
  return *instance;
}

}  // namespace finrag::detail
