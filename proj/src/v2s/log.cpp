// Copyright 2026 The V2S Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "v2s/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

#include "v2s/common.hpp"

namespace v2s {

namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::kInfo)};
std::mutex g_log_mutex;

const char* level_tag(LogLevel level) {
  switch (level) {
    case LogLevel::kDebug: return "debug";
    case LogLevel::kInfo: return "info";
    case LogLevel::kWarn: return "warning";
    case LogLevel::kError: return "error";
    default: return "";
  }
}
}  // namespace

void set_log_level(LogLevel level) { g_level = static_cast<int>(level); }

LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }

void log(LogLevel level, std::string_view message) {
  if (static_cast<int>(level) < g_level.load()) return;
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::fprintf(stderr, "[v2s %s] %.*s\n", level_tag(level),
               static_cast<int>(message.size()), message.data());
}

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kGenerationFailure: return "generation_failure";
    case ErrorCode::kMeshingFailure: return "meshing_failure";
    case ErrorCode::kInvertedElement: return "inverted_element";
    case ErrorCode::kNonConvergence: return "non_convergence";
    case ErrorCode::kDomain: return "domain_error";
    case ErrorCode::kOpenSurface: return "open_surface";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kFormat: return "format_error";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kNaN: return "nan_detected";
    case ErrorCode::kSpecMismatch: return "spec_mismatch";
    case ErrorCode::kLabelMismatch: return "label_mismatch";
    case ErrorCode::kOutOfGrid: return "out_of_grid";
    case ErrorCode::kDegenerate: return "degenerate_covariance";
    case ErrorCode::kConfig: return "config_error";
    case ErrorCode::kRetryExhausted: return "retry_exhausted";
    case ErrorCode::kDivisibility: return "divisibility_error";
  }
  return "unknown";
}

}  // namespace v2s
