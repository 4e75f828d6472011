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

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace v2s {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Tri = std::array<int, 3>;
using Tet = std::array<int, 4>;

enum class ErrorCode : int {
  kInvalidArgument = 1,
  kGenerationFailure = 2,
  kMeshingFailure = 3,
  kInvertedElement = 4,
  kNonConvergence = 5,
  kDomain = 6,
  kOpenSurface = 7,
  kIo = 8,
  kFormat = 9,
  kLengthMismatch = 10,
  kNaN = 11,
  kSpecMismatch = 12,
  kLabelMismatch = 13,
  kOutOfGrid = 14,
  kDegenerate = 15,
  kConfig = 16,
  kRetryExhausted = 17,
  kDivisibility = 18,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported as Error; the C API maps code() onto
// its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

template <typename T>
struct Range {
  T min{};
  T max{};
  bool valid() const { return min <= max; }
  bool contains(T v) const { return v >= min && v <= max; }
};

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  bool empty() const { return (min.array() > max.array()).any(); }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  double diagonal() const { return empty() ? 0.0 : extent().norm(); }

  // Squared distance from p to the box (zero inside).
  double squared_distance(const Vec3& p) const {
    const Vec3 d = (min - p).cwiseMax(p - max).cwiseMax(Vec3::Zero());
    return d.squaredNorm();
  }
};

}  // namespace v2s
