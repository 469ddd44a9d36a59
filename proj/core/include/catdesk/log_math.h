// Copyright 2026 The catdesk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CATDESK_LOG_MATH_H_
#define CATDESK_LOG_MATH_H_

#include <cmath>
#include <limits>
#include <span>

namespace catdesk {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) with max subtraction.
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

double log_sum_exp(std::span<const double> values);

inline constexpr double kLn10 = 2.302585092994045684;

inline double log10_to_ln(double v) { return v * kLn10; }
inline double ln_to_log10(double v) { return v / kLn10; }

}  // namespace catdesk

#endif  // CATDESK_LOG_MATH_H_
