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

#include "catdesk/log_math.h"

#include <algorithm>

#include "catdesk/types.h"

namespace catdesk {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return kLogZero;
  const double max = *std::max_element(values.begin(), values.end());
  if (max == kLogZero) return kLogZero;
  if (std::isinf(max)) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

LabelSeq make_alphabet(int alphabet_size) {
  if (alphabet_size < 1) throw Error("alphabet must be nonempty");
  LabelSeq alphabet(alphabet_size);
  for (int k = 0; k < alphabet_size; ++k) alphabet[k] = kFirstSymbol + k;
  return alphabet;
}

}  // namespace catdesk
