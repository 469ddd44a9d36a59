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

#ifndef CATDESK_TYPES_H_
#define CATDESK_TYPES_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace catdesk {

// Label ids. 0 is epsilon, 1 is the CTC blank, alphabet symbols start at 2.
using Label = int32_t;
inline constexpr Label kEpsilon = 0;
inline constexpr Label kBlank = 1;
inline constexpr Label kFirstSymbol = 2;

using StateId = int32_t;
inline constexpr StateId kNoState = -1;

// Ordered label sequences. LabelSeq never holds blank or epsilon; an
// Alignment is one S_pi symbol per frame.
using LabelSeq = std::vector<Label>;
using Alignment = std::vector<Label>;

// Row-major T x |S_pi| score matrix. Column c holds the score of label c + 1,
// so column 0 is the blank.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using FrameLogits = Matrix;

inline constexpr int emission_column(Label label) { return label - 1; }
inline constexpr Label column_label(int column) { return column + 1; }

// Number of emission symbols |S_pi| for an alphabet of K labels.
inline constexpr int num_emissions(int alphabet_size) { return alphabet_size + 1; }

// Alphabet {2, ..., K + 1}.
LabelSeq make_alphabet(int alphabet_size);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text or binary input.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A combinatorial enumeration would exceed its guard.
class OverflowError : public Error {
 public:
  using Error::Error;
};

class NoPathError : public Error {
 public:
  using Error::Error;
};

// The transcript cannot be aligned to the available frames.
class InfeasibleUtterance : public Error {
 public:
  using Error::Error;
};

}  // namespace catdesk

#endif  // CATDESK_TYPES_H_
