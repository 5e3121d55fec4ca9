/* Copyright 2026 The Occ4D Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef OCC4D_ASSIGNMENT_H_
#define OCC4D_ASSIGNMENT_H_

#include <cstddef>
#include <utility>
#include <vector>

namespace occ4d {

// Dense row-major weight matrix. Entries are checked by the matchers, not on
// construction.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  WeightMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  WeightMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  const std::vector<double>& data() const { return data_; }
  WeightMatrix Transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using Matching = std::vector<std::pair<std::size_t, std::size_t>>;

// Maximum total weight matching restricted to edges with weight > min_weight,
// solved exactly (Kuhn-Munkres). Among optimal matchings the one with the
// most pairs wins, then the lexicographically smallest row-sorted pair
// sequence.
// Throws Error(kNonFiniteWeight) for NaN/inf and Error(kInvalidArgument) for
// negative weights.
Matching MaxWeightMatching(const WeightMatrix& w, double min_weight = 0.0);

// All pairs with IoU strictly above 0.5. Such pairs never share a row or
// column. Throws Error(kWeightOutOfRange) for entries outside [0, 1].
Matching ThresholdMatching(const WeightMatrix& iou);

double MatchingWeight(const WeightMatrix& w, const Matching& m);

}  // namespace occ4d

#endif  // OCC4D_ASSIGNMENT_H_
