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
#include "occ4d/assignment.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "occ4d/error.h"
#include "oracles.h"

namespace occ4d {
namespace {

using testing::BruteForceMatching;
using testing::Rng;
using testing::UniformInt;
using testing::UniformReal;

bool IsMatching(const Matching& m, std::size_t rows, std::size_t cols) {
  std::vector<bool> r(rows), c(cols);
  for (const auto& [i, j] : m) {
    if (i >= rows || j >= cols || r[i] || c[j]) return false;
    r[i] = c[j] = true;
  }
  return true;
}

TEST(MaxWeightMatchingTest, Singleton) {
  EXPECT_EQ(MaxWeightMatching(WeightMatrix(1, 1, {1.0})), (Matching{{0, 0}}));
}

TEST(MaxWeightMatchingTest, BeatsGreedy) {
  const WeightMatrix w(2, 2, {0.9, 0.1, 0.8, 0.0});
  const Matching m = MaxWeightMatching(w);
  EXPECT_EQ(m, (Matching{{0, 1}, {1, 0}}));
  EXPECT_NEAR(MatchingWeight(w, m), 0.9, 1e-15);
}

TEST(MaxWeightMatchingTest, EmptyAndZeroMatrices) {
  EXPECT_TRUE(MaxWeightMatching(WeightMatrix(0, 3)).empty());
  EXPECT_TRUE(MaxWeightMatching(WeightMatrix(3, 0)).empty());
  EXPECT_TRUE(MaxWeightMatching(WeightMatrix(3, 4, 0.0)).empty());
}

TEST(MaxWeightMatchingTest, MinWeightIsStrict) {
  const WeightMatrix w(2, 2, {0.1, 0.05, 0.3, 0.1});
  EXPECT_EQ(MaxWeightMatching(w, 0.1), (Matching{{1, 0}}));
}

TEST(MaxWeightMatchingTest, RejectsBadWeights) {
  const double inf = std::numeric_limits<double>::infinity();
  try {
    MaxWeightMatching(WeightMatrix(1, 2, {0.1, inf}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteWeight);
  }
  try {
    MaxWeightMatching(WeightMatrix(1, 1, {NAN}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteWeight);
  }
  try {
    MaxWeightMatching(WeightMatrix(1, 1, {-0.5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(MaxWeightMatchingTest, TiesPreferLexicographicallySmallest) {
  EXPECT_EQ(MaxWeightMatching(WeightMatrix(2, 2, 1.0)), (Matching{{0, 0}, {1, 1}}));
  // Both {(0,1)} and {(1,0)} weigh 1.
  EXPECT_EQ(MaxWeightMatching(WeightMatrix(2, 2, {0, 1, 1, 0})),
            (Matching{{0, 1}, {1, 0}}));
  EXPECT_EQ(MaxWeightMatching(WeightMatrix(2, 3, {1, 1, 1, 0, 0, 0})),
            (Matching{{0, 0}}));
  EXPECT_EQ(MaxWeightMatching(WeightMatrix(3, 1, {0, 2, 2})), (Matching{{1, 0}}));
}

TEST(MaxWeightMatchingTest, RandomRealMatricesMatchBruteForce) {
  Rng rng(42);
  for (int seed = 0; seed < 500; ++seed) {
    const std::size_t r = UniformInt(rng, 1, 6), c = UniformInt(rng, 1, 7);
    WeightMatrix w(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        w(i, j) = testing::Coin(rng, 0.2) ? 0.0 : UniformReal(rng, 0.0, 1.0);
      }
    }
    const double min_w = testing::Coin(rng, 0.5) ? 0.0 : 0.3;
    const Matching m = MaxWeightMatching(w, min_w);
    const auto oracle = BruteForceMatching(w, min_w);
    ASSERT_TRUE(IsMatching(m, r, c));
    for (const auto& [i, j] : m) EXPECT_GT(w(i, j), min_w);
    EXPECT_NEAR(MatchingWeight(w, m), oracle.total, 1e-12);
    EXPECT_EQ(m, oracle.pairs) << "seed " << seed;
  }
}

TEST(MaxWeightMatchingTest, IntegerMatricesWithTiesMatchBruteForce) {
  Rng rng(43);
  for (int seed = 0; seed < 500; ++seed) {
    const std::size_t r = UniformInt(rng, 1, 6), c = UniformInt(rng, 1, 6);
    WeightMatrix w(r, c);
    for (auto i = 0u; i < r; ++i) {
      for (auto j = 0u; j < c; ++j) w(i, j) = UniformInt(rng, 0, 3);
    }
    const Matching m = MaxWeightMatching(w);
    const auto oracle = BruteForceMatching(w, 0.0);
    EXPECT_EQ(MatchingWeight(w, m), oracle.total);
    EXPECT_EQ(m, oracle.pairs) << "seed " << seed;
  }
}

TEST(MaxWeightMatchingTest, TransposeSymmetryWithoutTies) {
  Rng rng(44);
  for (int seed = 0; seed < 200; ++seed) {
    const std::size_t r = UniformInt(rng, 1, 8), c = UniformInt(rng, 1, 8);
    WeightMatrix w(r, c);
    for (auto i = 0u; i < r; ++i) {
      for (auto j = 0u; j < c; ++j) w(i, j) = UniformReal(rng, 0.0, 1.0);
    }
    Matching t = MaxWeightMatching(w.Transposed());
    for (auto& [i, j] : t) std::swap(i, j);
    std::sort(t.begin(), t.end());
    EXPECT_EQ(t, MaxWeightMatching(w));
  }
}

TEST(MaxWeightMatchingTest, LargeMatrixIsOneToOneAndOptimalVsGreedy) {
  Rng rng(45);
  WeightMatrix w(150, 170);
  for (auto i = 0u; i < 150; ++i) {
    for (auto j = 0u; j < 170; ++j) w(i, j) = UniformReal(rng, 0.0, 1.0);
  }
  const Matching m = MaxWeightMatching(w);
  ASSERT_TRUE(IsMatching(m, 150, 170));
  EXPECT_EQ(m.size(), 150u);
  // Greedy by descending weight is a lower bound.
  std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
  for (auto i = 0u; i < 150; ++i) {
    for (auto j = 0u; j < 170; ++j) edges.emplace_back(w(i, j), i, j);
  }
  std::sort(edges.rbegin(), edges.rend());
  std::vector<bool> ru(150), cu(170);
  double greedy = 0.0;
  for (const auto& [x, i, j] : edges) {
    if (ru[i] || cu[j]) continue;
    ru[i] = cu[j] = true;
    greedy += x;
  }
  EXPECT_GE(MatchingWeight(w, m), greedy - 1e-9);
}

TEST(ThresholdMatchingTest, Boundaries) {
  EXPECT_EQ(ThresholdMatching(WeightMatrix(1, 1, {0.51})), (Matching{{0, 0}}));
  EXPECT_TRUE(ThresholdMatching(WeightMatrix(1, 1, {0.5})).empty());
  try {
    ThresholdMatching(WeightMatrix(1, 1, {1.5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWeightOutOfRange);
  }
}

// IoU matrices of two random partitions of a 100-element universe.
TEST(ThresholdMatchingTest, PartitionIousGiveValidMatchings) {
  Rng rng(46);
  for (int trial = 0; trial < 300; ++trial) {
    const int ka = UniformInt(rng, 1, 8), kb = UniformInt(rng, 1, 8);
    std::vector<int> a(100), b(100);
    for (int i = 0; i < 100; ++i) {
      a[i] = UniformInt(rng, 0, ka - 1);
      b[i] = testing::Coin(rng, 0.7) ? a[i] % kb : UniformInt(rng, 0, kb - 1);
    }
    WeightMatrix iou(ka, kb);
    for (int x = 0; x < ka; ++x) {
      for (int y = 0; y < kb; ++y) {
        int inter = 0, uni = 0;
        for (int i = 0; i < 100; ++i) {
          inter += a[i] == x && b[i] == y;
          uni += a[i] == x || b[i] == y;
        }
        iou(x, y) = uni ? static_cast<double>(inter) / uni : 0.0;
      }
    }
    const Matching t = ThresholdMatching(iou);
    ASSERT_TRUE(IsMatching(t, ka, kb));
    const Matching m = MaxWeightMatching(iou);
    EXPECT_GE(MatchingWeight(iou, m), MatchingWeight(iou, t) - 1e-12);
  }
}

}  // namespace
}  // namespace occ4d
