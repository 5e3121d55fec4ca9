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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "occ4d/error.h"

namespace occ4d {

WeightMatrix::WeightMatrix(std::size_t rows, std::size_t cols,
                           std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kInvalidArgument,
                "weight matrix data does not match its shape");
  }
}

WeightMatrix WeightMatrix::Transposed() const {
  WeightMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

namespace {

// Square min-cost assignment with dual potentials (Jonker-Volgenant style
// shortest augmenting paths). Forbidden entries carry `big`.
struct Assignment {
  std::vector<int> row_to_col;
  std::vector<double> u;  // row potentials
  std::vector<double> v;  // column potentials
};

Assignment SolveSquare(const std::vector<double>& cost, int n) {
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based internally; index 0 is the virtual source column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur =
            cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment a;
  a.row_to_col.assign(n, -1);
  for (int j = 1; j <= n; ++j) a.row_to_col[p[j] - 1] = j - 1;
  a.u.assign(u.begin() + 1, u.end());
  a.v.assign(v.begin() + 1, v.end());
  return a;
}

// Moves the current perfect matching of the equality graph to the
// lexicographically smallest one, fixing real rows in order.
class LexRefiner {
 public:
  LexRefiner(std::vector<std::vector<int>> adj, std::vector<int> row_to_col,
             int real_rows)
      : adj_(std::move(adj)),
        row_to_col_(std::move(row_to_col)),
        col_to_row_(row_to_col_.size(), -1),
        fixed_(row_to_col_.size(), 0),
        real_rows_(real_rows) {
    for (std::size_t r = 0; r < row_to_col_.size(); ++r) {
      col_to_row_[row_to_col_[r]] = static_cast<int>(r);
    }
  }

  const std::vector<int>& Run() {
    for (int r = 0; r < real_rows_; ++r) {
      for (int c : adj_[r]) {
        if (c == row_to_col_[r] || TryReassign(r, c)) break;
      }
      fixed_[r] = 1;
    }
    return row_to_col_;
  }

 private:
  bool TryReassign(int r, int c) {
    const int other = col_to_row_[c];
    if (fixed_[other]) return false;
    const int old = row_to_col_[r];
    const auto saved_rc = row_to_col_;
    const auto saved_cr = col_to_row_;
    row_to_col_[r] = c;
    col_to_row_[c] = r;
    row_to_col_[other] = -1;
    col_to_row_[old] = -1;
    fixed_[r] = 1;
    visited_.assign(col_to_row_.size(), 0);
    const bool ok = Augment(other);
    fixed_[r] = 0;
    if (!ok) {
      row_to_col_ = saved_rc;
      col_to_row_ = saved_cr;
    }
    return ok;
  }

  bool Augment(int row) {
    for (int c : adj_[row]) {
      if (visited_[c]) continue;
      visited_[c] = 1;
      const int holder = col_to_row_[c];
      if (holder >= 0 && fixed_[holder]) continue;
      if (holder < 0 || Augment(holder)) {
        row_to_col_[row] = c;
        col_to_row_[c] = row;
        return true;
      }
    }
    return false;
  }

  std::vector<std::vector<int>> adj_;
  std::vector<int> row_to_col_;
  std::vector<int> col_to_row_;
  std::vector<char> fixed_;
  std::vector<char> visited_;
  int real_rows_;
};

}  // namespace

Matching MaxWeightMatching(const WeightMatrix& w, double min_weight) {
  if (!std::isfinite(min_weight) || min_weight < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "min_weight must be finite and >= 0");
  }
  double max_w = 0.0;
  for (std::size_t i = 0; i < w.data().size(); ++i) {
    const double x = w.data()[i];
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kNonFiniteWeight,
                  "entry (" + std::to_string(i / w.cols()) + ", " +
                      std::to_string(i % w.cols()) + ") is not finite");
    }
    if (x < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "weights must be >= 0");
    }
    max_w = std::max(max_w, x);
  }
  const int rows = static_cast<int>(w.rows());
  const int cols = static_cast<int>(w.cols());
  if (rows == 0 || cols == 0) return {};

  // Rows: real rows then one dummy per real column. Columns: real columns
  // then one dummy per real row. Real row r may go unmatched through dummy
  // column cols + r; real column c through dummy row rows + c.
  const int n = rows + cols;
  const double big = (max_w + 1.0) * static_cast<double>(n) * 4.0;
  std::vector<double> cost(static_cast<std::size_t>(n) * n, big);
  std::vector<char> allowed(static_cast<std::size_t>(n) * n, 0);
  auto at = [n](int r, int c) { return static_cast<std::size_t>(r) * n + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (w(r, c) > min_weight) {
        cost[at(r, c)] = -w(r, c);
        allowed[at(r, c)] = 1;
      }
    }
    cost[at(r, cols + r)] = 0.0;
    allowed[at(r, cols + r)] = 1;
  }
  for (int c = 0; c < cols; ++c) {
    cost[at(rows + c, c)] = 0.0;
    allowed[at(rows + c, c)] = 1;
    for (int d = 0; d < rows; ++d) {
      cost[at(rows + c, cols + d)] = 0.0;
      allowed[at(rows + c, cols + d)] = 1;
    }
  }

  const Assignment a = SolveSquare(cost, n);

  // Every perfect matching made of tight edges is optimal (complementary
  // slackness), so tie-breaking only needs the equality graph.
  const double eps = 1e-10 * (1.0 + max_w);
  std::vector<char> tight(static_cast<std::size_t>(n) * n, 0);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      tight[at(r, c)] =
          allowed[at(r, c)] && cost[at(r, c)] - a.u[r] - a.v[c] <= eps;
    }
    // The solver's own choice is tight by construction; guard against
    // rounding pushing it just past eps.
    tight[at(r, a.row_to_col[r])] = 1;
  }

  // Among optimal matchings prefer the most real pairs: a second solve on
  // the equality graph with unit reward per real edge.
  const double big2 = 4.0 * n;
  std::vector<double> card_cost(static_cast<std::size_t>(n) * n, big2);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (tight[at(r, c)]) card_cost[at(r, c)] = (r < rows && c < cols) ? -1.0 : 0.0;
    }
  }
  const Assignment b = SolveSquare(card_cost, n);
  std::vector<std::vector<int>> adj(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (tight[at(r, c)] && card_cost[at(r, c)] - b.u[r] - b.v[c] <= 0.5) {
        adj[r].push_back(c);
      }
    }
  }
  const std::vector<int> best =
      LexRefiner(std::move(adj), b.row_to_col, rows).Run();

  Matching out;
  for (int r = 0; r < rows; ++r) {
    if (best[r] < cols) {
      out.emplace_back(static_cast<std::size_t>(r),
                       static_cast<std::size_t>(best[r]));
    }
  }
  return out;
}

Matching ThresholdMatching(const WeightMatrix& iou) {
  Matching out;
  for (std::size_t r = 0; r < iou.rows(); ++r) {
    for (std::size_t c = 0; c < iou.cols(); ++c) {
      const double x = iou(r, c);
      if (!(x >= 0.0 && x <= 1.0)) {
        throw Error(ErrorCode::kWeightOutOfRange,
                    "IoU entry (" + std::to_string(r) + ", " +
                        std::to_string(c) + ") outside [0, 1]");
      }
      if (x > 0.5) out.emplace_back(r, c);
    }
  }
  return out;
}

double MatchingWeight(const WeightMatrix& w, const Matching& m) {
  double total = 0.0;
  for (const auto& [r, c] : m) total += w(r, c);
  return total;
}

}  // namespace occ4d
