#include "kct/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kct {

namespace {

struct DualSolution {
  std::vector<double> row_potential;
  std::vector<double> col_potential;
  std::vector<std::size_t> column_of_row;
};

// Square Hungarian method with potentials; row_potential[i] + col_potential[j]
// <= cost(i, j) with equality on the returned matching.
DualSolution hungarian(const Matrix& cost) {
  const std::size_t n = static_cast<std::size_t>(cost.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
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
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  DualSolution out;
  out.row_potential.assign(u.begin() + 1, u.end());
  out.col_potential.assign(v.begin() + 1, v.end());
  out.column_of_row.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] != 0) out.column_of_row[p[j] - 1] = j - 1;
  }
  return out;
}

// Kuhn's augmenting path on the subgraph of allowed edges.
class TightMatcher {
 public:
  TightMatcher(const std::vector<std::vector<char>>& allowed) : allowed_(allowed) {}

  // Can rows [first_row, n) be matched into columns not in `taken`?
  bool completes(std::size_t first_row, const std::vector<char>& taken) {
    const std::size_t n = allowed_.size();
    match_col_.assign(n, npos);
    for (std::size_t r = first_row; r < n; ++r) {
      seen_.assign(n, 0);
      if (!augment(r, taken)) return false;
    }
    return true;
  }

 private:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  bool augment(std::size_t row, const std::vector<char>& taken) {
    for (std::size_t c = 0; c < allowed_.size(); ++c) {
      if (!allowed_[row][c] || taken[c] || seen_[c]) continue;
      seen_[c] = 1;
      if (match_col_[c] == npos || augment(match_col_[c], taken)) {
        match_col_[c] = row;
        return true;
      }
    }
    return false;
  }

  const std::vector<std::vector<char>>& allowed_;
  std::vector<std::size_t> match_col_;
  std::vector<char> seen_;
};

double row_order_cost(const Matrix& cost, const std::vector<std::size_t>& cols) {
  double total = 0.0;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    total += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[i]));
  }
  return total;
}

}  // namespace

Assignment solve_assignment(const Matrix& cost) {
  const auto rows = static_cast<std::size_t>(cost.rows());
  const auto cols = static_cast<std::size_t>(cost.cols());
  if (rows == 0) return {};
  if (rows > cols) {
    throw DataError("assignment needs rows <= cols, got " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (!cost.allFinite()) throw DataError("assignment cost matrix contains non-finite values");

  // Zero-cost dummy rows make the problem square; they sort after real rows,
  // so lexicographic order on the real rows is unaffected.
  Matrix square = Matrix::Zero(static_cast<Eigen::Index>(cols), static_cast<Eigen::Index>(cols));
  square.topRows(cost.rows()) = cost;
  const DualSolution dual = hungarian(square);

  std::vector<std::size_t> hungarian_cols(dual.column_of_row.begin(), dual.column_of_row.begin() + rows);
  const double optimum = row_order_cost(cost, hungarian_cols);

  // Every optimal assignment uses only edges with zero reduced cost; walk
  // rows in order and take the smallest tight column that still admits a
  // perfect tight matching of the remaining rows.
  const double scale = 1.0 + square.cwiseAbs().maxCoeff();
  const double tight_tol = 1e-12 * scale;
  std::vector<std::vector<char>> tight(cols, std::vector<char>(cols, 0));
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double reduced = square(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                             dual.row_potential[i] - dual.col_potential[j];
      tight[i][j] = reduced <= tight_tol ? 1 : 0;
    }
  }
  for (std::size_t i = 0; i < cols; ++i) tight[i][dual.column_of_row[i]] = 1;

  TightMatcher matcher(tight);
  std::vector<char> taken(cols, 0);
  std::vector<std::size_t> chosen(cols, 0);
  bool consistent = true;
  for (std::size_t i = 0; i < rows && consistent; ++i) {
    bool placed = false;
    for (std::size_t j = 0; j < cols; ++j) {
      if (!tight[i][j] || taken[j]) continue;
      taken[j] = 1;
      if (matcher.completes(i + 1, taken)) {
        chosen[i] = j;
        placed = true;
        break;
      }
      taken[j] = 0;
    }
    consistent = placed;
  }

  Assignment out;
  out.column_of_row = hungarian_cols;
  out.cost = optimum;
  if (consistent) {
    std::vector<std::size_t> lex(chosen.begin(), chosen.begin() + rows);
    const double lex_cost = row_order_cost(cost, lex);
    if (lex_cost <= optimum + tight_tol * static_cast<double>(rows)) {
      out.column_of_row = std::move(lex);
      out.cost = lex_cost;
    }
  }
  return out;
}

}  // namespace kct
