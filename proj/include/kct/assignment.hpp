#pragma once

#include "kct/common.hpp"

#include <cstddef>
#include <vector>

namespace kct {

struct Assignment {
  // column_of_row[i] is the column matched to row i.
  std::vector<std::size_t> column_of_row;
  // Sum of cost(i, column_of_row[i]) accumulated in row order.
  double cost = 0.0;
};

// Minimum-cost assignment of every row to a distinct column (rows <= cols),
// solved with the shortest-augmenting-path Hungarian method. Among optimal
// assignments the lexicographically smallest column_of_row is returned.
Assignment solve_assignment(const Matrix& cost);

}  // namespace kct
