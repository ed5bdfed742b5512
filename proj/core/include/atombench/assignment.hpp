#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace atombench {

struct Assignment {
  // col_for_row[i] is the column assigned to row i.
  std::vector<std::size_t> col_for_row;
  double cost = 0;
};

// Minimum-cost perfect matching on an n x n row-major cost matrix
// (Hungarian method with potentials, O(n^3)). Costs must be finite.
Assignment solve_assignment(std::span<const double> cost, std::size_t n);

}  // namespace atombench
