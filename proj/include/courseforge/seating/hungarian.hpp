#pragma once

#include <cstdint>
#include <vector>

namespace courseforge::seating {

// Min-cost assignment of every row to a distinct column; rows <= cols.
// cost is row-major rows x cols. Returns the column chosen for each row.
// Deterministic for a given matrix: ties go to the lowest-index column
// reached first.
std::vector<int> min_cost_assignment(const std::vector<std::int64_t>& cost, int rows, int cols);

}  // namespace courseforge::seating
