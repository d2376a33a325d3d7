// Maximum-weight assignment between two index sets (rows and columns of a
// non-negative weight matrix).
#pragma once

#include "cfgsim/matrix.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace cfgsim {

struct Matching {
    /// (row, column) pairs sorted by row. Size is min(rows, cols).
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    /// Sum of the weights of `pairs`.
    double weight = 0.0;
};

/// Hungarian algorithm on the complemented costs of a zero-padded square
/// matrix. Among optimal matchings the lexicographically smallest pair list is
/// returned. Throws InputError for negative or non-finite weights.
Matching solve_max_assignment(const Matrix &weights);

/// Weight of an optimal matching only. Skips validation and tie-breaking; used
/// on the many small neighbour matrices of the similarity iteration.
double max_assignment_weight(const Matrix &weights);

} // namespace cfgsim
