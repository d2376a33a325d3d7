#include "cfgsim/assignment.hpp"

#include "cfgsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace cfgsim {

namespace {

struct HungarianResult {
    std::vector<std::size_t> row_to_col;
    std::vector<double> u; // row potentials
    std::vector<double> v; // column potentials
};

// Minimum-cost perfect assignment on an n x n cost matrix, O(n^3) shortest
// augmenting paths with potentials. Indices are 1-based internally; slot 0 is
// the virtual source row/column.
HungarianResult hungarian(const Matrix &cost) {
    const std::size_t n = cost.rows();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> owner(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        owner[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = owner[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j])
                    continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (owner[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    HungarianResult res;
    res.row_to_col.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j)
        res.row_to_col[owner[j] - 1] = j - 1;
    res.u.assign(u.begin() + 1, u.end());
    res.v.assign(v.begin() + 1, v.end());
    return res;
}

// Square cost matrix: cost = max_weight - weight, padding cells weigh 0.
Matrix complemented_square(const Matrix &w, double max_weight) {
    const std::size_t n = std::max(w.rows(), w.cols());
    Matrix cost(n, n, max_weight);
    for (std::size_t r = 0; r < w.rows(); ++r)
        for (std::size_t c = 0; c < w.cols(); ++c)
            cost(r, c) = max_weight - w(r, c);
    return cost;
}

double max_entry(const Matrix &w) {
    double m = 0.0;
    for (double x : w.data())
        m = std::max(m, x);
    return m;
}

double weight_of(const Matrix &w, const std::vector<std::size_t> &row_to_col) {
    double total = 0.0;
    for (std::size_t r = 0; r < w.rows(); ++r)
        if (row_to_col[r] < w.cols())
            total += w(r, row_to_col[r]);
    return total;
}

// Rewrites an optimal assignment into the lexicographically smallest optimal
// one. With optimal duals fixed, the optimal assignments are exactly the
// perfect matchings of the tight-edge graph, so rows are settled greedily in
// order: each row takes the smallest tight column that still leaves a perfect
// tight matching for the unsettled rows (checked by an alternating path).
void lexicographic_tiebreak(const Matrix &cost, const HungarianResult &h,
                            std::size_t real_rows, double tol,
                            std::vector<std::size_t> &row_to_col) {
    const std::size_t n = cost.rows();
    auto tight = [&](std::size_t r, std::size_t c) {
        return cost(r, c) - h.u[r] - h.v[c] <= tol;
    };
    std::vector<std::size_t> col_owner(n);
    for (std::size_t r = 0; r < n; ++r)
        col_owner[row_to_col[r]] = r;
    std::vector<char> row_locked(n, 0), col_locked(n, 0);
    std::vector<std::size_t> parent_col(n);
    std::vector<char> seen(n);

    for (std::size_t a = 0; a < real_rows; ++a) {
        const std::size_t current = row_to_col[a];
        for (std::size_t b = 0; b < current; ++b) {
            if (col_locked[b] || !tight(a, b))
                continue;
            // Row `start` gives up b and must reach column `current` along an
            // alternating path of tight edges through unsettled rows.
            const std::size_t start = col_owner[b];
            std::fill(seen.begin(), seen.end(), 0);
            std::deque<std::size_t> queue{start};
            std::size_t found = n;
            while (!queue.empty() && found == n) {
                const std::size_t r = queue.front();
                queue.pop_front();
                for (std::size_t d = 0; d < n; ++d) {
                    if (d == b || col_locked[d] || seen[d] || !tight(r, d))
                        continue;
                    seen[d] = 1;
                    parent_col[d] = r;
                    if (d == current) {
                        found = d;
                        break;
                    }
                    queue.push_back(col_owner[d]);
                }
            }
            if (found == n)
                continue;
            // Shift along the path back to `start`.
            std::size_t d = found;
            for (;;) {
                const std::size_t r = parent_col[d];
                const std::size_t prev = row_to_col[r];
                row_to_col[r] = d;
                col_owner[d] = r;
                if (r == start)
                    break;
                d = prev;
            }
            row_to_col[a] = b;
            col_owner[b] = a;
            break;
        }
        row_locked[a] = 1;
        col_locked[row_to_col[a]] = 1;
    }
}

} // namespace

Matching solve_max_assignment(const Matrix &weights) {
    for (double x : weights.data()) {
        if (!std::isfinite(x) || x < 0.0)
            throw InputError("assignment weights must be finite and non-negative");
    }
    Matching result;
    if (weights.empty())
        return result;

    const double top = max_entry(weights);
    const Matrix cost = complemented_square(weights, top);
    const HungarianResult h = hungarian(cost);

    std::vector<std::size_t> assignment = h.row_to_col;
    const double tol = 1e-10 * (1.0 + top);
    lexicographic_tiebreak(cost, h, weights.rows(), tol, assignment);

    // Near-ties inside the tolerance must not cost optimality.
    const double optimal = weight_of(weights, h.row_to_col);
    if (weight_of(weights, assignment) < optimal - 1e-12 * (1.0 + optimal))
        assignment = h.row_to_col;

    for (std::size_t r = 0; r < weights.rows(); ++r) {
        if (assignment[r] < weights.cols()) {
            result.pairs.emplace_back(r, assignment[r]);
            result.weight += weights(r, assignment[r]);
        }
    }
    return result;
}

double max_assignment_weight(const Matrix &w) {
    const std::size_t rows = w.rows(), cols = w.cols();
    if (rows == 0 || cols == 0)
        return 0.0;
    if (rows == 1 || cols == 1)
        return max_entry(w);
    if (rows == 2 && cols == 2)
        return std::max(w(0, 0) + w(1, 1), w(0, 1) + w(1, 0));
    if (rows == 2 || cols == 2) {
        const bool by_rows = rows == 2;
        const std::size_t k = by_rows ? cols : rows;
        auto at = [&](std::size_t side, std::size_t i) {
            return by_rows ? w(side, i) : w(i, side);
        };
        double best = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                if (i != j)
                    best = std::max(best, at(0, i) + at(1, j));
        return best;
    }
    const HungarianResult h = hungarian(complemented_square(w, max_entry(w)));
    return weight_of(w, h.row_to_col);
}

} // namespace cfgsim
