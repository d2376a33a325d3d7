#include "cfgsim/neighbor_matching.hpp"

#include "cfgsim/assignment.hpp"
#include "cfgsim/content_sim.hpp"
#include "cfgsim/error.hpp"

#include <algorithm>
#include <cmath>

namespace cfgsim {

std::string_view to_string(SimilarityMode mode) noexcept {
    return mode == SimilarityMode::Topological ? "topological" : "content";
}

SimilarityMode parse_mode(std::string_view text) {
    if (text == "topological" || text == "topo")
        return SimilarityMode::Topological;
    if (text == "content")
        return SimilarityMode::Content;
    throw InputError("unknown similarity mode '" + std::string(text) + "'");
}

void EngineConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw InputError("epsilon must lie in (0, 1)");
    if (max_iters < 1)
        throw InputError("max_iters must be at least 1");
}

Matrix content_matrix(const Cfg &a, const Cfg &b) {
    Matrix y(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            y(i, j) = content_similarity(a.node(i).body, b.node(j).body);
    return y;
}

namespace {

// Optimal matching weight of two neighbour lists under x, over the larger
// list size. Two empty lists give 1.
double neighbor_score(std::span<const std::size_t> ni,
                      std::span<const std::size_t> nj, const Matrix &x,
                      Matrix &scratch) {
    const std::size_t larger = std::max(ni.size(), nj.size());
    if (larger == 0)
        return 1.0;
    if (ni.empty() || nj.empty())
        return 0.0;
    if (scratch.rows() != ni.size() || scratch.cols() != nj.size())
        scratch = Matrix(ni.size(), nj.size());
    for (std::size_t p = 0; p < ni.size(); ++p)
        for (std::size_t q = 0; q < nj.size(); ++q)
            scratch(p, q) = x(ni[p], nj[q]);
    return max_assignment_weight(scratch) / static_cast<double>(larger);
}

} // namespace

SimilarityMatrix iterate_similarity(const Cfg &a, const Cfg &b,
                                    const EngineConfig &cfg) {
    cfg.validate();
    SimilarityMatrix out;
    out.epsilon = cfg.epsilon;
    if (a.empty() || b.empty()) {
        out.x = Matrix(a.size(), b.size());
        out.converged = true;
        return out;
    }

    const bool content = cfg.mode == SimilarityMode::Content;
    const Matrix y = content ? content_matrix(a, b) : Matrix();
    Matrix prev = content ? y : Matrix(a.size(), b.size(), 1.0);
    Matrix next(a.size(), b.size());
    Matrix scratch;

    for (int k = 1; k <= cfg.max_iters; ++k) {
        double change = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (std::size_t j = 0; j < b.size(); ++j) {
                const double s_in = neighbor_score(
                    a.in_neighbors(i), b.in_neighbors(j), prev, scratch);
                const double s_out = neighbor_score(
                    a.out_neighbors(i), b.out_neighbors(j), prev, scratch);
                double v = (s_in + s_out) / 2.0;
                if (content)
                    v = std::sqrt(y(i, j) * v);
                // Rounding in the matching sum may overshoot 1 by an ulp.
                v = std::clamp(v, 0.0, 1.0);
                change = std::max(change, std::abs(v - prev(i, j)));
                next(i, j) = v;
            }
        }
        std::swap(prev, next);
        out.iterations = k;
        if (change < cfg.epsilon) {
            out.converged = true;
            break;
        }
    }
    out.x = std::move(prev);
    return out;
}

namespace {

GraphSimilarity from_matrix(const SimilarityMatrix &sim, double matched_weight) {
    GraphSimilarity g;
    g.iterations = sim.iterations;
    g.converged = sim.converged;
    const std::size_t rows = sim.x.rows(), cols = sim.x.cols();
    if (rows == 0 && cols == 0)
        g.value = 1.0;
    else if (rows == 0 || cols == 0)
        g.value = 0.0;
    else
        g.value = matched_weight / static_cast<double>(std::min(rows, cols));
    return g;
}

} // namespace

GraphSimilarity graph_similarity(const Cfg &a, const Cfg &b,
                                 const EngineConfig &cfg) {
    const SimilarityMatrix sim = iterate_similarity(a, b, cfg);
    return from_matrix(sim, max_assignment_weight(sim.x));
}

NodeMatchReport match_nodes(const Cfg &a, const Cfg &b, const EngineConfig &cfg) {
    const SimilarityMatrix sim = iterate_similarity(a, b, cfg);
    const Matching m = solve_max_assignment(sim.x);

    NodeMatchReport report;
    std::vector<char> used_a(a.size(), 0), used_b(b.size(), 0);
    for (const auto &[i, j] : m.pairs) {
        report.pairs.push_back({i, j, sim.x(i, j)});
        used_a[i] = 1;
        used_b[j] = 1;
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!used_a[i])
            report.unmatched_a.push_back(i);
    for (std::size_t j = 0; j < b.size(); ++j)
        if (!used_b[j])
            report.unmatched_b.push_back(j);
    report.graph = from_matrix(sim, m.weight);
    return report;
}

} // namespace cfgsim
