// Node and graph similarity of control flow graphs by iterated neighbour
// matching.
//
// Two nodes are similar when their in-neighbours and their out-neighbours can
// be matched to similar nodes. Each sweep recomputes every x(i,j) from the
// previous matrix: the optimal matching of the in-neighbour sets weighted by
// x, divided by the larger in-degree, averaged with the same quantity for
// out-neighbours (an empty pair of neighbour sets scores 1). Content mode
// multiplies in the block-content similarity y(i,j) and takes the square root.
#pragma once

#include "cfgsim/ir.hpp"
#include "cfgsim/matrix.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cfgsim {

enum class SimilarityMode { Topological, Content };

std::string_view to_string(SimilarityMode mode) noexcept;
/// Accepts "topological"/"topo" and "content". Throws InputError otherwise.
SimilarityMode parse_mode(std::string_view text);

struct EngineConfig {
    double epsilon = 1e-4;
    int max_iters = 100;
    SimilarityMode mode = SimilarityMode::Content;

    /// Throws InputError unless epsilon is in (0, 1) and max_iters >= 1.
    void validate() const;
};

struct SimilarityMatrix {
    /// x(i, j): similarity of node i of the first graph and node j of the second.
    Matrix x;
    int iterations = 0;
    /// The last sweep changed no entry by epsilon or more.
    bool converged = false;
    double epsilon = 0.0;
};

/// Content similarity of every pair of blocks, y(i, j).
Matrix content_matrix(const Cfg &a, const Cfg &b);

SimilarityMatrix iterate_similarity(const Cfg &a, const Cfg &b,
                                    const EngineConfig &cfg);

struct GraphSimilarity {
    /// Optimal node-matching weight divided by the number of matched nodes.
    /// 1 when both graphs are empty, 0 when exactly one is.
    double value = 0.0;
    int iterations = 0;
    bool converged = true;
};

GraphSimilarity graph_similarity(const Cfg &a, const Cfg &b,
                                 const EngineConfig &cfg);

struct MatchedPair {
    std::size_t a;
    std::size_t b;
    double similarity;
};

struct NodeMatchReport {
    std::vector<MatchedPair> pairs;
    std::vector<std::size_t> unmatched_a;
    std::vector<std::size_t> unmatched_b;
    GraphSimilarity graph;
};

/// Optimal one-to-one pairing of the nodes of `a` and `b`; the nodes of the
/// larger graph that found no partner are listed separately.
NodeMatchReport match_nodes(const Cfg &a, const Cfg &b, const EngineConfig &cfg);

} // namespace cfgsim
