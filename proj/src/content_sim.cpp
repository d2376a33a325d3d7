#include "cfgsim/content_sim.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace cfgsim {

int subst_cost(const Instruction &a, const Instruction &b) noexcept {
    if (a.opcode == "call" && b.opcode == "call")
        return a.callee == b.callee ? 0 : 1;
    return a.opcode == b.opcode ? 0 : 1;
}

std::size_t edit_distance(InstrSeq s1, InstrSeq s2) {
    // Two-row Wagner-Fischer.
    std::vector<std::size_t> prev(s2.size() + 1), cur(s2.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= s1.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= s2.size(); ++j) {
            const std::size_t sub =
                prev[j - 1] + static_cast<std::size_t>(subst_cost(s1[i - 1], s2[j - 1]));
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[s2.size()];
}

double content_similarity(InstrSeq s1, InstrSeq s2) {
    const std::size_t longest = std::max(s1.size(), s2.size());
    if (longest == 0)
        return 1.0;
    return 1.0 - static_cast<double>(edit_distance(s1, s2)) /
                     static_cast<double>(longest);
}

} // namespace cfgsim
