// Apriori similarity of basic-block contents: edit distance over instruction
// sequences where only the opcode (and, for calls, the callee) matters.
#pragma once

#include "cfgsim/ir.hpp"

#include <cstddef>
#include <span>

namespace cfgsim {

using InstrSeq = std::span<const Instruction>;

/// 0 when two calls name the same callee, or when two instructions (at least
/// one not a call) share an opcode; 1 otherwise. Operands are ignored.
int subst_cost(const Instruction &a, const Instruction &b) noexcept;

/// Minimal number of unit-cost insertions, deletions and substitutions
/// (costed by subst_cost) turning s1 into s2.
std::size_t edit_distance(InstrSeq s1, InstrSeq s2);

/// 1 - d / max(|s1|, |s2|); two empty sequences are fully similar.
double content_similarity(InstrSeq s1, InstrSeq s2);

} // namespace cfgsim
