// Mini-IR: a small LLVM-like textual format organised as functions of basic
// blocks, and the control flow graphs built from it.
//
//   func NAME { LABEL: instr+ ... }
//
// Non-terminators are `[%name =] OPCODE token*`; terminators are `br L`,
// `cbr cond L1 L2` and `ret [value]`. `#` starts a line comment.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cfgsim {

/// Opcode of the synthetic root node of a unified program graph.
inline constexpr std::string_view kRootOpcode = "@root";

struct Instruction {
    std::string opcode;
    /// Present iff opcode == "call".
    std::optional<std::string> callee;
    /// Raw operand tokens. Kept for printing only; they never affect similarity.
    std::vector<std::string> operands;
    /// Optional `%name` the instruction assigns to (without the `%`).
    std::optional<std::string> result;

    bool is_terminator() const noexcept;

    friend bool operator==(const Instruction &, const Instruction &) = default;
};

/// Number of successors a terminator opcode implies (ret 0, br 1, cbr 2).
/// Returns nullopt for non-terminators.
std::optional<std::size_t> terminator_arity(std::string_view opcode) noexcept;

/// True for the opcodes the grammar accepts (including terminators).
bool is_known_opcode(std::string_view opcode) noexcept;

struct BasicBlock {
    std::string label;
    std::vector<Instruction> body;

    friend bool operator==(const BasicBlock &, const BasicBlock &) = default;
};

using Edge = std::pair<std::size_t, std::size_t>;

/// Directed graph of basic blocks. Edges are kept sorted and unique; the
/// neighbour lists are derived from them.
class Cfg {
  public:
    Cfg() = default;
    /// Throws InputError if an edge references a missing node or the entry is
    /// out of range for a non-empty graph. Duplicate edges are dropped.
    Cfg(std::vector<BasicBlock> nodes, std::vector<Edge> edges,
        std::size_t entry = 0);

    std::size_t size() const noexcept { return nodes_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }
    std::size_t entry() const noexcept { return entry_; }

    const std::vector<BasicBlock> &nodes() const noexcept { return nodes_; }
    const BasicBlock &node(std::size_t i) const { return nodes_.at(i); }
    const std::vector<Edge> &edges() const noexcept { return edges_; }

    std::span<const std::size_t> in_neighbors(std::size_t i) const {
        return preds_.at(i);
    }
    std::span<const std::size_t> out_neighbors(std::size_t i) const {
        return succs_.at(i);
    }
    std::size_t in_degree(std::size_t i) const { return preds_.at(i).size(); }
    std::size_t out_degree(std::size_t i) const { return succs_.at(i).size(); }

    friend bool operator==(const Cfg &a, const Cfg &b) {
        return a.nodes_ == b.nodes_ && a.edges_ == b.edges_ &&
               a.entry_ == b.entry_;
    }

  private:
    std::vector<BasicBlock> nodes_;
    std::vector<Edge> edges_;
    std::size_t entry_ = 0;
    std::vector<std::vector<std::size_t>> preds_;
    std::vector<std::vector<std::size_t>> succs_;
};

struct Function {
    std::string name;
    Cfg cfg;

    friend bool operator==(const Function &, const Function &) = default;
};

/// A parsed program: its functions in source order plus the whole-program
/// graph (see build_unified).
class Program {
  public:
    Program() = default;
    /// Throws InputError on an empty function list or duplicate names.
    explicit Program(std::vector<Function> functions);

    const std::vector<Function> &functions() const noexcept {
        return functions_;
    }
    const Function *find(std::string_view name) const noexcept;
    const Cfg &unified() const noexcept { return unified_; }

    friend bool operator==(const Program &a, const Program &b) {
        return a.functions_ == b.functions_;
    }

  private:
    std::vector<Function> functions_;
    Cfg unified_;
};

/// Parses a whole mini-IR file. Throws ParseError for syntax problems,
/// duplicate labels or function names, undefined branch targets and empty
/// functions.
Program parse_program(std::string_view source);

/// Disjoint union of the function graphs under a synthetic root (node 0,
/// content `@root`) with one edge to each function entry, in function order.
/// Function nodes follow the root in function order, then block order.
Cfg build_unified(std::span<const Function> functions);

/// Disjoint union of the function graphs without the synthetic root; for a
/// single-function program this is that function's graph.
Cfg function_union(std::span<const Function> functions);

/// Node labels of the unified graph: "@root" then "function:label".
std::vector<std::string> unified_labels(const Program &program);

/// Canonical text: one instruction per line, blocks in order. Reparsing the
/// output gives back an equal Program.
std::string to_text(const Program &program);
std::string to_text(const Instruction &instr);

} // namespace cfgsim
