#include "cfgsim/ir.hpp"

#include "cfgsim/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace cfgsim {

namespace {

constexpr std::array<std::string_view, 14> kPlainOpcodes = {
    "add",  "sub",   "mul",     "div",  "rem",  "icmp",  "load",
    "store", "alloca", "getelem", "phi", "zext", "trunc", "call"};

enum class TokKind { Word, LBrace, RBrace, Colon, Equals, End };

struct Token {
    TokKind kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

bool is_punct(char c) {
    return c == '{' || c == '}' || c == ':' || c == '=' || c == '#';
}

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        const char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
            c == '\v') {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n')
                advance(1);
            continue;
        }
        const std::size_t tl = line, tc = col;
        switch (c) {
        case '{':
            out.push_back({TokKind::LBrace, "{", tl, tc});
            advance(1);
            continue;
        case '}':
            out.push_back({TokKind::RBrace, "}", tl, tc});
            advance(1);
            continue;
        case ':':
            out.push_back({TokKind::Colon, ":", tl, tc});
            advance(1);
            continue;
        case '=':
            out.push_back({TokKind::Equals, "=", tl, tc});
            advance(1);
            continue;
        default:
            break;
        }
        std::size_t j = i;
        while (j < src.size() && !is_punct(src[j]) &&
               !std::isspace(static_cast<unsigned char>(src[j])))
            ++j;
        out.push_back({TokKind::Word, std::string(src.substr(i, j - i)), tl, tc});
        advance(j - i);
    }
    out.push_back({TokKind::End, "<end of input>", line, col});
    return out;
}

struct RawBlock {
    BasicBlock block;
    const Token *label_tok;
    // Branch targets with the token that named them, for error reporting.
    std::vector<std::pair<std::string, const Token *>> targets;
};

class Parser {
  public:
    explicit Parser(std::string_view src) : toks_(lex(src)) {}

    Program run() {
        std::vector<Function> functions;
        std::set<std::string, std::less<>> names;
        while (peek().kind != TokKind::End) {
            const Token &kw = expect_word("'func'");
            if (kw.text != "func")
                fail(kw, "expected 'func', found '" + kw.text + "'");
            const Token &name = expect_word("function name");
            if (!names.insert(name.text).second)
                fail(name, "duplicate function '" + name.text + "'");
            expect(TokKind::LBrace, "'{'");
            functions.push_back({name.text, parse_body(name)});
        }
        if (functions.empty())
            fail(peek(), "program contains no functions");
        return Program(std::move(functions));
    }

  private:
    const Token &peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    const Token &take() {
        const Token &t = peek();
        if (t.kind != TokKind::End)
            ++pos_;
        return t;
    }
    [[noreturn]] static void fail(const Token &t, const std::string &msg) {
        throw ParseError(msg, t.line, t.column);
    }
    const Token &expect(TokKind kind, const char *what) {
        const Token &t = take();
        if (t.kind != kind)
            fail(t, std::string("expected ") + what + ", found '" + t.text + "'");
        return t;
    }
    const Token &expect_word(const char *what) {
        return expect(TokKind::Word, what);
    }

    bool at_label() const {
        return peek().kind == TokKind::Word && peek(1).kind == TokKind::Colon;
    }
    bool at_result() const {
        return peek().kind == TokKind::Word && peek().text.starts_with('%') &&
               peek(1).kind == TokKind::Equals;
    }
    // Operand tokens run to the end of the opcode's line and stop early at
    // anything that starts new syntax.
    bool at_operand(std::size_t line) const {
        const Token &t = peek();
        return t.kind == TokKind::Word && t.line == line && !at_label() &&
               !at_result() && !is_known_opcode(t.text);
    }

    Cfg parse_body(const Token &fn) {
        std::vector<RawBlock> blocks;
        while (peek().kind != TokKind::RBrace) {
            if (!at_label())
                fail(peek(), "expected block label, found '" + peek().text + "'");
            const Token &label = take();
            take(); // ':'
            blocks.push_back(parse_block(label));
        }
        const Token &close = take();
        if (blocks.empty())
            fail(close, "function '" + fn.text + "' has no blocks");

        std::unordered_map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            if (!index.emplace(blocks[i].block.label, i).second)
                fail(*blocks[i].label_tok, "duplicate block label '" +
                                               blocks[i].block.label + "'");
        }
        std::vector<Edge> edges;
        std::vector<BasicBlock> nodes;
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            for (const auto &[target, tok] : blocks[i].targets) {
                auto it = index.find(target);
                if (it == index.end())
                    fail(*tok, "branch to undefined label '" + target + "'");
                edges.emplace_back(i, it->second);
            }
            nodes.push_back(std::move(blocks[i].block));
        }
        return Cfg(std::move(nodes), std::move(edges), 0);
    }

    RawBlock parse_block(const Token &label) {
        RawBlock raw{{label.text, {}}, &label, {}};
        for (;;) {
            if (at_label() || peek().kind == TokKind::RBrace ||
                peek().kind == TokKind::End) {
                fail(peek(), "block '" + label.text +
                                 "' does not end with a terminator");
            }
            Instruction instr = parse_instruction(raw);
            const bool term = instr.is_terminator();
            raw.block.body.push_back(std::move(instr));
            if (term)
                break;
        }
        if (!at_label() && peek().kind != TokKind::RBrace)
            fail(peek(), "instruction after terminator in block '" +
                             label.text + "'");
        return raw;
    }

    Instruction parse_instruction(RawBlock &raw) {
        Instruction instr;
        if (at_result()) {
            const Token &r = take();
            if (r.text.size() == 1)
                fail(r, "empty result name");
            instr.result = r.text.substr(1);
            take(); // '='
        }
        const Token &op = expect_word("opcode");
        if (!is_known_opcode(op.text))
            fail(op, "unknown opcode '" + op.text + "'");
        instr.opcode = op.text;
        if (instr.is_terminator() && instr.result)
            fail(op, "terminator '" + op.text + "' cannot produce a value");

        auto target = [&] {
            const Token &t = expect_word("branch target label");
            raw.targets.emplace_back(t.text, &t);
            instr.operands.push_back(t.text);
            return &t;
        };
        if (instr.opcode == "br") {
            target();
        } else if (instr.opcode == "cbr") {
            instr.operands.push_back(expect_word("branch condition").text);
            target();
            const Token *second = target();
            if (instr.operands[1] == instr.operands[2])
                fail(*second, "cbr targets must be distinct");
        } else if (instr.opcode == "ret") {
            if (at_operand(op.line))
                instr.operands.push_back(take().text);
        } else {
            if (instr.opcode == "call") {
                const Token &callee = take();
                if (callee.kind != TokKind::Word || callee.line != op.line)
                    fail(callee, "call requires a callee name");
                instr.callee = callee.text;
            }
            while (at_operand(op.line))
                instr.operands.push_back(take().text);
        }
        return instr;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace

bool Instruction::is_terminator() const noexcept {
    return terminator_arity(opcode).has_value();
}

std::optional<std::size_t> terminator_arity(std::string_view opcode) noexcept {
    if (opcode == "ret")
        return 0;
    if (opcode == "br")
        return 1;
    if (opcode == "cbr")
        return 2;
    return std::nullopt;
}

bool is_known_opcode(std::string_view opcode) noexcept {
    return terminator_arity(opcode).has_value() ||
           std::find(kPlainOpcodes.begin(), kPlainOpcodes.end(), opcode) !=
               kPlainOpcodes.end();
}

Cfg::Cfg(std::vector<BasicBlock> nodes, std::vector<Edge> edges,
         std::size_t entry)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), entry_(entry),
      preds_(nodes_.size()), succs_(nodes_.size()) {
    if (!nodes_.empty() && entry_ >= nodes_.size())
        throw InputError("cfg entry index out of range");
    for (const auto &[from, to] : edges_) {
        if (from >= nodes_.size() || to >= nodes_.size())
            throw InputError("cfg edge references a missing node");
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (const auto &[from, to] : edges_) {
        succs_[from].push_back(to);
        preds_[to].push_back(from);
    }
}

Program::Program(std::vector<Function> functions)
    : functions_(std::move(functions)) {
    if (functions_.empty())
        throw InputError("program has no functions");
    std::set<std::string_view> seen;
    for (const auto &f : functions_) {
        if (!seen.insert(f.name).second)
            throw InputError("duplicate function '" + f.name + "'");
    }
    unified_ = build_unified(functions_);
}

const Function *Program::find(std::string_view name) const noexcept {
    for (const auto &f : functions_)
        if (f.name == name)
            return &f;
    return nullptr;
}

Program parse_program(std::string_view source) {
    return Parser(source).run();
}

Cfg build_unified(std::span<const Function> functions) {
    std::vector<BasicBlock> nodes;
    std::vector<Edge> edges;
    nodes.push_back({std::string(kRootOpcode),
                     {Instruction{std::string(kRootOpcode), {}, {}, {}}}});
    std::size_t offset = 1;
    for (const auto &f : functions) {
        edges.emplace_back(0, offset + f.cfg.entry());
        for (const auto &[from, to] : f.cfg.edges())
            edges.emplace_back(offset + from, offset + to);
        nodes.insert(nodes.end(), f.cfg.nodes().begin(), f.cfg.nodes().end());
        offset += f.cfg.size();
    }
    return Cfg(std::move(nodes), std::move(edges), 0);
}

Cfg function_union(std::span<const Function> functions) {
    std::vector<BasicBlock> nodes;
    std::vector<Edge> edges;
    for (const auto &f : functions) {
        const std::size_t offset = nodes.size();
        for (const auto &[from, to] : f.cfg.edges())
            edges.emplace_back(offset + from, offset + to);
        nodes.insert(nodes.end(), f.cfg.nodes().begin(), f.cfg.nodes().end());
    }
    return Cfg(std::move(nodes), std::move(edges), 0);
}

std::vector<std::string> unified_labels(const Program &program) {
    std::vector<std::string> labels{std::string(kRootOpcode)};
    for (const auto &f : program.functions())
        for (const auto &b : f.cfg.nodes())
            labels.push_back(f.name + ":" + b.label);
    return labels;
}

std::string to_text(const Instruction &instr) {
    std::string out;
    if (instr.result)
        out += "%" + *instr.result + " = ";
    out += instr.opcode;
    if (instr.callee)
        out += " " + *instr.callee;
    for (const auto &op : instr.operands)
        out += " " + op;
    return out;
}

std::string to_text(const Program &program) {
    std::ostringstream os;
    bool first = true;
    for (const auto &f : program.functions()) {
        if (!first)
            os << '\n';
        first = false;
        os << "func " << f.name << " {\n";
        for (const auto &b : f.cfg.nodes()) {
            os << b.label << ":\n";
            for (const auto &i : b.body)
                os << "  " << to_text(i) << '\n';
        }
        os << "}\n";
    }
    return os.str();
}

} // namespace cfgsim
