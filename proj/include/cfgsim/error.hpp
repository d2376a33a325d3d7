#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cfgsim {

/// Base for all library errors. Callers that only need a message catch this.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed mini-IR text. Carries the 1-based position of the offending token.
class ParseError : public Error {
  public:
    ParseError(const std::string &msg, std::size_t line, std::size_t column,
               const std::string &source = {})
        : Error((source.empty() ? "" : source + ": ") + "line " +
                std::to_string(line) + ", column " + std::to_string(column) +
                ": " + msg),
          detail_(msg), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    /// The message without the position prefix.
    const std::string &detail() const noexcept { return detail_; }

  private:
    std::string detail_;
    std::size_t line_;
    std::size_t column_;
};

/// Invalid argument values (negative weights, out-of-range scores, bad files).
class InputError : public Error {
  public:
    using Error::Error;
};

/// Numerically degenerate problems, e.g. a rank-deficient design matrix.
class NumericError : public Error {
  public:
    using Error::Error;
};

} // namespace cfgsim
