#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ocie {

/// Problem-file syntax error carrying the 1-based line/column of the
/// offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line, int column)
        : std::runtime_error(msg + " (line " + std::to_string(line) +
                             ", column " + std::to_string(column) + ")"),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// Schema-level defect in a problem document: unknown kernel role, shape
/// mismatch, missing key, disallowed identifier, bad solver settings.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Expression evaluation hit a domain error (log of a nonpositive value,
/// sqrt of a negative value, division by zero).
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The dense Nystrom matrix is numerically singular: the Fredholm
/// alternative fails at this discretization.
class SingularOperatorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A fixed-point iteration ran out of its iteration budget.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& msg, std::vector<double> history)
        : std::runtime_error(msg), history_(std::move(history)) {}

    const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

} // namespace ocie
