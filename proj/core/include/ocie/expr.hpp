#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ocie {

/// Expression AST over real literals, named variables, the binary operators
/// + - * / ^, unary minus, and the functions sin cos exp log sqrt abs min max.
/// Precedence: ^ binds tightest (right-associative), then unary minus, then
/// * /, then + -.
struct Expr {
    enum class Kind { Number, Variable, Unary, Binary, Call };

    Kind kind;
    double number = 0.0;     // Kind::Number
    std::string name;        // Kind::Variable / Kind::Call function name
    char op = 0;             // Kind::Unary ('-') / Kind::Binary
    std::vector<std::shared_ptr<const Expr>> args;
};

using ExprPtr = std::shared_ptr<const Expr>;

/// Parses a single expression. Throws ParseError (line fixed at 1, column
/// pointing at the offending token) on malformed input.
ExprPtr parse_expression(std::string_view text);

/// Unparses to a fully parenthesized form; reparsing yields a structurally
/// identical tree.
std::string to_string(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

/// Variable bindings for evaluation, looked up by name.
struct EvalEnv {
    std::vector<std::pair<std::string, double>> vars;

    void set(const std::string& name, double value);
    double get(std::string_view name) const; // throws EvalError on unknown name
};

/// Evaluates the tree; throws EvalError on function domain errors, naming
/// the failing function.
double eval(const Expr& e, const EvalEnv& env);

/// Throws ValidationError if the tree references a variable outside the
/// allowed set or an unknown function.
void validate_variables(const Expr& e, std::span<const std::string> allowed);

} // namespace ocie
