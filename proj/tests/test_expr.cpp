#include <doctest.h>

#include <cmath>
#include <string>

#include "ocie/errors.hpp"
#include "ocie/expr.hpp"

using namespace ocie;

namespace {

double ev(const std::string& text, EvalEnv env = {}) {
    return eval(*parse_expression(text), env);
}

} // namespace

TEST_CASE("operator precedence and associativity") {
    CHECK(ev("2 + 3 * 4^2") == 50.0);
    CHECK(ev("-2^2") == -4.0);    // unary minus binds looser than ^
    CHECK(ev("2^-1") == 0.5);     // exponent may carry its own sign
    CHECK(ev("2^3^2") == 512.0);  // right-associative
    CHECK(ev("6/3/2") == 1.0);    // left-associative
    CHECK(ev("1 - 2 - 3") == -4.0);
    CHECK(ev("(1 - 2) * 3") == -3.0);
}

TEST_CASE("functions") {
    CHECK(ev("sin(0)") == 0.0);
    CHECK(ev("cos(0)") == 1.0);
    CHECK(ev("exp(1)") == doctest::Approx(std::exp(1.0)));
    CHECK(ev("log(exp(2))") == doctest::Approx(2.0));
    CHECK(ev("sqrt(9)") == 3.0);
    CHECK(ev("abs(-3.5)") == 3.5);
    CHECK(ev("min(2, 5)") == 2.0);
    CHECK(ev("max(2, 5)") == 5.0);
    CHECK(ev("1.5e2") == 150.0);
}

TEST_CASE("variables") {
    EvalEnv env;
    env.set("x", 2.0);
    env.set("y", 3.0);
    CHECK(ev("x*y + x", env) == 8.0);
    CHECK_THROWS_AS(ev("z", env), EvalError);
}

TEST_CASE("round trip through to_string") {
    for (const char* text : {"2 + 3*x^2", "-sin(x + y)", "min(x, exp(-y))",
                             "x/(1 + y^-2)", "abs(x) - max(x, y)"}) {
        const ExprPtr e = parse_expression(text);
        const ExprPtr again = parse_expression(to_string(*e));
        CHECK(structurally_equal(*e, *again));
    }
}

TEST_CASE("parse errors carry the column") {
    try {
        parse_expression("x + * y");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.column() == 5);
    }
    CHECK_THROWS_AS(parse_expression("sin(x"), ParseError);
    CHECK_THROWS_AS(parse_expression("foo(x)"), ParseError);
    CHECK_THROWS_AS(parse_expression("1 2"), ParseError);
    CHECK_THROWS_AS(parse_expression("min(1)"), ParseError);
    CHECK_THROWS_AS(parse_expression(""), ParseError);
    CHECK_THROWS_AS(parse_expression("x @ y"), ParseError);
}

TEST_CASE("evaluation domain errors") {
    CHECK_THROWS_AS(ev("log(0)"), EvalError);
    CHECK_THROWS_AS(ev("log(-1)"), EvalError);
    CHECK_THROWS_AS(ev("sqrt(-1)"), EvalError);
    CHECK_THROWS_AS(ev("1/0"), EvalError);
    CHECK_THROWS_AS(ev("(-1)^0.5"), EvalError);
}

TEST_CASE("validate_variables") {
    const ExprPtr e = parse_expression("x + sin(p1)");
    const std::vector<std::string> ok = {"x", "p1"};
    const std::vector<std::string> bad = {"x"};
    CHECK_NOTHROW(validate_variables(*e, ok));
    CHECK_THROWS_AS(validate_variables(*e, bad), ValidationError);
}
