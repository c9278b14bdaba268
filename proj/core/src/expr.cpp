#include "ocie/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "ocie/errors.hpp"

namespace ocie {

namespace {

struct Token {
    enum class Kind { Number, Ident, Op, LParen, RParen, Comma, End };
    Kind kind = Kind::End;
    double number = 0.0;
    std::string text;
    char op = 0;
    int column = 0; // 1-based
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        tok_ = Token{};
        tok_.column = static_cast<int>(pos_) + 1;
        if (pos_ >= text_.size()) {
            tok_.kind = Token::Kind::End;
            return;
        }
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t end = pos_;
            while (end < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.'))
                ++end;
            // exponent part
            if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
                size_t e = end + 1;
                if (e < text_.size() && (text_[e] == '+' || text_[e] == '-')) ++e;
                size_t digits = e;
                while (digits < text_.size() &&
                       std::isdigit(static_cast<unsigned char>(text_[digits])))
                    ++digits;
                if (digits > e) end = digits;
            }
            try {
                tok_.number = std::stod(std::string(text_.substr(pos_, end - pos_)));
            } catch (const std::exception&) {
                throw ParseError("malformed number", 1, tok_.column);
            }
            tok_.kind = Token::Kind::Number;
            pos_ = end;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t end = pos_;
            while (end < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
                ++end;
            tok_.kind = Token::Kind::Ident;
            tok_.text = std::string(text_.substr(pos_, end - pos_));
            pos_ = end;
            return;
        }
        switch (c) {
        case '+': case '-': case '*': case '/': case '^':
            tok_.kind = Token::Kind::Op;
            tok_.op = c;
            break;
        case '(': tok_.kind = Token::Kind::LParen; break;
        case ')': tok_.kind = Token::Kind::RParen; break;
        case ',': tok_.kind = Token::Kind::Comma; break;
        default:
            throw ParseError(std::string("unexpected character '") + c + "'", 1, tok_.column);
        }
        ++pos_;
    }

    std::string_view text_;
    size_t pos_ = 0;
    Token tok_;
};

ExprPtr number(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Number;
    e->number = v;
    return e;
}

ExprPtr binary(char op, ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Binary;
    e->op = op;
    e->args = {std::move(lhs), std::move(rhs)};
    return e;
}

bool is_function(std::string_view name) {
    return name == "sin" || name == "cos" || name == "exp" || name == "log" ||
           name == "sqrt" || name == "abs" || name == "min" || name == "max";
}

int function_arity(std::string_view name) {
    return (name == "min" || name == "max") ? 2 : 1;
}

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) {}

    ExprPtr parse() {
        ExprPtr e = sum();
        if (lex_.peek().kind != Token::Kind::End)
            fail("trailing input after expression");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, 1, lex_.peek().column);
    }

    ExprPtr sum() {
        ExprPtr lhs = product();
        while (lex_.peek().kind == Token::Kind::Op &&
               (lex_.peek().op == '+' || lex_.peek().op == '-')) {
            const char op = lex_.take().op;
            lhs = binary(op, std::move(lhs), product());
        }
        return lhs;
    }

    ExprPtr product() {
        ExprPtr lhs = unary();
        while (lex_.peek().kind == Token::Kind::Op &&
               (lex_.peek().op == '*' || lex_.peek().op == '/')) {
            const char op = lex_.take().op;
            lhs = binary(op, std::move(lhs), unary());
        }
        return lhs;
    }

    ExprPtr unary() {
        if (lex_.peek().kind == Token::Kind::Op && lex_.peek().op == '-') {
            lex_.take();
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::Unary;
            e->op = '-';
            e->args = {unary()};
            return e;
        }
        if (lex_.peek().kind == Token::Kind::Op && lex_.peek().op == '+') {
            lex_.take();
            return unary();
        }
        return power();
    }

    ExprPtr power() {
        ExprPtr base = atom();
        if (lex_.peek().kind == Token::Kind::Op && lex_.peek().op == '^') {
            lex_.take();
            // right-associative; exponent may carry its own unary minus
            return binary('^', std::move(base), unary());
        }
        return base;
    }

    ExprPtr atom() {
        const Token& t = lex_.peek();
        switch (t.kind) {
        case Token::Kind::Number:
            return number(lex_.take().number);
        case Token::Kind::Ident: {
            Token id = lex_.take();
            if (lex_.peek().kind == Token::Kind::LParen) {
                if (!is_function(id.text))
                    throw ParseError("unknown function '" + id.text + "'", 1, id.column);
                lex_.take();
                auto e = std::make_shared<Expr>();
                e->kind = Expr::Kind::Call;
                e->name = id.text;
                e->args.push_back(sum());
                const int arity = function_arity(id.text);
                for (int k = 1; k < arity; ++k) {
                    if (lex_.peek().kind != Token::Kind::Comma)
                        fail("expected ',' in call to " + id.text);
                    lex_.take();
                    e->args.push_back(sum());
                }
                if (lex_.peek().kind != Token::Kind::RParen)
                    fail("expected ')' closing call to " + id.text);
                lex_.take();
                return e;
            }
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::Variable;
            e->name = id.text;
            return e;
        }
        case Token::Kind::LParen: {
            lex_.take();
            ExprPtr inner = sum();
            if (lex_.peek().kind != Token::Kind::RParen)
                fail("expected ')'");
            lex_.take();
            return inner;
        }
        default:
            fail("expected a value");
        }
    }

    Lexer lex_;
};

} // namespace

ExprPtr parse_expression(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const Expr& e) {
    std::ostringstream os;
    os.precision(17);
    switch (e.kind) {
    case Expr::Kind::Number:
        os << e.number;
        break;
    case Expr::Kind::Variable:
        os << e.name;
        break;
    case Expr::Kind::Unary:
        os << "(-" << to_string(*e.args[0]) << ")";
        break;
    case Expr::Kind::Binary:
        os << "(" << to_string(*e.args[0]) << e.op << to_string(*e.args[1]) << ")";
        break;
    case Expr::Kind::Call:
        os << e.name << "(" << to_string(*e.args[0]);
        for (size_t i = 1; i < e.args.size(); ++i) os << "," << to_string(*e.args[i]);
        os << ")";
        break;
    }
    return os.str();
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
    switch (a.kind) {
    case Expr::Kind::Number:
        if (a.number != b.number) return false;
        break;
    case Expr::Kind::Variable:
    case Expr::Kind::Call:
        if (a.name != b.name) return false;
        break;
    case Expr::Kind::Unary:
    case Expr::Kind::Binary:
        if (a.op != b.op) return false;
        break;
    }
    for (size_t i = 0; i < a.args.size(); ++i)
        if (!structurally_equal(*a.args[i], *b.args[i])) return false;
    return true;
}

void EvalEnv::set(const std::string& name, double value) {
    for (auto& [n, v] : vars)
        if (n == name) {
            v = value;
            return;
        }
    vars.emplace_back(name, value);
}

double EvalEnv::get(std::string_view name) const {
    for (const auto& [n, v] : vars)
        if (n == name) return v;
    throw EvalError("unbound variable '" + std::string(name) + "'");
}

double eval(const Expr& e, const EvalEnv& env) {
    switch (e.kind) {
    case Expr::Kind::Number:
        return e.number;
    case Expr::Kind::Variable:
        return env.get(e.name);
    case Expr::Kind::Unary:
        return -eval(*e.args[0], env);
    case Expr::Kind::Binary: {
        const double a = eval(*e.args[0], env);
        const double b = eval(*e.args[1], env);
        switch (e.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/':
            if (b == 0.0) throw EvalError("division by zero");
            return a / b;
        case '^': {
            const double r = std::pow(a, b);
            if (!std::isfinite(r)) throw EvalError("pow out of domain");
            return r;
        }
        }
        throw EvalError("bad operator");
    }
    case Expr::Kind::Call: {
        const double a = eval(*e.args[0], env);
        if (e.name == "sin") return std::sin(a);
        if (e.name == "cos") return std::cos(a);
        if (e.name == "exp") return std::exp(a);
        if (e.name == "abs") return std::abs(a);
        if (e.name == "log") {
            if (a <= 0.0) throw EvalError("log of nonpositive value");
            return std::log(a);
        }
        if (e.name == "sqrt") {
            if (a < 0.0) throw EvalError("sqrt of negative value");
            return std::sqrt(a);
        }
        const double b = eval(*e.args[1], env);
        if (e.name == "min") return std::min(a, b);
        if (e.name == "max") return std::max(a, b);
        throw EvalError("unknown function '" + e.name + "'");
    }
    }
    throw EvalError("bad expression node");
}

void validate_variables(const Expr& e, std::span<const std::string> allowed) {
    if (e.kind == Expr::Kind::Variable) {
        for (const auto& name : allowed)
            if (name == e.name) return;
        throw ValidationError("unknown identifier '" + e.name + "' in expression");
    }
    for (const auto& arg : e.args) validate_variables(*arg, allowed);
}

} // namespace ocie
