#include "filippov/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

namespace filippov {

ParseError::ParseError(std::string message, std::size_t position)
    : std::runtime_error("parse error at position " + std::to_string(position) + ": " + message),
      position_(position) {}

struct Expr::Node {
    Op op = Op::Constant;
    double value = 0.0;      // Constant
    std::size_t index = 0;   // Variable
    int exponent = 0;        // Pow
    std::vector<Expr> args;
};

Expr::Expr() : Expr(constant(0.0)) {}
Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double value) {
    auto n = std::make_shared<Node>();
    n->op = Op::Constant;
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::variable(std::size_t index) {
    auto n = std::make_shared<Node>();
    n->op = Op::Variable;
    n->index = index;
    return Expr(std::move(n));
}

Expr Expr::lambda() {
    auto n = std::make_shared<Node>();
    n->op = Op::Lambda;
    return Expr(std::move(n));
}

Expr Expr::unary(Op op, Expr arg) {
    switch (op) {
        case Op::Neg: case Op::Sin: case Op::Cos: case Op::Tanh: case Op::Exp:
        case Op::Sqrt: case Op::Abs: case Op::Mollifier:
            break;
        default:
            throw std::invalid_argument("Expr::unary: not a unary operator");
    }
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args = {std::move(arg)};
    return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
    switch (op) {
        case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Min: case Op::Max:
            break;
        default:
            throw std::invalid_argument("Expr::binary: not a binary operator");
    }
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args = {std::move(lhs), std::move(rhs)};
    return Expr(std::move(n));
}

Expr Expr::power(Expr base, int exponent) {
    auto n = std::make_shared<Node>();
    n->op = Op::Pow;
    n->exponent = exponent;
    n->args = {std::move(base)};
    return Expr(std::move(n));
}

Expr::Op Expr::op() const { return node_->op; }

double Expr::eval(std::span<const double> x, double lambda) const {
    const Node& n = *node_;
    switch (n.op) {
        case Op::Constant: return n.value;
        case Op::Variable:
            if (n.index >= x.size()) throw std::out_of_range("Expr::eval: state variable x" + std::to_string(n.index + 1) + " out of range");
            return x[n.index];
        case Op::Lambda: return lambda;
        case Op::Add: return n.args[0].eval(x, lambda) + n.args[1].eval(x, lambda);
        case Op::Sub: return n.args[0].eval(x, lambda) - n.args[1].eval(x, lambda);
        case Op::Mul: return n.args[0].eval(x, lambda) * n.args[1].eval(x, lambda);
        case Op::Div: return n.args[0].eval(x, lambda) / n.args[1].eval(x, lambda);
        case Op::Pow: {
            const double b = n.args[0].eval(x, lambda);
            double r = 1.0;
            for (int i = 0; i < std::abs(n.exponent); ++i) r *= b;
            return n.exponent < 0 ? 1.0 / r : r;
        }
        case Op::Neg: return -n.args[0].eval(x, lambda);
        case Op::Sin: return std::sin(n.args[0].eval(x, lambda));
        case Op::Cos: return std::cos(n.args[0].eval(x, lambda));
        case Op::Tanh: return std::tanh(n.args[0].eval(x, lambda));
        case Op::Exp: return std::exp(n.args[0].eval(x, lambda));
        case Op::Sqrt: return std::sqrt(n.args[0].eval(x, lambda));
        case Op::Abs: return std::fabs(n.args[0].eval(x, lambda));
        case Op::Min: return std::min(n.args[0].eval(x, lambda), n.args[1].eval(x, lambda));
        case Op::Max: return std::max(n.args[0].eval(x, lambda), n.args[1].eval(x, lambda));
        case Op::Mollifier: return mollifier(n.args[0].eval(x, lambda));
    }
    return 0.0;
}

Interval Expr::eval(const Box& x, const Interval& lambda) const {
    const Node& n = *node_;
    switch (n.op) {
        case Op::Constant: return Interval(n.value);
        case Op::Variable:
            if (n.index >= x.dims()) throw std::out_of_range("Expr::eval: state variable x" + std::to_string(n.index + 1) + " out of range");
            return x[n.index];
        case Op::Lambda: return lambda;
        case Op::Add: return n.args[0].eval(x, lambda) + n.args[1].eval(x, lambda);
        case Op::Sub: return n.args[0].eval(x, lambda) - n.args[1].eval(x, lambda);
        case Op::Mul: return n.args[0].eval(x, lambda) * n.args[1].eval(x, lambda);
        case Op::Div: return n.args[0].eval(x, lambda) / n.args[1].eval(x, lambda);
        case Op::Pow: return pow(n.args[0].eval(x, lambda), n.exponent);
        case Op::Neg: return -n.args[0].eval(x, lambda);
        case Op::Sin: return sin(n.args[0].eval(x, lambda));
        case Op::Cos: return cos(n.args[0].eval(x, lambda));
        case Op::Tanh: return tanh(n.args[0].eval(x, lambda));
        case Op::Exp: return exp(n.args[0].eval(x, lambda));
        case Op::Sqrt: return sqrt(n.args[0].eval(x, lambda));
        case Op::Abs: return abs(n.args[0].eval(x, lambda));
        case Op::Min: return min(n.args[0].eval(x, lambda), n.args[1].eval(x, lambda));
        case Op::Max: return max(n.args[0].eval(x, lambda), n.args[1].eval(x, lambda));
        case Op::Mollifier: return mollifier(n.args[0].eval(x, lambda));
    }
    return Interval(0.0);
}

bool Expr::references_lambda() const {
    if (node_->op == Op::Lambda) return true;
    return std::any_of(node_->args.begin(), node_->args.end(), [](const Expr& e) { return e.references_lambda(); });
}

std::size_t Expr::state_arity() const {
    std::size_t m = node_->op == Op::Variable ? node_->index + 1 : 0;
    for (const auto& a : node_->args) m = std::max(m, a.state_arity());
    return m;
}

namespace {

const char* function_name(Expr::Op op) {
    switch (op) {
        case Expr::Op::Sin: return "sin";
        case Expr::Op::Cos: return "cos";
        case Expr::Op::Tanh: return "tanh";
        case Expr::Op::Exp: return "exp";
        case Expr::Op::Sqrt: return "sqrt";
        case Expr::Op::Abs: return "abs";
        case Expr::Op::Min: return "min";
        case Expr::Op::Max: return "max";
        case Expr::Op::Mollifier: return "mollifier";
        default: return nullptr;
    }
}

char infix_symbol(Expr::Op op) {
    switch (op) {
        case Expr::Op::Add: return '+';
        case Expr::Op::Sub: return '-';
        case Expr::Op::Mul: return '*';
        case Expr::Op::Div: return '/';
        default: return 0;
    }
}

}  // namespace

std::string Expr::to_string() const {
    const Node& n = *node_;
    switch (n.op) {
        case Op::Constant: {
            // Negative literals are not part of the grammar; print as a negation.
            if (std::signbit(n.value)) return "(-" + format_number(-n.value) + ")";
            return format_number(n.value);
        }
        case Op::Variable: return "x" + std::to_string(n.index + 1);
        case Op::Lambda: return "lambda";
        case Op::Neg: return "(-" + n.args[0].to_string() + ")";
        case Op::Pow: return "(" + n.args[0].to_string() + "^" + std::to_string(n.exponent) + ")";
        default: break;
    }
    if (char c = infix_symbol(n.op)) {
        return "(" + n.args[0].to_string() + c + n.args[1].to_string() + ")";
    }
    std::string s = function_name(n.op);
    s += '(';
    for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) s += ',';
        s += n.args[i].to_string();
    }
    return s + ')';
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    const auto& x = *a.node_;
    const auto& y = *b.node_;
    if (x.op != y.op || x.args.size() != y.args.size()) return false;
    if (x.op == Expr::Op::Constant && !(x.value == y.value && std::signbit(x.value) == std::signbit(y.value))) return false;
    if (x.op == Expr::Op::Variable && x.index != y.index) return false;
    if (x.op == Expr::Op::Pow && x.exponent != y.exponent) return false;
    for (std::size_t i = 0; i < x.args.size(); ++i) {
        if (!(x.args[i] == y.args[i])) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr parse() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t pos) const { throw ParseError(msg, pos); }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' but reached end of input");
            fail(std::string("expected '") + c + "' but found '" + text_[pos_] + "'");
        }
    }

    Expr parse_expr() {
        Expr lhs = parse_term();
        while (true) {
            if (accept('+')) {
                lhs = Expr::binary(Expr::Op::Add, lhs, parse_term());
            } else if (accept('-')) {
                lhs = Expr::binary(Expr::Op::Sub, lhs, parse_term());
            } else {
                return lhs;
            }
        }
    }

    Expr parse_term() {
        Expr lhs = parse_unary();
        while (true) {
            if (accept('*')) {
                lhs = Expr::binary(Expr::Op::Mul, lhs, parse_unary());
            } else if (accept('/')) {
                lhs = Expr::binary(Expr::Op::Div, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    Expr parse_unary() {
        if (accept('-')) return Expr::unary(Expr::Op::Neg, parse_unary());
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (!accept('^')) return base;
        skip_ws();
        const std::size_t start = pos_;
        const bool negative = accept('-');
        skip_ws();
        const std::size_t digits = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (digits == pos_) fail_at("exponent must be an integer literal", start);
        if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
            fail_at("exponent must be an integer literal", start);
        }
        int value = 0;
        const auto res = std::from_chars(text_.data() + digits, text_.data() + pos_, value);
        if (res.ec != std::errc()) fail_at("exponent out of range", start);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '^') fail("chained exponents are not supported; use parentheses");
        return Expr::power(std::move(base), negative ? -value : value);
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                pos_ = p;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            }
        }
        double value = 0.0;
        const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (res.ec != std::errc() || res.ptr != text_.data() + pos_) {
            fail_at("malformed number '" + std::string(text_.substr(start, pos_ - start)) + "'", start);
        }
        return Expr::constant(value);
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail(std::string("unexpected '") + c + "'");
    }

    Expr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);
        skip_ws();
        const bool call = pos_ < text_.size() && text_[pos_] == '(';

        if (!call) {
            if (name == "lambda") return Expr::lambda();
            if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '9') {
                return Expr::variable(static_cast<std::size_t>(name[1] - '1'));
            }
            fail_at("unknown identifier '" + std::string(name) + "'", start);
        }

        struct Fn {
            std::string_view name;
            Expr::Op op;
            std::size_t arity;
        };
        static constexpr Fn kFunctions[] = {
            {"sin", Expr::Op::Sin, 1},   {"cos", Expr::Op::Cos, 1},   {"tanh", Expr::Op::Tanh, 1},
            {"exp", Expr::Op::Exp, 1},   {"sqrt", Expr::Op::Sqrt, 1}, {"abs", Expr::Op::Abs, 1},
            {"min", Expr::Op::Min, 2},   {"max", Expr::Op::Max, 2},   {"mollifier", Expr::Op::Mollifier, 1},
        };
        const Fn* fn = nullptr;
        for (const auto& f : kFunctions) {
            if (f.name == name) fn = &f;
        }
        if (!fn) fail_at("unknown function '" + std::string(name) + "'", start);

        expect('(');
        std::vector<Expr> args;
        if (!accept(')')) {
            do {
                args.push_back(parse_expr());
            } while (accept(','));
            expect(')');
        }
        if (args.size() != fn->arity) {
            fail_at(std::string(name) + " expects " + std::to_string(fn->arity) + " argument(s), got " +
                        std::to_string(args.size()),
                    start);
        }
        if (fn->arity == 1) return Expr::unary(fn->op, std::move(args[0]));
        return Expr::binary(fn->op, std::move(args[0]), std::move(args[1]));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

}  // namespace filippov
