#pragma once

// Expression DSL for vector-field components and switching functions.
//
// Grammar (whitespace insignificant):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' ['-'] integer)?
//   primary := number | 'x1'..'x9' | 'lambda' | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: sin cos tanh exp sqrt abs mollifier (one argument), min max (two).
// Numbers are decimal literals with an optional exponent (1, 0.25, 1e-3).

#include "filippov/geometry.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace filippov {

class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::size_t position);
    /// Zero-based character offset of the failure in the parsed text.
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Immutable expression tree; copies share structure.
class Expr {
public:
    enum class Op {
        Constant,
        Variable,
        Lambda,
        Add,
        Sub,
        Mul,
        Div,
        Pow,
        Neg,
        Sin,
        Cos,
        Tanh,
        Exp,
        Sqrt,
        Abs,
        Min,
        Max,
        Mollifier,
    };

    Expr();  // constant zero

    static Expr constant(double value);
    /// Zero-based state index; prints as x{index+1}.
    static Expr variable(std::size_t index);
    static Expr lambda();
    static Expr unary(Op op, Expr arg);
    static Expr binary(Op op, Expr lhs, Expr rhs);
    static Expr power(Expr base, int exponent);

    Op op() const;

    /// Real-arithmetic evaluation. Non-finite results are returned as is.
    double eval(std::span<const double> x, double lambda) const;
    /// Outward-rounded interval extension over a box of states and a range of lambda.
    Interval eval(const Box& x, const Interval& lambda) const;

    bool references_lambda() const;
    /// One past the largest state index used (0 when no state variable occurs).
    std::size_t state_arity() const;

    /// Fully parenthesized canonical text; parse_expr(to_string()) is structurally equal.
    std::string to_string() const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

/// Parses the DSL; throws ParseError with the offending position.
Expr parse_expr(std::string_view text);

}  // namespace filippov
