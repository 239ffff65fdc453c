#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "afvm/geometry.hpp"

namespace afvm {

/// Scalar arithmetic expression over the point coordinates.
///
/// Grammar: numbers, `+ - * / ^`, parentheses, the variables `x1`, `x2`,
/// `r` (distance to the origin), `phi` (polar angle in [0, 2π)), the
/// constant `pi`, and the functions sin, cos, tan, exp, log, sqrt and
/// pow(a, b). Expressions are immutable and cheap to copy.
class Expression {
public:
    struct Node;

    Expression();
    static Expression constant(double value);
    /// Throws ParseError on malformed input.
    static Expression parse(std::string_view text);

    double operator()(const Vec2& x) const;
    /// Symbolic partial derivative; `variable` 0 is x1, 1 is x2.
    Expression derivative(int variable) const;
    /// True when no coordinate variable occurs in the expression.
    bool is_constant() const;
    std::string to_string() const;

private:
    explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
    std::shared_ptr<const Node> root_;
};

} // namespace afvm
