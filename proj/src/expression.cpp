#include "afvm/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

#include "afvm/errors.hpp"

namespace afvm {

enum class Op { Const, X1, X2, R, Phi, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Tan, Exp, Log, Sqrt };

struct Expression::Node {
    Op op = Op::Const;
    double value = 0.0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

NodePtr make_const(double v) {
    auto n = std::make_shared<Expression::Node>();
    n->value = v;
    return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

double polar_angle(const Vec2& x) {
    double phi = std::atan2(x.y, x.x);
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    return phi;
}

double eval(const Expression::Node& n, const Vec2& x) {
    switch (n.op) {
    case Op::Const: return n.value;
    case Op::X1: return x.x;
    case Op::X2: return x.y;
    case Op::R: return std::hypot(x.x, x.y);
    case Op::Phi: return polar_angle(x);
    case Op::Neg: return -eval(*n.lhs, x);
    case Op::Add: return eval(*n.lhs, x) + eval(*n.rhs, x);
    case Op::Sub: return eval(*n.lhs, x) - eval(*n.rhs, x);
    case Op::Mul: return eval(*n.lhs, x) * eval(*n.rhs, x);
    case Op::Div: return eval(*n.lhs, x) / eval(*n.rhs, x);
    case Op::Pow: return std::pow(eval(*n.lhs, x), eval(*n.rhs, x));
    case Op::Sin: return std::sin(eval(*n.lhs, x));
    case Op::Cos: return std::cos(eval(*n.lhs, x));
    case Op::Tan: return std::tan(eval(*n.lhs, x));
    case Op::Exp: return std::exp(eval(*n.lhs, x));
    case Op::Log: return std::log(eval(*n.lhs, x));
    case Op::Sqrt: return std::sqrt(eval(*n.lhs, x));
    }
    return 0.0;
}

// constructors with light constant folding to keep derivative trees small
NodePtr add(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value + b->value);
    return make(Op::Add, std::move(a), std::move(b));
}
NodePtr sub(NodePtr a, NodePtr b) {
    if (is_const(b, 0.0)) return a;
    if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value - b->value);
    if (is_const(a, 0.0)) return make(Op::Neg, std::move(b));
    return make(Op::Sub, std::move(a), std::move(b));
}
NodePtr mul(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value * b->value);
    return make(Op::Mul, std::move(a), std::move(b));
}
NodePtr div(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0)) return make_const(0.0);
    if (is_const(b, 1.0)) return a;
    return make(Op::Div, std::move(a), std::move(b));
}
NodePtr neg(NodePtr a) {
    if (a->op == Op::Const) return make_const(-a->value);
    return make(Op::Neg, std::move(a));
}

NodePtr diff(const NodePtr& n, int var) {
    const NodePtr x1 = make(Op::X1);
    const NodePtr x2 = make(Op::X2);
    const NodePtr r = make(Op::R);
    switch (n->op) {
    case Op::Const: return make_const(0.0);
    case Op::X1: return make_const(var == 0 ? 1.0 : 0.0);
    case Op::X2: return make_const(var == 1 ? 1.0 : 0.0);
    case Op::R: return div(var == 0 ? x1 : x2, r);
    case Op::Phi: {
        // dphi/dx1 = -x2/r^2, dphi/dx2 = x1/r^2
        const NodePtr r2 = mul(r, r);
        return var == 0 ? neg(div(x2, r2)) : div(x1, r2);
    }
    case Op::Neg: return neg(diff(n->lhs, var));
    case Op::Add: return add(diff(n->lhs, var), diff(n->rhs, var));
    case Op::Sub: return sub(diff(n->lhs, var), diff(n->rhs, var));
    case Op::Mul: return add(mul(diff(n->lhs, var), n->rhs), mul(n->lhs, diff(n->rhs, var)));
    case Op::Div:
        return div(sub(mul(diff(n->lhs, var), n->rhs), mul(n->lhs, diff(n->rhs, var))), mul(n->rhs, n->rhs));
    case Op::Pow: {
        const NodePtr& base = n->lhs;
        const NodePtr& exponent = n->rhs;
        if (exponent->op == Op::Const) {
            return mul(mul(exponent, make(Op::Pow, base, make_const(exponent->value - 1.0))), diff(base, var));
        }
        // d(a^b) = a^b (b' log a + b a'/a)
        return mul(n, add(mul(diff(exponent, var), make(Op::Log, base)), div(mul(exponent, diff(base, var)), base)));
    }
    case Op::Sin: return mul(make(Op::Cos, n->lhs), diff(n->lhs, var));
    case Op::Cos: return neg(mul(make(Op::Sin, n->lhs), diff(n->lhs, var)));
    case Op::Tan: {
        const NodePtr c = make(Op::Cos, n->lhs);
        return div(diff(n->lhs, var), mul(c, c));
    }
    case Op::Exp: return mul(n, diff(n->lhs, var));
    case Op::Log: return div(diff(n->lhs, var), n->lhs);
    case Op::Sqrt: return div(diff(n->lhs, var), mul(make_const(2.0), n));
    }
    return make_const(0.0);
}

std::string show(const Expression::Node& n) {
    auto bin = [&](const char* op) { return "(" + show(*n.lhs) + " " + op + " " + show(*n.rhs) + ")"; };
    auto call = [&](const char* fn) { return std::string(fn) + "(" + show(*n.lhs) + ")"; };
    switch (n.op) {
    case Op::Const: {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, n.value);
        return std::string(buf, res.ptr);
    }
    case Op::X1: return "x1";
    case Op::X2: return "x2";
    case Op::R: return "r";
    case Op::Phi: return "phi";
    case Op::Neg: return "(-" + show(*n.lhs) + ")";
    case Op::Add: return bin("+");
    case Op::Sub: return bin("-");
    case Op::Mul: return bin("*");
    case Op::Div: return bin("/");
    case Op::Pow: return bin("^");
    case Op::Sin: return call("sin");
    case Op::Cos: return call("cos");
    case Op::Tan: return call("tan");
    case Op::Exp: return call("exp");
    case Op::Log: return call("log");
    case Op::Sqrt: return call("sqrt");
    }
    return "?";
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse() {
        NodePtr n = expr();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("expression \"" + std::string(text_) + "\" at offset " + std::to_string(pos_) + ": " + what);
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    NodePtr expr() {
        NodePtr n = term();
        for (;;) {
            if (accept('+')) n = make(Op::Add, n, term());
            else if (accept('-')) n = make(Op::Sub, n, term());
            else return n;
        }
    }

    NodePtr term() {
        NodePtr n = unary();
        for (;;) {
            if (accept('*')) n = make(Op::Mul, n, unary());
            else if (accept('/')) n = make(Op::Div, n, unary());
            else return n;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Op::Neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make(Op::Pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (accept('(')) {
            NodePtr n = expr();
            expect(')');
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    NodePtr number() {
        double v = 0.0;
        const char* begin = text_.data() + pos_;
        const auto res = std::from_chars(begin, text_.data() + text_.size(), v);
        if (res.ec != std::errc()) fail("malformed number");
        pos_ += static_cast<std::size_t>(res.ptr - begin);
        return make_const(v);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
        const std::string name(text_.substr(start, pos_ - start));
        if (name == "x1") return make(Op::X1);
        if (name == "x2") return make(Op::X2);
        if (name == "r") return make(Op::R);
        if (name == "phi") return make(Op::Phi);
        if (name == "pi") return make_const(std::numbers::pi);

        static const std::pair<const char*, Op> unary_functions[] = {
            {"sin", Op::Sin}, {"cos", Op::Cos}, {"tan", Op::Tan},
            {"exp", Op::Exp}, {"log", Op::Log}, {"sqrt", Op::Sqrt},
        };
        for (const auto& [fn, op] : unary_functions) {
            if (name == fn) {
                expect('(');
                NodePtr arg = expr();
                expect(')');
                return make(op, arg);
            }
        }
        if (name == "pow") {
            expect('(');
            NodePtr base = expr();
            expect(',');
            NodePtr exponent = expr();
            expect(')');
            return make(Op::Pow, base, exponent);
        }
        pos_ = start;
        fail("unknown identifier '" + name + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace

Expression::Expression() : root_(make_const(0.0)) {}

Expression Expression::constant(double value) { return Expression(make_const(value)); }

Expression Expression::parse(std::string_view text) { return Expression(Parser(text).parse()); }

double Expression::operator()(const Vec2& x) const { return eval(*root_, x); }

Expression Expression::derivative(int variable) const { return Expression(diff(root_, variable)); }

namespace {

bool references_variable(const Expression::Node& n) {
    if (n.op == Op::X1 || n.op == Op::X2 || n.op == Op::R || n.op == Op::Phi) return true;
    return (n.lhs && references_variable(*n.lhs)) || (n.rhs && references_variable(*n.rhs));
}

} // namespace

bool Expression::is_constant() const { return !references_variable(*root_); }

std::string Expression::to_string() const { return show(*root_); }

} // namespace afvm
