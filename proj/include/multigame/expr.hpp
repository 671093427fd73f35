#pragma once

// Scalar expressions over the game alphabet t1..tm, x1..xn, u1..up, v1..vq
// (and, for Hamiltonians, costate entries p<i>_<alpha>).
//
// Grammar (EBNF), whitespace allowed between tokens:
//   expr    ::= term { ("+" | "-") term }
//   term    ::= unary { ("*" | "/") unary }
//   unary   ::= "-" unary | power
//   power   ::= primary [ "^" unary ]            (right associative)
//   primary ::= number | variable | call | "(" expr ")"
//   call    ::= ("sin" | "cos" | "exp" | "sqrt" | "abs") "(" expr ")"
//             | ("min" | "max") "(" expr "," expr ")"
//   number  ::= digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//             | "." digits [ exponent ]
//   variable::= ("t" | "x" | "u" | "v") index | "p" index "_" index

#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "multigame/errors.hpp"

namespace multigame {

enum class VarKind { T, X, U, V, P };

/// Declared variable ranges. Identifiers outside them are rejected at parse time.
struct Alphabet {
    int m = 0;  // multitime dimension
    int n = 0;  // state dimension
    int p = 0;  // first team control dimension
    int q = 0;  // second team control dimension
    bool costate = false;
};

/// Variable bindings for evaluation. Costate entries are stored row-major as
/// p[i * m + alpha] (state index i, time index alpha).
struct EvalEnv {
    std::span<const double> t{};
    std::span<const double> x{};
    std::span<const double> u{};
    std::span<const double> v{};
    std::span<const double> p{};
    int m = 0;
};

class ScalarExpr {
public:
    enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Min, Max, Abs, Sin, Cos, Exp, Sqrt };

    struct Node {
        Op op = Op::Const;
        double value = 0.0;
        VarKind kind = VarKind::T;
        int index = 0;   // zero based; for P: i * m + alpha
        int lhs = -1;
        int rhs = -1;
    };

    ScalarExpr() : nodes_(std::make_shared<std::vector<Node>>(std::vector<Node>{Node{}})), root_(0) {}

    static ScalarExpr constant(double c) {
        ScalarExpr e;
        Node n;
        n.value = c;
        e.nodes_ = std::make_shared<const std::vector<Node>>(std::vector<Node>{n});
        return e;
    }

    double eval(const EvalEnv& env) const { return eval_node(root_, env); }

    /// Canonical fully parenthesized infix form; parse(print(e)) reproduces e.
    std::string print() const { return print_node(root_, false); }
    /// Prefix form, e.g. (+ x1 (* 2 u1)).
    std::string sexpr() const { return print_node(root_, true); }

    bool same_tree(const ScalarExpr& o) const { return same(root_, o, o.root_); }

    const Alphabet& alphabet() const { return alphabet_; }

    /// True if the expression never reads a variable of the given kind.
    bool independent_of(VarKind kind) const {
        for (const auto& n : *nodes_)
            if (n.op == Op::Var && n.kind == kind) return false;
        return true;
    }

    friend ScalarExpr parse_expr(std::string_view src, const Alphabet& alpha);

private:
    std::shared_ptr<const std::vector<Node>> nodes_;
    int root_ = 0;
    Alphabet alphabet_{};

    static const char* op_name(Op op) {
        switch (op) {
        case Op::Add: return "+";
        case Op::Sub: return "-";
        case Op::Mul: return "*";
        case Op::Div: return "/";
        case Op::Pow: return "^";
        case Op::Min: return "min";
        case Op::Max: return "max";
        case Op::Abs: return "abs";
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Exp: return "exp";
        case Op::Sqrt: return "sqrt";
        default: return "?";
        }
    }

    std::string var_name(const Node& n) const {
        switch (n.kind) {
        case VarKind::T: return "t" + std::to_string(n.index + 1);
        case VarKind::X: return "x" + std::to_string(n.index + 1);
        case VarKind::U: return "u" + std::to_string(n.index + 1);
        case VarKind::V: return "v" + std::to_string(n.index + 1);
        case VarKind::P: {
            const int m = alphabet_.m;
            return "p" + std::to_string(n.index / m + 1) + "_" + std::to_string(n.index % m + 1);
        }
        }
        return "?";
    }

    static std::string number(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    std::string print_node(int id, bool prefix) const {
        const Node& n = (*nodes_)[static_cast<std::size_t>(id)];
        switch (n.op) {
        case Op::Const: return number(n.value);
        case Op::Var: return var_name(n);
        case Op::Neg: return prefix ? "(- " + print_node(n.lhs, true) + ")" : "(-" + print_node(n.lhs, false) + ")";
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div:
        case Op::Pow:
            if (prefix) return std::string("(") + op_name(n.op) + " " + print_node(n.lhs, true) + " " + print_node(n.rhs, true) + ")";
            return "(" + print_node(n.lhs, false) + " " + op_name(n.op) + " " + print_node(n.rhs, false) + ")";
        case Op::Min:
        case Op::Max:
            if (prefix) return std::string("(") + op_name(n.op) + " " + print_node(n.lhs, true) + " " + print_node(n.rhs, true) + ")";
            return std::string(op_name(n.op)) + "(" + print_node(n.lhs, false) + ", " + print_node(n.rhs, false) + ")";
        default:
            if (prefix) return std::string("(") + op_name(n.op) + " " + print_node(n.lhs, true) + ")";
            return std::string(op_name(n.op)) + "(" + print_node(n.lhs, false) + ")";
        }
    }

    bool same(int a, const ScalarExpr& o, int b) const {
        const Node& x = (*nodes_)[static_cast<std::size_t>(a)];
        const Node& y = (*o.nodes_)[static_cast<std::size_t>(b)];
        if (x.op != y.op) return false;
        if (x.op == Op::Const) return x.value == y.value;
        if (x.op == Op::Var) return x.kind == y.kind && x.index == y.index;
        if ((x.lhs < 0) != (y.lhs < 0) || (x.rhs < 0) != (y.rhs < 0)) return false;
        if (x.lhs >= 0 && !same(x.lhs, o, y.lhs)) return false;
        if (x.rhs >= 0 && !same(x.rhs, o, y.rhs)) return false;
        return true;
    }

    static double finite(double r, const char* what) {
        if (!std::isfinite(r)) throw EvalDomain(std::string("non-finite result in ") + what);
        return r;
    }

    double read_var(const Node& n, const EvalEnv& env) const {
        std::span<const double> src;
        switch (n.kind) {
        case VarKind::T: src = env.t; break;
        case VarKind::X: src = env.x; break;
        case VarKind::U: src = env.u; break;
        case VarKind::V: src = env.v; break;
        case VarKind::P: src = env.p; break;
        }
        if (static_cast<std::size_t>(n.index) >= src.size()) throw EvalDomain("unbound variable " + var_name(n));
        return src[static_cast<std::size_t>(n.index)];
    }

    double eval_node(int id, const EvalEnv& env) const {
        const Node& n = (*nodes_)[static_cast<std::size_t>(id)];
        switch (n.op) {
        case Op::Const: return n.value;
        case Op::Var: return read_var(n, env);
        case Op::Neg: return -eval_node(n.lhs, env);
        case Op::Add: return eval_node(n.lhs, env) + eval_node(n.rhs, env);
        case Op::Sub: return eval_node(n.lhs, env) - eval_node(n.rhs, env);
        case Op::Mul: return eval_node(n.lhs, env) * eval_node(n.rhs, env);
        case Op::Div: {
            const double num = eval_node(n.lhs, env);
            const double den = eval_node(n.rhs, env);
            if (den == 0.0) throw EvalDomain("division by zero");
            return finite(num / den, "division");
        }
        case Op::Pow: {
            const double b = eval_node(n.lhs, env);
            const double e = eval_node(n.rhs, env);
            if (b < 0.0 && e != std::floor(e)) throw EvalDomain("negative base with fractional exponent");
            if (b == 0.0 && e < 0.0) throw EvalDomain("zero base with negative exponent");
            return finite(std::pow(b, e), "power");
        }
        case Op::Min: return std::fmin(eval_node(n.lhs, env), eval_node(n.rhs, env));
        case Op::Max: return std::fmax(eval_node(n.lhs, env), eval_node(n.rhs, env));
        case Op::Abs: return std::fabs(eval_node(n.lhs, env));
        case Op::Sin: return std::sin(eval_node(n.lhs, env));
        case Op::Cos: return std::cos(eval_node(n.lhs, env));
        case Op::Exp: return finite(std::exp(eval_node(n.lhs, env)), "exp");
        case Op::Sqrt: {
            const double a = eval_node(n.lhs, env);
            if (a < 0.0) throw EvalDomain("sqrt of negative value");
            return std::sqrt(a);
        }
        }
        return 0.0;
    }
};

namespace detail {

class ExprParser {
public:
    using Op = ScalarExpr::Op;
    using Node = ScalarExpr::Node;

    ExprParser(std::string_view src, const Alphabet& alpha) : src_(src), alpha_(alpha) {}

    std::vector<Node> nodes;

    int parse_all() {
        const int root = expr();
        skip();
        if (pos_ != src_.size()) throw ParseError(pos_, std::string("unexpected '") + src_[pos_] + "'");
        return root;
    }

private:
    std::string_view src_;
    Alphabet alpha_;
    std::size_t pos_ = 0;

    void skip() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r')) ++pos_;
    }
    char peek() {
        skip();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }
    void expect(char c) {
        if (peek() != c) throw ParseError(pos_, std::string("expected '") + c + "'");
        ++pos_;
    }

    int add(Node n) {
        nodes.push_back(n);
        return static_cast<int>(nodes.size() - 1);
    }
    int binary(Op op, int l, int r) {
        Node n;
        n.op = op;
        n.lhs = l;
        n.rhs = r;
        return add(n);
    }

    int expr() {
        int lhs = term();
        for (;;) {
            const char c = peek();
            if (c != '+' && c != '-') return lhs;
            ++pos_;
            lhs = binary(c == '+' ? Op::Add : Op::Sub, lhs, term());
        }
    }

    int term() {
        int lhs = unary();
        for (;;) {
            const char c = peek();
            if (c != '*' && c != '/') return lhs;
            ++pos_;
            lhs = binary(c == '*' ? Op::Mul : Op::Div, lhs, unary());
        }
    }

    int unary() {
        if (peek() == '-') {
            ++pos_;
            Node n;
            n.op = Op::Neg;
            n.lhs = unary();
            return add(n);
        }
        return power();
    }

    int power() {
        const int base = primary();
        if (peek() == '^') {
            ++pos_;
            return binary(Op::Pow, base, unary());
        }
        return base;
    }

    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

    int number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t e = pos_ + 1;
            if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
            if (e < src_.size() && is_digit(src_[e])) {
                pos_ = e;
                while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
            }
        }
        double v = 0.0;
        auto [end, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (ec != std::errc() || end != src_.data() + pos_) throw ParseError(start, "malformed number");
        Node n;
        n.op = Op::Const;
        n.value = v;
        return add(n);
    }

    static bool parse_index(std::string_view s, int& out) {
        if (s.empty() || s[0] == '0') return false;
        auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc() && end == s.data() + s.size();
    }

    int variable(std::size_t at, const std::string& ident) {
        Node n;
        n.op = Op::Var;
        const char head = ident[0];
        const std::string_view rest = std::string_view(ident).substr(1);
        int idx = 0;
        if (head == 'p' && alpha_.costate) {
            const auto us = rest.find('_');
            int alpha = 0;
            if (us != std::string_view::npos && parse_index(rest.substr(0, us), idx) && parse_index(rest.substr(us + 1), alpha) &&
                idx <= alpha_.n && alpha <= alpha_.m) {
                n.kind = VarKind::P;
                n.index = (idx - 1) * alpha_.m + (alpha - 1);
                return add(n);
            }
            throw UnknownIdentifier(at, ident);
        }
        int limit = 0;
        switch (head) {
        case 't': n.kind = VarKind::T; limit = alpha_.m; break;
        case 'x': n.kind = VarKind::X; limit = alpha_.n; break;
        case 'u': n.kind = VarKind::U; limit = alpha_.p; break;
        case 'v': n.kind = VarKind::V; limit = alpha_.q; break;
        default: throw UnknownIdentifier(at, ident);
        }
        if (!parse_index(rest, idx) || idx > limit) throw UnknownIdentifier(at, ident);
        n.index = idx - 1;
        return add(n);
    }

    int primary() {
        const char c = peek();
        const std::size_t at = pos_;
        if (c == '\0') throw ParseError(at, "unexpected end of input");
        if (is_digit(c) || c == '.') return number();
        if (c == '(') {
            ++pos_;
            const int e = expr();
            expect(')');
            return e;
        }
        if (!is_alpha(c)) throw ParseError(at, std::string("unexpected '") + c + "'");
        std::string ident;
        while (pos_ < src_.size() && (is_alpha(src_[pos_]) || is_digit(src_[pos_]))) ident += src_[pos_++];

        static constexpr std::pair<const char*, Op> unary_fns[] = {
            {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"sqrt", Op::Sqrt}, {"abs", Op::Abs}};
        for (const auto& [name, op] : unary_fns) {
            if (ident == name) {
                expect('(');
                Node n;
                n.op = op;
                n.lhs = expr();
                expect(')');
                return add(n);
            }
        }
        if (ident == "min" || ident == "max") {
            expect('(');
            const int l = expr();
            expect(',');
            const int r = expr();
            expect(')');
            return binary(ident == "min" ? Op::Min : Op::Max, l, r);
        }
        return variable(at, ident);
    }
};

} // namespace detail

inline ScalarExpr parse_expr(std::string_view src, const Alphabet& alpha) {
    detail::ExprParser p(src, alpha);
    const int root = p.parse_all();
    ScalarExpr e;
    e.nodes_ = std::make_shared<const std::vector<ScalarExpr::Node>>(std::move(p.nodes));
    e.root_ = root;
    e.alphabet_ = alpha;
    return e;
}

inline double eval_expr(const ScalarExpr& e, const EvalEnv& env) { return e.eval(env); }

} // namespace multigame
