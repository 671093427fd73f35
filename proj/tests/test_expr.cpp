#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "multigame/expr.hpp"

using namespace multigame;

namespace {

const Alphabet kGame{2, 2, 1, 1, false};

double ev(const std::string& s, std::vector<double> t = {0.5, 1.5}, std::vector<double> x = {1.0, -2.0},
          std::vector<double> u = {0.25}, std::vector<double> v = {-0.75}) {
    EvalEnv env{t, x, u, v, {}, 2};
    return parse_expr(s, kGame).eval(env);
}

} // namespace

TEST(Expr, Precedence) {
    EXPECT_DOUBLE_EQ(ev("1 + 2 * 3"), 7.0);
    EXPECT_DOUBLE_EQ(ev("(1 + 2) * 3"), 9.0);
    EXPECT_DOUBLE_EQ(ev("8 - 3 - 2"), 3.0);
    EXPECT_DOUBLE_EQ(ev("8 / 4 / 2"), 1.0);
    EXPECT_DOUBLE_EQ(ev("2 ^ 3 ^ 2"), 512.0);
    EXPECT_DOUBLE_EQ(ev("-2 ^ 2"), -4.0);
    EXPECT_DOUBLE_EQ(ev("2 ^ -1"), 0.5);
    EXPECT_DOUBLE_EQ(ev("1.5e1 + .5"), 15.5);
}

TEST(Expr, Variables) {
    EXPECT_DOUBLE_EQ(ev("t1 + t2"), 2.0);
    EXPECT_DOUBLE_EQ(ev("x1 * x2"), -2.0);
    EXPECT_DOUBLE_EQ(ev("u1 - v1"), 1.0);
}

TEST(Expr, Functions) {
    EXPECT_DOUBLE_EQ(ev("sin(0) + cos(0)"), 1.0);
    EXPECT_DOUBLE_EQ(ev("exp(0)"), 1.0);
    EXPECT_DOUBLE_EQ(ev("sqrt(16)"), 4.0);
    EXPECT_DOUBLE_EQ(ev("abs(x2)"), 2.0);
    EXPECT_DOUBLE_EQ(ev("min(x1, x2)"), -2.0);
    EXPECT_DOUBLE_EQ(ev("max(x1, x2)"), 1.0);
}

TEST(Expr, Costate) {
    const Alphabet a{2, 2, 0, 0, true};
    const auto e = parse_expr("p1_2 + 10 * p2_1", a);
    const std::vector<double> p = {1.0, 2.0, 3.0, 4.0};
    EvalEnv env{{}, {}, {}, {}, p, 2};
    EXPECT_DOUBLE_EQ(e.eval(env), 2.0 + 30.0);
    EXPECT_THROW(parse_expr("p1_1", kGame), UnknownIdentifier);
    EXPECT_THROW(parse_expr("p3_1", a), UnknownIdentifier);
}

TEST(Expr, RejectsOutOfRangeIdentifiers) {
    EXPECT_THROW(parse_expr("t3", kGame), UnknownIdentifier);
    EXPECT_THROW(parse_expr("x0", kGame), UnknownIdentifier);
    EXPECT_THROW(parse_expr("u2", kGame), UnknownIdentifier);
    EXPECT_THROW(parse_expr("y1", kGame), UnknownIdentifier);
    EXPECT_THROW(parse_expr("tan(x1)", kGame), UnknownIdentifier);
}

TEST(Expr, SyntaxErrorsCarryOffset) {
    try {
        parse_expr("1 + * 2", kGame);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset, 4u);
    }
    EXPECT_THROW(parse_expr("(1 + 2", kGame), ParseError);
    EXPECT_THROW(parse_expr("1 2", kGame), ParseError);
    EXPECT_THROW(parse_expr("", kGame), ParseError);
    EXPECT_THROW(parse_expr("min(1)", kGame), ParseError);
}

TEST(Expr, DomainErrors) {
    EXPECT_THROW(ev("1 / (x1 - 1)"), EvalDomain);
    EXPECT_THROW(ev("sqrt(x2)"), EvalDomain);
    EXPECT_THROW(ev("x2 ^ 0.5"), EvalDomain);
    EXPECT_THROW(ev("exp(1000)"), EvalDomain);
    EXPECT_DOUBLE_EQ(ev("x2 ^ 2"), 4.0);
}

TEST(Expr, PrintRoundTrip) {
    const char* srcs[] = {"1 + 2 * x1 - u1 / 3", "-(x1 ^ 2) ^ 0.5 + t1", "min(x1, max(v1, -u1)) * exp(-t2)",
                          "sin(x1) * cos(x2) + abs(u1 - v1) + sqrt(t1 + t2)", "0.1 + 1e-3 * x2"};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(0.1, 2.0);
    for (const char* s : srcs) {
        const auto e = parse_expr(s, kGame);
        const auto again = parse_expr(e.print(), kGame);
        EXPECT_TRUE(e.same_tree(again)) << s << " -> " << e.print();
        EXPECT_EQ(e.print(), again.print());
        for (int k = 0; k < 20; ++k) {
            std::vector<double> t = {d(rng), d(rng)}, x = {d(rng), d(rng)}, u = {d(rng)}, v = {d(rng)};
            EvalEnv env{t, x, u, v, {}, 2};
            EXPECT_EQ(e.eval(env), again.eval(env));
        }
    }
}

TEST(Expr, Sexpr) {
    EXPECT_EQ(parse_expr("x1 + 2 * u1", kGame).sexpr(), "(+ x1 (* 2 u1))");
}

TEST(Expr, IndependentOf) {
    const auto e = parse_expr("x1 * t1 + 3", kGame);
    EXPECT_FALSE(e.independent_of(VarKind::X));
    EXPECT_FALSE(e.independent_of(VarKind::T));
    EXPECT_TRUE(e.independent_of(VarKind::U));
}
