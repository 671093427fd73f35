#include <gtest/gtest.h>

#include <cmath>

#include "multigame/catalog.hpp"

using namespace multigame;

TEST(ControlSpace, BoxGridIncludesEndpoints) {
    const auto cs = ControlSpace::box({-1.0, 0.0}, {1.0, 2.0}, {3, 2});
    ASSERT_EQ(cs.size(), 6u);
    EXPECT_EQ(cs.sample(0)[0], -1.0);
    EXPECT_EQ(cs.sample(0)[1], 0.0);
    EXPECT_EQ(cs.sample(5)[0], 1.0);
    EXPECT_EQ(cs.sample(5)[1], 2.0);
    EXPECT_DOUBLE_EQ(cs.spacing(), 2.0);
    const auto mid = ControlSpace::box({0.0}, {4.0}, {1});
    EXPECT_EQ(mid.sample(0)[0], 2.0);
}

TEST(ControlSpace, BallKeepsOnlyInteriorPoints) {
    const auto b = ControlSpace::ball(2, 1.0, 5);
    // grid -1, -0.5, 0, 0.5, 1: 21 of the 25 points satisfy x^2 + y^2 <= 1
    std::size_t expected = 0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const double x = -1.0 + 0.5 * i, y = -1.0 + 0.5 * j;
            if (x * x + y * y <= 1.0) ++expected;
        }
    EXPECT_EQ(b.size(), expected);
    for (std::size_t s = 0; s < b.size(); ++s) EXPECT_LE(std::hypot(b.sample(s)[0], b.sample(s)[1]), 1.0 + 1e-12);
}

TEST(ControlSpace, ProductEnumeratesFirstFactorSlowest) {
    const auto a = catalog::pts({1, 2});
    const auto b = catalog::pts({10, 20, 30});
    const auto p = ControlSpace::product(a, b);
    ASSERT_EQ(p.size(), 6u);
    EXPECT_EQ(p.sample(1)[0], 1.0);
    EXPECT_EQ(p.sample(1)[1], 20.0);
    EXPECT_EQ(p.sample(3)[0], 2.0);
    EXPECT_TRUE(p.contains(std::vector<double>{2.0, 30.0}));
    EXPECT_FALSE(p.contains(std::vector<double>{2.0, 25.0}));
}

TEST(Game, MakeGameValidatesShapes) {
    GameText t;
    t.m = 2;
    t.n = 1;
    t.horizon = catalog::unit_horizon(2);
    t.state_box = Box({-1.0}, {1.0});
    t.dynamics = {{"x1"}};
    t.U = catalog::pts({0});
    t.V = catalog::pts({0});
    t.A = {1.0, 1.0};
    EXPECT_THROW(make_game(t), std::invalid_argument);
    t.dynamics = {{"x1"}, {"u2"}};
    EXPECT_THROW(make_game(t), UnknownIdentifier);
    t.dynamics = {{"x1"}, {"x1"}};
    t.terminal_cost = "t1";
    EXPECT_THROW(make_game(t), UnknownIdentifier);
    t.terminal_cost = "x1";
    EXPECT_NO_THROW(make_game(t));
}

TEST(Game, EvaluatesComponents) {
    const auto g = catalog::frozen();
    const std::vector<double> t = {0.5, 0.5}, x = {0.0}, u = {1.0}, v = {1.0};
    EXPECT_DOUBLE_EQ(g.running(t, x, u, v), 4.0);
    EXPECT_DOUBLE_EQ(g.terminal(x), 0.0);
}

TEST(CIC, IntegrableFlowPasses) {
    const auto g = catalog::linear_flow();
    TimeLattice lat(g.horizon, {4, 4});
    const auto rep = check_cic(g, ControlField::constant(lat, 0, 0), lat, 1e-6);
    EXPECT_TRUE(rep.pass);
    EXPECT_LT(rep.max_residual, 1e-8);
    EXPECT_EQ(rep.evaluations, 16u * 5u);
}

TEST(CIC, ResidualMatchesClosedForm) {
    // X_1 = x1, X_2 = t1: residual |1 - t1|, largest at the first cell center.
    const auto g = catalog::cic_fail();
    TimeLattice lat(g.horizon, {4, 4});
    const auto rep = check_cic(g, ControlField::constant(lat, 0, 0), lat, 1e-6);
    EXPECT_FALSE(rep.pass);
    EXPECT_NEAR(rep.max_residual, 1.0 - 0.125, 1e-8);
    EXPECT_EQ(rep.worst_cell[0], 0);
}

TEST(CIC, TimeDependentIntegrableFlow) {
    // X_1 = t2, X_2 = t1 is the gradient of t1 t2: d X_1/dt2 = d X_2/dt1.
    GameText t;
    t.m = 2;
    t.n = 1;
    t.horizon = catalog::unit_horizon(2);
    t.state_box = Box({-1.0}, {1.0});
    t.dynamics = {{"t2"}, {"t1"}};
    t.U = catalog::pts({0});
    t.V = catalog::pts({0});
    t.A = {1.0, 1.0};
    const auto g = make_game(t);
    TimeLattice lat(g.horizon, {3, 3});
    EXPECT_LT(check_cic(g, ControlField::constant(lat, 0, 0), lat, 1e-6).max_residual, 1e-8);
}

TEST(Bounds, DeclaredConstantsHold) {
    for (const auto& [name, make] : catalog::shipped()) {
        const auto rep = certify_bounds(make(), 2000, 5);
        EXPECT_TRUE(rep.pass) << name << ": " << (rep.violations.empty() ? "" : rep.violations.front());
    }
}

TEST(Bounds, ViolationReported) {
    auto g = catalog::linear();
    g.B = 1.0;  // |x1| reaches 2 on [-2, 2]
    const auto rep = certify_bounds(g, 100);
    EXPECT_FALSE(rep.pass);
    EXPECT_DOUBLE_EQ(rep.max_abs_g, 2.0);
    EXPECT_NEAR(rep.lip_g, 1.0, 1e-12);
}

TEST(Bounds, SampleStreamIsAPrefix) {
    const auto g = catalog::frozen();
    const auto a = certify_bounds(g, 50, 9);
    const auto b = certify_bounds(g, 50, 9);
    EXPECT_EQ(a.max_abs_L, b.max_abs_L);
    EXPECT_LE(a.max_abs_L, certify_bounds(g, 500, 9).max_abs_L);
}
