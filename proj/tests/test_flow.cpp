#include <gtest/gtest.h>

#include <cmath>

#include "multigame/catalog.hpp"
#include "multigame/flow.hpp"

using namespace multigame;

TEST(Flow, LinearFlowMatchesExponential) {
    const auto g = catalog::linear_flow();
    for (int N : {8, 16}) {
        TimeLattice lat(g.horizon, {N, N});
        const std::vector<double> x0 = {0.5};
        const auto sf = integrate_mflow(g, lat, ControlField::constant(lat, 0, 0), lat.origin(), x0);
        double err = 0.0;
        for_each_node(lat.origin(), lat.top(), [&](const Node& k) {
            const auto t = lat.time(k);
            err = std::max(err, std::fabs(sf.at(k)[0] - 0.5 * std::exp(t[0] + t[1])));
        });
        // RK2 local error h^3/6 per step, 2N steps: global error below e^2 h^2 / 3.
        const double h = 1.0 / N;
        EXPECT_LT(err, 0.5 * std::exp(2.0) * h * h / 3.0) << N;
    }
}

TEST(Flow, SecondOrderConvergence) {
    const auto g = catalog::linear_flow();
    auto err = [&](int N) {
        TimeLattice lat(g.horizon, {N, N});
        const std::vector<double> x0 = {1.0};
        const auto sf = integrate_mflow(g, lat, ControlField::constant(lat, 0, 0), lat.origin(), x0);
        return std::fabs(sf.at(lat.top())[0] - std::exp(2.0));
    };
    const double ratio = err(16) / err(32);
    EXPECT_GT(ratio, 3.5);
    EXPECT_LT(ratio, 4.5);
}

TEST(Flow, PathIndependenceForIntegrableFlow) {
    const auto g = catalog::linear_flow();
    TimeLattice lat(g.horizon, {6, 6});
    const std::vector<double> x0 = {0.3};
    EXPECT_LT(path_independence_residual(g, lat, ControlField::constant(lat, 0, 0), lat.origin(), x0, lat.top()), 1e-14);
}

TEST(Flow, PathDependenceForNonIntegrableFlow) {
    // X_1 = x1, X_2 = t1. Along t2 first then t1: x = x0 e^{t1}. Along t1 first
    // then t2: x = x0 e^{t1} + t1 t2. The two endpoints differ by about 1 at (1,1).
    const auto g = catalog::cic_fail();
    TimeLattice lat(g.horizon, {16, 16});
    const std::vector<double> x0 = {0.0};
    const double r = path_independence_residual(g, lat, ControlField::constant(lat, 0, 0), lat.origin(), x0, lat.top());
    EXPECT_NEAR(r, 1.0, 0.01);
}

TEST(Flow, CurvilinearStateMatchesSweep) {
    const auto g = catalog::linear();
    TimeLattice lat(g.horizon, {4, 4});
    const auto ctrl = ControlField::random(lat, g, 4);
    const std::vector<double> x0 = {0.0};
    const auto sf = integrate_mflow(g, lat, ctrl, lat.origin(), x0);
    // LowestAxis: the node is reached from k - e_1, so the path runs axis 2 first.
    const auto path = monotone_path(lat.origin(), lat.top(), {1, 0});
    const auto x = curvilinear_state(g, lat, ctrl, path, x0);
    EXPECT_DOUBLE_EQ(x[0], sf.at(lat.top())[0]);
}

TEST(Flow, LinearGameStateIsSumOfEdgeControls) {
    const auto g = catalog::linear();
    TimeLattice lat(g.horizon, {2, 2});
    // u = 1, v = 1 on every cell: x moves 2 per unit time along each axis.
    const auto ctrl = ControlField::constant(lat, 1, 1);
    const std::vector<double> x0 = {-1.0};
    const auto sf = integrate_mflow(g, lat, ctrl, lat.origin(), x0);
    EXPECT_DOUBLE_EQ(sf.at({1, 2})[0], -1.0 + 2.0 * 1.5);
}

TEST(Flow, PayoffOfFrozenGame) {
    const auto g = catalog::frozen();
    TimeLattice lat(g.horizon, {4, 4});
    const std::vector<double> x0 = {0.2};
    // u = 1, v = 1: L = 4 on every cell of the unit square.
    EXPECT_DOUBLE_EQ(payoff(g, lat, ControlField::constant(lat, 2, 2), lat.origin(), x0).total, 4.0);
    // Sub-box from (2, 1): area 0.5 * 0.75.
    EXPECT_DOUBLE_EQ(payoff(g, lat, ControlField::constant(lat, 2, 2), {2, 1}, x0).total, 4.0 * 0.375);
    // Degenerate box: no running part.
    EXPECT_DOUBLE_EQ(payoff(g, lat, ControlField::constant(lat, 2, 2), {4, 1}, x0).running_part, 0.0);
}

TEST(Flow, PayoffTerminalPart) {
    const auto g = catalog::linear();
    TimeLattice lat(g.horizon, {4, 4});
    const std::vector<double> x0 = {0.25};
    // u = -1, v = 1: no motion, payoff = g(x0) = x0.
    EXPECT_DOUBLE_EQ(payoff(g, lat, ControlField::constant(lat, 0, 1), lat.origin(), x0).total, 0.25);
}

TEST(Flow, RejectsIncomparableNodes) {
    const auto g = catalog::linear();
    TimeLattice lat(g.horizon, {2, 2});
    const std::vector<double> x0 = {0.0};
    EXPECT_THROW(integrate_mflow(g, lat, ControlField::constant(lat, 0, 0), {1, 0}, x0, {0, 2}), NotComparable);
}
