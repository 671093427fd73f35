#include <gtest/gtest.h>

#include <cmath>

#include "multigame/catalog.hpp"
#include "multigame/pde.hpp"

using namespace multigame;

namespace {

const Alphabet kState{0, 1, 0, 0, false};

std::vector<ScalarExpr> split(const std::string& g, int m) { return equal_split_terminal(parse_expr(g, kState), m); }

// Transport oracle for H = b (p1_1 + p1_2): every M^alpha = g(x + b s) / 2 with s = sum (1 - t_a).
double drift_error(int N, double* residual = nullptr) {
    const double b = 0.25;
    const auto H = HamiltonianEval::custom("0.25 * (p1_1 + p1_2)", 2, 1, 1.0);
    TimeLattice lat(catalog::unit_horizon(2), {N, N});
    StateGrid sg(Box({-4.0}, {4.0}), {8 * N + 1});
    const auto f = solve_dhjiu(H, split("exp(-x1^2 / 2)", 2), lat, sg);
    double err = 0.0;
    for_each_node(lat.origin(), lat.top(), [&](const Node& k) {
        const auto t = lat.time(k);
        const double s = (1.0 - t[0]) + (1.0 - t[1]);
        for (std::size_t j = 0; j < sg.size(); ++j) {
            const double x = sg.point(j)[0];
            if (std::fabs(x) > 2.5) continue;
            err = std::max(err, std::fabs(f.w(k, j) - 0.5 * std::exp(-0.5 * (x + b * s) * (x + b * s))));
        }
    });
    if (residual) *residual = pde_residual(f, H).max_pde_residual;
    return err;
}

} // namespace

TEST(PDE, EqualSplitTerminal) {
    const auto g = split("x1^2 + 1", 2);
    ASSERT_EQ(g.size(), 2u);
    const std::vector<double> x = {3.0};
    EvalEnv env;
    env.x = x;
    EXPECT_DOUBLE_EQ(g[1].eval(env), 5.0);
}

TEST(PDE, ConstantHamiltonianIsExact) {
    // sum_a dM^a/dt^a + c = 0 with M^a = w: w = g/m + (c/m) sum (1 - t_a).
    const double c = 2.5;
    const auto H = HamiltonianEval::custom("2.5", 2, 1, 3.0);
    TimeLattice lat(catalog::unit_horizon(2), {5, 3});
    StateGrid sg(Box({-1.0}, {1.0}), {11});
    const auto f = solve_dhjiu(H, split("sin(x1)", 2), lat, sg);
    for_each_node(lat.origin(), lat.top(), [&](const Node& k) {
        const auto t = lat.time(k);
        for (std::size_t j = 0; j < sg.size(); ++j) {
            const double x = sg.point(j)[0];
            EXPECT_NEAR(f.w(k, j), 0.5 * std::sin(x) + 0.5 * c * (2.0 - t[0] - t[1]), 1e-12);
        }
    });
    const auto rep = pde_residual(f, H);
    EXPECT_LT(rep.max_pde_residual, 1e-10);
    EXPECT_EQ(rep.terminal_mismatch, 0.0);
}

TEST(PDE, ForwardMarchingFromInitialData) {
    const auto H = HamiltonianEval::custom("1.5", 3, 1, 2.0);
    TimeLattice lat(catalog::unit_horizon(3), {2, 4, 3});
    StateGrid sg(Box({0.0}, {1.0}), {5});
    PDESchemeConfig cfg;
    cfg.direction = MarchDirection::InitialAtZero;
    const auto f = solve_dhjiu(H, split("x1", 3), lat, sg, cfg);
    EXPECT_EQ(f.data_node(), lat.origin());
    for_each_node(lat.origin(), lat.top(), [&](const Node& k) {
        const auto t = lat.time(k);
        for (std::size_t j = 0; j < sg.size(); ++j)
            EXPECT_NEAR(f.w(k, j), sg.point(j)[0] / 3.0 - 0.5 * (t[0] + t[1] + t[2]), 1e-12);
    });
}

TEST(PDE, LinearDriftConvergesAtFirstOrder) {
    double r8 = 0.0, r16 = 0.0;
    const double e8 = drift_error(8, &r8);
    const double e16 = drift_error(16, &r16);
    EXPECT_LT(e16, 0.03);
    EXPECT_GT(e8 / e16, 1.6);
    EXPECT_LT(r16, r8);
}

TEST(PDE, GaugeOffsetsAreTimeIndependent) {
    const auto H = HamiltonianEval::custom("abs(p1_1) + 0.5 * p1_2", 2, 1, 2.0);
    TimeLattice lat(catalog::unit_horizon(2), {4, 4});
    StateGrid sg(Box({-1.0}, {1.0}), {21});
    const auto f = solve_dhjiu(H, {parse_expr("x1", kState), parse_expr("0", kState)}, lat, sg);
    EXPECT_EQ(f.gauge, "user-supplied");
    for (std::size_t j = 0; j < sg.size(); ++j) {
        const double x = sg.point(j)[0];
        EXPECT_NEAR(f.component(0, lat.top(), j), x, 1e-15);
        EXPECT_NEAR(f.component(1, lat.top(), j), 0.0, 1e-15);
        EXPECT_NEAR(f.component(0, lat.origin(), j) - f.component(1, lat.origin(), j), x, 1e-12);
    }
}

TEST(PDE, SchemeIsMonotone) {
    const auto H = HamiltonianEval::custom("abs(p1_1) - 0.7 * p1_2 + 0.3 * sin(3 * p1_1)", 2, 1, 2.0);
    TimeLattice lat(catalog::unit_horizon(2), {4, 4});
    StateGrid sg(Box({-1.0}, {1.0}), {17});
    GeneratingField data(lat, sg, 2);
    for (std::size_t j = 0; j < sg.size(); ++j)
        for (std::size_t a = 0; a < 2; ++a) data.terminal(a)[j] = 0.5 * std::cos(2.0 * sg.point(j)[0]);
    const LaxFriedrichs lf(H, lat, sg, {}, data);
    Rng rng(11);
    for (const Node& k : {Node{1, 1}, Node{4, 2}}) {
        const auto S = lf.open_axes(k);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<std::vector<double>> lo(S.size(), std::vector<double>(sg.size())), hi = lo;
            for (std::size_t a = 0; a < S.size(); ++a)
                for (std::size_t j = 0; j < sg.size(); ++j) {
                    lo[a][j] = rng.uniform(-1.0, 1.0);
                    hi[a][j] = lo[a][j] + (rng.uniform() < 0.3 ? rng.uniform(0.0, 0.5) : 0.0);
                }
            std::vector<std::span<const double>> L, U;
            for (std::size_t a = 0; a < S.size(); ++a) {
                L.emplace_back(lo[a]);
                U.emplace_back(hi[a]);
            }
            const auto out_lo = lf.advance(k, L);
            const auto out_hi = lf.advance(k, U);
            for (std::size_t j = 0; j < sg.size(); ++j) EXPECT_LE(out_lo[j], out_hi[j] + 1e-13);
        }
    }
}

TEST(PDE, ComparisonOfTerminalData) {
    const auto H = HamiltonianEval::custom("abs(p1_1) - 0.5 * abs(p1_2)", 2, 1, 2.0);
    TimeLattice lat(catalog::unit_horizon(2), {6, 6});
    StateGrid sg(Box({-2.0}, {2.0}), {41});
    const auto lo = solve_dhjiu(H, split("min(x1, 0.5)", 2), lat, sg);
    const auto hi = solve_dhjiu(H, split("max(x1, 0.5 * x1 + 0.2)", 2), lat, sg);
    for (std::size_t i = 0; i < lo.w_values().size(); ++i) EXPECT_LE(lo.w_values()[i], hi.w_values()[i] + 1e-12);
}

TEST(PDE, ThetaBelowBoundIsRejected) {
    const auto H = HamiltonianEval::custom("3 * abs(p1_1)", 1, 1, 3.0);
    TimeLattice lat(catalog::unit_horizon(1), {4});
    StateGrid sg(Box({-1.0}, {1.0}), {9});
    GeneratingField data(lat, sg, 1);
    PDESchemeConfig cfg;
    cfg.theta = {1.0};
    EXPECT_THROW(LaxFriedrichs(H, lat, sg, cfg, data), MonotonicityViolated);
    cfg.theta = {3.5};
    const LaxFriedrichs user(H, lat, sg, cfg, data);
    // tau = 0.25, rate = 3.5 / 0.25: ceil(0.25 * 14 / 0.9) = 4 sub-steps.
    EXPECT_EQ(user.substeps({0}), 4u);
    const LaxFriedrichs lf(H, lat, sg, {}, data);
    EXPECT_NEAR(lf.theta_bound()[0], 3.0, 1e-6);
    EXPECT_NEAR(lf.theta()[0], 4.5, 1e-5);
}

TEST(PDE, FrozenGameReconstructsUpperValue) {
    // H+ = 1 and g = 0: every M^a = (2 - t1 - t2) / 2, and the generating
    // identity returns the upper value (1 - t1)(1 - t2) along any control path.
    const auto g = catalog::frozen();
    TimeLattice lat(g.horizon, {4, 4});
    StateGrid sg(g.state_box, {9});
    const auto f = solve_dhjiu(HamiltonianEval::upper(g), equal_split_terminal(g.g, 2), lat, sg);
    const auto up = solve_upper(g, lat, sg);
    const std::vector<double> x0 = {0.3};
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto ctrl = ControlField::random(lat, g, seed);
        EXPECT_NEAR(reconstruct_value(f, g, ctrl, lat.origin(), x0), 1.0, 1e-12);
        EXPECT_NEAR(reconstruct_value(f, g, ctrl, {2, 1}, x0), 0.5 * 0.75, 1e-12);
    }
    EXPECT_LT(generating_residual(f, up.grid, g, 30, 4), 1e-12);
}

TEST(PDE, ThreadCountDoesNotChangeResults) {
    const auto H = HamiltonianEval::custom("abs(p1_1) + 0.2 * p1_2 * x1", 2, 1, 2.0);
    TimeLattice lat(catalog::unit_horizon(2), {5, 5});
    StateGrid sg(Box({-1.0}, {1.0}), {33});
    PDESchemeConfig one, four;
    four.threads = 4;
    const auto a = solve_dhjiu(H, split("x1^2", 2), lat, sg, one);
    const auto b = solve_dhjiu(H, split("x1^2", 2), lat, sg, four);
    EXPECT_EQ(a.w_values(), b.w_values());
}
