#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "multigame/catalog.hpp"
#include "multigame/values.hpp"

using namespace multigame;

namespace {

GameSpec quadratic_game() {
    GameText t;
    t.name = "quadratic";
    t.m = 2;
    t.n = 1;
    t.horizon = catalog::unit_horizon(2);
    t.state_box = Box({-2.0}, {2.0});
    t.dynamics = catalog::same_field(2, "u1 + v1");
    t.running_cost = "u1 * x1 + v1";
    t.terminal_cost = "x1^2 - 0.5 * x1";
    t.U = catalog::pts({-1, 1});
    t.V = catalog::pts({-1, 1});
    t.A = {2.0, 2.0};
    t.B = 6.0;
    t.C = 3.0;
    return make_game(t);
}

// Full game tree on the 2x2 lattice of the unit square. Every reachable state
// is a multiple of 1/2 inside [-2, 2] after projection, so it sits on the
// state grid and no interpolation is involved.
double tree_value(bool lower, int k1, int k2, double x) {
    x = std::clamp(x, -2.0, 2.0);
    if (k1 == 2 && k2 == 2) return x * x - 0.5 * x;
    const int n1 = std::min(k1 + 1, 2), n2 = std::min(k2 + 1, 2);
    const double h1 = 0.5 * (n1 - k1), h2 = 0.5 * (n2 - k2);
    const double rest = (1.0 - 0.5 * k1) * (1.0 - 0.5 * k2) - (1.0 - 0.5 * n1) * (1.0 - 0.5 * n2);
    auto q = [&](double u, double v) { return (u * x + v) * rest + tree_value(lower, n1, n2, x + (u + v) * (h1 + h2)); };
    const double c[2] = {-1.0, 1.0};
    if (lower) {
        double best = -INFINITY;
        for (double u : c) best = std::max(best, std::min(q(u, -1.0), q(u, 1.0)));
        return best;
    }
    double best = INFINITY;
    for (double v : c) best = std::min(best, std::max(q(-1.0, v), q(1.0, v)));
    return best;
}

} // namespace

TEST(Values, StepGeometryClampsSaturatedAxes) {
    TimeLattice lat(catalog::unit_horizon(2), {4, 2});
    const auto s = step_geometry(lat, {3, 2}, RunningRegion::Shell);
    EXPECT_EQ(s.next, (Node{4, 2}));
    EXPECT_DOUBLE_EQ(s.h[0], 0.25);
    EXPECT_DOUBLE_EQ(s.h[1], 0.0);
    EXPECT_DOUBLE_EQ(s.region_volume, 0.0);
    const auto d = step_geometry(lat, {0, 0}, RunningRegion::DiagonalCell);
    EXPECT_DOUBLE_EQ(d.region_volume, 0.125);
    const auto sh = step_geometry(lat, {0, 0}, RunningRegion::Shell);
    EXPECT_DOUBLE_EQ(sh.region_volume, 1.0 - 0.75 * 0.5);
}

TEST(Values, RemainderVolume) {
    TimeLattice lat(catalog::unit_horizon(2), {8, 8});
    EXPECT_DOUBLE_EQ(remainder_volume(lat, lat.origin()), 1.0 - 1.0 / 64 - 49.0 / 64);
    TimeLattice line(catalog::unit_horizon(1), {8});
    EXPECT_DOUBLE_EQ(remainder_volume(line, {3}), 0.0);
}

TEST(Values, MatchesGameTreeOnSmallLattice) {
    const auto g = quadratic_game();
    TimeLattice lat(g.horizon, {2, 2});
    StateGrid sg(g.state_box, {9});
    const auto lo = solve_lower(g, lat, sg);
    const auto up = solve_upper(g, lat, sg);
    for_each_node(lat.origin(), lat.top(), [&](const Node& k) {
        for (std::size_t s = 0; s < sg.size(); ++s) {
            const double x = sg.point(s)[0];
            EXPECT_NEAR(lo.grid.value(k, s), tree_value(true, k[0], k[1], x), 1e-12) << k[0] << k[1] << " x=" << x;
            EXPECT_NEAR(up.grid.value(k, s), tree_value(false, k[0], k[1], x), 1e-12) << k[0] << k[1] << " x=" << x;
        }
    });
}

TEST(Values, FrozenGameClosedForm) {
    // min_v max_u (u + v)^2 = 1 and max_u min_v (u + v)^2 = 0 on {-1, 0, 1}.
    const auto g = catalog::frozen();
    TimeLattice lat(g.horizon, {6, 6});
    StateGrid sg(g.state_box, {5});
    const auto up = solve_upper(g, lat, sg);
    const auto lo = solve_lower(g, lat, sg);
    for_each_node(lat.origin(), lat.top(), [&](const Node& k) {
        const auto t = lat.time(k);
        const double rest = (1.0 - t[0]) * (1.0 - t[1]);
        for (std::size_t s = 0; s < sg.size(); ++s) {
            EXPECT_NEAR(up.grid.value(k, s), rest, 1e-12);
            EXPECT_EQ(lo.grid.value(k, s), 0.0);
        }
    });
}

TEST(Values, DiagonalCellRegionChargesOnlyTheDiagonal) {
    const auto g = catalog::frozen();
    TimeLattice lat(g.horizon, {4, 4});
    StateGrid sg(g.state_box, {3});
    const auto up = solve_upper(g, lat, sg, {RunningRegion::DiagonalCell, 1});
    EXPECT_NEAR(up.grid.value(lat.origin(), 1), 4 * (1.0 / 16), 1e-12);
    EXPECT_EQ(up.grid.region(), RunningRegion::DiagonalCell);
}

TEST(Values, LinearGameValueIsTheState) {
    // Either player can cancel the other, so both values equal x.
    const auto g = catalog::linear();
    TimeLattice lat(g.horizon, {5, 5});
    StateGrid sg(g.state_box, {17});
    for (auto kind : {ValueKind::Lower, ValueKind::Upper}) {
        const auto sol = solve_values(g, kind, lat, sg);
        for_each_node(lat.origin(), lat.top(), [&](const Node& k) {
            for (std::size_t s = 0; s < sg.size(); ++s) EXPECT_NEAR(sol.grid.value(k, s), sg.point(s)[0], 1e-12);
        });
    }
}

TEST(Values, LowerNeverExceedsUpper) {
    const auto g = quadratic_game();
    TimeLattice lat(g.horizon, {4, 4});
    StateGrid sg(g.state_box, {17});
    const auto lo = solve_lower(g, lat, sg);
    const auto up = solve_upper(g, lat, sg);
    for (std::size_t i = 0; i < lo.grid.values().size(); ++i) EXPECT_LE(lo.grid.values()[i], up.grid.values()[i] + 1e-12);
}

TEST(Values, TerminalShiftAndPositiveScaling) {
    auto base = quadratic_game();
    TimeLattice lat(base.horizon, {3, 3});
    StateGrid sg(base.state_box, {9});
    const auto ref = solve_upper(base, lat, sg);

    auto shifted = base;
    shifted.g = parse_expr("x1^2 - 0.5 * x1 + 3", Alphabet{0, 1, 0, 0, false});
    const auto sh = solve_upper(shifted, lat, sg);

    auto scaled = base;
    scaled.g = parse_expr("2.5 * (x1^2 - 0.5 * x1)", Alphabet{0, 1, 0, 0, false});
    scaled.L = parse_expr("2.5 * (u1 * x1 + v1)", base.alphabet());
    const auto sc = solve_upper(scaled, lat, sg);

    for (std::size_t i = 0; i < ref.grid.values().size(); ++i) {
        EXPECT_NEAR(sh.grid.values()[i], ref.grid.values()[i] + 3.0, 1e-12);
        EXPECT_NEAR(sc.grid.values()[i], 2.5 * ref.grid.values()[i], 1e-12);
    }
}

TEST(Values, StrategyTableRecordsResponses) {
    const auto g = catalog::frozen();
    TimeLattice lat(g.horizon, {2, 2});
    StateGrid sg(g.state_box, {3});
    const auto up = solve_upper(g, lat, sg);
    // u answers v = -1 with -1, v = 0 with -1 (tie, lowest index), v = 1 with 1.
    EXPECT_EQ(up.strategy.respond(lat, {0, 0}, 1, 0), 0u);
    EXPECT_EQ(up.strategy.respond(lat, {0, 0}, 1, 1), 0u);
    EXPECT_EQ(up.strategy.respond(lat, {0, 0}, 1, 2), 2u);
    // The saddle choice for the upper value is v = 0 (index 1).
    EXPECT_EQ(up.grid.control({0, 0}, 1).v, 1u);
}

TEST(Values, ThreadCountDoesNotChangeResults) {
    const auto g = quadratic_game();
    TimeLattice lat(g.horizon, {4, 4});
    StateGrid sg(g.state_box, {33});
    const auto a = solve_lower(g, lat, sg, {RunningRegion::Shell, 1});
    const auto b = solve_lower(g, lat, sg, {RunningRegion::Shell, 4});
    EXPECT_EQ(a.grid.values(), b.grid.values());
}

TEST(Values, OneCellResidualIsZero) {
    const auto g = quadratic_game();
    TimeLattice lat(g.horizon, {4, 4});
    StateGrid sg(g.state_box, {17});
    const auto up = solve_upper(g, lat, sg);
    EXPECT_EQ(dpp_residual(g, up.grid, 1).max_residual, 0.0);
}

TEST(Values, MultiCellResidualOnGridAlignedGame) {
    // States move by multiples of the grid spacing, so composing steps with
    // exact states reproduces the stored values.
    const auto g = quadratic_game();
    TimeLattice lat(g.horizon, {4, 4});
    StateGrid sg(g.state_box, {9});
    const auto lo = solve_lower(g, lat, sg);
    const auto rep = dpp_residual(g, lo.grid, 3, 2);
    EXPECT_LT(rep.max_residual, 1e-12);
    EXPECT_EQ(rep.points, lat.node_count() * sg.size());
}

TEST(Values, BoundsCertificateForLinearGame) {
    const auto g = catalog::linear();
    TimeLattice lat(g.horizon, {4, 4});
    StateGrid sg(g.state_box, {9});
    const auto lo = solve_lower(g, lat, sg);
    const auto up = solve_upper(g, lat, sg);
    const auto rep = certify_value_bounds(g, lo.grid, up.grid, 2000);
    EXPECT_TRUE(rep.pass);
    EXPECT_DOUBLE_EQ(rep.D, 2.0);
    EXPECT_DOUBLE_EQ(rep.max_abs_value, 2.0);
    EXPECT_EQ(rep.continuity_pairs, 4000u);
}

TEST(Values, ShellEstimateHoldsForFrozenGame) {
    const auto g = catalog::frozen();
    TimeLattice lat(g.horizon, {6, 6});
    StateGrid sg(g.state_box, {5});
    const auto lo = solve_lower(g, lat, sg);
    const auto up = solve_upper(g, lat, sg);
    const auto rep = certify_value_bounds(g, lo.grid, up.grid, 3000);
    EXPECT_EQ(rep.bound_violations, 0u);
    EXPECT_EQ(rep.shell_continuity_violations, 0u);
}

TEST(Values, RejectsMismatchedGrids) {
    const auto g = catalog::linear();
    TimeLattice lat(catalog::unit_horizon(3), {2, 2, 2});
    StateGrid sg(g.state_box, {3});
    EXPECT_THROW(solve_lower(g, lat, sg), std::invalid_argument);
}
