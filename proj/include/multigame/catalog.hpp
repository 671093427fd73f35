#pragma once

// Named example games. Each one has a matching JSON file under games/.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "multigame/game.hpp"

namespace multigame::catalog {

inline ControlSpace pts(std::vector<double> values) {
    std::vector<std::vector<double>> p;
    for (double v : values) p.push_back({v});
    return ControlSpace::points(p);
}

inline Box unit_horizon(int m) { return Box(std::vector<double>(static_cast<std::size_t>(m), 0.0), std::vector<double>(static_cast<std::size_t>(m), 1.0)); }

inline std::vector<std::vector<std::string>> same_field(int m, const std::string& expr) {
    return std::vector<std::vector<std::string>>(static_cast<std::size_t>(m), std::vector<std::string>{expr});
}

/// X = 0, L = 0, g = 0.
inline GameSpec zero(int m = 2) {
    GameText t;
    t.name = "zero";
    t.m = m;
    t.n = 1;
    t.horizon = unit_horizon(m);
    t.state_box = Box({-1.0}, {1.0});
    t.dynamics = same_field(m, "0");
    t.U = pts({-1, 1});
    t.V = pts({-1, 1});
    t.A.assign(static_cast<std::size_t>(m), 0.0);
    t.B = 0.0;
    t.C = 0.0;
    return make_game(t);
}

/// Frozen state: X = 0, L = (u1 + v1)^2, g = 0, U = V = {-1, 0, 1}.
/// Upper value per unit volume is min_v max_u (u+v)^2 = 1, lower is 0.
inline GameSpec frozen(int m = 2) {
    GameText t;
    t.name = "frozen";
    t.m = m;
    t.n = 1;
    t.horizon = unit_horizon(m);
    t.state_box = Box({-1.0}, {1.0});
    t.dynamics = same_field(m, "0");
    t.running_cost = "(u1 + v1)^2";
    t.U = pts({-1, 0, 1});
    t.V = pts({-1, 0, 1});
    t.A.assign(static_cast<std::size_t>(m), 0.0);
    t.B = 0.0;
    t.C = 4.0;
    return make_game(t);
}

/// X_alpha = u1 + v1 on every axis, L = 0, g = x1, U = V = {-1, 1}.
inline GameSpec linear(int m = 2) {
    GameText t;
    t.name = "linear";
    t.m = m;
    t.n = 1;
    t.horizon = unit_horizon(m);
    t.state_box = Box({-2.0}, {2.0});
    t.dynamics = same_field(m, "u1 + v1");
    t.terminal_cost = "x1";
    t.U = pts({-1, 1});
    t.V = pts({-1, 1});
    t.A.assign(static_cast<std::size_t>(m), 2.0);
    t.B = 2.0;
    t.C = 0.0;
    return make_game(t);
}

/// Separable bilinear running cost L = u1 * v1 on symmetric sets; zero Isaacs gap.
inline GameSpec bilinear(int m = 2) {
    GameText t;
    t.name = "bilinear";
    t.m = m;
    t.n = 1;
    t.horizon = unit_horizon(m);
    t.state_box = Box({-1.0}, {1.0});
    t.dynamics = same_field(m, "0");
    t.running_cost = "u1 * v1";
    t.U = pts({-1, 0, 1});
    t.V = pts({-1, 0, 1});
    t.A.assign(static_cast<std::size_t>(m), 0.0);
    t.B = 0.0;
    t.C = 1.0;
    return make_game(t);
}

/// Linear m-flow X_1 = X_2 = x1 (satisfies CIC); x = x0 exp(s1 + s2).
inline GameSpec linear_flow() {
    GameText t;
    t.name = "linear_flow";
    t.m = 2;
    t.n = 1;
    t.horizon = unit_horizon(2);
    t.state_box = Box({-1.0}, {1.0});
    t.dynamics = {{"x1"}, {"x1"}};
    t.U = pts({0});
    t.V = pts({0});
    t.A = {1.0, 1.0};
    t.B = 0.0;
    t.C = 0.0;
    return make_game(t);
}

/// X_1 = x1, X_2 = t1: the CIC residual is |1 - t1|.
inline GameSpec cic_fail() {
    GameText t;
    t.name = "cic_fail";
    t.m = 2;
    t.n = 1;
    t.horizon = unit_horizon(2);
    t.state_box = Box({-1.0}, {1.0});
    t.dynamics = {{"x1"}, {"t1"}};
    t.U = pts({0});
    t.V = pts({0});
    t.A = {1.0, 1.0};
    t.B = 0.0;
    t.C = 0.0;
    return make_game(t);
}

/// Games whose value functions are compared in the acceptance suite.
inline std::map<std::string, std::function<GameSpec()>> shipped() {
    return {
        {"zero", [] { return zero(); }},
        {"frozen", [] { return frozen(); }},
        {"linear", [] { return linear(); }},
        {"bilinear", [] { return bilinear(); }},
        {"linear_flow", [] { return linear_flow(); }},
        {"cic_fail", [] { return cic_fail(); }},
    };
}

} // namespace multigame::catalog
