#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "multigame/game.hpp"
#include "multigame/lattice.hpp"

namespace multigame {

/// State values x(k) on the nodes of a sub-lattice [lo, hi].
class StateField {
public:
    StateField() = default;
    StateField(const TimeLattice& lat, Node lo, Node hi, int n)
        : lat_(lat), lo_(std::move(lo)), hi_(std::move(hi)), n_(static_cast<std::size_t>(n)),
          x_(lat.node_count() * n_, std::numeric_limits<double>::quiet_NaN()) {}

    const TimeLattice& lattice() const { return lat_; }
    const Node& lo() const { return lo_; }
    const Node& hi() const { return hi_; }
    std::size_t n() const { return n_; }

    std::span<const double> at(const Node& k) const { return {x_.data() + lat_.flat(k) * n_, n_}; }
    std::span<double> at(const Node& k) { return {x_.data() + lat_.flat(k) * n_, n_}; }

    /// Multilinear interpolation at the center of the cell with lower corner k.
    std::vector<double> cell_center(const Node& k) const {
        std::vector<double> c(n_, 0.0);
        const std::size_t m = k.size();
        const std::size_t corners = std::size_t{1} << m;
        Node corner(m);
        for (std::size_t mask = 0; mask < corners; ++mask) {
            for (std::size_t a = 0; a < m; ++a) corner[a] = k[a] + static_cast<int>((mask >> a) & 1U);
            auto x = at(corner);
            for (std::size_t i = 0; i < n_; ++i) c[i] += x[i];
        }
        for (auto& e : c) e /= static_cast<double>(corners);
        return c;
    }

    const std::vector<double>& raw() const { return x_; }

private:
    TimeLattice lat_;
    Node lo_, hi_;
    std::size_t n_ = 0;
    std::vector<double> x_;
};

/// Which predecessor a node is reached from during the upward sweep.
enum class PredecessorPolicy {
    LowestAxis,   // default; the integration path to k runs the highest axes first
    HighestAxis,  // path to k runs axis 1 first
};

/// One midpoint (RK2) step along the lattice edge from node k to k + e_axis,
/// using component X_axis and the control of the edge's cell.
inline std::vector<double> rk2_edge(const GameSpec& spec, const TimeLattice& lat, const ControlField& ctrl, const Node& k,
                                    std::size_t axis, std::span<const double> x) {
    const std::size_t n = x.size();
    const double h = lat.spacing(axis);
    const auto pair = ctrl.edge(k, axis);
    const auto u = spec.U.sample(pair.u);
    const auto v = spec.V.sample(pair.v);
    auto t = lat.time(k);
    std::vector<double> k1(n), k2(n), mid(n), out(n);
    spec.field(axis, t, x, u, v, k1);
    for (std::size_t i = 0; i < n; ++i) mid[i] = x[i] + 0.5 * h * k1[i];
    t[axis] += 0.5 * h;
    spec.field(axis, t, mid, u, v, k2);
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + h * k2[i];
    return out;
}

/// Integrates dx/ds^alpha = X_alpha over the sub-lattice [start, end] by
/// sweeping diagonal levels upward from x(start) = x0.
inline StateField integrate_mflow(const GameSpec& spec, const TimeLattice& lat, const ControlField& ctrl, const Node& start,
                                  std::span<const double> x0, const Node& end,
                                  PredecessorPolicy policy = PredecessorPolicy::LowestAxis) {
    if (!lat.valid(start) || !lat.valid(end) || !leq(start, end)) throw NotComparable("integrate_mflow requires start <= end");
    StateField sf(lat, start, end, spec.n);
    std::copy(x0.begin(), x0.end(), sf.at(start).begin());
    auto levels = diagonal_levels(start, end);
    for (auto it = levels.rbegin() + 1; it != levels.rend(); ++it) {
        for (const Node& k : *it) {
            std::size_t axis = 0;
            if (policy == PredecessorPolicy::LowestAxis) {
                while (k[axis] == start[axis]) ++axis;
            } else {
                axis = k.size() - 1;
                while (k[axis] == start[axis]) --axis;
            }
            Node pred = k;
            --pred[axis];
            const auto x = rk2_edge(spec, lat, ctrl, pred, axis, sf.at(pred));
            std::copy(x.begin(), x.end(), sf.at(k).begin());
        }
    }
    return sf;
}

inline StateField integrate_mflow(const GameSpec& spec, const TimeLattice& lat, const ControlField& ctrl, const Node& start,
                                  std::span<const double> x0) {
    return integrate_mflow(spec, lat, ctrl, start, x0, lat.top());
}

/// Endpoint state after RK2 steps along each edge of the path.
inline std::vector<double> curvilinear_state(const GameSpec& spec, const TimeLattice& lat, const ControlField& ctrl,
                                             const LatticePath& path, std::span<const double> x0) {
    std::vector<double> x(x0.begin(), x0.end());
    for (std::size_t s = 0; s < path.length(); ++s) x = rk2_edge(spec, lat, ctrl, path.nodes[s], path.axis(s), x);
    return x;
}

/// Largest difference between the two extreme predecessor policies over all
/// nodes of [start, end]. Small iff the m-flow is integrable at grid resolution.
inline double path_independence_residual(const GameSpec& spec, const TimeLattice& lat, const ControlField& ctrl,
                                         const Node& start, std::span<const double> x0, const Node& end) {
    const auto a = integrate_mflow(spec, lat, ctrl, start, x0, end, PredecessorPolicy::LowestAxis);
    const auto b = integrate_mflow(spec, lat, ctrl, start, x0, end, PredecessorPolicy::HighestAxis);
    double worst = 0.0;
    for_each_node(start, end, [&](const Node& k) { worst = std::max(worst, distance(a.at(k), b.at(k))); });
    return worst;
}

struct PayoffValue {
    double total = 0.0;
    double running_part = 0.0;
    double terminal_part = 0.0;
};

/// Bolza payoff over the box from node t to the lattice top T: midpoint
/// quadrature of L over every cell plus g(x(T)).
inline PayoffValue payoff(const GameSpec& spec, const TimeLattice& lat, const ControlField& ctrl, const Node& t,
                          std::span<const double> x0) {
    const Node top = lat.top();
    const auto sf = integrate_mflow(spec, lat, ctrl, t, x0, top);
    PayoffValue pv;
    // Ω_tT has positive volume only if t < T on every axis.
    bool has_cells = true;
    for (std::size_t a = 0; a < t.size(); ++a) has_cells = has_cells && t[a] < top[a];
    if (has_cells) {
        Node cell_hi = top;
        for (auto& k : cell_hi) --k;
        const double vol = lat.cell_volume();
        for_each_node(t, cell_hi, [&](const Node& k) {
            const auto pair = ctrl.cell(k);
            const auto xc = sf.cell_center(k);
            pv.running_part += spec.running(lat.cell_center(k), xc, spec.U.sample(pair.u), spec.V.sample(pair.v)) * vol;
        });
    }
    pv.terminal_part = spec.terminal(sf.at(top));
    pv.total = pv.running_part + pv.terminal_part;
    return pv;
}

} // namespace multigame
