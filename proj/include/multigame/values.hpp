#pragma once

// Discrete lower and upper value functions by backward dynamic programming
// over the multitime lattice and a state grid.
//
// From lattice node k the generator step goes to k' = min(k + 1, N) (one cell
// along the diagonal, clamped on saturated axes). Per step and state node x:
//
//   lower:  max_u min_v [ L(t_k, x, u, v) * R(k) + V(k', x + sum_a X_a h_a) ]
//   upper:  min_v max_u [ same ]
//
// where h_a = t_{k'}^a - t_k^a and R(k) is the volume charged for running
// cost. The lower value lets v observe the current u (min over strategies
// that see u); the upper value is the symmetric pattern. Ties go to the lowest
// sample index.
//
// Two running-cost regions are available:
//   Shell         R(k) = vol(box k..T) - vol(box k'..T). Telescopes to the full
//                 horizon volume, so the running integral covers every cell.
//   DiagonalCell  R(k) = vol(box k..k'). Charges only the diagonal cells; the
//                 L-shaped remainder reported by remainder_volume is dropped.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "multigame/game.hpp"
#include "multigame/lattice.hpp"
#include "multigame/state_grid.hpp"
#include "multigame/util.hpp"

namespace multigame {

enum class ValueKind { Lower, Upper };
enum class RunningRegion { Shell, DiagonalCell };

inline const char* to_string(ValueKind k) { return k == ValueKind::Lower ? "lower" : "upper"; }
inline const char* to_string(RunningRegion r) { return r == RunningRegion::Shell ? "shell" : "diagonal-cell"; }

struct SolveOptions {
    RunningRegion region = RunningRegion::Shell;
    unsigned threads = 1;
};

/// Geometry of the generator step leaving lattice node k.
struct StepGeometry {
    Node next;
    std::vector<double> h;
    double region_volume = 0.0;
};

inline StepGeometry step_geometry(const TimeLattice& lat, const Node& k, RunningRegion region) {
    StepGeometry s;
    s.next = k;
    for (std::size_t a = 0; a < k.size(); ++a) s.next[a] = std::min(k[a] + 1, lat.steps()[a]);
    const auto t0 = lat.time(k), t1 = lat.time(s.next);
    s.h.resize(k.size());
    for (std::size_t a = 0; a < k.size(); ++a) s.h[a] = t1[a] - t0[a];
    if (region == RunningRegion::Shell)
        s.region_volume = lat.volume_between(k, lat.top()) - lat.volume_between(s.next, lat.top());
    else
        s.region_volume = lat.volume_between(k, s.next);
    return s;
}

/// vol(k..T) - vol(k..k') - vol(k'..T): the part of the remaining horizon that
/// is neither the first diagonal cell nor the tail box. Zero when m = 1.
inline double remainder_volume(const TimeLattice& lat, const Node& k) {
    const auto s = step_geometry(lat, k, RunningRegion::DiagonalCell);
    return lat.volume_between(k, lat.top()) - lat.volume_between(k, s.next) - lat.volume_between(s.next, lat.top());
}

class ValueGrid {
public:
    ValueGrid() = default;
    ValueGrid(ValueKind kind, const TimeLattice& lat, const StateGrid& sg, RunningRegion region)
        : kind_(kind), lat_(lat), sgrid_(sg), region_(region), values_(lat.node_count() * sg.size(), 0.0),
          controls_(lat.node_count() * sg.size()) {}

    ValueKind kind() const { return kind_; }
    const TimeLattice& lattice() const { return lat_; }
    const StateGrid& state_grid() const { return sgrid_; }
    RunningRegion region() const { return region_; }

    std::size_t index(const Node& k, std::size_t s) const { return lat_.flat(k) * sgrid_.size() + s; }
    double value(const Node& k, std::size_t s) const { return values_[index(k, s)]; }
    double& value(const Node& k, std::size_t s) { return values_[index(k, s)]; }
    ControlField::Pair control(const Node& k, std::size_t s) const { return controls_[index(k, s)]; }
    ControlField::Pair& control(const Node& k, std::size_t s) { return controls_[index(k, s)]; }

    std::span<const double> layer(const Node& k) const { return {values_.data() + lat_.flat(k) * sgrid_.size(), sgrid_.size()}; }
    double interpolate(const Node& k, std::span<const double> x) const { return sgrid_.interpolate(layer(k), x); }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    /// Largest remainder_volume over lattice nodes (diagnostic; see header comment).
    double max_remainder_volume = 0.0;

private:
    ValueKind kind_ = ValueKind::Lower;
    TimeLattice lat_;
    StateGrid sgrid_;
    RunningRegion region_ = RunningRegion::Shell;
    std::vector<double> values_;
    std::vector<ControlField::Pair> controls_;
};

/// Feedback responses: for each (lattice node, state node, opponent sample)
/// the own-team sample index. For the lower value the responder is v
/// (opponent u); for the upper value the responder is u (opponent v).
struct StrategyTable {
    ValueKind kind = ValueKind::Lower;
    std::size_t states = 0;
    std::size_t opponents = 0;
    std::vector<std::uint32_t> response;

    std::size_t respond(const TimeLattice& lat, const Node& k, std::size_t s, std::size_t opponent) const {
        return response[(lat.flat(k) * states + s) * opponents + opponent];
    }
};

struct ValueSolution {
    ValueGrid grid;
    StrategyTable strategy;
};

/// Value of one (u, v) pair for the generator step from (k, x).
template <class Continuation>
double step_value(const GameSpec& spec, const TimeLattice& lat, const Node& k, const StepGeometry& geom, std::span<const double> x,
                  std::size_t ui, std::size_t vi, Continuation&& next_value) {
    const auto t = lat.time(k);
    const auto u = spec.U.sample(ui);
    const auto v = spec.V.sample(vi);
    const std::size_t n = x.size();
    std::vector<double> xn(x.begin(), x.end()), f(n);
    for (std::size_t a = 0; a < k.size(); ++a) {
        if (geom.h[a] == 0.0) continue;
        spec.field(a, t, x, u, v, f);
        for (std::size_t i = 0; i < n; ++i) xn[i] += f[i] * geom.h[a];
    }
    return spec.running(t, x, u, v) * geom.region_volume + next_value(std::span<const double>(xn));
}

struct StepChoice {
    double value = 0.0;
    std::size_t u = 0;
    std::size_t v = 0;
};

/// Exact finite min-max (or max-min) scan of the generator step.
/// `responses`, when non-null, receives one entry per opponent sample.
template <class Continuation>
StepChoice solve_step(const GameSpec& spec, const TimeLattice& lat, ValueKind kind, const Node& k, const StepGeometry& geom,
                      std::span<const double> x, Continuation&& next_value, std::uint32_t* responses = nullptr) {
    const std::size_t nu = spec.U.size(), nv = spec.V.size();
    StepChoice best;
    if (kind == ValueKind::Lower) {
        best.value = -std::numeric_limits<double>::infinity();
        for (std::size_t ui = 0; ui < nu; ++ui) {
            double inner = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t vi = 0; vi < nv; ++vi) {
                const double val = step_value(spec, lat, k, geom, x, ui, vi, next_value);
                if (val < inner) {
                    inner = val;
                    arg = vi;
                }
            }
            if (responses) responses[ui] = static_cast<std::uint32_t>(arg);
            if (inner > best.value) best = {inner, ui, arg};
        }
    } else {
        best.value = std::numeric_limits<double>::infinity();
        for (std::size_t vi = 0; vi < nv; ++vi) {
            double inner = -std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t ui = 0; ui < nu; ++ui) {
                const double val = step_value(spec, lat, k, geom, x, ui, vi, next_value);
                if (val > inner) {
                    inner = val;
                    arg = ui;
                }
            }
            if (responses) responses[vi] = static_cast<std::uint32_t>(arg);
            if (inner < best.value) best = {inner, arg, vi};
        }
    }
    return best;
}

inline ValueSolution solve_values(const GameSpec& spec, ValueKind kind, const TimeLattice& lat, const StateGrid& sg,
                                  const SolveOptions& opt = {}) {
    if (lat.dim() != static_cast<std::size_t>(spec.m) || sg.dim() != static_cast<std::size_t>(spec.n))
        throw std::invalid_argument("lattice/state grid dimensions do not match the game");
    ValueSolution sol{ValueGrid(kind, lat, sg, opt.region), {}};
    ValueGrid& vg = sol.grid;
    StrategyTable& st = sol.strategy;
    st.kind = kind;
    st.states = sg.size();
    st.opponents = kind == ValueKind::Lower ? spec.U.size() : spec.V.size();
    st.response.assign(lat.node_count() * sg.size() * st.opponents, 0);

    const Node top = lat.top();
    for (std::size_t s = 0; s < sg.size(); ++s) vg.value(top, s) = spec.terminal(sg.point(s));

    const auto levels = diagonal_levels(lat);
    for (std::size_t li = 1; li < levels.size(); ++li) {
        const auto& level = levels[li];
        std::vector<StepGeometry> geoms;
        geoms.reserve(level.size());
        for (const Node& k : level) {
            geoms.push_back(step_geometry(lat, k, opt.region));
            vg.max_remainder_volume = std::max(vg.max_remainder_volume, remainder_volume(lat, k));
        }
        const std::size_t work = level.size() * sg.size();
        parallel_for(work, opt.threads, [&](std::size_t w) {
            const std::size_t ni = w / sg.size(), s = w % sg.size();
            const Node& k = level[ni];
            const StepGeometry& geom = geoms[ni];
            const auto x = sg.point(s);
            auto cont = [&](std::span<const double> xn) { return vg.interpolate(geom.next, xn); };
            std::uint32_t* resp = st.response.data() + (lat.flat(k) * st.states + s) * st.opponents;
            const auto choice = solve_step(spec, lat, kind, k, geom, x, cont, resp);
            vg.value(k, s) = choice.value;
            vg.control(k, s) = {choice.u, choice.v};
        });
    }
    return sol;
}

inline ValueSolution solve_lower(const GameSpec& spec, const TimeLattice& lat, const StateGrid& sg, const SolveOptions& opt = {}) {
    return solve_values(spec, ValueKind::Lower, lat, sg, opt);
}

inline ValueSolution solve_upper(const GameSpec& spec, const TimeLattice& lat, const StateGrid& sg, const SolveOptions& opt = {}) {
    return solve_values(spec, ValueKind::Upper, lat, sg, opt);
}

// ---------------------------------------------------------------------------
// Dynamic programming residual for multi-cell steps

struct DPPReport {
    std::size_t h_cells = 1;
    double max_residual = 0.0;
    std::size_t points = 0;
    Node worst_node;
    std::size_t worst_state = 0;
};

namespace detail {

/// Game-tree value of `depth` generator steps from (k, x) with exact
/// intermediate states, closing with the stored grid at the last node.
inline double dpp_tree(const GameSpec& spec, const ValueGrid& vg, const Node& k, std::span<const double> x, std::size_t depth) {
    const TimeLattice& lat = vg.lattice();
    if (k == lat.top()) return spec.terminal(x);
    const auto geom = step_geometry(lat, k, vg.region());
    // Intermediate states are projected onto the state box, which is what the
    // clamped interpolation in the solver does implicitly.
    auto cont = [&](std::span<const double> xn) {
        if (depth == 1) return vg.interpolate(geom.next, xn);
        std::vector<double> xp(xn.begin(), xn.end());
        for (std::size_t i = 0; i < xp.size(); ++i) xp[i] = std::clamp(xp[i], vg.state_grid().box().lo[i], vg.state_grid().box().hi[i]);
        return dpp_tree(spec, vg, geom.next, xp, depth - 1);
    };
    return solve_step(spec, lat, vg.kind(), k, geom, x, cont).value;
}

} // namespace detail

/// Recomputes the right-hand side of the dynamic programming identity for a
/// step of h_cells diagonal cells by composing per-cell optima, and compares
/// it with the stored grid. One-cell steps reproduce the grid exactly.
inline DPPReport dpp_residual(const GameSpec& spec, const ValueGrid& vg, std::size_t h_cells, unsigned threads = 1) {
    if (h_cells < 1) throw std::invalid_argument("h_cells must be at least 1");
    const TimeLattice& lat = vg.lattice();
    const StateGrid& sg = vg.state_grid();
    DPPReport rep;
    rep.h_cells = h_cells;
    const std::size_t total = lat.node_count() * sg.size();
    std::vector<double> diffs(total, 0.0);
    parallel_for(total, threads, [&](std::size_t w) {
        const Node k = lat.unflat(w / sg.size());
        const std::size_t s = w % sg.size();
        const double rhs = detail::dpp_tree(spec, vg, k, sg.point(s), h_cells);
        diffs[w] = std::fabs(rhs - vg.value(k, s));
    });
    for (std::size_t w = 0; w < total; ++w) {
        if (diffs[w] > rep.max_residual || rep.worst_node.empty()) {
            if (diffs[w] > rep.max_residual) rep.max_residual = diffs[w];
            rep.worst_node = lat.unflat(w / sg.size());
            rep.worst_state = w % sg.size();
        }
    }
    rep.points = total;
    return rep;
}

// ---------------------------------------------------------------------------
// Boundedness and continuity certificate

struct ValueBoundsReport {
    double D = 0.0;  // C * vol(horizon) + B
    double E = 0.0;  // C
    double max_abs_value = 0.0;
    std::size_t bound_violations = 0;
    std::size_t continuity_pairs = 0;
    std::size_t continuity_violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();  // min of bound - lhs
    /// Violations of the same estimate with vol(box t1..t2) replaced by the
    /// volume actually separating the two remaining horizons,
    /// vol(box t1..T) - vol(box t2..T). Diagnostic only.
    std::size_t shell_continuity_violations = 0;
    bool pass = true;
};

/// Checks |value| <= D everywhere and, on `pairs` random comparable pairs
/// t1 <= t2 per grid, |V(t1,x1) - V(t2,x2)| <= E vol(box t1..t2) + D ||x1 - x2||.
inline ValueBoundsReport certify_value_bounds(const GameSpec& spec, const ValueGrid& lower, const ValueGrid& upper,
                                              std::size_t pairs = 10000, std::uint64_t seed = 1) {
    ValueBoundsReport rep;
    rep.D = spec.C * volume(spec.horizon) + spec.B;
    rep.E = spec.C;
    const double slack = 1e-12 * (1.0 + rep.D);
    Rng rng(seed);
    for (const ValueGrid* vg : {&lower, &upper}) {
        for (double v : vg->values()) {
            rep.max_abs_value = std::max(rep.max_abs_value, std::fabs(v));
            rep.worst_margin = std::min(rep.worst_margin, rep.D - std::fabs(v));
            if (std::fabs(v) > rep.D + slack) ++rep.bound_violations;
        }
        const TimeLattice& lat = vg->lattice();
        const StateGrid& sg = vg->state_grid();
        const Node top = lat.top();
        for (std::size_t p = 0; p < pairs; ++p) {
            Node k1(lat.dim()), k2(lat.dim());
            for (std::size_t a = 0; a < lat.dim(); ++a) {
                k1[a] = static_cast<int>(rng.index(static_cast<std::size_t>(lat.steps()[a] + 1)));
                k2[a] = k1[a] + static_cast<int>(rng.index(static_cast<std::size_t>(lat.steps()[a] - k1[a] + 1)));
            }
            const std::size_t s1 = rng.index(sg.size()), s2 = rng.index(sg.size());
            const double lhs = std::fabs(vg->value(k1, s1) - vg->value(k2, s2));
            const double dx = distance(sg.point(s1), sg.point(s2));
            const double bound = rep.E * lat.volume_between(k1, k2) + rep.D * dx;
            rep.worst_margin = std::min(rep.worst_margin, bound - lhs);
            if (lhs > bound + slack) ++rep.continuity_violations;
            const double shell = lat.volume_between(k1, top) - lat.volume_between(k2, top);
            if (lhs > rep.E * shell + rep.D * dx + slack) ++rep.shell_continuity_violations;
            ++rep.continuity_pairs;
        }
    }
    rep.pass = rep.bound_violations == 0 && rep.continuity_violations == 0;
    return rep;
}

} // namespace multigame
