#pragma once

// Generating vector fields M^alpha(t, x) for the divergence-type equation
//
//   sum_alpha dM^alpha/dt^alpha + H(t, x, dM/dx) = 0,   M^alpha(T, x) = g^alpha(x),
//
// solved by diagonal-level marching in multitime and a Lax-Friedrichs
// discretization in state.
//
// Gauge. Write M^alpha = w + d^alpha(x) with d^alpha = g^alpha - mean_beta g^beta.
// The offsets are time independent, so the equation becomes a scalar one for
// w whose costate column alpha is grad w + grad d^alpha. When all g^alpha
// coincide (the equal-components gauge, e.g. g^alpha = g/m) every M^alpha
// equals w and the columns are identical.
//
// Node update (backward marching). With S the axes on which k can still
// advance,
//
//   wbar = sum_S w(k + e_a)/D_a / sum_S 1/D_a,   tau = (|S|/m) / sum_S 1/D_a,
//   w(k) = wbar + tau [ H(t_k, x, (D+ + D-)/2) + sum_i theta_i (D+_i - D-_i)/2 ],
//
// split into equal sub-steps so that tau_sub * sum_i theta_i/h_i <= sigma.
// The |S|/m factor charges each missing axis its 1/m share of H, which keeps
// solutions linear in t exact on the saturated faces. At a state-box face the
// missing outer difference is taken as zero, so only the interior one-sided
// difference enters; this keeps the update monotone on the boundary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "multigame/errors.hpp"
#include "multigame/expr.hpp"
#include "multigame/flow.hpp"
#include "multigame/game.hpp"
#include "multigame/hamiltonian.hpp"
#include "multigame/lattice.hpp"
#include "multigame/state_grid.hpp"
#include "multigame/util.hpp"
#include "multigame/values.hpp"

namespace multigame {

enum class MarchDirection {
    TerminalAtT,   // data on the top node, march toward the origin
    InitialAtZero, // data on the origin, march toward the top
};

inline const char* to_string(MarchDirection d) { return d == MarchDirection::TerminalAtT ? "terminal-at-T" : "initial-at-0"; }

struct PDESchemeConfig {
    std::vector<double> theta;  // per state axis; empty selects theta_factor x sampled bound
    double theta_factor = 1.5;
    double sigma = 0.9;
    MarchDirection direction = MarchDirection::TerminalAtT;
    std::size_t theta_samples = 256;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

class GeneratingField {
public:
    GeneratingField() = default;
    GeneratingField(const TimeLattice& lat, const StateGrid& sg, int m)
        : lat_(lat), sgrid_(sg), m_(m), w_(lat.node_count() * sg.size(), 0.0),
          offset_(static_cast<std::size_t>(m) * sg.size(), 0.0), terminal_(static_cast<std::size_t>(m) * sg.size(), 0.0) {}

    const TimeLattice& lattice() const { return lat_; }
    const StateGrid& state_grid() const { return sgrid_; }
    int m() const { return m_; }

    double w(const Node& k, std::size_t s) const { return w_[lat_.flat(k) * sgrid_.size() + s]; }
    std::span<const double> w_layer(const Node& k) const { return {w_.data() + lat_.flat(k) * sgrid_.size(), sgrid_.size()}; }
    std::span<double> w_layer(const Node& k) { return {w_.data() + lat_.flat(k) * sgrid_.size(), sgrid_.size()}; }
    const std::vector<double>& w_values() const { return w_; }

    /// d^alpha = g^alpha - mean g, per state node.
    std::span<const double> offset(std::size_t alpha) const { return {offset_.data() + alpha * sgrid_.size(), sgrid_.size()}; }
    std::span<double> offset(std::size_t alpha) { return {offset_.data() + alpha * sgrid_.size(), sgrid_.size()}; }
    /// Declared data g^alpha at state nodes.
    std::span<const double> terminal(std::size_t alpha) const { return {terminal_.data() + alpha * sgrid_.size(), sgrid_.size()}; }
    std::span<double> terminal(std::size_t alpha) { return {terminal_.data() + alpha * sgrid_.size(), sgrid_.size()}; }

    double component(std::size_t alpha, const Node& k, std::size_t s) const { return w(k, s) + offset(alpha)[s]; }

    /// M^alpha(t_k, x) by multilinear interpolation in x.
    double component_at(std::size_t alpha, const Node& k, std::span<const double> x) const {
        return sgrid_.interpolate(w_layer(k), x) + sgrid_.interpolate(offset(alpha), x);
    }

    /// Node carrying the data: the top for terminal marching, the origin otherwise.
    Node data_node() const { return direction == MarchDirection::TerminalAtT ? lat_.top() : lat_.origin(); }

    std::string gauge = "equal-components";
    MarchDirection direction = MarchDirection::TerminalAtT;
    double C_hyp = 0.0;
    std::vector<double> theta;
    std::vector<double> theta_bound;  // sampled max |dH/dp_i|
    std::size_t max_substeps = 1;

private:
    TimeLattice lat_;
    StateGrid sgrid_;
    int m_ = 0;
    std::vector<double> w_;
    std::vector<double> offset_;
    std::vector<double> terminal_;
};

/// The marching operator of the scheme. Exposed so that monotonicity can be
/// probed one node at a time.
class LaxFriedrichs {
public:
    LaxFriedrichs(const HamiltonianEval& H, const TimeLattice& lat, const StateGrid& sg, const PDESchemeConfig& cfg,
                  const GeneratingField& data)
        : H_(H), lat_(lat), sg_(sg), cfg_(cfg), m_(static_cast<std::size_t>(lat.dim())), n_(sg.dim()) {
        if (H.m() != static_cast<int>(m_) || H.n() != static_cast<int>(n_))
            throw std::invalid_argument("Hamiltonian shape does not match the lattice and state grid");
        if (!(cfg.sigma > 0.0 && cfg.sigma <= 1.0)) throw std::invalid_argument("sigma must lie in (0, 1]");
        // Gradients of the gauge offsets, same stencil as the state differences.
        grad_offset_.assign(m_ * sg.size() * n_, 0.0);
        for (std::size_t a = 0; a < m_; ++a) {
            const auto d = data.offset(a);
            for (std::size_t s = 0; s < sg.size(); ++s)
                for (std::size_t i = 0; i < n_; ++i) {
                    const auto [dp, dm] = differences(d, s, i);
                    grad_offset_[(a * sg.size() + s) * n_ + i] = 0.5 * (dp + dm);
                }
        }
        estimate_theta(data);
    }

    const std::vector<double>& theta() const { return theta_; }
    const std::vector<double>& theta_bound() const { return bound_; }

    /// Axes along which node k has a marching neighbour.
    std::vector<std::size_t> open_axes(const Node& k) const {
        std::vector<std::size_t> S;
        for (std::size_t a = 0; a < m_; ++a) {
            const bool open = cfg_.direction == MarchDirection::TerminalAtT ? k[a] < lat_.steps()[a] : k[a] > 0;
            if (open) S.push_back(a);
        }
        return S;
    }

    /// Neighbour node along axis a in the marching direction.
    Node neighbour(const Node& k, std::size_t a) const {
        Node j = k;
        j[a] += cfg_.direction == MarchDirection::TerminalAtT ? 1 : -1;
        return j;
    }

    std::size_t substeps(const Node& k) const {
        const double tau = step_tau(open_axes(k));
        double rate = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            if (sg_.counts()[i] > 1) rate += theta_[i] / sg_.spacing(i);
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(tau * rate / cfg_.sigma - 1e-12)));
    }

    /// New layer at node k from the layers of its neighbours, one per entry of open_axes(k).
    std::vector<double> advance(const Node& k, const std::vector<std::span<const double>>& layers) const {
        const auto S = open_axes(k);
        if (S.empty() || layers.size() != S.size()) throw std::invalid_argument("advance needs one layer per open axis");
        double inv = 0.0;
        for (std::size_t a : S) inv += 1.0 / lat_.spacing(a);
        std::vector<double> cur(sg_.size(), 0.0);
        for (std::size_t s = 0; s < sg_.size(); ++s) {
            double acc = 0.0;
            for (std::size_t j = 0; j < S.size(); ++j) acc += layers[j][s] / lat_.spacing(S[j]);
            cur[s] = acc / inv;
        }
        const double tau = step_tau(S);
        const std::size_t nsub = substeps(k);
        const double dt = tau / static_cast<double>(nsub);
        const double sign = cfg_.direction == MarchDirection::TerminalAtT ? 1.0 : -1.0;
        const auto t = lat_.time(k);
        std::vector<double> next(sg_.size());
        CostateMatrix p(static_cast<int>(n_), static_cast<int>(m_));
        for (std::size_t step = 0; step < nsub; ++step) {
            for (std::size_t s = 0; s < sg_.size(); ++s) {
                const auto x = sg_.point(s);
                double visc = 0.0;
                for (std::size_t i = 0; i < n_; ++i) {
                    const auto [dp, dm] = differences(cur, s, i);
                    visc += theta_[i] * 0.5 * (dp - dm);
                    for (std::size_t a = 0; a < m_; ++a)
                        p.at(static_cast<int>(i), static_cast<int>(a)) = 0.5 * (dp + dm) + grad_offset_[(a * sg_.size() + s) * n_ + i];
                }
                next[s] = cur[s] + dt * (sign * H_(t, x, p) + visc);
            }
            cur.swap(next);
        }
        return cur;
    }

private:
    const HamiltonianEval& H_;
    const TimeLattice& lat_;
    const StateGrid& sg_;
    PDESchemeConfig cfg_;
    std::size_t m_, n_;
    std::vector<double> grad_offset_;
    std::vector<double> theta_, bound_;

    double step_tau(const std::vector<std::size_t>& S) const {
        double inv = 0.0;
        for (std::size_t a : S) inv += 1.0 / lat_.spacing(a);
        return inv > 0.0 ? (static_cast<double>(S.size()) / static_cast<double>(m_)) / inv : 0.0;
    }

    /// Forward and backward differences of layer `f` at state node s along axis i.
    /// A difference that would leave the box is zero.
    std::pair<double, double> differences(std::span<const double> f, std::size_t s, std::size_t i) const {
        const int c = sg_.counts()[i];
        if (c < 2) return {0.0, 0.0};
        const int j = static_cast<int>(s / sg_.stride(i)) % c;
        const double h = sg_.spacing(i);
        const std::size_t st = sg_.stride(i);
        const double dp = j + 1 < c ? (f[s + st] - f[s]) / h : 0.0;
        const double dm = j > 0 ? (f[s] - f[s - st]) / h : 0.0;
        return {dp, dm};
    }

    // theta_i >= sup |H(p + eps e_i) - H(p)| / eps, sampled over the costate
    // range suggested by the data layer, with e_i moving every column.
    void estimate_theta(const GeneratingField& data) {
        double range = 1.0;
        for (std::size_t a = 0; a < m_; ++a) {
            const auto g = data.terminal(a);
            for (std::size_t s = 0; s < sg_.size(); ++s)
                for (std::size_t i = 0; i < n_; ++i) {
                    const auto [dp, dm] = differences(g, s, i);
                    range = std::max({range, std::fabs(dp), std::fabs(dm)});
                }
        }
        range *= 2.0;
        Rng rng(cfg_.seed);
        bound_.assign(n_, 0.0);
        CostateMatrix p(static_cast<int>(n_), static_cast<int>(m_)), q = p;
        std::vector<double> t(m_);
        for (std::size_t k = 0; k < cfg_.theta_samples; ++k) {
            for (std::size_t a = 0; a < m_; ++a) t[a] = rng.uniform(lat_.box().lo[a], lat_.box().hi[a]);
            const std::size_t s = rng.index(sg_.size());
            const auto x = sg_.point(s);
            for (std::size_t i = 0; i < n_; ++i) {
                const double base = rng.uniform(-range, range);
                for (std::size_t a = 0; a < m_; ++a)
                    p.at(static_cast<int>(i), static_cast<int>(a)) = base + grad_offset_[(a * sg_.size() + s) * n_ + i];
            }
            const double h0 = H_(t, x, p);
            for (std::size_t i = 0; i < n_; ++i) {
                q = p;
                const double eps = 1e-6 * (1.0 + std::fabs(p.at(static_cast<int>(i), 0)));
                for (std::size_t a = 0; a < m_; ++a) q.at(static_cast<int>(i), static_cast<int>(a)) += eps;
                bound_[i] = std::max(bound_[i], std::fabs(H_(t, x, q) - h0) / eps);
            }
        }
        if (cfg_.theta.empty()) {
            theta_.resize(n_);
            for (std::size_t i = 0; i < n_; ++i) theta_[i] = cfg_.theta_factor * bound_[i];
        } else {
            if (cfg_.theta.size() != n_) throw std::invalid_argument("theta needs one entry per state axis");
            theta_ = cfg_.theta;
            for (std::size_t i = 0; i < n_; ++i)
                if (theta_[i] < bound_[i])
                    throw MonotonicityViolated("theta[" + std::to_string(i) + "] = " + std::to_string(theta_[i]) +
                                               " is below the sampled bound " + std::to_string(bound_[i]));
        }
    }
};

/// g^alpha given by node values (m layers over the state grid).
inline GeneratingField solve_dhjiu_values(const HamiltonianEval& H, const std::vector<std::vector<double>>& data,
                                          const TimeLattice& lat, const StateGrid& sg, const PDESchemeConfig& cfg = {}) {
    const std::size_t m = lat.dim();
    if (data.size() != m) throw std::invalid_argument("need one data layer per time axis");
    GeneratingField field(lat, sg, static_cast<int>(m));
    field.direction = cfg.direction;
    bool equal = true;
    for (std::size_t a = 0; a < m; ++a) {
        if (data[a].size() != sg.size()) throw std::invalid_argument("data layer size must match the state grid");
        std::copy(data[a].begin(), data[a].end(), field.terminal(a).begin());
        equal = equal && data[a] == data[0];
    }
    field.gauge = equal ? "equal-components" : "user-supplied";
    const Node start = field.data_node();
    auto w0 = field.w_layer(start);
    for (std::size_t s = 0; s < sg.size(); ++s) {
        double mean = 0.0;
        for (std::size_t a = 0; a < m; ++a) mean += data[a][s];
        mean /= static_cast<double>(m);
        w0[s] = mean;
        for (std::size_t a = 0; a < m; ++a) field.offset(a)[s] = equal ? 0.0 : data[a][s] - mean;
    }

    const LaxFriedrichs lf(H, lat, sg, cfg, field);
    field.theta = lf.theta();
    field.theta_bound = lf.theta_bound();

    auto levels = diagonal_levels(lat);
    if (cfg.direction == MarchDirection::InitialAtZero) std::reverse(levels.begin(), levels.end());
    for (std::size_t li = 1; li < levels.size(); ++li) {
        const auto& level = levels[li];
        std::vector<std::size_t> subs(level.size());
        parallel_for(level.size(), cfg.threads, [&](std::size_t j) {
            const Node& k = level[j];
            std::vector<std::span<const double>> layers;
            for (std::size_t a : lf.open_axes(k)) layers.push_back(static_cast<const GeneratingField&>(field).w_layer(lf.neighbour(k, a)));
            const auto out = lf.advance(k, layers);
            std::copy(out.begin(), out.end(), field.w_layer(k).begin());
            subs[j] = lf.substeps(k);
        });
        for (std::size_t s : subs) field.max_substeps = std::max(field.max_substeps, s);
    }
    return field;
}

inline GeneratingField solve_dhjiu(const HamiltonianEval& H, const std::vector<ScalarExpr>& g_terminal, const TimeLattice& lat,
                                   const StateGrid& sg, const PDESchemeConfig& cfg = {}) {
    if (g_terminal.size() != lat.dim()) throw std::invalid_argument("need m terminal components");
    std::vector<std::vector<double>> data(g_terminal.size(), std::vector<double>(sg.size()));
    for (std::size_t a = 0; a < g_terminal.size(); ++a)
        for (std::size_t s = 0; s < sg.size(); ++s) {
            const auto x = sg.point(s);
            EvalEnv env;
            env.x = x;
            data[a][s] = g_terminal[a].eval(env);
        }
    return solve_dhjiu_values(H, data, lat, sg, cfg);
}

/// g^alpha = g / m for every alpha.
inline std::vector<ScalarExpr> equal_split_terminal(const ScalarExpr& g, int m) {
    const auto e = parse_expr("(" + g.print() + ") / " + std::to_string(m), g.alphabet());
    return std::vector<ScalarExpr>(static_cast<std::size_t>(m), e);
}

// ---------------------------------------------------------------------------
// Generating identity and residuals

namespace detail {

/// d M^alpha / d x^i at (node k, x): central difference with step h_i,
/// shortened to stay in the box.
inline double field_state_derivative(const GeneratingField& f, std::size_t alpha, const Node& k, std::span<const double> x,
                                     std::size_t i) {
    const StateGrid& sg = f.state_grid();
    if (sg.counts()[i] < 2) return 0.0;
    const double h = sg.spacing(i);
    std::vector<double> xp(x.begin(), x.end()), xm = xp;
    xp[i] = std::min(x[i] + h, sg.box().hi[i]);
    xm[i] = std::max(x[i] - h, sg.box().lo[i]);
    if (xp[i] <= xm[i]) return 0.0;
    return (f.component_at(alpha, k, xp) - f.component_at(alpha, k, xm)) / (xp[i] - xm[i]);
}

/// D_alpha M^alpha = dM^alpha/dt^alpha + dM^alpha/dx^i X^i_alpha at the
/// centre of the cell with lower corner k and state x, with (u, v) held.
inline double cell_divergence(const GeneratingField& f, const GameSpec& spec, const Node& k, std::span<const double> x,
                              std::span<const double> u, std::span<const double> v) {
    const TimeLattice& lat = f.lattice();
    const std::size_t m = lat.dim(), n = static_cast<std::size_t>(spec.n);
    const auto tc = lat.cell_center(k);
    const std::size_t corners = std::size_t{1} << m;
    std::vector<double> X(n);
    Node c(m);
    double total = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
        // time derivative: mean over the 2^(m-1) edges of the cell along a
        double dt = 0.0;
        for (std::size_t mask = 0; mask < corners; ++mask) {
            if ((mask >> a) & 1U) continue;
            for (std::size_t b = 0; b < m; ++b) c[b] = k[b] + static_cast<int>((mask >> b) & 1U);
            Node up = c;
            ++up[a];
            dt += f.component_at(a, up, x) - f.component_at(a, c, x);
        }
        total += dt / static_cast<double>(corners / 2) / lat.spacing(a);
        // transport term: state gradient averaged over the corners
        spec.field(a, tc, x, u, v, X);
        for (std::size_t i = 0; i < n; ++i) {
            if (X[i] == 0.0) continue;
            double g = 0.0;
            for (std::size_t mask = 0; mask < corners; ++mask) {
                for (std::size_t b = 0; b < m; ++b) c[b] = k[b] + static_cast<int>((mask >> b) & 1U);
                g += field_state_derivative(f, a, c, x, i);
            }
            total += g / static_cast<double>(corners) * X[i];
        }
    }
    return total;
}

/// Midpoint quadrature of D_alpha M^alpha over the cells of [t, T] along the m-flow.
inline double divergence_integral(const GeneratingField& f, const GameSpec& spec, const ControlField& ctrl, const StateField& sf,
                                  const Node& t) {
    const TimeLattice& lat = f.lattice();
    const Node top = lat.top();
    for (std::size_t a = 0; a < t.size(); ++a)
        if (t[a] >= top[a]) return 0.0;
    Node cell_hi = top;
    for (auto& e : cell_hi) --e;
    double sum = 0.0;
    for_each_node(t, cell_hi, [&](const Node& k) {
        const auto pair = ctrl.cell(k);
        const auto xc = sf.cell_center(k);
        sum += cell_divergence(f, spec, k, xc, spec.U.sample(pair.u), spec.V.sample(pair.v));
    });
    return sum * lat.cell_volume();
}

inline double top_sum(const GeneratingField& f, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t a = 0; a < static_cast<std::size_t>(f.m()); ++a) s += f.component_at(a, f.lattice().top(), x);
    return s;
}

} // namespace detail

/// M(t, x(t)) = M(T, x(T)) - C_hyp - integral over [t, T] of D_alpha M^alpha,
/// with M(T, .) = sum_alpha M^alpha(T, .) and x(.) the m-flow of (ctrl, x0).
inline double reconstruct_value(const GeneratingField& field, const GameSpec& spec, const ControlField& ctrl, const Node& t,
                                std::span<const double> x0) {
    const TimeLattice& lat = field.lattice();
    const auto sf = integrate_mflow(spec, lat, ctrl, t, x0);
    return detail::top_sum(field, sf.at(lat.top())) - field.C_hyp - detail::divergence_integral(field, spec, ctrl, sf, t);
}

/// max over random (t, x0, controls) of
/// |V(T, x(T)) - V(t, x0) - C_hyp - integral of D_alpha M^alpha| for a scalar value grid V.
inline double generating_residual(const GeneratingField& field, const ValueGrid& vg, const GameSpec& spec, std::size_t trials,
                                  std::uint64_t seed = 1) {
    const TimeLattice& lat = field.lattice();
    const StateGrid& sg = vg.state_grid();
    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t k = 0; k < trials; ++k) {
        Node t(lat.dim());
        for (std::size_t a = 0; a < lat.dim(); ++a) t[a] = static_cast<int>(rng.index(static_cast<std::size_t>(lat.steps()[a] + 1)));
        const std::size_t s = rng.index(sg.size());
        const auto x0 = sg.point(s);
        const auto ctrl = ControlField::random(lat, spec, rng.index(std::size_t{1} << 62));
        const auto sf = integrate_mflow(spec, lat, ctrl, t, x0);
        const double lhs = vg.interpolate(lat.top(), sf.at(lat.top())) - vg.value(t, s);
        const double rhs = field.C_hyp + detail::divergence_integral(field, spec, ctrl, sf, t);
        worst = std::max(worst, std::fabs(lhs - rhs));
    }
    return worst;
}

struct ResidualReport {
    double max_pde_residual = 0.0;
    double terminal_mismatch = 0.0;
    double generating_residual = std::numeric_limits<double>::quiet_NaN();  // filled by callers that have a value grid
    std::size_t interior_points = 0;
};

/// Central-difference residual sum_alpha dM^alpha/dt^alpha + H(t, x, dM/dx)
/// at interior lattice and state nodes, and the data-layer mismatch.
inline ResidualReport pde_residual(const GeneratingField& field, const HamiltonianEval& H) {
    const TimeLattice& lat = field.lattice();
    const StateGrid& sg = field.state_grid();
    const std::size_t m = lat.dim(), n = sg.dim();
    ResidualReport rep;
    const Node dn = field.data_node();
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t s = 0; s < sg.size(); ++s)
            rep.terminal_mismatch = std::max(rep.terminal_mismatch, std::fabs(field.component(a, dn, s) - field.terminal(a)[s]));

    bool any = true;
    for (std::size_t a = 0; a < m; ++a) any = any && lat.steps()[a] >= 2;
    if (!any) return rep;
    Node lo(m, 1), hi = lat.top();
    for (auto& e : hi) --e;
    CostateMatrix p(static_cast<int>(n), static_cast<int>(m));
    for_each_node(lo, hi, [&](const Node& k) {
        const auto t = lat.time(k);
        for (std::size_t s = 0; s < sg.size(); ++s) {
            const auto j = sg.unflat(s);
            bool interior = true;
            for (std::size_t i = 0; i < n; ++i)
                if (sg.counts()[i] >= 3 && (j[i] == 0 || j[i] == sg.counts()[i] - 1)) interior = false;
            if (!interior) continue;
            double r = 0.0;
            for (std::size_t a = 0; a < m; ++a) {
                Node kp = k, km = k;
                ++kp[a];
                --km[a];
                r += (field.component(a, kp, s) - field.component(a, km, s)) / (2.0 * lat.spacing(a));
                for (std::size_t i = 0; i < n; ++i) {
                    double d = 0.0;
                    if (sg.counts()[i] >= 3)
                        d = (field.component(a, k, s + sg.stride(i)) - field.component(a, k, s - sg.stride(i))) / (2.0 * sg.spacing(i));
                    p.at(static_cast<int>(i), static_cast<int>(a)) = d;
                }
            }
            r += H(t, sg.point(s), p);
            rep.max_pde_residual = std::max(rep.max_pde_residual, std::fabs(r));
            ++rep.interior_points;
        }
    });
    return rep;
}

} // namespace multigame
