#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "multigame/errors.hpp"
#include "multigame/expr.hpp"
#include "multigame/lattice.hpp"
#include "multigame/util.hpp"

namespace multigame {

/// Finite sampling of a control set. Every min/max over controls in this
/// library is an exact scan over these samples.
class ControlSpace {
public:
    enum class Kind { Box, Points, Ball, Product };

    ControlSpace() = default;

    /// Uniform grid with res[a] points on axis a, endpoints included.
    /// A resolution of 1 places the single point at the midpoint.
    static ControlSpace box(std::vector<double> lo, std::vector<double> hi, std::vector<int> res) {
        if (lo.size() != hi.size() || lo.size() != res.size() || lo.empty())
            throw std::invalid_argument("control box dimensions disagree");
        ControlSpace cs;
        cs.kind_ = Kind::Box;
        cs.dim_ = lo.size();
        cs.lo_ = lo;
        cs.hi_ = hi;
        cs.res_ = res;
        cs.spacing_ = 0.0;
        for (std::size_t a = 0; a < lo.size(); ++a) {
            if (res[a] < 1 || !(lo[a] <= hi[a])) throw std::invalid_argument("invalid control box axis");
            if (res[a] > 1) cs.spacing_ = std::max(cs.spacing_, (hi[a] - lo[a]) / (res[a] - 1));
        }
        cs.fill_grid([](std::span<const double>) { return true; });
        return cs;
    }

    static ControlSpace points(const std::vector<std::vector<double>>& pts) {
        if (pts.empty()) throw std::invalid_argument("control point set must be nonempty");
        ControlSpace cs;
        cs.kind_ = Kind::Points;
        cs.dim_ = pts.front().size();
        if (cs.dim_ == 0) throw std::invalid_argument("control points must have positive dimension");
        cs.lo_.assign(cs.dim_, INFINITY);
        cs.hi_.assign(cs.dim_, -INFINITY);
        for (const auto& p : pts) {
            if (p.size() != cs.dim_) throw std::invalid_argument("control points differ in dimension");
            for (std::size_t a = 0; a < cs.dim_; ++a) {
                cs.lo_[a] = std::min(cs.lo_[a], p[a]);
                cs.hi_[a] = std::max(cs.hi_[a], p[a]);
            }
            cs.samples_.insert(cs.samples_.end(), p.begin(), p.end());
        }
        return cs;
    }

    /// Closed ball of the given radius around 0, sampled by rejection from the
    /// bounding-box grid with `res` points per axis.
    static ControlSpace ball(std::size_t dim, double radius, int res) {
        if (dim == 0 || res < 2 || !(radius > 0.0)) throw std::invalid_argument("invalid ball control set");
        ControlSpace cs;
        cs.kind_ = Kind::Ball;
        cs.dim_ = dim;
        cs.radius_ = radius;
        cs.lo_.assign(dim, -radius);
        cs.hi_.assign(dim, radius);
        cs.res_.assign(dim, res);
        cs.spacing_ = 2.0 * radius / (res - 1);
        const double r2 = radius * radius * (1.0 + 1e-12);
        cs.fill_grid([r2](std::span<const double> p) {
            double s = 0.0;
            for (double e : p) s += e * e;
            return s <= r2;
        });
        return cs;
    }

    /// Cartesian product; samples enumerate the first factor slowest.
    static ControlSpace product(const ControlSpace& a, const ControlSpace& b) {
        ControlSpace cs;
        cs.kind_ = Kind::Product;
        cs.dim_ = a.dim() + b.dim();
        cs.lo_ = a.lo();
        cs.lo_.insert(cs.lo_.end(), b.lo().begin(), b.lo().end());
        cs.hi_ = a.hi();
        cs.hi_.insert(cs.hi_.end(), b.hi().begin(), b.hi().end());
        cs.spacing_ = std::max(a.spacing(), b.spacing());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) {
                auto sa = a.sample(i);
                auto sb = b.sample(j);
                cs.samples_.insert(cs.samples_.end(), sa.begin(), sa.end());
                cs.samples_.insert(cs.samples_.end(), sb.begin(), sb.end());
            }
        cs.factors_ = {a, b};
        return cs;
    }

    Kind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return dim_ == 0 ? 0 : samples_.size() / dim_; }
    std::span<const double> sample(std::size_t i) const { return {samples_.data() + i * dim_, dim_}; }
    const std::vector<double>& lo() const { return lo_; }
    const std::vector<double>& hi() const { return hi_; }
    const std::vector<int>& resolution() const { return res_; }
    double radius() const { return radius_; }
    /// Largest per-axis grid spacing (0 for explicit point sets).
    double spacing() const { return spacing_; }

    bool contains(std::span<const double> p) const {
        if (p.size() != dim_) return false;
        if (kind_ == Kind::Ball) return norm2(p) <= radius_ * (1.0 + 1e-12);
        if (kind_ == Kind::Product) {
            const std::size_t d0 = factors_[0].dim();
            return factors_[0].contains(p.subspan(0, d0)) && factors_[1].contains(p.subspan(d0));
        }
        if (kind_ == Kind::Points) {
            for (std::size_t i = 0; i < size(); ++i) {
                auto s = sample(i);
                if (std::equal(s.begin(), s.end(), p.begin())) return true;
            }
            return false;
        }
        for (std::size_t a = 0; a < dim_; ++a)
            if (p[a] < lo_[a] || p[a] > hi_[a]) return false;
        return true;
    }

private:
    Kind kind_ = Kind::Points;
    std::size_t dim_ = 0;
    std::vector<double> lo_, hi_;
    std::vector<int> res_;
    double radius_ = 0.0;
    double spacing_ = 0.0;
    std::vector<double> samples_;
    std::vector<ControlSpace> factors_;

    double axis_point(std::size_t a, int j) const {
        if (res_[a] == 1) return 0.5 * (lo_[a] + hi_[a]);
        if (j == res_[a] - 1) return hi_[a];
        return lo_[a] + j * (hi_[a] - lo_[a]) / (res_[a] - 1);
    }

    template <class Keep>
    void fill_grid(Keep keep) {
        std::vector<int> j(dim_, 0);
        std::vector<double> p(dim_);
        for (;;) {
            for (std::size_t a = 0; a < dim_; ++a) p[a] = axis_point(a, j[a]);
            if (keep(std::span<const double>(p))) samples_.insert(samples_.end(), p.begin(), p.end());
            std::size_t a = dim_;
            bool advanced = false;
            while (a > 0 && !advanced) {
                --a;
                if (++j[a] < res_[a]) advanced = true;
                else j[a] = 0;
            }
            if (!advanced) break;
        }
    }
};

/// A complete game instance: m-flow dynamics X_alpha, running cost L,
/// terminal cost g, sampled control sets, and the declared bound constants.
struct GameSpec {
    std::string name;
    int m = 1;
    int n = 1;
    Box horizon;
    Box state_box;
    std::vector<std::vector<ScalarExpr>> X;  // X[alpha][i]
    ScalarExpr L;
    ScalarExpr g;
    ControlSpace U;
    ControlSpace V;
    std::vector<double> A;  // declared bounds on ||X_alpha||
    double B = 0.0;         // declared bound on |g| and its Lipschitz constant
    double C = 0.0;         // declared bound on |L| and its Lipschitz constant

    Alphabet alphabet() const {
        return Alphabet{m, n, static_cast<int>(U.dim()), static_cast<int>(V.dim()), false};
    }

    EvalEnv env(std::span<const double> t, std::span<const double> x, std::span<const double> u, std::span<const double> v) const {
        return EvalEnv{t, x, u, v, {}, m};
    }

    /// out[i] = X^i_alpha(t, x, u, v)
    void field(std::size_t alpha, std::span<const double> t, std::span<const double> x, std::span<const double> u,
               std::span<const double> v, std::span<double> out) const {
        const auto e = env(t, x, u, v);
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = X[alpha][static_cast<std::size_t>(i)].eval(e);
    }

    double running(std::span<const double> t, std::span<const double> x, std::span<const double> u, std::span<const double> v) const {
        return L.eval(env(t, x, u, v));
    }

    double terminal(std::span<const double> x) const { return g.eval(env({}, x, {}, {})); }
};

/// String form of a game, parsed into a GameSpec by make_game.
struct GameText {
    std::string name;
    int m = 1;
    int n = 1;
    Box horizon;
    Box state_box;
    std::vector<std::vector<std::string>> dynamics;  // [alpha][i]
    std::string running_cost = "0";
    std::string terminal_cost = "0";
    ControlSpace U;
    ControlSpace V;
    std::vector<double> A;
    double B = 0.0;
    double C = 0.0;
};

inline GameSpec make_game(const GameText& text) {
    GameSpec g;
    g.name = text.name;
    g.m = text.m;
    g.n = text.n;
    if (g.m < 1 || g.n < 1) throw std::invalid_argument("game dimensions m and n must be positive");
    if (text.horizon.dim() != static_cast<std::size_t>(g.m)) throw std::invalid_argument("horizon dimension must equal m");
    if (text.state_box.dim() != static_cast<std::size_t>(g.n)) throw std::invalid_argument("state box dimension must equal n");
    if (text.dynamics.size() != static_cast<std::size_t>(g.m)) throw std::invalid_argument("dynamics needs m component fields");
    if (text.A.size() != static_cast<std::size_t>(g.m)) throw std::invalid_argument("constant A needs m entries");
    g.horizon = text.horizon;
    g.state_box = text.state_box;
    g.U = text.U;
    g.V = text.V;
    g.A = text.A;
    g.B = text.B;
    g.C = text.C;
    const Alphabet alpha = g.alphabet();
    for (const auto& comp : text.dynamics) {
        if (comp.size() != static_cast<std::size_t>(g.n)) throw std::invalid_argument("each X_alpha needs n entries");
        std::vector<ScalarExpr> row;
        for (const auto& s : comp) row.push_back(parse_expr(s, alpha));
        g.X.push_back(std::move(row));
    }
    g.L = parse_expr(text.running_cost, alpha);
    g.g = parse_expr(text.terminal_cost, Alphabet{0, g.n, 0, 0, false});
    return g;
}

/// Piecewise-constant controls: one (u, v) sample-index pair per lattice cell.
class ControlField {
public:
    struct Pair {
        std::size_t u = 0;
        std::size_t v = 0;
    };

    ControlField() = default;
    ControlField(const TimeLattice& lat, std::vector<Pair> cells) : lat_(lat), cells_(std::move(cells)) {
        if (cells_.size() != lat_.cell_count()) throw std::invalid_argument("control field must cover every cell");
    }

    static ControlField constant(const TimeLattice& lat, std::size_t u, std::size_t v) {
        return ControlField(lat, std::vector<Pair>(lat.cell_count(), Pair{u, v}));
    }

    static ControlField random(const TimeLattice& lat, const GameSpec& spec, std::uint64_t seed) {
        Rng rng(seed);
        std::vector<Pair> cells(lat.cell_count());
        for (auto& c : cells) {
            c.u = rng.index(spec.U.size());
            c.v = rng.index(spec.V.size());
        }
        return ControlField(lat, std::move(cells));
    }

    const TimeLattice& lattice() const { return lat_; }

    /// Control of the cell with lower corner k (k_a < N_a).
    Pair cell(const Node& k) const { return cells_[lat_.cell_flat(k)]; }

    /// Control used on the lattice edge from k to k + e_axis: the cell whose
    /// lower corner is k, clamped into range on the other axes.
    Pair edge(const Node& k, std::size_t axis) const {
        Node c = k;
        for (std::size_t a = 0; a < c.size(); ++a)
            if (a != axis) c[a] = std::min(c[a], lat_.steps()[a] - 1);
        return cell(c);
    }

    bool valid_for(const GameSpec& spec) const {
        for (const auto& c : cells_)
            if (c.u >= spec.U.size() || c.v >= spec.V.size()) return false;
        return true;
    }

private:
    TimeLattice lat_;
    std::vector<Pair> cells_;
};

// ---------------------------------------------------------------------------
// Complete integrability check

/// Central-difference step used for brackets and partials.
inline double fd_step(double value) { return 1e-5 * (1.0 + std::fabs(value)); }

/// R = [X_alpha, X_beta] + dX_beta/dt^alpha - dX_alpha/dt^beta at one point,
/// with [X, Y]^i = X^j dY^i/dx^j - Y^j dX^i/dx^j. Control derivative terms are
/// absent because controls are constant on cell interiors.
inline std::vector<double> cic_residual_vector(const GameSpec& spec, std::span<const double> t, std::span<const double> x,
                                               std::span<const double> u, std::span<const double> v, std::size_t alpha,
                                               std::size_t beta) {
    const std::size_t n = static_cast<std::size_t>(spec.n);
    std::vector<double> xa(n), xb(n), fp(n), fm(n), r(n, 0.0);
    spec.field(alpha, t, x, u, v, xa);
    spec.field(beta, t, x, u, v, xb);
    std::vector<double> xs(x.begin(), x.end());
    for (std::size_t j = 0; j < n; ++j) {
        const double h = fd_step(x[j]);
        xs[j] = x[j] + h;
        std::vector<double> ap(n), bp(n);
        spec.field(alpha, t, xs, u, v, ap);
        spec.field(beta, t, xs, u, v, bp);
        xs[j] = x[j] - h;
        std::vector<double> am(n), bm(n);
        spec.field(alpha, t, xs, u, v, am);
        spec.field(beta, t, xs, u, v, bm);
        xs[j] = x[j];
        for (std::size_t i = 0; i < n; ++i) {
            const double dbeta = (bp[i] - bm[i]) / (2 * h);
            const double dalpha = (ap[i] - am[i]) / (2 * h);
            r[i] += xa[j] * dbeta - xb[j] * dalpha;
        }
    }
    std::vector<double> ts(t.begin(), t.end());
    auto time_partial = [&](std::size_t field_axis, std::size_t time_axis, std::vector<double>& out) {
        const double h = fd_step(t[time_axis]);
        ts[time_axis] = t[time_axis] + h;
        spec.field(field_axis, ts, x, u, v, fp);
        ts[time_axis] = t[time_axis] - h;
        spec.field(field_axis, ts, x, u, v, fm);
        ts[time_axis] = t[time_axis];
        for (std::size_t i = 0; i < n; ++i) out[i] = (fp[i] - fm[i]) / (2 * h);
    };
    std::vector<double> d_beta(n), d_alpha(n);
    time_partial(beta, alpha, d_beta);
    time_partial(alpha, beta, d_alpha);
    for (std::size_t i = 0; i < n; ++i) r[i] += d_beta[i] - d_alpha[i];
    return r;
}

struct CICReport {
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    std::size_t evaluations = 0;
    Node worst_cell;
    std::vector<double> worst_state;
    std::size_t worst_alpha = 0;
    std::size_t worst_beta = 0;
};

/// Reduced CIC check over every lattice cell center and a grid of
/// `state_res` points per state axis, for every pair alpha < beta.
inline CICReport check_cic(const GameSpec& spec, const ControlField& ctrl, const TimeLattice& lat, double tol, int state_res = 5) {
    CICReport rep;
    rep.tolerance = tol;
    const std::size_t n = static_cast<std::size_t>(spec.n);
    std::vector<std::vector<double>> states;
    {
        std::vector<int> j(n, 0);
        for (;;) {
            std::vector<double> x(n);
            for (std::size_t i = 0; i < n; ++i)
                x[i] = state_res == 1 ? 0.5 * (spec.state_box.lo[i] + spec.state_box.hi[i])
                                      : spec.state_box.lo[i] + j[i] * spec.state_box.side(i) / (state_res - 1);
            states.push_back(x);
            std::size_t i = n;
            bool adv = false;
            while (i > 0 && !adv) {
                --i;
                if (++j[i] < state_res) adv = true;
                else j[i] = 0;
            }
            if (!adv) break;
        }
    }
    Node cell_hi = lat.top();
    for (auto& k : cell_hi) --k;
    for_each_node(lat.origin(), cell_hi, [&](const Node& k) {
        const auto t = lat.cell_center(k);
        const auto c = ctrl.cell(k);
        const auto u = spec.U.sample(c.u);
        const auto v = spec.V.sample(c.v);
        for (const auto& x : states) {
            for (std::size_t a = 0; a < static_cast<std::size_t>(spec.m); ++a) {
                for (std::size_t b = a + 1; b < static_cast<std::size_t>(spec.m); ++b) {
                    const double r = norm2(cic_residual_vector(spec, t, x, u, v, a, b));
                    ++rep.evaluations;
                    if (r > rep.max_residual) {
                        rep.max_residual = r;
                        rep.worst_cell = k;
                        rep.worst_state = x;
                        rep.worst_alpha = a;
                        rep.worst_beta = b;
                    }
                }
            }
        }
    });
    rep.pass = rep.max_residual <= tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Empirical check of the declared bound constants A, B, C

struct BoundsReport {
    std::size_t samples = 0;
    double max_abs_g = 0.0;
    double max_abs_L = 0.0;
    std::vector<double> max_norm_X;
    double lip_g = 0.0;
    double lip_L = 0.0;
    std::vector<double> lip_X;
    std::vector<std::string> violations;
    bool pass = true;
};

namespace detail {
inline bool exceeds(double value, double bound) { return value > bound * (1.0 + 1e-9) + 1e-12; }
} // namespace detail

/// Samples t, x, x^ and control pairs and records empirical maxima of |g|, |L|,
/// ||X_alpha|| and the Lipschitz ratios in x. The sample stream for a given
/// seed is a prefix of the stream for any larger count: first the state-box
/// corners (paired with their opposite corners), then uniform draws.
inline BoundsReport certify_bounds(const GameSpec& spec, std::size_t sample_count, std::uint64_t seed = 1) {
    BoundsReport rep;
    const std::size_t m = static_cast<std::size_t>(spec.m);
    const std::size_t n = static_cast<std::size_t>(spec.n);
    rep.max_norm_X.assign(m, 0.0);
    rep.lip_X.assign(m, 0.0);
    Rng rng(seed);
    const std::size_t corners = std::size_t{1} << std::min<std::size_t>(n, 16);
    const std::size_t pairs = spec.U.size() * spec.V.size();
    std::vector<double> t(m), x(n), xh(n), fx(n), fxh(n);
    for (std::size_t s = 0; s < sample_count; ++s) {
        std::size_t ui = 0, vi = 0;
        if (s < corners) {
            for (std::size_t i = 0; i < n; ++i) {
                const bool high = (s >> i) & 1U;
                x[i] = high ? spec.state_box.hi[i] : spec.state_box.lo[i];
                xh[i] = high ? spec.state_box.lo[i] : spec.state_box.hi[i];
            }
            for (std::size_t a = 0; a < m; ++a) t[a] = spec.horizon.lo[a];
            ui = (s % pairs) / spec.V.size();
            vi = (s % pairs) % spec.V.size();
        } else {
            for (std::size_t a = 0; a < m; ++a) t[a] = rng.uniform(spec.horizon.lo[a], spec.horizon.hi[a]);
            for (std::size_t i = 0; i < n; ++i) x[i] = rng.uniform(spec.state_box.lo[i], spec.state_box.hi[i]);
            for (std::size_t i = 0; i < n; ++i) xh[i] = rng.uniform(spec.state_box.lo[i], spec.state_box.hi[i]);
            ui = rng.index(spec.U.size());
            vi = rng.index(spec.V.size());
        }
        const auto u = spec.U.sample(ui);
        const auto v = spec.V.sample(vi);
        const double dx = distance(x, xh);
        const double gx = spec.terminal(x), gxh = spec.terminal(xh);
        const double lx = spec.running(t, x, u, v), lxh = spec.running(t, xh, u, v);
        rep.max_abs_g = std::max({rep.max_abs_g, std::fabs(gx), std::fabs(gxh)});
        rep.max_abs_L = std::max({rep.max_abs_L, std::fabs(lx), std::fabs(lxh)});
        if (dx > 0.0) {
            rep.lip_g = std::max(rep.lip_g, std::fabs(gx - gxh) / dx);
            rep.lip_L = std::max(rep.lip_L, std::fabs(lx - lxh) / dx);
        }
        for (std::size_t a = 0; a < m; ++a) {
            spec.field(a, t, x, u, v, fx);
            spec.field(a, t, xh, u, v, fxh);
            rep.max_norm_X[a] = std::max({rep.max_norm_X[a], norm2(fx), norm2(fxh)});
            if (dx > 0.0) {
                double d = 0.0;
                for (std::size_t i = 0; i < n; ++i) d += (fx[i] - fxh[i]) * (fx[i] - fxh[i]);
                rep.lip_X[a] = std::max(rep.lip_X[a], std::sqrt(d) / dx);
            }
        }
        ++rep.samples;
    }
    auto flag = [&](const std::string& what, double value, double bound) {
        if (detail::exceeds(value, bound)) {
            std::ostringstream os;
            os << what << " = " << value << " exceeds declared " << bound;
            rep.violations.push_back(os.str());
        }
    };
    flag("max |g|", rep.max_abs_g, spec.B);
    flag("Lipschitz(g)", rep.lip_g, spec.B);
    flag("max |L|", rep.max_abs_L, spec.C);
    flag("Lipschitz(L)", rep.lip_L, spec.C);
    for (std::size_t a = 0; a < m; ++a) {
        flag("max ||X_" + std::to_string(a + 1) + "||", rep.max_norm_X[a], spec.A[a]);
        flag("Lipschitz(X_" + std::to_string(a + 1) + ")", rep.lip_X[a], spec.A[a]);
    }
    rep.pass = rep.violations.empty();
    return rep;
}

} // namespace multigame
