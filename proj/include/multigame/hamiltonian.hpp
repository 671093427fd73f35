#pragma once

// Upper and lower Hamiltonians of a sampled game, the Isaacs gap, and
// constructive max-min representations of a given Hamiltonian H(t, x, p).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "multigame/errors.hpp"
#include "multigame/expr.hpp"
#include "multigame/game.hpp"
#include "multigame/util.hpp"

namespace multigame {

/// n x m costate p^alpha_i, stored row-major as p[i * m + alpha] (the layout
/// expressions see through EvalEnv::p).
struct CostateMatrix {
    int n = 0;
    int m = 0;
    std::vector<double> p;

    CostateMatrix() = default;
    CostateMatrix(int n_, int m_) : n(n_), m(m_), p(static_cast<std::size_t>(n_ * m_), 0.0) {}
    CostateMatrix(int n_, int m_, std::vector<double> values) : n(n_), m(m_), p(std::move(values)) {
        if (p.size() != static_cast<std::size_t>(n * m)) throw std::invalid_argument("costate size must be n*m");
    }

    double& at(int i, int alpha) { return p[static_cast<std::size_t>(i * m + alpha)]; }
    double at(int i, int alpha) const { return p[static_cast<std::size_t>(i * m + alpha)]; }

    /// Frobenius norm.
    double norm() const { return norm2(p); }

    CostateMatrix scaled(double lambda) const {
        CostateMatrix c = *this;
        for (auto& e : c.p) e *= lambda;
        return c;
    }
};

namespace detail {

inline double costate_pairing(const GameSpec& spec, std::span<const double> t, std::span<const double> x,
                              std::span<const double> u, std::span<const double> v, const CostateMatrix& p,
                              std::vector<double>& buf) {
    double s = spec.running(t, x, u, v);
    for (int a = 0; a < spec.m; ++a) {
        spec.field(static_cast<std::size_t>(a), t, x, u, v, buf);
        for (int i = 0; i < spec.n; ++i) s += p.at(i, a) * buf[static_cast<std::size_t>(i)];
    }
    return s;
}

inline void check_costate(const GameSpec& spec, const CostateMatrix& p) {
    if (p.n != spec.n || p.m != spec.m) throw std::invalid_argument("costate shape does not match the game");
}

} // namespace detail

/// min_v max_u { p^alpha_i X^i_alpha + L } over the control samples.
inline double h_upper(const GameSpec& spec, std::span<const double> t, std::span<const double> x, const CostateMatrix& p) {
    detail::check_costate(spec, p);
    std::vector<double> buf(static_cast<std::size_t>(spec.n));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t vi = 0; vi < spec.V.size(); ++vi) {
        double inner = -std::numeric_limits<double>::infinity();
        for (std::size_t ui = 0; ui < spec.U.size(); ++ui)
            inner = std::max(inner, detail::costate_pairing(spec, t, x, spec.U.sample(ui), spec.V.sample(vi), p, buf));
        best = std::min(best, inner);
    }
    return best;
}

/// max_u min_v { p^alpha_i X^i_alpha + L } over the control samples.
inline double h_lower(const GameSpec& spec, std::span<const double> t, std::span<const double> x, const CostateMatrix& p) {
    detail::check_costate(spec, p);
    std::vector<double> buf(static_cast<std::size_t>(spec.n));
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t ui = 0; ui < spec.U.size(); ++ui) {
        double inner = std::numeric_limits<double>::infinity();
        for (std::size_t vi = 0; vi < spec.V.size(); ++vi)
            inner = std::min(inner, detail::costate_pairing(spec, t, x, spec.U.sample(ui), spec.V.sample(vi), p, buf));
        best = std::max(best, inner);
    }
    return best;
}

struct HamiltonianSample {
    std::vector<double> t;
    std::vector<double> x;
    CostateMatrix p;
};

/// Uniform draws of (t, x) from the horizon and state box and p from the cube [-pmax, pmax]^{nm}.
inline std::vector<HamiltonianSample> random_hamiltonian_samples(const GameSpec& spec, std::size_t count, double pmax,
                                                                 std::uint64_t seed = 1) {
    Rng rng(seed);
    std::vector<HamiltonianSample> out(count);
    for (auto& s : out) {
        s.t.resize(static_cast<std::size_t>(spec.m));
        s.x.resize(static_cast<std::size_t>(spec.n));
        for (std::size_t a = 0; a < s.t.size(); ++a) s.t[a] = rng.uniform(spec.horizon.lo[a], spec.horizon.hi[a]);
        for (std::size_t i = 0; i < s.x.size(); ++i) s.x[i] = rng.uniform(spec.state_box.lo[i], spec.state_box.hi[i]);
        s.p = CostateMatrix(spec.n, spec.m);
        for (auto& e : s.p.p) e = rng.uniform(-pmax, pmax);
    }
    return out;
}

/// Largest H+ - H- over the samples (never negative for finite scans).
inline double isaacs_gap(const GameSpec& spec, const std::vector<HamiltonianSample>& samples, unsigned threads = 1) {
    std::vector<double> gaps(samples.size(), 0.0);
    parallel_for(samples.size(), threads, [&](std::size_t k) {
        const auto& s = samples[k];
        gaps[k] = h_upper(spec, s.t, s.x, s.p) - h_lower(spec, s.t, s.x, s.p);
    });
    double worst = 0.0;
    for (double g : gaps) worst = std::max(worst, g);
    return worst;
}

/// A Hamiltonian H(t, x, p) for the PDE solver and the representation
/// builders: H+ or H- of a game, an expression in t, x and p<i>_<alpha>, or
/// an arbitrary callable.
class HamiltonianEval {
public:
    enum class Kind { Upper, Lower, Custom };
    using Fn = std::function<double(std::span<const double>, std::span<const double>, const CostateMatrix&)>;

    HamiltonianEval() = default;

    static HamiltonianEval upper(const GameSpec& spec) { return from_game(spec, Kind::Upper); }
    static HamiltonianEval lower(const GameSpec& spec) { return from_game(spec, Kind::Lower); }

    static HamiltonianEval custom(const std::string& src, int m, int n, double K) {
        auto e = std::make_shared<ScalarExpr>(parse_expr(src, Alphabet{m, n, 0, 0, true}));
        HamiltonianEval h;
        h.kind_ = Kind::Custom;
        h.m_ = m;
        h.n_ = n;
        h.K_ = K;
        h.label_ = e->print();
        h.fn_ = [e, m](std::span<const double> t, std::span<const double> x, const CostateMatrix& p) {
            EvalEnv env;
            env.t = t;
            env.x = x;
            env.p = p.p;
            env.m = m;
            return e->eval(env);
        };
        return h;
    }

    static HamiltonianEval from_function(Fn fn, int m, int n, double K, std::string label = "function") {
        HamiltonianEval h;
        h.kind_ = Kind::Custom;
        h.m_ = m;
        h.n_ = n;
        h.K_ = K;
        h.label_ = std::move(label);
        h.fn_ = std::move(fn);
        return h;
    }

    double operator()(std::span<const double> t, std::span<const double> x, const CostateMatrix& p) const {
        if (p.n != n_ || p.m != m_) throw std::invalid_argument("costate shape does not match the Hamiltonian");
        return fn_(t, x, p);
    }

    Kind kind() const { return kind_; }
    int m() const { return m_; }
    int n() const { return n_; }
    double K() const { return K_; }
    const std::string& label() const { return label_; }

private:
    Kind kind_ = Kind::Custom;
    int m_ = 0;
    int n_ = 0;
    double K_ = 0.0;
    std::string label_;
    Fn fn_;

    static HamiltonianEval from_game(const GameSpec& spec, Kind kind) {
        auto g = std::make_shared<GameSpec>(spec);
        HamiltonianEval h;
        h.kind_ = kind;
        h.m_ = spec.m;
        h.n_ = spec.n;
        double amax = 0.0;
        for (double a : spec.A) amax = std::max(amax, a);
        h.K_ = std::max(spec.C, amax * std::sqrt(static_cast<double>(spec.m)));
        h.label_ = std::string(kind == Kind::Upper ? "H+" : "H-") + "(" + spec.name + ")";
        if (kind == Kind::Upper)
            h.fn_ = [g](std::span<const double> t, std::span<const double> x, const CostateMatrix& p) { return h_upper(*g, t, x, p); };
        else
            h.fn_ = [g](std::span<const double> t, std::span<const double> x, const CostateMatrix& p) { return h_lower(*g, t, x, p); };
        return h;
    }
};

/// Sampled check of |H(t,x,0)| <= K and
/// |H(t,x,p) - H(t',x',p')| <= K (vol(box t..t') + |x - x'| + |p - p'|) on comparable pairs.
struct HypothesisReport {
    std::size_t samples = 0;
    std::size_t bound_violations = 0;
    std::size_t lipschitz_violations = 0;
    double worst_ratio = 0.0;  // largest |dH| / (vol + |dx| + |dp|)
    bool pass = true;
};

inline HypothesisReport check_hypotheses(const HamiltonianEval& H, const Box& horizon, const Box& state_box, double pmax,
                                         std::size_t count, std::uint64_t seed = 1) {
    HypothesisReport rep;
    Rng rng(seed);
    const auto m = static_cast<std::size_t>(H.m()), n = static_cast<std::size_t>(H.n());
    std::vector<double> t1(m), t2(m), x1(n), x2(n);
    CostateMatrix p1(H.n(), H.m()), p2(H.n(), H.m()), zero(H.n(), H.m());
    for (std::size_t s = 0; s < count; ++s) {
        for (std::size_t a = 0; a < m; ++a) {
            t1[a] = rng.uniform(horizon.lo[a], horizon.hi[a]);
            t2[a] = rng.uniform(t1[a], horizon.hi[a]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            x1[i] = rng.uniform(state_box.lo[i], state_box.hi[i]);
            x2[i] = rng.uniform(state_box.lo[i], state_box.hi[i]);
        }
        for (std::size_t r = 0; r < p1.p.size(); ++r) {
            p1.p[r] = rng.uniform(-pmax, pmax);
            p2.p[r] = rng.uniform(-pmax, pmax);
        }
        const double h0 = H(t1, x1, zero);
        if (detail::exceeds(std::fabs(h0), H.K())) ++rep.bound_violations;
        std::vector<double> dp(p1.p.size());
        for (std::size_t r = 0; r < dp.size(); ++r) dp[r] = p1.p[r] - p2.p[r];
        const double scale = volume_between(t1, t2) + distance(x1, x2) + norm2(dp);
        const double dh = std::fabs(H(t1, x1, p1) - H(t2, x2, p2));
        if (scale > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, dh / scale);
        if (detail::exceeds(dh, H.K() * scale)) ++rep.lipschitz_violations;
        ++rep.samples;
    }
    rep.pass = rep.bound_violations == 0 && rep.lipschitz_violations == 0;
    return rep;
}

// ---------------------------------------------------------------------------
// Max-min representations

/// Control sets and dynamics whose max-min reproduces a given Hamiltonian.
///
/// Lipschitz form:   U = B(0,1) in R^n, V = B(0,P) in R^{mn},
///                   X_alpha(u) = Q_alpha u,  L(t,x,u,v) = H(t,x,v) - <Qu, v>,
///                   value(p) = max_v min_u { p^alpha_i X^i_alpha + L }.
/// Homogeneous form: u = (u1, u2) in B(0,1) x B(0,1) in R^{2n},
///                   v = (v1, v2) in B(0,1) x B(0,1) in R^{2mn},
///                   X_alpha = Q_alpha u1 + C v2_alpha + (L(t,x,u1,v1) - C) v2_alpha,
///                   value(p) = max_v min_u <X, p>.
/// The C terms of the homogeneous form cancel algebraically (X_alpha carries
/// L v2_alpha); they are kept in the split form on purpose.
///
/// Q is stored as an (mn) x n matrix whose row i*m + alpha is row i of Q_alpha,
/// so <Qu, v> pairs with a costate-layout v.
struct RepresentationPieces {
    enum class Form { Lipschitz, Homogeneous };

    Form form = Form::Lipschitz;
    int m = 0;
    int n = 0;
    ControlSpace U, V;
    std::vector<double> Q;
    double K = 0.0;
    double P = 0.0;
    double C = 0.0;
    HamiltonianEval H;

    std::size_t mn() const { return static_cast<std::size_t>(m * n); }

    /// (Q u)_r for the first n entries of u.
    std::vector<double> Qu(std::span<const double> u) const {
        std::vector<double> r(mn(), 0.0);
        for (std::size_t row = 0; row < mn(); ++row)
            for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) r[row] += Q[row * static_cast<std::size_t>(n) + j] * u[j];
        return r;
    }

    /// Lipschitz-form running cost H(t,x,v) - <Qu, v>, with u and v the first blocks of the controls.
    double lipschitz_cost(std::span<const double> t, std::span<const double> x, std::span<const double> u,
                          std::span<const double> v) const {
        CostateMatrix cv(n, m, std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mn())));
        const auto q = Qu(u);
        double s = 0.0;
        for (std::size_t r = 0; r < mn(); ++r) s += q[r] * v[r];
        return H(t, x, cv) - s;
    }

    /// Running cost of the representation (zero in the homogeneous form).
    double running(std::span<const double> t, std::span<const double> x, std::span<const double> u,
                   std::span<const double> v) const {
        return form == Form::Lipschitz ? lipschitz_cost(t, x, u, v) : 0.0;
    }

    /// All m components X_alpha in costate layout (entry i*m + alpha).
    std::vector<double> field(std::span<const double> t, std::span<const double> x, std::span<const double> u,
                              std::span<const double> v) const {
        auto X = Qu(u.subspan(0, static_cast<std::size_t>(n)));
        if (form == Form::Homogeneous) {
            const auto v1 = v.subspan(0, mn());
            const auto v2 = v.subspan(mn(), mn());
            const double L = lipschitz_cost(t, x, u.subspan(0, static_cast<std::size_t>(n)), v1);
            for (std::size_t r = 0; r < mn(); ++r) X[r] += C * v2[r] + (L - C) * v2[r];
        }
        return X;
    }

    /// max over V samples of min over U samples. Same arithmetic as field()
    /// and running(), with H(v1) and Q u1 cached per sample.
    double value(std::span<const double> t, std::span<const double> x, const CostateMatrix& p) const {
        const std::size_t nn = static_cast<std::size_t>(n), d = mn();
        std::vector<std::vector<double>> qu(U.size());
        for (std::size_t ui = 0; ui < U.size(); ++ui) qu[ui] = Qu(U.sample(ui).subspan(0, nn));
        double best = -std::numeric_limits<double>::infinity();
        CostateMatrix cv(n, m);
        for (std::size_t vi = 0; vi < V.size(); ++vi) {
            const auto v = V.sample(vi);
            std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d), cv.p.begin());
            const double hv = H(t, x, cv);
            double inner = std::numeric_limits<double>::infinity();
            for (std::size_t ui = 0; ui < U.size(); ++ui) {
                const auto& q = qu[ui];
                double pair = 0.0;
                for (std::size_t r = 0; r < d; ++r) pair += q[r] * v[r];
                const double L = hv - pair;
                double s = 0.0;
                if (form == Form::Lipschitz) {
                    s = L;
                    for (std::size_t r = 0; r < d; ++r) s += p.p[r] * q[r];
                } else {
                    for (std::size_t r = 0; r < d; ++r) s += p.p[r] * (q[r] + C * v[d + r] + (L - C) * v[d + r]);
                }
                inner = std::min(inner, s);
            }
            best = std::max(best, inner);
        }
        return best;
    }
};

/// Q_1 = (K / sqrt(n)) I, other blocks zero: Frobenius norm K.
inline std::vector<double> default_Q(int m, int n, double K) {
    std::vector<double> Q(static_cast<std::size_t>(m * n * n), 0.0);
    const double d = K / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i) Q[static_cast<std::size_t>((i * m + 0) * n + i)] = d;
    return Q;
}

inline RepresentationPieces build_repr_lipschitz(const HamiltonianEval& H, double K, double P, std::vector<double> Q = {},
                                                 int u_res = 9, int v_res = 17) {
    if (!(P > 0.0)) throw std::invalid_argument("radius P must be positive");
    const int m = H.m(), n = H.n();
    if (Q.empty()) Q = default_Q(m, n, K);
    if (Q.size() != static_cast<std::size_t>(m * n * n)) throw BadOperator("Q must be an (mn) x n matrix");
    const double fro = norm2(Q);
    if (std::fabs(fro - K) > 1e-9) {
        std::ostringstream os;
        os << "Frobenius norm of Q is " << fro << ", expected K = " << K;
        throw BadOperator(os.str());
    }
    RepresentationPieces r;
    r.form = RepresentationPieces::Form::Lipschitz;
    r.m = m;
    r.n = n;
    r.U = ControlSpace::ball(static_cast<std::size_t>(n), 1.0, u_res);
    r.V = ControlSpace::ball(static_cast<std::size_t>(m * n), P, v_res);
    r.Q = std::move(Q);
    r.K = K;
    r.P = P;
    r.H = H;
    return r;
}

/// Rejects Hamiltonians that fail H(lambda p) = lambda H(p) on samples.
/// C <= 0 selects 1.1 x the largest sampled |L|.
inline RepresentationPieces build_repr_homogeneous(const HamiltonianEval& H, double K, double C = 0.0, int res = 9,
                                                   std::uint64_t seed = 1) {
    const int m = H.m(), n = H.n();
    const std::vector<double> t0(static_cast<std::size_t>(m), 0.0), x0(static_cast<std::size_t>(n), 0.0);
    Rng rng(seed);
    for (int s = 0; s < 20; ++s) {
        CostateMatrix p(n, m);
        for (auto& e : p.p) e = rng.uniform(-1.0, 1.0);
        const double hp = H(t0, x0, p);
        for (double lambda : {0.0, 2.0, 0.5}) {
            const double lhs = H(t0, x0, p.scaled(lambda));
            if (std::fabs(lhs - lambda * hp) > 1e-9 * (1.0 + std::fabs(lambda * hp))) {
                std::ostringstream os;
                os << "H(" << lambda << " p) = " << lhs << " but " << lambda << " H(p) = " << lambda * hp;
                throw NotHomogeneous(lambda, os.str());
            }
        }
    }
    RepresentationPieces r;
    r.form = RepresentationPieces::Form::Homogeneous;
    r.m = m;
    r.n = n;
    const auto un = static_cast<std::size_t>(n), vn = static_cast<std::size_t>(m * n);
    r.U = ControlSpace::product(ControlSpace::ball(un, 1.0, res), ControlSpace::ball(un, 1.0, res));
    r.V = ControlSpace::product(ControlSpace::ball(vn, 1.0, res), ControlSpace::ball(vn, 1.0, res));
    r.Q = default_Q(m, n, K);
    r.K = K;
    r.P = std::numeric_limits<double>::infinity();
    r.H = H;
    const auto U1 = ControlSpace::ball(un, 1.0, res), V1 = ControlSpace::ball(vn, 1.0, res);
    double lmax = 0.0;
    for (std::size_t ui = 0; ui < U1.size(); ++ui)
        for (std::size_t vi = 0; vi < V1.size(); ++vi) lmax = std::max(lmax, std::fabs(r.lipschitz_cost(t0, x0, U1.sample(ui), V1.sample(vi))));
    if (C <= 0.0) C = 1.1 * lmax;
    else if (C < lmax) throw BadOperator("C is below the sampled max |L|");
    r.C = C;
    return r;
}

struct ReprReport {
    double max_error = 0.0;
    std::size_t worst = 0;
    std::size_t checked = 0;
    /// Samples with |p| > P: evaluated and reported, never counted against pass.
    std::size_t out_of_hypothesis = 0;
    double max_error_out_of_hypothesis = 0.0;
    double spacing = 0.0;  // control-grid spacing of V
    double tol = 0.0;
    bool pass = true;
};

inline ReprReport verify_repr(const RepresentationPieces& pieces, const HamiltonianEval& H,
                              const std::vector<CostateMatrix>& sample_ps, double tol, std::span<const double> t = {},
                              std::span<const double> x = {}, unsigned threads = 1) {
    std::vector<double> t0(static_cast<std::size_t>(pieces.m), 0.0), x0(static_cast<std::size_t>(pieces.n), 0.0);
    if (!t.empty()) t0.assign(t.begin(), t.end());
    if (!x.empty()) x0.assign(x.begin(), x.end());
    std::vector<double> err(sample_ps.size());
    parallel_for(sample_ps.size(), threads, [&](std::size_t k) {
        err[k] = std::fabs(H(t0, x0, sample_ps[k]) - pieces.value(t0, x0, sample_ps[k]));
    });
    ReprReport rep;
    rep.spacing = pieces.V.spacing();
    rep.tol = tol;
    for (std::size_t k = 0; k < sample_ps.size(); ++k) {
        if (sample_ps[k].norm() > pieces.P * (1.0 + 1e-12)) {
            ++rep.out_of_hypothesis;
            rep.max_error_out_of_hypothesis = std::max(rep.max_error_out_of_hypothesis, err[k]);
            continue;
        }
        ++rep.checked;
        if (err[k] > rep.max_error) {
            rep.max_error = err[k];
            rep.worst = k;
        }
    }
    rep.pass = rep.max_error <= tol;
    return rep;
}

/// Random costates uniform in the ball of the given radius (or on the sphere when `unit`).
inline std::vector<CostateMatrix> random_costates(int n, int m, std::size_t count, double radius, std::uint64_t seed = 1,
                                                  bool unit = false) {
    Rng rng(seed);
    const auto d = static_cast<std::size_t>(n * m);
    std::vector<CostateMatrix> out;
    out.reserve(count);
    while (out.size() < count) {
        CostateMatrix p(n, m);
        for (auto& e : p.p) e = rng.uniform(-1.0, 1.0);
        const double r = p.norm();
        if (r > 1.0 || r < 1e-3) continue;
        const double target = unit ? radius : radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
        out.push_back(p.scaled(target / r));
    }
    return out;
}

} // namespace multigame
