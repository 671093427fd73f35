#pragma once

// Run configuration, solver orchestration and output bundles.
//
// A config is one JSON document:
//
//   {
//     "game": "games/frozen.json" | { ...inline game... },
//     "lattice": {"steps": [16, 16]},
//     "state_grid": {"counts": [9]},
//     "controls": {"U": <control set>, "V": <control set>},      optional override
//     "solvers": ["cic-check", "lower", "upper", "bounds-certify",
//                 "pde-upper", "pde-lower", "hamiltonian-scan", "repr-check"],
//     "tolerances": {...}, "pde": {...}, "repr": {...},
//     "running_region": "shell" | "diagonal-cell",
//     "output": {"dir": "out", "format": "csv" | "json" | "both"},
//     "seed": 1, "threads": 1
//   }
//
// Control sets are {"points": [[...], ...]}, {"box": {"lo", "hi", "res"}},
// {"ball": {"dim", "radius", "res"}} or {"product": [a, b]}.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "multigame/errors.hpp"
#include "multigame/flow.hpp"
#include "multigame/game.hpp"
#include "multigame/grid_io.hpp"
#include "multigame/hamiltonian.hpp"
#include "multigame/pde.hpp"
#include "multigame/values.hpp"

namespace multigame {

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& solver_names() {
    static const std::vector<std::string> names = {"cic-check", "lower",     "upper",         "bounds-certify",
                                                   "pde-upper", "pde-lower", "hamiltonian-scan", "repr-check"};
    return names;
}

struct Tolerances {
    double cic = 1e-6;
    int dpp_h_cells = 2;
    std::size_t bounds_samples = 2000;    // samples for the declared-constant check
    std::size_t bounds_pairs = 10000;     // comparable pairs for the value continuity check
    double cross_check = 0.1;             // |reconstructed - value grid|
    std::size_t generating_trials = 20;
    std::size_t isaacs_samples = 100;
    double isaacs_pmax = 1.0;
    double repr_factor = 2.0;             // repr tolerance = factor x V spacing x K
};

struct PDEOptions {
    double sigma = 0.9;
    double theta_factor = 1.5;
    std::vector<double> theta;
    MarchDirection direction = MarchDirection::TerminalAtT;
    std::vector<std::string> terminal;  // g^alpha; empty means g / m for every alpha
};

struct ReprOptions {
    std::string form = "lipschitz";  // or "homogeneous"
    std::string H;                   // expression in t, x, p<i>_<alpha>; empty means the Frobenius norm of p
    int m = 0;                       // 0: the game's m
    int n = 0;                       // 0: the game's n
    double K = 1.0;
    double P = 2.0;
    double C = 0.0;
    int u_res = 9;
    int v_res = 17;
    std::size_t samples = 20;
};

struct RunConfig {
    std::string config_path;
    std::string game_source;
    std::vector<int> lattice_steps;
    std::vector<int> state_counts;
    std::vector<std::string> solvers;
    Tolerances tol;
    PDEOptions pde;
    ReprOptions repr;
    RunningRegion region = RunningRegion::Shell;
    std::string out_dir = "out";
    std::string format = "csv";
    std::uint64_t seed = 1;
    unsigned threads = 1;
    bool strict = false;
    nlohmann::ordered_json echo;  // parsed config with the game inlined
};

struct LoadedConfig {
    RunConfig cfg;
    GameSpec game;
    BoundsReport bounds;
    std::vector<std::string> warnings;
};

namespace detail {

using ojson = nlohmann::ordered_json;

inline const ojson& require(const ojson& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(path.empty() ? key : path + "." + key, "required field is missing");
    return j.at(key);
}

inline std::string join_path(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

template <class T>
T get_as(const ojson& j, const std::string& path) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path, e.what());
    }
}

template <class T>
T get_or(const ojson& j, const std::string& key, const std::string& path, T fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return get_as<T>(j.at(key), join_path(path, key));
}

inline std::string strip_parse_prefix(const std::string& what) {
    const auto pos = what.find(": ");
    return pos == std::string::npos ? what : what.substr(pos + 2);
}

inline Box box_from_json(const ojson& j, const std::string& path) {
    auto lo = get_as<std::vector<double>>(require(j, "lo", path), join_path(path, "lo"));
    auto hi = get_as<std::vector<double>>(require(j, "hi", path), join_path(path, "hi"));
    if (lo.size() != hi.size()) throw ConfigError(path, "lo and hi differ in length");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] < hi[i])) throw ConfigError(path, "lo must be below hi on every axis");
    return Box(std::move(lo), std::move(hi));
}

inline ControlSpace control_from_json(const ojson& j, const std::string& path) {
    try {
        if (j.contains("points")) {
            return ControlSpace::points(get_as<std::vector<std::vector<double>>>(j.at("points"), join_path(path, "points")));
        }
        if (j.contains("box")) {
            const auto& b = j.at("box");
            const std::string p = join_path(path, "box");
            return ControlSpace::box(get_as<std::vector<double>>(require(b, "lo", p), p + ".lo"),
                                     get_as<std::vector<double>>(require(b, "hi", p), p + ".hi"),
                                     get_as<std::vector<int>>(require(b, "res", p), p + ".res"));
        }
        if (j.contains("ball")) {
            const auto& b = j.at("ball");
            const std::string p = join_path(path, "ball");
            return ControlSpace::ball(get_as<std::size_t>(require(b, "dim", p), p + ".dim"),
                                      get_as<double>(require(b, "radius", p), p + ".radius"),
                                      get_as<int>(require(b, "res", p), p + ".res"));
        }
        if (j.contains("product")) {
            const auto& pr = j.at("product");
            if (!pr.is_array() || pr.size() != 2) throw ConfigError(join_path(path, "product"), "needs exactly two factors");
            return ControlSpace::product(control_from_json(pr[0], join_path(path, "product[0]")),
                                         control_from_json(pr[1], join_path(path, "product[1]")));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    throw ConfigError(path, "expected one of points, box, ball, product");
}

inline std::string expr_field(const ojson& j, const std::string& key, const std::string& path, const char* fallback) {
    if (!j.contains(key)) {
        if (fallback) return fallback;
        throw ConfigError(join_path(path, key), "required field is missing");
    }
    return get_as<std::string>(j.at(key), join_path(path, key));
}

} // namespace detail

/// Parses a game document. Expression errors keep their offset and name the field.
inline GameSpec game_from_json(const nlohmann::ordered_json& j, const std::string& path = "game") {
    using namespace detail;
    GameText t;
    t.name = get_or<std::string>(j, "name", path, "game");
    t.m = get_as<int>(require(j, "m", path), join_path(path, "m"));
    t.n = get_as<int>(require(j, "n", path), join_path(path, "n"));
    if (t.m < 1) throw ConfigError(join_path(path, "m"), "must be at least 1");
    if (t.n < 1) throw ConfigError(join_path(path, "n"), "must be at least 1");
    t.horizon = box_from_json(require(j, "horizon", path), join_path(path, "horizon"));
    t.state_box = box_from_json(require(j, "state_box", path), join_path(path, "state_box"));
    t.dynamics = get_as<std::vector<std::vector<std::string>>>(require(j, "dynamics", path), join_path(path, "dynamics"));
    t.running_cost = expr_field(j, "running_cost", path, "0");
    t.terminal_cost = expr_field(j, "terminal_cost", path, "0");
    t.U = control_from_json(require(j, "U", path), join_path(path, "U"));
    t.V = control_from_json(require(j, "V", path), join_path(path, "V"));
    const auto& c = require(j, "constants", path);
    const std::string cp = join_path(path, "constants");
    t.A = get_as<std::vector<double>>(require(c, "A", cp), cp + ".A");
    t.B = get_as<double>(require(c, "B", cp), cp + ".B");
    t.C = get_as<double>(require(c, "C", cp), cp + ".C");

    // Parse expressions one field at a time so errors can name the field.
    const Alphabet alpha{t.m, t.n, static_cast<int>(t.U.dim()), static_cast<int>(t.V.dim()), false};
    auto check = [&](const std::string& src, const std::string& field, const Alphabet& a) {
        try {
            (void)parse_expr(src, a);
        } catch (const UnknownIdentifier&) {
            throw;
        } catch (const ParseError& e) {
            throw ParseError(e.offset, field + ": " + strip_parse_prefix(e.what()));
        }
    };
    for (std::size_t a = 0; a < t.dynamics.size(); ++a)
        for (std::size_t i = 0; i < t.dynamics[a].size(); ++i)
            check(t.dynamics[a][i], path + ".dynamics[" + std::to_string(a) + "][" + std::to_string(i) + "]", alpha);
    check(t.running_cost, join_path(path, "running_cost"), alpha);
    check(t.terminal_cost, join_path(path, "terminal_cost"), Alphabet{0, t.n, 0, 0, false});
    try {
        return make_game(t);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

inline nlohmann::ordered_json read_json_file(const std::string& path, const std::string& field) {
    std::ifstream in(path);
    if (!in) throw ConfigError(field, "cannot open '" + path + "'");
    try {
        return nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(field, std::string("invalid JSON: ") + e.what());
    }
}

/// Parses a config document; `base_dir` resolves a relative game path.
inline LoadedConfig load_config_json(const nlohmann::ordered_json& doc, const std::string& base_dir = ".") {
    using namespace detail;
    LoadedConfig lc;
    RunConfig& c = lc.cfg;
    if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");

    const auto& gj = require(doc, "game", "");
    ojson game_doc;
    if (gj.is_string()) {
        std::filesystem::path p = gj.get<std::string>();
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        c.game_source = gj.get<std::string>();
        game_doc = read_json_file(p.string(), "game");
    } else {
        c.game_source = "inline";
        game_doc = gj;
    }
    if (doc.contains("controls")) {
        const auto& cj = doc.at("controls");
        if (cj.contains("U")) game_doc["U"] = cj.at("U");
        if (cj.contains("V")) game_doc["V"] = cj.at("V");
    }
    lc.game = game_from_json(game_doc, "game");
    const GameSpec& g = lc.game;

    c.lattice_steps = get_as<std::vector<int>>(require(require(doc, "lattice", ""), "steps", "lattice"), "lattice.steps");
    if (c.lattice_steps.size() != static_cast<std::size_t>(g.m)) throw ConfigError("lattice.steps", "needs one entry per time axis");
    for (int s : c.lattice_steps)
        if (s < 1) throw ConfigError("lattice.steps", "resolutions must be at least 1");
    c.state_counts = get_as<std::vector<int>>(require(require(doc, "state_grid", ""), "counts", "state_grid"), "state_grid.counts");
    if (c.state_counts.size() != static_cast<std::size_t>(g.n)) throw ConfigError("state_grid.counts", "needs one entry per state axis");
    for (int s : c.state_counts)
        if (s < 1) throw ConfigError("state_grid.counts", "resolutions must be at least 1");

    c.solvers = get_or<std::vector<std::string>>(doc, "solvers", "", solver_names());
    for (const auto& s : c.solvers)
        if (std::find(solver_names().begin(), solver_names().end(), s) == solver_names().end())
            throw ConfigError("solvers", "unknown solver '" + s + "'");

    if (doc.contains("tolerances")) {
        const auto& t = doc.at("tolerances");
        const std::string p = "tolerances";
        c.tol.cic = get_or(t, "cic", p, c.tol.cic);
        c.tol.dpp_h_cells = get_or(t, "dpp_h_cells", p, c.tol.dpp_h_cells);
        c.tol.bounds_samples = get_or(t, "bounds_samples", p, c.tol.bounds_samples);
        c.tol.bounds_pairs = get_or(t, "bounds_pairs", p, c.tol.bounds_pairs);
        c.tol.cross_check = get_or(t, "cross_check", p, c.tol.cross_check);
        c.tol.generating_trials = get_or(t, "generating_trials", p, c.tol.generating_trials);
        c.tol.isaacs_samples = get_or(t, "isaacs_samples", p, c.tol.isaacs_samples);
        c.tol.isaacs_pmax = get_or(t, "isaacs_pmax", p, c.tol.isaacs_pmax);
        c.tol.repr_factor = get_or(t, "repr_factor", p, c.tol.repr_factor);
        if (c.tol.dpp_h_cells < 1) throw ConfigError("tolerances.dpp_h_cells", "must be at least 1");
    }
    if (doc.contains("pde")) {
        const auto& pj = doc.at("pde");
        c.pde.sigma = get_or(pj, "sigma", "pde", c.pde.sigma);
        c.pde.theta_factor = get_or(pj, "theta_factor", "pde", c.pde.theta_factor);
        c.pde.theta = get_or(pj, "theta", "pde", c.pde.theta);
        c.pde.terminal = get_or(pj, "terminal", "pde", c.pde.terminal);
        const auto dir = get_or<std::string>(pj, "direction", "pde", "terminal-at-T");
        if (dir == "terminal-at-T") c.pde.direction = MarchDirection::TerminalAtT;
        else if (dir == "initial-at-0") c.pde.direction = MarchDirection::InitialAtZero;
        else throw ConfigError("pde.direction", "expected terminal-at-T or initial-at-0");
        if (!(c.pde.sigma > 0.0 && c.pde.sigma <= 1.0)) throw ConfigError("pde.sigma", "must lie in (0, 1]");
        if (!c.pde.terminal.empty() && c.pde.terminal.size() != static_cast<std::size_t>(g.m))
            throw ConfigError("pde.terminal", "needs one expression per time axis");
        for (std::size_t a = 0; a < c.pde.terminal.size(); ++a) {
            try {
                (void)parse_expr(c.pde.terminal[a], Alphabet{0, g.n, 0, 0, false});
            } catch (const ParseError& e) {
                throw ParseError(e.offset, "pde.terminal[" + std::to_string(a) + "]: " + strip_parse_prefix(e.what()));
            }
        }
    }
    if (doc.contains("repr")) {
        const auto& rj = doc.at("repr");
        c.repr.form = get_or(rj, "form", "repr", c.repr.form);
        if (c.repr.form != "lipschitz" && c.repr.form != "homogeneous") throw ConfigError("repr.form", "expected lipschitz or homogeneous");
        c.repr.H = get_or(rj, "H", "repr", c.repr.H);
        c.repr.m = get_or(rj, "m", "repr", c.repr.m);
        c.repr.n = get_or(rj, "n", "repr", c.repr.n);
        c.repr.K = get_or(rj, "K", "repr", c.repr.K);
        c.repr.P = get_or(rj, "P", "repr", c.repr.P);
        c.repr.C = get_or(rj, "C", "repr", c.repr.C);
        c.repr.u_res = get_or(rj, "u_res", "repr", c.repr.u_res);
        c.repr.v_res = get_or(rj, "v_res", "repr", c.repr.v_res);
        c.repr.samples = get_or(rj, "samples", "repr", c.repr.samples);
    }
    const auto region = get_or<std::string>(doc, "running_region", "", "shell");
    if (region == "shell") c.region = RunningRegion::Shell;
    else if (region == "diagonal-cell") c.region = RunningRegion::DiagonalCell;
    else throw ConfigError("running_region", "expected shell or diagonal-cell");
    if (doc.contains("output")) {
        c.out_dir = get_or(doc.at("output"), "dir", "output", c.out_dir);
        c.format = get_or(doc.at("output"), "format", "output", c.format);
        if (c.format != "csv" && c.format != "json" && c.format != "both") throw ConfigError("output.format", "expected csv, json or both");
    }
    c.seed = get_or<std::uint64_t>(doc, "seed", "", 1);
    c.threads = get_or<unsigned>(doc, "threads", "", 1);
    if (c.threads < 1) c.threads = 1;

    c.echo = doc;
    c.echo["game"] = game_doc;

    lc.bounds = certify_bounds(g, c.tol.bounds_samples, c.seed);
    for (const auto& v : lc.bounds.violations) lc.warnings.push_back("BoundsViolation: " + v);
    return lc;
}

inline LoadedConfig load_config(const std::string& path) {
    auto doc = read_json_file(path, "");
    auto lc = load_config_json(doc, std::filesystem::path(path).parent_path().string());
    lc.cfg.config_path = path;
    return lc;
}

// ---------------------------------------------------------------------------
// Running

struct OutputBundle {
    std::vector<std::pair<std::string, GridTable>> grids;  // file stem, table
    nlohmann::ordered_json reports = nlohmann::ordered_json::object();
    nlohmann::ordered_json manifest = nlohmann::ordered_json::object();
    std::vector<std::string> completed;
    std::vector<std::string> failures;  // verification failures (exit code 3 under --strict)
    bool verification_failed() const { return !failures.empty(); }
};

/// Solvers that must run for the selection, in dependency order.
inline std::vector<std::string> plan_stages(const std::vector<std::string>& selected) {
    std::set<std::string> want(selected.begin(), selected.end());
    if (want.count("bounds-certify")) {
        want.insert("lower");
        want.insert("upper");
    }
    std::vector<std::string> order;
    for (const auto& s : {"cic-check", "lower", "upper", "bounds-certify", "pde-upper", "pde-lower", "hamiltonian-scan", "repr-check"})
        if (want.count(s)) order.push_back(s);
    return order;
}

namespace detail {

inline ojson dpp_json(const DPPReport& r) {
    return {{"h_cells", r.h_cells}, {"max_residual", r.max_residual}, {"points", r.points}, {"worst_node", r.worst_node},
            {"worst_state", r.worst_state}};
}

inline HamiltonianEval repr_hamiltonian(const ReprOptions& o, int m, int n) {
    if (!o.H.empty()) return HamiltonianEval::custom(o.H, m, n, o.K);
    std::string src = "sqrt(";
    for (int i = 1; i <= n; ++i)
        for (int a = 1; a <= m; ++a) src += (i + a > 2 ? " + " : "") + ("p" + std::to_string(i) + "_" + std::to_string(a)) + "^2";
    return HamiltonianEval::custom(src + ")", m, n, o.K);
}

} // namespace detail

/// Runs the selected solvers. Pure computation; nothing is written.
inline OutputBundle execute(const LoadedConfig& lc, std::vector<std::string>* progress = nullptr) {
    using detail::ojson;
    const RunConfig& c = lc.cfg;
    const GameSpec& g = lc.game;
    OutputBundle b;
    const TimeLattice lat(g.horizon, c.lattice_steps);
    const StateGrid sg(g.state_box, c.state_counts);
    const SolveOptions sopt{c.region, c.threads};
    auto& R = b.reports;
    R["game"] = g.name;
    R["running_region"] = to_string(c.region);
    R["C_hyp"] = 0.0;
    R["warnings"] = lc.warnings;
    R["declared_bounds"] = {{"pass", lc.bounds.pass}, {"violations", lc.bounds.violations}, {"samples", lc.bounds.samples}};

    std::vector<double> xc(static_cast<std::size_t>(g.n));
    for (std::size_t i = 0; i < xc.size(); ++i) xc[i] = 0.5 * (g.state_box.lo[i] + g.state_box.hi[i]);
    std::optional<ValueSolution> lower, upper;
    const auto stages = plan_stages(c.solvers);
    auto done = [&](const std::string& s) {
        b.completed.push_back(s);
        if (progress) progress->push_back(s);
    };
    auto want_grid = [&](const std::string& stem, GridTable t) { b.grids.emplace_back(stem, std::move(t)); };

    for (const auto& stage : stages) {
        if (stage == "cic-check") {
            const auto ctrl = ControlField::random(lat, g, c.seed);
            const auto rep = check_cic(g, ctrl, lat, c.tol.cic);
            const double pir = path_independence_residual(g, lat, ctrl, lat.origin(), xc, lat.top());
            R["cic"] = {{"max_residual", rep.max_residual}, {"tolerance", rep.tolerance}, {"pass", rep.pass},
                        {"evaluations", rep.evaluations}, {"worst_cell", rep.worst_cell}, {"worst_state", rep.worst_state},
                        {"worst_pair", {rep.worst_alpha + 1, rep.worst_beta + 1}}, {"path_independence_residual", pir}};
            if (!rep.pass) {
                b.failures.push_back("cic-check");
                R["flags"].push_back("cic-failed: value solvers ran on a non-integrable m-flow");
            }
        } else if (stage == "lower" || stage == "upper") {
            auto sol = stage == "lower" ? solve_lower(g, lat, sg, sopt) : solve_upper(g, lat, sg, sopt);
            const auto dpp = dpp_residual(g, sol.grid, static_cast<std::size_t>(c.tol.dpp_h_cells), c.threads);
            const auto dpp1 = dpp_residual(g, sol.grid, 1, c.threads);
            R[stage] = {{"value_at_origin_center", sol.grid.interpolate(lat.origin(), xc)},
                        {"dpp_one_cell", detail::dpp_json(dpp1)},
                        {"dpp", detail::dpp_json(dpp)},
                        {"max_remainder_volume", sol.grid.max_remainder_volume}};
            want_grid(stage, grid_table(sol.grid));
            (stage == "lower" ? lower : upper) = std::move(sol);
            if (lower && upper) {
                double worst = -std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < lower->grid.values().size(); ++i)
                    worst = std::max(worst, lower->grid.values()[i] - upper->grid.values()[i]);
                R["ordering"] = {{"max_lower_minus_upper", worst}, {"pass", worst <= 1e-9}};
                if (worst > 1e-9) b.failures.push_back("ordering");
            }
        } else if (stage == "bounds-certify") {
            const auto rep = certify_value_bounds(g, lower->grid, upper->grid, c.tol.bounds_pairs, c.seed);
            R["bounds"] = {{"D", rep.D},
                           {"E", rep.E},
                           {"max_abs_value", rep.max_abs_value},
                           {"bound_violations", rep.bound_violations},
                           {"continuity_pairs", rep.continuity_pairs},
                           {"continuity_violations", rep.continuity_violations},
                           {"shell_continuity_violations", rep.shell_continuity_violations},
                           {"worst_margin", rep.worst_margin},
                           {"pass", rep.pass}};
            if (!rep.pass) b.failures.push_back("bounds-certify");
        } else if (stage == "pde-upper" || stage == "pde-lower") {
            const bool up = stage == "pde-upper";
            const auto H = up ? HamiltonianEval::upper(g) : HamiltonianEval::lower(g);
            std::vector<ScalarExpr> term;
            if (c.pde.terminal.empty()) term = equal_split_terminal(g.g, g.m);
            else
                for (const auto& s : c.pde.terminal) term.push_back(parse_expr(s, Alphabet{0, g.n, 0, 0, false}));
            PDESchemeConfig pc;
            pc.sigma = c.pde.sigma;
            pc.theta_factor = c.pde.theta_factor;
            pc.theta = c.pde.theta;
            pc.direction = c.pde.direction;
            pc.seed = c.seed;
            pc.threads = c.threads;
            const auto field = solve_dhjiu(H, term, lat, sg, pc);
            auto res = pde_residual(field, H);
            ojson rj = {{"gauge", field.gauge},
                        {"direction", to_string(field.direction)},
                        {"C_hyp", field.C_hyp},
                        {"theta", field.theta},
                        {"theta_bound", field.theta_bound},
                        {"max_substeps", field.max_substeps},
                        {"max_pde_residual", res.max_pde_residual},
                        {"terminal_mismatch", res.terminal_mismatch},
                        {"interior_points", res.interior_points}};
            const auto& vs = up ? upper : lower;
            if (vs && field.direction == MarchDirection::TerminalAtT) {
                const double gen = generating_residual(field, vs->grid, g, c.tol.generating_trials, c.seed);
                double cross = 0.0;
                const auto ctrl = ControlField::random(lat, g, c.seed + 1);
                for (std::size_t s = 0; s < sg.size(); ++s) {
                    const auto x0 = sg.point(s);
                    cross = std::max(cross, std::fabs(reconstruct_value(field, g, ctrl, lat.origin(), x0) - vs->grid.value(lat.origin(), s)));
                }
                rj["generating_residual"] = gen;
                rj["reconstruct_vs_value_at_origin"] = cross;
                rj["cross_check_pass"] = cross <= c.tol.cross_check;
                if (cross > c.tol.cross_check) b.failures.push_back(stage + " cross-check");
            }
            R[stage] = std::move(rj);
            want_grid(up ? "pde_upper" : "pde_lower", grid_table(field, stage));
        } else if (stage == "hamiltonian-scan") {
            const auto samples = random_hamiltonian_samples(g, c.tol.isaacs_samples, c.tol.isaacs_pmax, c.seed);
            const double gap = isaacs_gap(g, samples, c.threads);
            const CostateMatrix zero(g.n, g.m);
            const auto t0 = g.horizon.lo;
            std::size_t order_violations = 0;
            for (const auto& s : samples)
                if (h_lower(g, s.t, s.x, s.p) > h_upper(g, s.t, s.x, s.p)) ++order_violations;
            R["hamiltonian"] = {{"isaacs_gap", gap},
                                {"samples", samples.size()},
                                {"pmax", c.tol.isaacs_pmax},
                                {"H_upper_at_p0", h_upper(g, t0, xc, zero)},
                                {"H_lower_at_p0", h_lower(g, t0, xc, zero)},
                                {"order_violations", order_violations}};
        } else if (stage == "repr-check") {
            const int m = c.repr.m > 0 ? c.repr.m : g.m;
            const int n = c.repr.n > 0 ? c.repr.n : g.n;
            const auto H = detail::repr_hamiltonian(c.repr, m, n);
            ojson rj = {{"form", c.repr.form}, {"H", H.label()}, {"K", c.repr.K}};
            try {
                RepresentationPieces pieces = c.repr.form == "lipschitz"
                                                  ? build_repr_lipschitz(H, c.repr.K, c.repr.P, {}, c.repr.u_res, c.repr.v_res)
                                                  : build_repr_homogeneous(H, c.repr.K, c.repr.C, c.repr.u_res, c.seed);
                const bool lip = pieces.form == RepresentationPieces::Form::Lipschitz;
                const auto ps = random_costates(n, m, c.repr.samples, lip ? c.repr.P : 1.0, c.seed, !lip);
                const double tol = c.tol.repr_factor * pieces.V.spacing() * c.repr.K;
                const auto rep = verify_repr(pieces, H, ps, tol, {}, {}, c.threads);
                rj["P"] = lip ? c.repr.P : 0.0;
                rj["C"] = pieces.C;
                rj["max_error"] = rep.max_error;
                rj["tolerance"] = rep.tol;
                rj["v_spacing"] = rep.spacing;
                rj["checked"] = rep.checked;
                rj["pass"] = rep.pass;
                if (!rep.pass) b.failures.push_back("repr-check");
            } catch (const NotHomogeneous& e) {
                rj["rejected"] = e.what();
                rj["lambda"] = e.lambda;
                rj["pass"] = false;
                b.failures.push_back("repr-check");
            }
            R["repr"] = std::move(rj);
        }
        done(stage);
    }
    R["verification_failures"] = b.failures;
    return b;
}

namespace detail {

inline std::string compiler_id() {
#if defined(__clang__)
    return "clang " __clang_version__;
#elif defined(__GNUC__)
    return "gcc " __VERSION__;
#else
    return "unknown";
#endif
}

inline ojson manifest_base(const RunConfig& c) {
    ojson m;
    m["versions"] = {{"multigame", kVersion}, {"compiler", compiler_id()}, {"cplusplus", static_cast<long>(__cplusplus)}};
    m["config"] = c.echo;
    m["seed"] = c.seed;
    m["threads"] = c.threads;
    return m;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot open '" + p.string() + "' for writing");
    out << text;
    if (!out) throw Error("write to '" + p.string() + "' failed");
}

/// An existing output directory is replaced only if it is empty or holds a
/// previous run (recognised by its manifest).
inline void clear_previous_output(const std::filesystem::path& out) {
    namespace fs = std::filesystem;
    if (!fs::exists(out)) return;
    if (!fs::is_directory(out)) throw ConfigError("output.dir", "'" + out.string() + "' exists and is not a directory");
    if (!fs::is_empty(out) && !fs::exists(out / "manifest.json"))
        throw ConfigError("output.dir", "'" + out.string() + "' is not empty and holds no previous run");
    fs::remove_all(out);
}

} // namespace detail

/// Writes grids, reports.json and manifest.json into a temporary sibling
/// directory and renames it into place.
inline void write_bundle(OutputBundle& b, const RunConfig& c, const std::string& out_dir, double elapsed_ms) {
    namespace fs = std::filesystem;
    const fs::path out(out_dir);
    const fs::path tmp = out.string() + ".partial";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    std::vector<std::string> files;
    for (const auto& [stem, table] : b.grids) {
        if (c.format == "csv" || c.format == "both") {
            detail::write_text(tmp / (stem + ".csv"), to_csv(table));
            files.push_back(stem + ".csv");
        }
        if (c.format == "json" || c.format == "both") {
            detail::write_text(tmp / (stem + ".json"), to_json(table));
            files.push_back(stem + ".json");
        }
    }
    detail::write_text(tmp / "reports.json", b.reports.dump(2) + "\n");
    files.push_back("reports.json");
    b.manifest = detail::manifest_base(c);
    b.manifest["status"] = "complete";
    b.manifest["stages"] = b.completed;
    b.manifest["files"] = files;
    b.manifest["timings_ms"] = {{"total", elapsed_ms}};
    detail::write_text(tmp / "manifest.json", b.manifest.dump(2) + "\n");
    detail::clear_previous_output(out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    fs::rename(tmp, out);
}

/// Leaves only a manifest describing the stages that finished before `error`.
inline void write_aborted(const RunConfig& c, const std::string& out_dir, const std::vector<std::string>& completed,
                          const std::string& error) {
    namespace fs = std::filesystem;
    const fs::path out(out_dir);
    fs::remove_all(out.string() + ".partial");
    detail::clear_previous_output(out);
    fs::create_directories(out);
    auto m = detail::manifest_base(c);
    m["status"] = "aborted";
    m["stages"] = completed;
    m["error"] = error;
    detail::write_text(out / "manifest.json", m.dump(2) + "\n");
}

/// Executes and writes the bundle. Solver errors leave a manifest-only output
/// directory and are rethrown.
inline OutputBundle run(const LoadedConfig& lc) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::string> progress;
    OutputBundle b;
    try {
        b = execute(lc, &progress);
    } catch (const std::exception& e) {
        write_aborted(lc.cfg, lc.cfg.out_dir, progress, e.what());
        throw;
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    write_bundle(b, lc.cfg, lc.cfg.out_dir, ms);
    return b;
}

} // namespace multigame
