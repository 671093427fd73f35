// multigame <subcommand> --config <file> --out <dir> [--seed N] [--threads N] [--strict]
// multigame plot --grid <file> --fix t1=0 [--fix ...] [--out <file>]

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "multigame/config.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 1, kSolver = 2, kVerification = 3 };

std::vector<std::string> solvers_for(const std::string& sub, const std::vector<std::string>& from_config) {
    if (sub == "cic") return {"cic-check"};
    if (sub == "lower") return {"lower"};
    if (sub == "upper") return {"upper"};
    if (sub == "pde") return {"lower", "upper", "pde-upper", "pde-lower"};
    if (sub == "hamiltonian") return {"hamiltonian-scan"};
    if (sub == "repr") return {"repr-check"};
    if (sub == "bounds") return {"bounds-certify"};
    return from_config;
}

struct Options {
    std::string config;
    std::string out;
    std::string format;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool strict = false;
};

int run_solvers(const std::string& sub, const Options& o) {
    multigame::LoadedConfig lc;
    try {
        lc = multigame::load_config(o.config);
    } catch (const multigame::Error& e) {
        std::cerr << "multigame: " << e.what() << '\n';
        return kConfig;
    }
    auto& c = lc.cfg;
    c.solvers = solvers_for(sub, c.solvers);
    c.echo["solvers"] = c.solvers;
    if (!o.out.empty()) c.out_dir = o.out;
    if (!o.format.empty()) c.format = o.format;
    if (o.seed) c.seed = o.seed;
    if (o.threads) c.threads = o.threads;
    c.echo["seed"] = c.seed;
    c.echo["output"]["format"] = c.format;
    for (const auto& w : lc.warnings) std::cerr << "warning: " << w << '\n';

    multigame::OutputBundle b;
    try {
        b = multigame::run(lc);
    } catch (const multigame::ConfigError& e) {
        std::cerr << "multigame: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "multigame: solver error: " << e.what() << '\n';
        return kSolver;
    }
    std::cout << "wrote " << c.out_dir << " (" << b.completed.size() << " stages)\n";
    for (const auto& f : b.failures) std::cout << "verification failure: " << f << '\n';
    return o.strict && b.verification_failed() ? kVerification : kOk;
}

int run_plot(const std::string& grid, const std::vector<std::string>& fixes, const std::string& out) {
    std::map<std::string, double> fixed;
    for (const auto& f : fixes) {
        const auto eq = f.find('=');
        if (eq == std::string::npos) {
            std::cerr << "multigame: --fix expects axis=value, got '" << f << "'\n";
            return kConfig;
        }
        fixed[f.substr(0, eq)] = std::stod(f.substr(eq + 1));
    }
    try {
        const auto table = multigame::import_grid(grid);
        const auto text = multigame::emit_plotdata(table, fixed);
        if (out.empty()) {
            std::cout << text;
        } else {
            std::ofstream os(out);
            os << text;
        }
    } catch (const multigame::BadSlice& e) {
        std::cerr << "multigame: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "multigame: " << e.what() << '\n';
        return kSolver;
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-team multitime differential games: value functions, HJI fields, diagnostics"};
    app.require_subcommand(1);
    Options o;
    std::map<std::string, CLI::App*> subs;
    const std::vector<std::pair<std::string, std::string>> solver_subs = {
        {"cic", "check complete integrability of the m-flow"},
        {"lower", "lower value function by dynamic programming"},
        {"upper", "upper value function by dynamic programming"},
        {"pde", "generating fields from the upper and lower HJI equations"},
        {"hamiltonian", "upper/lower Hamiltonians and the Isaacs gap"},
        {"repr", "max-min representation check"},
        {"bounds", "boundedness and continuity certificate of both values"},
        {"all", "every solver listed in the config (default: all)"},
    };
    for (const auto& [name, help] : solver_subs) {
        auto* s = app.add_subcommand(name, help);
        s->add_option("--config", o.config, "config JSON")->required()->check(CLI::ExistingFile);
        s->add_option("--out", o.out, "output directory (overrides output.dir)");
        s->add_option("--seed", o.seed, "random seed (overrides config)");
        s->add_option("--threads", o.threads, "worker threads");
        s->add_option("--format", o.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
        s->add_flag("--strict", o.strict, "exit 3 when any verification fails");
        subs[name] = s;
    }
    std::string grid, plot_out;
    std::vector<std::string> fixes;
    auto* plot = app.add_subcommand("plot", "write a gnuplot table of a grid slice");
    plot->add_option("--grid", grid, "exported grid (.csv or .json)")->required()->check(CLI::ExistingFile);
    plot->add_option("--fix", fixes, "axis=value, repeatable");
    plot->add_option("--out", plot_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }
    if (plot->parsed()) return run_plot(grid, fixes, plot_out);
    for (const auto& [name, s] : subs)
        if (s->parsed()) return run_solvers(name, o);
    return kConfig;
}
