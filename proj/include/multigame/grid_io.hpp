#pragma once

// Flat export of value grids and generating fields. Every table carries its
// axes, spacings, gauge and kind in a header; numbers are written so that
// import reproduces every finite double bit for bit.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "multigame/errors.hpp"
#include "multigame/pde.hpp"
#include "multigame/values.hpp"

namespace multigame {

/// Row-major table: one row per (lattice node, state node), columns are the
/// axis coordinates followed by the fields.
struct GridTable {
    std::string kind;
    std::string gauge = "none";
    std::vector<std::string> axes;
    std::vector<double> spacing;
    std::vector<double> lattice_lo, lattice_hi;
    std::vector<int> lattice_steps;
    std::vector<double> state_lo, state_hi;
    std::vector<int> state_counts;
    std::vector<std::string> fields;
    std::vector<double> data;

    std::size_t columns() const { return axes.size() + fields.size(); }
    std::size_t rows() const { return columns() == 0 ? 0 : data.size() / columns(); }
    double at(std::size_t row, std::size_t col) const { return data[row * columns() + col]; }

    bool operator==(const GridTable&) const = default;
};

namespace detail {

inline GridTable table_skeleton(const TimeLattice& lat, const StateGrid& sg) {
    GridTable t;
    for (std::size_t a = 0; a < lat.dim(); ++a) {
        t.axes.push_back("t" + std::to_string(a + 1));
        t.spacing.push_back(lat.spacing(a));
    }
    for (std::size_t i = 0; i < sg.dim(); ++i) {
        t.axes.push_back("x" + std::to_string(i + 1));
        t.spacing.push_back(sg.spacing(i));
    }
    t.lattice_lo = lat.box().lo;
    t.lattice_hi = lat.box().hi;
    t.lattice_steps = lat.steps();
    t.state_lo = sg.box().lo;
    t.state_hi = sg.box().hi;
    t.state_counts = sg.counts();
    return t;
}

template <class RowFn>
void fill_rows(GridTable& t, const TimeLattice& lat, const StateGrid& sg, RowFn&& fields_at) {
    for_each_node(lat.origin(), lat.top(), [&](const Node& k) {
        const auto tk = lat.time(k);
        for (std::size_t s = 0; s < sg.size(); ++s) {
            t.data.insert(t.data.end(), tk.begin(), tk.end());
            const auto x = sg.point(s);
            t.data.insert(t.data.end(), x.begin(), x.end());
            fields_at(k, s, t.data);
        }
    });
}

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
std::string joined(const std::vector<T>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ',';
        if constexpr (std::is_same_v<T, double>) s += num(xs[i]);
        else if constexpr (std::is_same_v<T, int>) s += std::to_string(xs[i]);
        else s += xs[i];
    }
    return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw Error("malformed number '" + s + "' in grid file");
    return v;
}

inline std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& e : split(s, ',')) out.push_back(parse_double(trim(e)));
    return out;
}

inline std::vector<int> parse_ints(const std::string& s) {
    std::vector<int> out;
    for (const auto& e : split(s, ',')) out.push_back(std::stoi(trim(e)));
    return out;
}

/// "key: value; key: value" or "key=value key=value" into a map.
inline std::map<std::string, std::string> header_fields(const std::string& line, char pair_sep, char kv_sep) {
    std::map<std::string, std::string> out;
    for (const auto& part : split(line, pair_sep)) {
        const auto p = trim(part);
        if (p.empty()) continue;
        const auto eq = p.find(kv_sep);
        if (eq == std::string::npos) throw Error("malformed grid header entry '" + p + "'");
        out[trim(p.substr(0, eq))] = trim(p.substr(eq + 1));
    }
    return out;
}

} // namespace detail

/// Fields value, u, v (chosen control sample indices).
inline GridTable grid_table(const ValueGrid& vg) {
    auto t = detail::table_skeleton(vg.lattice(), vg.state_grid());
    t.kind = to_string(vg.kind());
    t.fields = {"value", "u", "v"};
    detail::fill_rows(t, vg.lattice(), vg.state_grid(), [&](const Node& k, std::size_t s, std::vector<double>& out) {
        const auto c = vg.control(k, s);
        out.push_back(vg.value(k, s));
        out.push_back(static_cast<double>(c.u));
        out.push_back(static_cast<double>(c.v));
    });
    return t;
}

/// Fields M1..Mm.
inline GridTable grid_table(const GeneratingField& f, const std::string& kind) {
    auto t = detail::table_skeleton(f.lattice(), f.state_grid());
    t.kind = kind;
    t.gauge = f.gauge;
    for (int a = 0; a < f.m(); ++a) t.fields.push_back("M" + std::to_string(a + 1));
    detail::fill_rows(t, f.lattice(), f.state_grid(), [&](const Node& k, std::size_t s, std::vector<double>& out) {
        for (std::size_t a = 0; a < static_cast<std::size_t>(f.m()); ++a) out.push_back(f.component(a, k, s));
    });
    return t;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string to_csv(const GridTable& t) {
    using detail::joined;
    std::ostringstream os;
    os << "# axes: " << joined(t.axes) << "; spacing: " << joined(t.spacing) << "; gauge: " << t.gauge << "; kind: " << t.kind << '\n';
    os << "# lattice: lo=" << joined(t.lattice_lo) << " hi=" << joined(t.lattice_hi) << " steps=" << joined(t.lattice_steps) << '\n';
    os << "# state_grid: lo=" << joined(t.state_lo) << " hi=" << joined(t.state_hi) << " counts=" << joined(t.state_counts) << '\n';
    os << "# fields: " << joined(t.fields) << '\n';
    std::vector<std::string> cols = t.axes;
    cols.insert(cols.end(), t.fields.begin(), t.fields.end());
    os << joined(cols) << '\n';
    const std::size_t c = t.columns();
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t j = 0; j < c; ++j) {
            if (j) os << ',';
            os << detail::num(t.data[r * c + j]);
        }
        os << '\n';
    }
    return os.str();
}

inline GridTable from_csv(const std::string& text) {
    using namespace detail;
    std::istringstream is(text);
    std::string line;
    GridTable t;
    auto header = [&](const std::string& tag) {
        if (!std::getline(is, line) || line.rfind("# " + tag + ":", 0) != 0) throw Error("grid CSV: expected '# " + tag + ":' header");
        return line.substr(tag.size() + 3);
    };
    {
        const auto h = header_fields(header("axes").insert(0, "axes:"), ';', ':');
        t.axes = split(h.at("axes"), ',');
        t.spacing = parse_doubles(h.at("spacing"));
        t.gauge = h.at("gauge");
        t.kind = h.at("kind");
    }
    {
        const auto h = header_fields(header("lattice"), ' ', '=');
        t.lattice_lo = parse_doubles(h.at("lo"));
        t.lattice_hi = parse_doubles(h.at("hi"));
        t.lattice_steps = parse_ints(h.at("steps"));
    }
    {
        const auto h = header_fields(header("state_grid"), ' ', '=');
        t.state_lo = parse_doubles(h.at("lo"));
        t.state_hi = parse_doubles(h.at("hi"));
        t.state_counts = parse_ints(h.at("counts"));
    }
    t.fields = split(trim(header("fields")), ',');
    if (!std::getline(is, line)) throw Error("grid CSV: missing column line");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto row = parse_doubles(line);
        if (row.size() != t.columns()) throw Error("grid CSV: row has " + std::to_string(row.size()) + " columns");
        t.data.insert(t.data.end(), row.begin(), row.end());
    }
    return t;
}

// ---------------------------------------------------------------------------
// JSON

inline std::string to_json(const GridTable& t) {
    nlohmann::ordered_json j;
    j["kind"] = t.kind;
    j["gauge"] = t.gauge;
    j["axes"] = t.axes;
    j["spacing"] = t.spacing;
    j["lattice"] = {{"lo", t.lattice_lo}, {"hi", t.lattice_hi}, {"steps", t.lattice_steps}};
    j["state_grid"] = {{"lo", t.state_lo}, {"hi", t.state_hi}, {"counts", t.state_counts}};
    j["fields"] = t.fields;
    j["shape"] = {t.rows(), t.columns()};
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < t.rows(); ++r)
        rows.push_back(std::vector<double>(t.data.begin() + static_cast<std::ptrdiff_t>(r * t.columns()),
                                           t.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * t.columns())));
    j["data"] = std::move(rows);
    return j.dump(1) + "\n";
}

inline GridTable from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    GridTable t;
    t.kind = j.at("kind").get<std::string>();
    t.gauge = j.at("gauge").get<std::string>();
    t.axes = j.at("axes").get<std::vector<std::string>>();
    t.spacing = j.at("spacing").get<std::vector<double>>();
    t.lattice_lo = j.at("lattice").at("lo").get<std::vector<double>>();
    t.lattice_hi = j.at("lattice").at("hi").get<std::vector<double>>();
    t.lattice_steps = j.at("lattice").at("steps").get<std::vector<int>>();
    t.state_lo = j.at("state_grid").at("lo").get<std::vector<double>>();
    t.state_hi = j.at("state_grid").at("hi").get<std::vector<double>>();
    t.state_counts = j.at("state_grid").at("counts").get<std::vector<int>>();
    t.fields = j.at("fields").get<std::vector<std::string>>();
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    for (const auto& row : j.at("data")) {
        const auto r = row.get<std::vector<double>>();
        if (r.size() != t.columns()) throw Error("grid JSON: row width does not match axes and fields");
        t.data.insert(t.data.end(), r.begin(), r.end());
    }
    if (shape.size() != 2 || shape[0] != t.rows() || shape[1] != t.columns()) throw Error("grid JSON: shape does not match data");
    return t;
}

enum class GridFormat { Csv, Json };

inline std::string export_grid(const GridTable& t, GridFormat fmt) { return fmt == GridFormat::Csv ? to_csv(t) : to_json(t); }

inline void export_grid(const GridTable& t, GridFormat fmt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << export_grid(t, fmt);
    if (!out) throw Error("write to '" + path + "' failed");
}

inline GridTable import_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    return json ? from_json(text) : from_csv(text);
}

// ---------------------------------------------------------------------------
// Plot slices

/// Fixes every axis named in `fixed` to the table coordinate nearest the
/// requested value and writes the remaining (at most two) axes and all fields
/// as a whitespace-separated table. With two free axes a blank line separates
/// scan lines, as gnuplot's splot expects.
inline std::string emit_plotdata(const GridTable& t, const std::map<std::string, double>& fixed) {
    std::vector<std::size_t> free_axes;
    std::vector<double> target(t.axes.size(), 0.0);
    for (std::size_t a = 0; a < t.axes.size(); ++a) {
        const auto it = fixed.find(t.axes[a]);
        if (it == fixed.end()) free_axes.push_back(a);
        else target[a] = it->second;
    }
    for (const auto& [name, _] : fixed)
        if (std::find(t.axes.begin(), t.axes.end(), name) == t.axes.end()) throw BadSlice("unknown axis '" + name + "'");
    if (free_axes.size() > 2) throw BadSlice(std::to_string(free_axes.size()) + " free axes; fix all but at most two");

    // snap each fixed axis to the nearest coordinate present in the table
    for (std::size_t a = 0; a < t.axes.size(); ++a) {
        if (std::find(free_axes.begin(), free_axes.end(), a) != free_axes.end()) continue;
        double best = t.at(0, a);
        for (std::size_t r = 1; r < t.rows(); ++r)
            if (std::fabs(t.at(r, a) - target[a]) < std::fabs(best - target[a])) best = t.at(r, a);
        target[a] = best;
    }
    std::ostringstream os;
    os << '#';
    for (std::size_t a : free_axes) os << ' ' << t.axes[a];
    for (const auto& f : t.fields) os << ' ' << f;
    os << '\n';
    bool first = true;
    double prev = 0.0;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        bool keep = true;
        for (std::size_t a = 0; a < t.axes.size() && keep; ++a)
            if (std::find(free_axes.begin(), free_axes.end(), a) == free_axes.end() && t.at(r, a) != target[a]) keep = false;
        if (!keep) continue;
        if (free_axes.size() == 2) {
            const double lead = t.at(r, free_axes[0]);
            if (!first && lead != prev) os << '\n';
            prev = lead;
        }
        first = false;
        bool sep = false;
        for (std::size_t a : free_axes) {
            os << (sep ? " " : "") << detail::num(t.at(r, a));
            sep = true;
        }
        for (std::size_t f = 0; f < t.fields.size(); ++f) {
            os << (sep ? " " : "") << detail::num(t.at(r, t.axes.size() + f));
            sep = true;
        }
        os << '\n';
    }
    return os.str();
}

} // namespace multigame
