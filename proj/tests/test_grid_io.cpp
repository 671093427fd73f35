#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "multigame/catalog.hpp"
#include "multigame/grid_io.hpp"
#include "multigame/pde.hpp"

using namespace multigame;

namespace {

GridTable awkward_table() {
    const auto g = catalog::linear();
    TimeLattice lat(Box({0.0, 0.0}, {0.7, 1.0}), {3, 2});
    StateGrid sg(Box({-1.0 / 3.0}, {2.0}), {4});
    auto sol = solve_upper(g, lat, sg);
    auto& vals = sol.grid.values();
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = std::sin(1.0 + i) * 1e-3 + 0.1 * i;
    return grid_table(sol.grid);
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

} // namespace

TEST(GridIO, TableLayout) {
    const auto t = awkward_table();
    EXPECT_EQ(t.axes, (std::vector<std::string>{"t1", "t2", "x1"}));
    EXPECT_EQ(t.fields, (std::vector<std::string>{"value", "u", "v"}));
    EXPECT_EQ(t.rows(), 4u * 3u * 4u);
    EXPECT_EQ(t.kind, "upper");
    // Rows run over lattice nodes lexicographically, then state nodes.
    EXPECT_EQ(t.at(0, 0), 0.0);
    EXPECT_EQ(t.at(t.rows() - 1, 0), 0.7);
    EXPECT_EQ(t.at(t.rows() - 1, 2), 2.0);
    EXPECT_DOUBLE_EQ(t.at(5, 2), -1.0 / 3.0 + 7.0 / 9.0);
}

TEST(GridIO, CsvRoundTripIsExact) {
    const auto t = awkward_table();
    const auto text = to_csv(t);
    const auto back = from_csv(text);
    EXPECT_EQ(back, t);
    EXPECT_EQ(to_csv(back), text);
    EXPECT_EQ(count_lines(text), 5 + static_cast<int>(t.rows()));
    EXPECT_EQ(text.rfind("# axes: t1,t2,x1; spacing: ", 0), 0u);
}

TEST(GridIO, JsonRoundTripIsExact) {
    const auto t = awkward_table();
    const auto text = to_json(t);
    const auto back = from_json(text);
    EXPECT_EQ(back, t);
    EXPECT_EQ(to_json(back), text);
}

TEST(GridIO, GeneratingFieldColumns) {
    const auto H = HamiltonianEval::custom("abs(p1_1)", 2, 1, 1.0);
    TimeLattice lat(catalog::unit_horizon(2), {2, 2});
    StateGrid sg(Box({-1.0}, {1.0}), {5});
    const auto f = solve_dhjiu(H, {parse_expr("x1", Alphabet{0, 1, 0, 0, false}), parse_expr("0", Alphabet{0, 1, 0, 0, false})}, lat, sg);
    const auto t = grid_table(f, "pde-upper");
    EXPECT_EQ(t.fields, (std::vector<std::string>{"M1", "M2"}));
    EXPECT_EQ(t.gauge, "user-supplied");
    EXPECT_EQ(from_csv(to_csv(t)), t);
}

TEST(GridIO, FilesChooseFormatByExtension) {
    const auto dir = std::filesystem::temp_directory_path() / "multigame_grid_io_test";
    std::filesystem::create_directories(dir);
    const auto t = awkward_table();
    for (auto [fmt, name] : {std::pair{GridFormat::Csv, "v.csv"}, std::pair{GridFormat::Json, "v.json"}}) {
        const auto path = (dir / name).string();
        export_grid(t, fmt, path);
        EXPECT_EQ(import_grid(path), t) << name;
    }
    std::filesystem::remove_all(dir);
    EXPECT_THROW(import_grid((dir / "missing.csv").string()), Error);
}

TEST(GridIO, MalformedInputIsRejected) {
    const auto text = to_csv(awkward_table());
    EXPECT_THROW(from_csv(text.substr(text.find('\n') + 1)), Error);
    auto broken = text;
    broken += "1,2\n";
    EXPECT_THROW(from_csv(broken), Error);
}

TEST(Plot, OneFreeAxis) {
    const auto t = awkward_table();
    const auto out = emit_plotdata(t, {{"t1", 0.2}, {"t2", 1.0}});
    // t1 snaps to 0.7/3; one line per state node plus the header.
    EXPECT_EQ(count_lines(out), 1 + 4);
    EXPECT_EQ(out.substr(0, out.find('\n')), "# x1 value u v");
}

TEST(Plot, TwoFreeAxesSeparateScanLines) {
    const auto t = awkward_table();
    const auto out = emit_plotdata(t, {{"t2", 0.0}});
    // 4 values of t1, 4 state nodes, 3 blank separators, header.
    EXPECT_EQ(count_lines(out), 1 + 16 + 3);
    EXPECT_NE(out.find("\n\n"), std::string::npos);
}

TEST(Plot, BadSlices) {
    const auto t = awkward_table();
    EXPECT_THROW(emit_plotdata(t, {}), BadSlice);
    EXPECT_THROW(emit_plotdata(t, {{"t3", 0.0}, {"t1", 0.0}}), BadSlice);
}
