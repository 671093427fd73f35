#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "multigame/errors.hpp"

namespace multigame {

/// A point of R^m_+ (multitime). Coordinates are nonnegative.
struct MultiTime {
    std::vector<double> coords;

    MultiTime() = default;
    explicit MultiTime(std::vector<double> c) : coords(std::move(c)) {
        for (double v : coords)
            if (!(v >= 0.0)) throw std::invalid_argument("multitime coordinates must be nonnegative");
    }
    std::size_t dim() const { return coords.size(); }
    double operator[](std::size_t a) const { return coords[a]; }
};

/// Closed axis-aligned box [lo, hi] in the product order. Used for the
/// multitime horizon as well as for state boxes (where negative bounds are fine).
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    Box() = default;
    Box(std::vector<double> l, std::vector<double> h) : lo(std::move(l)), hi(std::move(h)) {
        if (lo.size() != hi.size() || lo.empty())
            throw std::invalid_argument("box corners must have equal nonzero dimension");
        for (std::size_t a = 0; a < lo.size(); ++a)
            if (!(lo[a] <= hi[a])) throw std::invalid_argument("box requires lo <= hi componentwise");
    }

    std::size_t dim() const { return lo.size(); }
    double side(std::size_t a) const { return hi[a] - lo[a]; }

    bool contains(std::span<const double> p) const {
        for (std::size_t a = 0; a < lo.size(); ++a)
            if (p[a] < lo[a] || p[a] > hi[a]) return false;
        return true;
    }

    /// Split by the hyperplane coord[axis] = at; returns {lower, upper}.
    std::pair<Box, Box> split(std::size_t axis, double at) const {
        Box a = *this, b = *this;
        a.hi[axis] = at;
        b.lo[axis] = at;
        return {Box(a.lo, a.hi), Box(b.lo, b.hi)};
    }
};

inline double volume(const Box& b) {
    double v = 1.0;
    for (std::size_t a = 0; a < b.dim(); ++a) v *= b.side(a);
    return v;
}

/// Volume of the box spanned by two comparable points; zero if any side collapses.
inline double volume_between(std::span<const double> lo, std::span<const double> hi) {
    double v = 1.0;
    for (std::size_t a = 0; a < lo.size(); ++a) v *= hi[a] - lo[a];
    return v;
}

/// Lattice multi-index k = (k_1..k_m), 0 <= k_a <= N_a.
using Node = std::vector<int>;

inline bool leq(const Node& a, const Node& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

inline int level_of(const Node& k) { return std::accumulate(k.begin(), k.end(), 0); }

/// Uniform discretization of a multitime box. Nodes are stored row-major with
/// the last axis varying fastest.
class TimeLattice {
public:
    TimeLattice() = default;
    TimeLattice(Box box, std::vector<int> steps) : box_(std::move(box)), steps_(std::move(steps)) {
        if (steps_.size() != box_.dim()) throw std::invalid_argument("lattice steps must match box dimension");
        for (double l : box_.lo)
            if (l < 0.0) throw std::invalid_argument("multitime box must lie in R^m_+");
        for (int n : steps_)
            if (n < 1) throw std::invalid_argument("lattice steps must be positive");
        strides_.assign(steps_.size(), 1);
        for (std::size_t a = steps_.size(); a-- > 1;) strides_[a - 1] = strides_[a] * static_cast<std::size_t>(steps_[a] + 1);
    }

    std::size_t dim() const { return steps_.size(); }
    const Box& box() const { return box_; }
    const std::vector<int>& steps() const { return steps_; }
    double spacing(std::size_t a) const { return box_.side(a) / steps_[a]; }

    std::size_t node_count() const { return strides_[0] * static_cast<std::size_t>(steps_[0] + 1); }
    std::size_t cell_count() const {
        std::size_t c = 1;
        for (int n : steps_) c *= static_cast<std::size_t>(n);
        return c;
    }

    Node origin() const { return Node(dim(), 0); }
    Node top() const { return steps_; }
    int max_level() const { return level_of(steps_); }

    bool valid(const Node& k) const {
        if (k.size() != dim()) return false;
        for (std::size_t a = 0; a < k.size(); ++a)
            if (k[a] < 0 || k[a] > steps_[a]) return false;
        return true;
    }

    std::size_t flat(const Node& k) const {
        std::size_t f = 0;
        for (std::size_t a = 0; a < k.size(); ++a) f += strides_[a] * static_cast<std::size_t>(k[a]);
        return f;
    }

    Node unflat(std::size_t f) const {
        Node k(dim());
        for (std::size_t a = 0; a < dim(); ++a) {
            k[a] = static_cast<int>(f / strides_[a]);
            f %= strides_[a];
        }
        return k;
    }

    double coord(std::size_t a, double k) const { return box_.lo[a] + k * spacing(a); }

    std::vector<double> time(const Node& k) const {
        std::vector<double> t(dim());
        for (std::size_t a = 0; a < dim(); ++a)
            t[a] = k[a] == steps_[a] ? box_.hi[a] : coord(a, k[a]);
        return t;
    }

    /// Center of the cell whose lower corner is k (requires k_a < N_a).
    std::vector<double> cell_center(const Node& k) const {
        std::vector<double> t(dim());
        for (std::size_t a = 0; a < dim(); ++a) t[a] = coord(a, k[a] + 0.5);
        return t;
    }

    /// Flat index of the cell with lower corner k, row-major over N_a cells per axis.
    std::size_t cell_flat(const Node& k) const {
        std::size_t f = 0;
        for (std::size_t a = 0; a < dim(); ++a) f = f * static_cast<std::size_t>(steps_[a]) + static_cast<std::size_t>(k[a]);
        return f;
    }

    double cell_volume() const {
        double v = 1.0;
        for (std::size_t a = 0; a < dim(); ++a) v *= spacing(a);
        return v;
    }

    /// Volume of the box between the times of two comparable nodes.
    double volume_between(const Node& a, const Node& b) const {
        auto ta = time(a), tb = time(b);
        return multigame::volume_between(ta, tb);
    }

    /// Sub-box of the horizon spanned by two comparable nodes.
    Box sub_box(const Node& a, const Node& b) const { return Box(time(a), time(b)); }

private:
    Box box_;
    std::vector<int> steps_;
    std::vector<std::size_t> strides_;
};

/// Calls fn(node) for every node k with lo <= k <= hi, lexicographically ascending.
inline void for_each_node(const Node& lo, const Node& hi, const std::function<void(const Node&)>& fn) {
    Node k = lo;
    const std::size_t m = lo.size();
    for (;;) {
        fn(k);
        bool advanced = false;
        for (std::size_t a = m; a > 0 && !advanced;) {
            --a;
            if (k[a] < hi[a]) {
                ++k[a];
                advanced = true;
            } else {
                k[a] = lo[a];
            }
        }
        if (!advanced) return;
    }
}

/// Nodes of the sub-lattice [lo, hi] grouped by diagonal level sum(k),
/// emitted from the highest level down to level(lo). Within a level nodes are
/// in lexicographically descending order, so (1,0) precedes (0,1).
inline std::vector<std::vector<Node>> diagonal_levels(const Node& lo, const Node& hi) {
    const int base = level_of(lo);
    std::vector<std::vector<Node>> by_level(static_cast<std::size_t>(level_of(hi) - base + 1));
    for_each_node(lo, hi, [&](const Node& k) { by_level[static_cast<std::size_t>(level_of(k) - base)].push_back(k); });
    std::reverse(by_level.begin(), by_level.end());
    for (auto& lvl : by_level) std::reverse(lvl.begin(), lvl.end());
    return by_level;
}

inline std::vector<std::vector<Node>> diagonal_levels(const TimeLattice& lat) {
    return diagonal_levels(lat.origin(), lat.top());
}

/// Monotone lattice path; consecutive nodes differ by +1 on exactly one axis.
struct LatticePath {
    std::vector<Node> nodes;

    std::size_t length() const { return nodes.empty() ? 0 : nodes.size() - 1; }
    /// Axis incremented by step i (between nodes[i] and nodes[i+1]).
    std::size_t axis(std::size_t i) const {
        for (std::size_t a = 0; a < nodes[i].size(); ++a)
            if (nodes[i + 1][a] != nodes[i][a]) return a;
        return 0;
    }
};

/// Path from a to b that exhausts the axes in `order` one after another.
/// An empty order means 0, 1, ..., m-1.
inline LatticePath monotone_path(const Node& a, const Node& b, std::vector<std::size_t> order = {}) {
    if (a.size() != b.size() || !leq(a, b))
        throw NotComparable("monotone_path requires a <= b in the product order");
    if (order.empty()) {
        order.resize(a.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
    }
    LatticePath path;
    Node k = a;
    path.nodes.push_back(k);
    for (std::size_t axis : order) {
        while (k[axis] < b[axis]) {
            ++k[axis];
            path.nodes.push_back(k);
        }
    }
    if (k != b) throw std::invalid_argument("axis order does not cover every axis");
    return path;
}

} // namespace multigame
