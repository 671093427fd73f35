#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "multigame/lattice.hpp"

namespace multigame {

/// Uniform grid over a state box, last axis fastest. Off-node queries use
/// multilinear interpolation clamped to the box.
class StateGrid {
public:
    static constexpr std::size_t kMaxDim = 8;

    StateGrid() = default;
    StateGrid(Box box, std::vector<int> counts) : box_(std::move(box)), counts_(std::move(counts)) {
        if (counts_.size() != box_.dim()) throw std::invalid_argument("state grid counts must match box dimension");
        if (counts_.size() > kMaxDim) throw std::invalid_argument("state grids support at most 8 dimensions");
        for (int c : counts_)
            if (c < 1) throw std::invalid_argument("state grid needs at least one node per axis");
        strides_.assign(counts_.size(), 1);
        for (std::size_t i = counts_.size(); i-- > 1;) strides_[i - 1] = strides_[i] * static_cast<std::size_t>(counts_[i]);
    }

    std::size_t dim() const { return counts_.size(); }
    const Box& box() const { return box_; }
    const std::vector<int>& counts() const { return counts_; }
    std::size_t size() const { return strides_[0] * static_cast<std::size_t>(counts_[0]); }

    double spacing(std::size_t i) const { return counts_[i] > 1 ? box_.side(i) / (counts_[i] - 1) : 0.0; }

    double coord(std::size_t i, int j) const {
        if (counts_[i] == 1) return 0.5 * (box_.lo[i] + box_.hi[i]);
        if (j == counts_[i] - 1) return box_.hi[i];
        return box_.lo[i] + j * spacing(i);
    }

    std::vector<int> unflat(std::size_t f) const {
        std::vector<int> j(dim());
        for (std::size_t i = 0; i < dim(); ++i) {
            j[i] = static_cast<int>(f / strides_[i]);
            f %= strides_[i];
        }
        return j;
    }

    std::size_t flat(std::span<const int> j) const {
        std::size_t f = 0;
        for (std::size_t i = 0; i < dim(); ++i) f += strides_[i] * static_cast<std::size_t>(j[i]);
        return f;
    }

    std::size_t stride(std::size_t i) const { return strides_[i]; }

    std::vector<double> point(std::size_t f) const {
        const auto j = unflat(f);
        std::vector<double> x(dim());
        for (std::size_t i = 0; i < dim(); ++i) x[i] = coord(i, j[i]);
        return x;
    }

    /// Interpolates node values (indexed by flat state index) at x.
    double interpolate(std::span<const double> values, std::span<const double> x) const {
        const std::size_t n = dim();
        std::size_t base = 0;
        double weights[kMaxDim];
        std::size_t active = 0;  // bit i set: axis i has a second corner
        for (std::size_t i = 0; i < n; ++i) {
            weights[i] = 0.0;
            if (counts_[i] == 1) continue;
            const double h = spacing(i);
            double s = (x[i] - box_.lo[i]) / h;
            s = std::clamp(s, 0.0, static_cast<double>(counts_[i] - 1));
            // Snap queries that sit on a node up to rounding so node values are reproduced exactly.
            if (const double r = std::round(s); std::fabs(s - r) <= 1e-12 * std::max(1.0, r)) s = r;
            int j = static_cast<int>(std::floor(s));
            if (j > counts_[i] - 2) j = counts_[i] - 2;
            weights[i] = s - j;
            base += strides_[i] * static_cast<std::size_t>(j);
            active |= std::size_t{1} << i;
        }
        double result = 0.0;
        const std::size_t corners = std::size_t{1} << n;
        for (std::size_t mask = 0; mask < corners; ++mask) {
            if ((mask & ~active) != 0) continue;
            double weight = 1.0;
            std::size_t idx = base;
            for (std::size_t i = 0; i < n; ++i) {
                if (!((active >> i) & 1U)) continue;
                if ((mask >> i) & 1U) {
                    weight *= weights[i];
                    idx += strides_[i];
                } else {
                    weight *= 1.0 - weights[i];
                }
            }
            result += weight * values[idx];
        }
        return result;
    }

private:
    Box box_;
    std::vector<int> counts_;
    std::vector<std::size_t> strides_;
};

} // namespace multigame
