#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nonstat_pm/grid_density.hpp"
#include "nonstat_pm/pm_map.hpp"

namespace nspm {

// Ulam (piecewise-constant) discretization of the transfer operator L_a on a
// uniform G-cell grid. Entry (i,j) = G * m(cell_j intersect T^{-1}(cell_i)),
// computed from exact branch preimages of the cell endpoints; the matrix is
// column-stochastic, so cell-average densities keep their mass. Rows hold at
// most a few entries (|T'| >= 1 makes every preimage segment at most one cell
// wide), so storage is row-sparse.
class UlamOperator {
public:
    struct Entry {
        std::uint32_t col;
        double weight;
    };

    static UlamOperator build(const MapParameter& alpha, std::size_t grid_size);

    GridDensity apply(const GridDensity& d) const;

    std::size_t grid_size() const noexcept { return grid_size_; }
    const MapParameter& alpha() const noexcept { return alpha_; }

    // dense accessor (tests, cache export)
    double entry(std::size_t row, std::size_t col) const;

    // Binary cache: 24-byte header (magic "ULAM", version u32, G u64,
    // alpha f64), then G*G row-major little-endian f64.
    void write_cache(std::ostream& os) const;
    static UlamOperator read_cache(std::istream& is);

private:
    UlamOperator(MapParameter alpha, std::size_t g) : alpha_(alpha), grid_size_(g) {}

    MapParameter alpha_{0.0};
    std::size_t grid_size_ = 0;
    std::vector<std::size_t> row_offsets_;
    std::vector<Entry> entries_;
};

namespace detail {

// Preimages of all grid lines under both branches; shared between the Ulam
// matrix and the first-moment transport so their geometry agrees exactly.
struct BranchBoundaries {
    std::vector<double> left;   // inverse_left(i/G), i = 0..G
    std::vector<double> right;  // (i/G + 1)/2,       i = 0..G
};

BranchBoundaries branch_boundaries(const MapParameter& alpha, std::size_t grid_size);

// Calls fn(source_cell, p, q, is_left_branch) for every sub-segment of the
// preimage of target cell i, split at source-cell boundaries.
template <typename Fn>
void for_each_preimage_segment(const BranchBoundaries& b, std::size_t grid_size, std::size_t i,
                               Fn&& fn) {
    const double w = 1.0 / static_cast<double>(grid_size);
    for (int branch = 0; branch < 2; ++branch) {
        const bool left = branch == 0;
        const auto& bounds = left ? b.left : b.right;
        double p = bounds[i], q = bounds[i + 1];
        if (!(q > p)) continue;
        auto cell_of = [&](double y) {
            auto j = static_cast<std::size_t>(y * static_cast<double>(grid_size));
            return j >= grid_size ? grid_size - 1 : j;
        };
        for (std::size_t j = cell_of(p);; ++j) {
            double lo = std::max(p, static_cast<double>(j) * w);
            double hi = std::min(q, static_cast<double>(j + 1) * w);
            if (hi > lo) fn(j, lo, hi, left);
            if (static_cast<double>(j + 1) * w >= q || j + 1 >= grid_size) break;
        }
    }
}

}  // namespace detail

}  // namespace nspm
