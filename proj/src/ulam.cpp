#include "nonstat_pm/ulam.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace nspm {

namespace detail {

BranchBoundaries branch_boundaries(const MapParameter& alpha, std::size_t grid_size) {
    BranchBoundaries b;
    b.left.resize(grid_size + 1);
    b.right.resize(grid_size + 1);
    const double w = 1.0 / static_cast<double>(grid_size);
    for (std::size_t i = 0; i <= grid_size; ++i) {
        double x = static_cast<double>(i) * w;
        b.left[i] = inverse_left(alpha, x);
        b.right[i] = 0.5 * (x + 1.0);
    }
    return b;
}

}  // namespace detail

UlamOperator UlamOperator::build(const MapParameter& alpha, std::size_t grid_size) {
    if (grid_size < 2) throw std::invalid_argument("UlamOperator::build: grid_size < 2");
    UlamOperator op(alpha, grid_size);
    const auto bounds = detail::branch_boundaries(alpha, grid_size);
    const double G = static_cast<double>(grid_size);

    op.row_offsets_.resize(grid_size + 1, 0);
    op.entries_.reserve(4 * grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) {
        op.row_offsets_[i] = op.entries_.size();
        detail::for_each_preimage_segment(
            bounds, grid_size, i, [&](std::size_t j, double lo, double hi, bool) {
                double weight = G * (hi - lo);
                // merge with an existing entry for the same source cell
                for (std::size_t k = op.row_offsets_[i]; k < op.entries_.size(); ++k) {
                    if (op.entries_[k].col == j) {
                        op.entries_[k].weight += weight;
                        return;
                    }
                }
                op.entries_.push_back({static_cast<std::uint32_t>(j), weight});
            });
    }
    op.row_offsets_[grid_size] = op.entries_.size();
    return op;
}

GridDensity UlamOperator::apply(const GridDensity& d) const {
    if (d.grid_size != grid_size_)
        throw std::invalid_argument("UlamOperator::apply: grid size mismatch");
    GridDensity out(std::vector<double>(grid_size_, 0.0), grid_size_);
    for (std::size_t i = 0; i < grid_size_; ++i) {
        double acc = 0.0;
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
            acc += entries_[k].weight * d.cells[entries_[k].col];
        out.cells[i] = acc;
    }
    return out;
}

double UlamOperator::entry(std::size_t row, std::size_t col) const {
    if (row >= grid_size_ || col >= grid_size_)
        throw std::out_of_range("UlamOperator::entry");
    double v = 0.0;
    for (std::size_t k = row_offsets_[row]; k < row_offsets_[row + 1]; ++k)
        if (entries_[k].col == col) v += entries_[k].weight;
    return v;
}

namespace {

constexpr char kMagic[4] = {'U', 'L', 'A', 'M'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "cache I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

}  // namespace

void UlamOperator::write_cache(std::ostream& os) const {
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<std::uint64_t>(os, grid_size_);
    put<double>(os, alpha_.alpha());
    std::vector<double> row(grid_size_);
    for (std::size_t i = 0; i < grid_size_; ++i) {
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
            row[entries_[k].col] += entries_[k].weight;
        os.write(reinterpret_cast<const char*>(row.data()),
                 static_cast<std::streamsize>(sizeof(double) * grid_size_));
    }
    if (!os) throw std::runtime_error("UlamOperator::write_cache: stream failure");
}

UlamOperator UlamOperator::read_cache(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("UlamOperator::read_cache: bad magic");
    auto version = get<std::uint32_t>(is);
    if (version != kVersion) throw std::runtime_error("UlamOperator::read_cache: bad version");
    auto g = get<std::uint64_t>(is);
    auto alpha = get<double>(is);
    if (!is || g < 2) throw std::runtime_error("UlamOperator::read_cache: bad header");

    UlamOperator op(MapParameter(alpha), static_cast<std::size_t>(g));
    op.row_offsets_.resize(g + 1, 0);
    std::vector<double> row(g);
    for (std::size_t i = 0; i < g; ++i) {
        op.row_offsets_[i] = op.entries_.size();
        is.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(sizeof(double) * g));
        if (!is) throw std::runtime_error("UlamOperator::read_cache: truncated matrix");
        for (std::size_t j = 0; j < g; ++j)
            if (row[j] != 0.0) op.entries_.push_back({static_cast<std::uint32_t>(j), row[j]});
    }
    op.row_offsets_[g] = op.entries_.size();
    return op;
}

}  // namespace nspm
