#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "nonstat_pm/grid_density.hpp"
#include "nonstat_pm/pm_map.hpp"

namespace nspm {

// Interval partition of [0,1]: uniform, or power-graded toward the neutral
// fixed point (edge_j = (j/n)^gamma). Grading is what lets correlation sums
// see the long sojourns near the origin that set the polynomial tail of the
// Green-Kubo series; a uniform grid caps the visible lag range at the width
// of its first cell.
class Partition {
public:
    static std::shared_ptr<const Partition> uniform(std::size_t cells);
    static std::shared_ptr<const Partition> graded(std::size_t cells, double gamma);

    std::size_t size() const noexcept { return cells_; }
    double edge(std::size_t i) const noexcept { return edges_[i]; }
    double width(std::size_t i) const noexcept { return edges_[i + 1] - edges_[i]; }
    double midpoint(std::size_t i) const noexcept { return 0.5 * (edges_[i] + edges_[i + 1]); }
    bool is_uniform() const noexcept { return gamma_ == 1.0; }
    double gamma() const noexcept { return gamma_; }

    // index of the cell containing y in [0,1]
    std::size_t locate(double y) const noexcept;

    bool compatible(const Partition& o) const noexcept {
        return cells_ == o.cells_ && gamma_ == o.gamma_;
    }

private:
    Partition(std::size_t cells, double gamma);

    std::size_t cells_;
    double gamma_;
    std::vector<double> edges_;
};

// Cell-wise linear field: g(x) = mean[i] + slope[i]*(x - m_i) on cell i. Used
// both for signed densities and for observables.
//
// The plain Ulam matrix forgets everything below cell resolution, which caps
// how far correlations can be tracked (at G = 2^12 the doubling map
// decorrelates in exactly 12 steps on piecewise constants, while the true
// correlations are 2^{-k}/12 for all k). Keeping the first moment per cell
// removes that cap: the transport below is exact for a = 0 and second-order
// accurate otherwise.
struct P1Field {
    std::vector<double> mean;
    std::vector<double> slope;
    std::shared_ptr<const Partition> part;

    static P1Field zero(std::shared_ptr<const Partition> part);
    static P1Field embed(const GridDensity& d);  // slopes 0: exact for grid measures
    // cell-wise L2 projection of an arbitrary function (Gauss-Legendre)
    static P1Field project(const std::function<double(double)>& f,
                           std::shared_ptr<const Partition> part);

    std::size_t cells() const noexcept { return part->size(); }
};

// integral of rho over [0,1]
double field_mass(const P1Field& rho);
// integral of f * rho
double field_pair(const P1Field& f, const P1Field& rho);
// integral of f * g * rho (cubic per cell, closed form)
double field_triple(const P1Field& f, const P1Field& g, const P1Field& rho);
// cell-wise L2 projection of the product f * rho back onto P1
P1Field field_multiply(const P1Field& f, const P1Field& rho);
// rho += coeff * f
void field_axpy(P1Field& rho, double coeff, const P1Field& f);

// Transfer operator acting on P1Field coefficients. All segment integrals are
// closed-form (the left branch needs only power antiderivatives), evaluated in
// cancellation-free form, so the only method error is the per-cell projection.
class MomentOperator {
public:
    static MomentOperator build(const MapParameter& alpha,
                                std::shared_ptr<const Partition> part);

    void apply(const P1Field& in, P1Field& out) const;
    P1Field apply(const P1Field& in) const;

    const std::shared_ptr<const Partition>& partition() const noexcept { return part_; }
    const MapParameter& alpha() const noexcept { return alpha_; }

private:
    struct Term {
        std::uint32_t src;
        double a_m, a_s;  // mean_i   += a_m*mean_src + a_s*slope_src
        double b_m, b_s;  // slope_i  += b_m*mean_src + b_s*slope_src
    };

    MomentOperator(MapParameter alpha, std::shared_ptr<const Partition> part)
        : alpha_(alpha), part_(std::move(part)) {}

    MapParameter alpha_{0.0};
    std::shared_ptr<const Partition> part_;
    std::vector<std::size_t> row_offsets_;
    std::vector<Term> terms_;
};

}  // namespace nspm
