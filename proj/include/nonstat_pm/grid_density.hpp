#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nonstat_pm/pm_map.hpp"

namespace nspm {

// Piecewise-constant probability density on the uniform G-cell partition of
// [0,1]. cells[i] is the average of the density over [i/G, (i+1)/G], so the
// total mass is (1/G) * sum(cells).
struct GridDensity {
    std::vector<double> cells;
    std::size_t grid_size = 0;

    GridDensity() = default;
    GridDensity(std::vector<double> c, std::size_t g);

    static GridDensity uniform(std::size_t grid_size);

    double mass() const noexcept;
    void normalize();  // scales to mass 1; throws if mass <= 0

    double cell_width() const noexcept { return 1.0 / static_cast<double>(grid_size); }
    double midpoint(std::size_t i) const noexcept {
        return (static_cast<double>(i) + 0.5) / static_cast<double>(grid_size);
    }
};

// Cone C_*(a): f >= 0, f decreasing, x^{a+1} f increasing,
// f(x) <= 2^a (2+a) x^{-a} m(f). Checked at cell midpoints with relative
// slack; piecewise-constant densities cannot satisfy the monotonicity
// conditions exactly.
struct ConeViolation {
    std::string criterion;  // "nonnegative" | "decreasing" | "xa1f_increasing" | "upper_bound"
    std::size_t cell;
    double lhs;
    double rhs;
};

struct ConeReport {
    bool is_member = true;
    std::vector<ConeViolation> violations;  // first violating cell per criterion
};

ConeReport cone_check(const GridDensity& d, const MapParameter& alpha,
                      double relative_slack = 1e-6);

}  // namespace nspm
