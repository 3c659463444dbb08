#include "nonstat_pm/grid_density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nonstat_pm/numerics.hpp"

namespace nspm {

GridDensity::GridDensity(std::vector<double> c, std::size_t g) : cells(std::move(c)), grid_size(g) {
    if (grid_size < 2 || cells.size() != grid_size)
        throw std::invalid_argument("GridDensity: cell count must equal grid_size >= 2");
}

GridDensity GridDensity::uniform(std::size_t grid_size) {
    return GridDensity(std::vector<double>(grid_size, 1.0), grid_size);
}

double GridDensity::mass() const noexcept {
    return compensated_sum(cells) / static_cast<double>(grid_size);
}

void GridDensity::normalize() {
    double m = mass();
    if (!(m > 0.0)) throw std::runtime_error("GridDensity::normalize: nonpositive mass");
    for (double& c : cells) c /= m;
}

ConeReport cone_check(const GridDensity& d, const MapParameter& alpha, double relative_slack) {
    const double a = alpha.alpha();
    const double tol = relative_slack;
    const double m = d.mass();
    const double bound_coeff = alpha.two_pow_alpha() * (2.0 + a) * m;
    const std::size_t G = d.grid_size;

    ConeReport report;
    auto record = [&](const char* criterion, std::size_t cell, double lhs, double rhs) {
        report.is_member = false;
        for (const auto& v : report.violations)
            if (v.criterion == criterion) return;  // keep only the first per criterion
        report.violations.push_back({criterion, cell, lhs, rhs});
    };

    double scale = 0.0;
    for (double c : d.cells) scale = std::max(scale, std::abs(c));

    for (std::size_t i = 0; i < G; ++i) {
        if (d.cells[i] < -tol * scale) {
            record("nonnegative", i, d.cells[i], 0.0);
            break;
        }
    }
    for (std::size_t i = 0; i + 1 < G; ++i) {
        double slack = tol * std::max(std::abs(d.cells[i]), std::abs(d.cells[i + 1]));
        if (d.cells[i + 1] - d.cells[i] > slack) {
            record("decreasing", i + 1, d.cells[i + 1], d.cells[i]);
            break;
        }
    }
    // x^{a+1} f compared between adjacent midpoints only
    double prev = pow_alpha(d.midpoint(0), a + 1.0) * d.cells[0];
    for (std::size_t i = 1; i < G; ++i) {
        double cur = pow_alpha(d.midpoint(i), a + 1.0) * d.cells[i];
        double slack = tol * std::max(std::abs(prev), std::abs(cur));
        if (cur - prev < -slack) {
            record("xa1f_increasing", i, cur, prev);
            break;
        }
        prev = cur;
    }
    // upper bound evaluated at midpoints; the first midpoint is positive, so
    // the x^{-a} bound is finite everywhere we test it
    for (std::size_t i = 0; i < G; ++i) {
        double bound = bound_coeff * pow_alpha(d.midpoint(i), -a);
        if (d.cells[i] > bound * (1.0 + tol)) {
            record("upper_bound", i, d.cells[i], bound);
            break;
        }
    }
    return report;
}

}  // namespace nspm
