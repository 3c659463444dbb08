#include "nonstat_pm/pm_map.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nspm {

namespace {

void require_unit_interval(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("pm_map: x = " + std::to_string(x) + " outside [0,1]");
}

}  // namespace

MapParameter::MapParameter(double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::domain_error("MapParameter: alpha = " + std::to_string(alpha) +
                                " outside [0,1)");
    alpha_ = alpha;
    two_pow_alpha_ = alpha == 0.0 ? 1.0 : std::exp2(alpha);
}

double pow_alpha(double x, double a) noexcept {
    if (a == 0.0) return 1.0;
    if (x <= 0.0) return 0.0;
    return std::exp(a * std::log(x));
}

double apply_map(const MapParameter& p, double x) {
    require_unit_interval(x);
    if (x < 0.5) {
        double y = x * (1.0 + p.two_pow_alpha() * pow_alpha(x, p.alpha()));
        return y < 1.0 ? y : 1.0;
    }
    return 2.0 * x - 1.0;
}

double map_derivative(const MapParameter& p, double x) {
    require_unit_interval(x);
    if (x < 0.5)
        return 1.0 + p.two_pow_alpha() * (1.0 + p.alpha()) * pow_alpha(x, p.alpha());
    return 2.0;
}

double inverse_left(const MapParameter& p, double x) {
    require_unit_interval(x);
    if (p.alpha() == 0.0) return 0.5 * x;  // keeps the doubling map exact
    if (x == 0.0) return 0.0;

    // g(y) = y (1 + 2^a y^a) - x, increasing on [0, 1/2] with g' >= 1.
    // T(y) <= 2y on the left branch, so the root lies in [x/2, min(x, 1/2)].
    double lo = 0.0, hi = 0.5;
    double y = 0.5 * x;
    if (!(y > lo && y < hi)) y = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double g = y * (1.0 + p.two_pow_alpha() * pow_alpha(y, p.alpha())) - x;
        if (g == 0.0) return y;
        if (g > 0.0)
            hi = y;
        else
            lo = y;
        double step = g / map_derivative(p, y);
        double next = y - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // Newton left bracket
        if (hi - lo < 1e-15 || next == y) return next;
        y = next;
    }
    // g' >= 1 guarantees bracket width <= residual, so this is unreachable in
    // exact arithmetic; treat as internal error.
    throw std::runtime_error("inverse_left: no convergence (alpha=" +
                             std::to_string(p.alpha()) + ", x=" + std::to_string(x) + ")");
}

InverseBranches inverse_branches(const MapParameter& p, double x) {
    require_unit_interval(x);
    return {inverse_left(p, x), 0.5 * (x + 1.0)};
}

double iterate(std::span<const MapParameter> prefix, double x) {
    for (const auto& p : prefix) x = apply_map(p, x);
    return x;
}

}  // namespace nspm
