#include "nonstat_pm/observable.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nonstat_pm/rng.hpp"

namespace nspm {

Observable Observable::x_minus_half() {
    Observable f;
    f.name = "x_minus_half";
    f.dim = 1;
    f.components = {[](double x) { return x - 0.5; }};
    f.lip = 1.0;
    f.sup = 0.5;
    return f;
}

Observable Observable::cos2pi() {
    Observable f;
    f.name = "cos2pi";
    f.dim = 1;
    f.components = {[](double x) { return std::cos(2.0 * std::numbers::pi * x); }};
    f.lip = 2.0 * std::numbers::pi;
    f.sup = 1.0;
    return f;
}

Observable Observable::lip_pair_2d() {
    Observable f;
    f.name = "lip_pair_2d";
    f.dim = 2;
    f.components = {[](double x) { return x - 0.5; },
                    [](double x) { return std::cos(2.0 * std::numbers::pi * x); }};
    f.lip = 2.0 * std::numbers::pi;
    f.sup = 1.0;
    return f;
}

Observable Observable::constant(double c) {
    Observable f;
    f.name = "constant";
    f.dim = 1;
    f.components = {[c](double) { return c; }};
    f.lip = 0.0;
    f.sup = std::abs(c);
    return f;
}

Observable Observable::identity() {
    Observable f;
    f.name = "identity";
    f.dim = 1;
    f.components = {[](double x) { return x; }};
    f.lip = 1.0;
    f.sup = 1.0;
    return f;
}

Observable Observable::by_name(const std::string& name) {
    if (name == "x_minus_half") return x_minus_half();
    if (name == "cos2pi") return cos2pi();
    if (name == "lip_pair_2d") return lip_pair_2d();
    if (name == "identity") return identity();
    throw std::invalid_argument("Observable::by_name: unknown observable '" + name + "'");
}

double observed_lipschitz(const Observable& f, std::size_t pairs, std::uint64_t seed) {
    CounterRng rng(seed, 0xf00d);
    double worst = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
        double x = rng.uniform(2 * k);
        double y = rng.uniform(2 * k + 1);
        if (x == y) continue;
        for (std::size_t a = 0; a < f.dim; ++a) {
            double q = std::abs(f.eval(a, x) - f.eval(a, y)) / std::abs(x - y);
            worst = std::max(worst, q);
        }
    }
    return worst;
}

}  // namespace nspm
