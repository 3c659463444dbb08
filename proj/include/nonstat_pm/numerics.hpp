#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace nspm {

// Neumaier compensated accumulator. Long correlation sums pair large
// alternating terms; plain accumulation loses digits we need.
class KahanSum {
public:
    void add(double x) noexcept {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
    KahanSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

// Gauss-Legendre rule on [0,1], nodes ascending, weights summing to 1.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Nodes computed by Newton iteration on the Legendre polynomial; accurate to
// a few ulps for the orders used here (<= 32).
const GaussLegendre& gauss_legendre(std::size_t order);

}  // namespace nspm
