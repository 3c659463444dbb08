#pragma once

#include <span>
#include <vector>

namespace nspm {

// Pomeau-Manneville family on [0,1]:
//
//   T_a(x) = x (1 + 2^a x^a)   on [0, 1/2),
//            2x - 1            on [1/2, 1].
//
// Every map fixes 0 with derivative 1 there (neutral fixed point); a = 0 is
// the exact angle-doubling map. x = 1/2 belongs to the right branch.
class MapParameter {
public:
    // requires 0 <= alpha < 1
    explicit MapParameter(double alpha);

    double alpha() const noexcept { return alpha_; }
    double two_pow_alpha() const noexcept { return two_pow_alpha_; }

    bool operator==(const MapParameter& o) const noexcept { return alpha_ == o.alpha_; }

private:
    double alpha_;
    double two_pow_alpha_;  // cached 2^alpha
};

// x^a with the neutral-point conventions: x^0 = 1 for all x, 0^a = 0 for a > 0.
double pow_alpha(double x, double a) noexcept;

// Forward map. Throws std::domain_error when x is outside [0,1]; the result is
// clamped to [0,1] against floating rounding at the branch top.
double apply_map(const MapParameter& p, double x);

// One-sided derivative, taken from the branch containing x (left branch on
// [0,1/2)): 1 + 2^a (1+a) x^a there, and 2 on [1/2,1].
double map_derivative(const MapParameter& p, double x);

struct InverseBranches {
    double left;   // preimage in [0, 1/2)
    double right;  // preimage in [1/2, 1]
};

// Both preimages of x. The left branch is inverted by safeguarded
// Newton/bisection to absolute tolerance ~1e-15; for a = 0 it is x/2 exactly.
InverseBranches inverse_branches(const MapParameter& p, double x);

// Left-branch inverse alone (hot path for operator construction).
double inverse_left(const MapParameter& p, double x);

// Composition T_n o ... o T_1 applied to x; empty prefix is the identity.
double iterate(std::span<const MapParameter> prefix, double x);

}  // namespace nspm
