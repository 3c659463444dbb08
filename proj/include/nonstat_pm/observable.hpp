#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace nspm {

// d-valued Lipschitz observable on [0,1] with declared Lipschitz constant and
// sup-norm (max over components, as in the max-norm conventions used
// throughout).
struct Observable {
    std::string name;
    std::size_t dim = 1;
    std::vector<std::function<double(double)>> components;
    double lip = 0.0;
    double sup = 0.0;

    double eval(std::size_t a, double x) const { return components[a](x); }

    static Observable x_minus_half();
    static Observable cos2pi();
    static Observable lip_pair_2d();  // (x - 1/2, cos 2 pi x)
    static Observable constant(double c);
    static Observable identity();  // f(x) = x
    static Observable by_name(const std::string& name);
};

// Spot-check of the declared Lipschitz constant on random pairs; returns the
// largest observed quotient |f(x)-f(y)|/|x-y|.
double observed_lipschitz(const Observable& f, std::size_t pairs = 1000,
                          std::uint64_t seed = 1);

}  // namespace nspm
