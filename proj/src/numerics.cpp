#include "nonstat_pm/numerics.hpp"

#include <map>
#include <mutex>
#include <numbers>

namespace nspm {

namespace {

GaussLegendre compute_rule(std::size_t n) {
    GaussLegendre rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Newton on P_n over [-1,1], symmetric pairs
    for (std::size_t k = 0; k < (n + 1) / 2; ++k) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(k) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t j = 2; j <= n; ++j) {
                double p2 = ((2.0 * static_cast<double>(j) - 1.0) * x * p1 -
                             (static_cast<double>(j) - 1.0) * p0) /
                            static_cast<double>(j);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[k] = 0.5 * (1.0 - x);  // ascending: k = 0 pairs with the largest root
        rule.weights[k] = 0.5 * w;
        rule.nodes[n - 1 - k] = 0.5 * (1.0 + x);
        rule.weights[n - 1 - k] = 0.5 * w;
    }
    return rule;
}

}  // namespace

const GaussLegendre& gauss_legendre(std::size_t order) {
    static std::mutex mutex;
    static std::map<std::size_t, GaussLegendre> rules;
    std::lock_guard lock(mutex);
    auto it = rules.find(order);
    if (it == rules.end()) it = rules.emplace(order, compute_rule(order)).first;
    return it->second;
}

}  // namespace nspm
