#include "nonstat_pm/rates.hpp"

#include <cmath>
#include <stdexcept>

#include "nonstat_pm/numerics.hpp"

namespace nspm {

double rho(std::uint64_t n, double beta_star) {
    if (!(beta_star > 0.0 && beta_star < 1.0))
        throw std::domain_error("rho: beta_star outside (0,1)");
    if (n <= 1) return 1.0;
    const double x = static_cast<double>(n);
    const double inv_b = 1.0 / beta_star;
    return std::pow(x, 1.0 - inv_b) * std::pow(std::log(x), inv_b);
}

double rho_tail_sum(std::uint64_t from, double beta_star) {
    if (!(beta_star > 0.0 && beta_star < 1.0))
        throw std::domain_error("rho_tail_sum: beta_star outside (0,1)");
    if (from < 2) from = 2;  // rho(0) = rho(1) = 1 are never part of a tail here
    const std::uint64_t direct_cap = 1u << 20;
    KahanSum head;
    std::uint64_t i = from;
    for (; i < from + direct_cap; ++i) {
        double term = rho(i, beta_star);
        head.add(term);
        if (term < 1e-16) return head.value();
    }
    // midpoint-rule completion: sum_{j >= i} rho(j) ~ int_{i-1/2}^inf rho(x) dx,
    // integrated over dyadic blocks with Gauss-Legendre until blocks vanish
    const auto& gl = gauss_legendre(16);
    const double inv_b = 1.0 / beta_star;
    auto rho_cont = [&](double x) {
        return std::pow(x, 1.0 - inv_b) * std::pow(std::log(x), inv_b);
    };
    double lo = static_cast<double>(i) - 0.5;
    double tail = 0.0;
    for (int block = 0; block < 4000; ++block) {
        double hi = 2.0 * lo;
        double acc = 0.0;
        for (std::size_t q = 0; q < gl.nodes.size(); ++q)
            acc += gl.weights[q] * rho_cont(lo + (hi - lo) * gl.nodes[q]);
        acc *= hi - lo;
        tail += acc;
        if (acc < 1e-18) break;
        lo = hi;
    }
    return head.value() + tail;
}

double qds_theta(double eta, double beta_star) {
    if (!(eta > 0.0 && eta <= 1.0)) throw std::domain_error("qds_theta: eta outside (0,1]");
    if (!(beta_star > 0.0 && beta_star < 1.0))
        throw std::domain_error("qds_theta: beta_star outside (0,1)");
    return 1.0 / (12.0 / (eta * (1.0 - beta_star)) + 1.0);
}

namespace {

double need(const RateSpec& spec, const std::string& key) {
    auto it = spec.params.find(key);
    if (it == spec.params.end())
        throw std::invalid_argument("rate_value: missing parameter '" + key + "'");
    return it->second;
}

double maybe(const RateSpec& spec, const std::string& key, double fallback) {
    auto it = spec.params.find(key);
    return it == spec.params.end() ? fallback : it->second;
}

double size_param(const RateSpec& spec) {
    auto it = spec.params.find("N");
    if (it == spec.params.end()) it = spec.params.find("n");
    if (it == spec.params.end()) throw std::invalid_argument("rate_value: missing N (or n)");
    if (!(it->second >= 2.0)) throw std::invalid_argument("rate_value: N must be >= 2");
    return it->second;
}

double check_beta(double b, double hi) {
    if (!(b > 0.0 && b < hi))
        throw std::domain_error("rate_value: beta_star outside (0," + std::to_string(hi) + ")");
    return b;
}

}  // namespace

double rate_value(const RateSpec& spec) {
    using Kind = RateSpec::Kind;
    switch (spec.kind) {
        case Kind::thm21: {
            double b = check_beta(need(spec, "beta_star"), 0.5);
            double N = size_param(spec);
            return std::pow(N, b - 0.5) * std::pow(std::log(N), 1.0 / b);
        }
        case Kind::thm22: {
            double b = check_beta(need(spec, "beta_star"), 0.5);
            double N = size_param(spec);
            double s2 = maybe(spec, "sigma_sq", 1.0);
            return std::max(1.0, 1.0 / s2) * std::pow(N, b - 0.5) * std::pow(std::log(N), 1.0 / b);
        }
        case Kind::cor23: {
            double b = check_beta(need(spec, "beta_star"), 1.0 / 3.0);
            double eps = need(spec, "epsilon_var");
            if (!(eps >= 0.0 && eps <= 1.0))
                throw std::domain_error("rate_value: epsilon_var outside [0,1]");
            double N = size_param(spec);
            return std::pow(N, 1.0 - 1.5 * eps + b) * std::pow(std::log(N), 1.0 / b);
        }
        case Kind::prop25: {
            double b = check_beta(need(spec, "beta_star"), 0.5);
            double N = size_param(spec);
            return std::pow(N, (2.0 * b - 1.0) / 6.0) * std::pow(std::log(N), 1.0 / b);
        }
        case Kind::quenched: {
            double b = check_beta(need(spec, "beta_star"), 1.0 / 3.0);
            double gamma = need(spec, "gamma");
            if (!(gamma > 0.0)) throw std::domain_error("rate_value: gamma must be positive");
            double delta = maybe(spec, "delta", 0.01);  // "arbitrary delta > 0"
            double N = size_param(spec);
            double base = std::pow(N, b - 0.5) * std::pow(std::log(N), 1.0 / b);
            if (gamma >= 1.0) return base;
            return base + std::pow(N, -0.5 * gamma) * std::pow(std::log(N), 1.5 + delta);
        }
        case Kind::qds_theta: {
            double theta = qds_theta(need(spec, "eta"), check_beta(need(spec, "beta_star"), 1.0));
            auto it = spec.params.find("n");
            if (it == spec.params.end()) it = spec.params.find("N");
            if (it == spec.params.end()) return theta;  // the exponent itself
            return std::pow(it->second, -theta);
        }
        case Kind::stein_rhs: {
            double b = check_beta(need(spec, "beta_star"), 1.0 / 3.0);
            return stein_rhs(static_cast<std::uint64_t>(size_param(spec)),
                             static_cast<std::uint64_t>(need(spec, "K")), b);
        }
        case Kind::rho:
            return rho(static_cast<std::uint64_t>(size_param(spec)),
                       check_beta(need(spec, "beta_star"), 1.0));
    }
    throw std::logic_error("rate_value: unknown kind");
}

double stein_rhs(std::uint64_t N, std::uint64_t K, double beta_star,
                 const std::function<double(std::uint64_t, double)>& rho_tilde) {
    if (!(K < N)) throw std::invalid_argument("stein_rhs: require 0 <= K < N");
    const double root_n = std::sqrt(static_cast<double>(N));
    double tilde = rho_tilde ? rho_tilde(K, beta_star) : rho(K, beta_star);
    return (static_cast<double>(K) + 1.0) / root_n + rho_tail_sum(K + 1, beta_star) +
           root_n * tilde;
}

LogLogFit fit_loglog(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 3) throw std::invalid_argument("fit_loglog: need at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double n = static_cast<double>(pairs.size());
    for (auto [N, dist] : pairs) {
        if (!(N > 0.0 && dist > 0.0))
            throw std::invalid_argument("fit_loglog: nonpositive data");
        double x = std::log(N), y = std::log(dist);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_loglog: degenerate abscissae");
    LogLogFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0, ybar = sy / n;
    for (auto [N, dist] : pairs) {
        double x = std::log(N), y = std::log(dist);
        double pred = fit.intercept + fit.slope * x;
        ss_res += (y - pred) * (y - pred);
        ss_tot += (y - ybar) * (y - ybar);
    }
    fit.r2 = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return fit;
}

}  // namespace nspm
