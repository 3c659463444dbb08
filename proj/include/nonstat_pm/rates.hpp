#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace nspm {

// Correlation-decay profile rho(n) = n^{1 - 1/beta_star} (log n)^{1/beta_star}
// for n >= 2, with rho(0) = rho(1) = 1. Requires beta_star in (0,1).
double rho(std::uint64_t n, double beta_star);

// Sum_{i >= from} rho(i): direct summation of the head plus a midpoint
// integral completion of the tail.
double rho_tail_sum(std::uint64_t from, double beta_star);

// Theoretical bound shapes with constant 1; only exponents are contractual,
// so comparisons against experiments fit the constant from data.
struct RateSpec {
    enum class Kind { thm21, thm22, cor23, prop25, quenched, qds_theta, stein_rhs, rho };

    Kind kind = Kind::thm21;
    std::map<std::string, double> params;  // beta_star, epsilon_var, gamma, delta,
                                           // eta, sigma_sq, N (or n), K
};

double rate_value(const RateSpec& spec);

// Exponent of Theorem-style QDS CLT rate: theta = 1 / (12 / (eta (1-beta)) + 1).
double qds_theta(double eta, double beta_star);

// (K+1)/sqrt(N) + sum_{i>K} rho(i) + sqrt(N) rho~(K), constant 1.
double stein_rhs(std::uint64_t N, std::uint64_t K, double beta_star,
                 const std::function<double(std::uint64_t, double)>& rho_tilde = {});

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Least squares on (ln N, ln distance); needs >= 3 points and positive data.
LogLogFit fit_loglog(const std::vector<std::pair<double, double>>& pairs);

}  // namespace nspm
