#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nonstat_pm/covariance.hpp"
#include "nonstat_pm/grid_density.hpp"
#include "nonstat_pm/observable.hpp"
#include "nonstat_pm/schedules.hpp"
#include "nonstat_pm/transfer.hpp"

namespace nspm {

// Standard normal quantile (AS241, |error| well under 1e-9) and CDF.
double normal_quantile(double p);
double normal_cdf(double x);

// W1 distance between the empirical measure of the samples and N(0, sigma^2):
// integral over u in (0,1) of |F_emp^{-1}(u) - sigma Phi^{-1}(u)|, evaluated
// with 16 Gauss-Legendre subpoints per order-statistic interval.
double wasserstein1_to_normal(std::span<const double> samples, double sigma);

// Three-times differentiable test function with declared derivative bounds.
struct TestFunction {
    enum class Kind { cosine_linear, generic };

    Kind kind = Kind::generic;
    std::string name;
    std::vector<double> wave;  // cosine_linear: h(x) = cos(wave . x)
    std::function<double(std::span<const double>)> evaluate;
    double d1 = 0.0, d2 = 0.0, d3 = 0.0;

    double operator()(std::span<const double> x) const;

    static TestFunction cosine(std::vector<double> wave);
    // bounded odd saturating profile s(u) = u^3/(1+|u|^3) applied to v.x
    static TestFunction cubic_saturating(std::vector<double> v);
};

// Six cosines of fixed linear forms plus one cubic-saturating function.
std::vector<TestFunction> default_battery(std::size_t dim);

struct MonteCarloValue {
    double value = 0.0;
    double std_error = 0.0;
};

// Expectation of h under N(mean, Sigma); closed form for cosines, otherwise a
// 1e6-point low-discrepancy lattice through the symmetric PSD square root.
MonteCarloValue phi_sigma(const TestFunction& h, const CovarianceMatrix& sigma,
                          std::span<const double> mean = {});

// |empirical mean of h - Phi_Sigma(h)| per battery element.
std::vector<double> smooth_test_distance(std::span<const double> samples, std::size_t dim,
                                         const CovarianceMatrix& sigma,
                                         std::span<const TestFunction> battery);

// Green-Kubo asymptotic covariance of f under the invariant measure of T_a:
// Sigma_ab = mu(fc_a fc_b) + sum_{k>=1} mu(fc_a fc_b o T^k + fc_b fc_a o T^k),
// terms evaluated as integrals of fc_b against L^k(fc_a h). The series stops
// at the first k whose entrywise term is below tail_tol, or at K_max.
CovarianceMatrix green_kubo(const MapParameter& alpha, const Observable& f,
                            std::size_t grid_size, std::size_t K_max = 200,
                            double tail_tol = 1e-10,
                            OperatorCache& cache = OperatorCache::global());

// Sigma_t = integral_0^t Sigma_hat_{tau(s)}(f) ds by midpoint quadrature.
CovarianceMatrix sigma_t_integral(const QdsArray& array, const Observable& f, double t,
                                  std::size_t n_quad, std::size_t grid_size,
                                  std::size_t K_max = 200, double tail_tol = 1e-10,
                                  OperatorCache& cache = OperatorCache::global());

// Exact Var(S_N) (d x d) for the given schedule, evaluated at each checkpoint
// N in one sweep. All lags enter through the running pushforward
// r_i = L_i(r_{i-1}) + fc_i d_i, so the cost is O(N) operator applications.
std::vector<CovarianceMatrix> covariance_of_S(std::span<const MapParameter> schedule,
                                              const Observable& f, const GridDensity& mu_d,
                                              std::span<const std::size_t> checkpoints,
                                              OperatorCache& cache = OperatorCache::global());

// RDS limit variance sigma^2 = sum_k (2 - delta_{k0}) E_omega[cov(f_i, f_{i+k})]
// with i = i_burn, averaged over n_omega realizations. Runs on the grid of
// mu_d.
double rds_sigma_sq(const RandomProcess& process, const Observable& f, const GridDensity& mu_d,
                    std::size_t K_max, std::size_t i_burn, std::size_t n_omega,
                    std::size_t threads = 0);

}  // namespace nspm
