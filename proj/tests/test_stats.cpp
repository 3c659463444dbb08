#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nonstat_pm/rng.hpp"
#include "nonstat_pm/stats.hpp"

using namespace nspm;

TEST_CASE("normal quantile and cdf") {
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
    for (int i = 1; i < 2000; ++i) {
        double p = i / 2000.0;
        REQUIRE(std::abs(normal_cdf(normal_quantile(p)) - p) < 1e-12);
    }
    CHECK_THROWS_AS(normal_quantile(-0.1), std::domain_error);
}

TEST_CASE("wasserstein distance to a matched quantile lattice is tiny") {
    // the residual is the within-interval quantile variation, ~2.4 sigma/M once
    // the quantile range ~ sqrt(2 log M) passes 4; stays under 2 sigma/M for
    // moderate M
    const std::size_t M = 1000;
    const double sigma = 1.7;
    std::vector<double> xs(M);
    for (std::size_t i = 0; i < M; ++i)
        xs[i] = sigma * normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(M));
    CHECK(wasserstein1_to_normal(xs, sigma) <= 2.0 * sigma / static_cast<double>(M));

    const std::size_t big = 100000;
    std::vector<double> ys(big);
    for (std::size_t i = 0; i < big; ++i)
        ys[i] = normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(big));
    CHECK(wasserstein1_to_normal(ys, 1.0) <= 3.0 / static_cast<double>(big));
}

TEST_CASE("wasserstein distance from a point mass is E|Z|") {
    std::vector<double> zeros(100000, 0.0);
    CHECK(wasserstein1_to_normal(zeros, 1.0) ==
          doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-3 / 0.8));
    // and sigma = 0 degenerates to the mean absolute value
    std::vector<double> xs = {1.0, -3.0, 2.0, 0.0};
    CHECK(wasserstein1_to_normal(xs, 0.0) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("wasserstein input validation") {
    std::vector<double> one = {1.0};
    CHECK_THROWS_AS(wasserstein1_to_normal(one, 1.0), std::invalid_argument);
    std::vector<double> bad = {1.0, std::nan("")};
    CHECK_THROWS_AS(wasserstein1_to_normal(bad, 1.0), std::invalid_argument);
}

TEST_CASE("wasserstein respects the sigma_X + sigma_Y bound for centered data") {
    CounterRng rng(2024, 0);
    std::size_t idx = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t M = 2000;
        double spread = 0.2 + 2.0 * rng.uniform(idx++);
        std::vector<double> xs(M);
        double mean = 0.0;
        for (auto& x : xs) {
            x = spread * (normal_quantile(std::max(1e-12, rng.uniform(idx++))) +
                          0.3 * std::sin(static_cast<double>(idx)));
            mean += x;
        }
        mean /= static_cast<double>(M);
        double var = 0.0;
        for (auto& x : xs) {
            x -= mean;  // centered
            var += x * x;
        }
        double sx = std::sqrt(var / static_cast<double>(M));
        double sigma = 2.0 * rng.uniform(idx++);
        REQUIRE(wasserstein1_to_normal(xs, sigma) <= sx + sigma + 1e-9);
    }
}

TEST_CASE("triangle inequality against an intermediate normal") {
    // d(X, sigma2) <= d(X, sigma1) + d(sigma1 Z, sigma2 Z) = d(X, sigma1) + |s1-s2| E|Z|
    CounterRng rng(7, 1);
    std::vector<double> xs(5000);
    for (std::size_t i = 0; i < xs.size(); ++i)
        xs[i] = 1.3 * normal_quantile(std::max(1e-12, rng.uniform(i))) + 0.1;
    double d1 = wasserstein1_to_normal(xs, 1.0);
    double d2 = wasserstein1_to_normal(xs, 1.5);
    double bridge = 0.5 * std::sqrt(2.0 / std::numbers::pi);
    CHECK(d2 <= d1 + bridge + 1e-9);
    CHECK(d1 <= d2 + bridge + 1e-9);
}

TEST_CASE("phi_sigma closed forms and lattice integration") {
    CovarianceMatrix eye(1);
    eye.at(0, 0) = 1.0;

    auto cos1 = TestFunction::cosine({1.0});
    CHECK(phi_sigma(cos1, eye).value == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

    TestFunction sq;
    sq.kind = TestFunction::Kind::generic;
    sq.name = "x1_squared";
    sq.evaluate = [](std::span<const double> x) { return x[0] * x[0]; };
    auto mc = phi_sigma(sq, eye);
    CHECK(mc.value == doctest::Approx(1.0).epsilon(2e-3));

    TestFunction c;
    c.kind = TestFunction::Kind::generic;
    c.name = "constant";
    c.evaluate = [](std::span<const double>) { return 4.25; };
    CHECK(phi_sigma(c, eye).value == 4.25);
}

TEST_CASE("smooth test distance on exact normal samples") {
    CovarianceMatrix sigma(2);
    sigma.at(0, 0) = 1.0;
    sigma.at(1, 1) = 0.64;
    sigma.at(0, 1) = sigma.at(1, 0) = 0.4;
    auto root = sigma.sqrt_psd();

    const std::size_t M = 200000;
    std::vector<double> samples(2 * M);
    CounterRng rng(99, 2);
    for (std::size_t i = 0; i < M; ++i) {
        double z1 = normal_quantile(std::max(1e-15, rng.uniform(2 * i)));
        double z2 = normal_quantile(std::max(1e-15, rng.uniform(2 * i + 1)));
        samples[2 * i] = root.at(0, 0) * z1 + root.at(0, 1) * z2;
        samples[2 * i + 1] = root.at(1, 0) * z1 + root.at(1, 1) * z2;
    }
    auto battery = default_battery(2);
    auto dists = smooth_test_distance(samples, 2, sigma, battery);
    REQUIRE(dists.size() == battery.size());
    for (double d : dists) CHECK(d < 0.01);  // ~4 std errors at M = 2e5
}

TEST_CASE("green-kubo: doubling map equals 1/4") {
    auto gk = green_kubo(MapParameter(0.0), Observable::x_minus_half(), 4096, 60);
    CHECK(std::abs(gk.at(0, 0) - 0.25) < 1e-6);
}

TEST_CASE("green-kubo: constant observables give the zero matrix") {
    auto gk = green_kubo(MapParameter(0.2), Observable::constant(3.0), 512);
    CHECK(std::abs(gk.at(0, 0)) < 1e-12);
}

TEST_CASE("green-kubo: duplicated components give a rank-1 equal-entry matrix") {
    Observable dup;
    dup.name = "dup";
    dup.dim = 2;
    dup.components = {[](double x) { return x - 0.5; }, [](double x) { return x - 0.5; }};
    dup.lip = 1.0;
    dup.sup = 0.5;
    auto gk = green_kubo(MapParameter(0.15), dup, 1024);
    CHECK(gk.at(0, 0) == doctest::Approx(gk.at(0, 1)).epsilon(1e-12));
    CHECK(gk.at(0, 0) == doctest::Approx(gk.at(1, 1)).epsilon(1e-12));
    CHECK(gk.at(1, 0) == gk.at(0, 1));
}

TEST_CASE("green-kubo is stable under grid refinement") {
    auto f = Observable::x_minus_half();
    for (double alpha : {0.1, 0.25, 0.3}) {
        auto coarse = green_kubo(MapParameter(alpha), f, 2048);
        auto fine = green_kubo(MapParameter(alpha), f, 4096);
        REQUIRE(std::abs(coarse.at(0, 0) - fine.at(0, 0)) < 1e-4);
        REQUIRE(coarse.at(0, 0) >= -1e-8);  // asymptotic variances are non-negative
    }
}

TEST_CASE("sigma_t integral: endpoints and constant curves") {
    auto f = Observable::x_minus_half();
    auto flat = QdsArray::constant_curve(0.1, 0.3);

    auto zero = sigma_t_integral(flat, f, 0.0, 16, 512);
    CHECK(zero.at(0, 0) == 0.0);

    auto half = sigma_t_integral(flat, f, 0.5, 8, 1024);
    auto gk = green_kubo(MapParameter(0.1), f, 1024);
    CHECK(half.at(0, 0) == doctest::Approx(0.5 * gk.at(0, 0)).epsilon(1e-10));
}

TEST_CASE("sigma_t integral: quadrature self-consistency and additivity") {
    auto f = Observable::x_minus_half();
    auto lin = QdsArray::linear_curve(0.05, 0.2, 0.3);
    auto a16 = sigma_t_integral(lin, f, 1.0, 16, 1024);
    auto a64 = sigma_t_integral(lin, f, 1.0, 64, 1024);
    CHECK(CovarianceMatrix::max_abs_difference(a16, a64) < 1e-3);

    // additivity: integral over [0, 1] vs [0, 1/2] plus the shifted remainder
    auto first = sigma_t_integral(lin, f, 0.5, 32, 1024);
    QdsArray second_half = lin;
    second_half.tau = [](double s) { return 0.05 + 0.2 * (0.5 + 0.5 * s); };
    auto second = sigma_t_integral(second_half, f, 1.0, 32, 1024);
    second *= 0.5;  // ds rescaling of the substitution s -> 1/2 + s/2
    auto whole = sigma_t_integral(lin, f, 1.0, 32, 1024);
    CHECK(std::abs(first.at(0, 0) + second.at(0, 0) - whole.at(0, 0)) < 1e-3);
}

TEST_CASE("rds sigma squared collapses to green-kubo for a degenerate process") {
    auto f = Observable::x_minus_half();
    auto invariant = invariant_density(MapParameter(0.1), 8192, 1e-12);
    auto degenerate = RandomProcess::iid(0.1, 0.1, 0.3, 5);
    double rds = rds_sigma_sq(degenerate, f, invariant, 60, 300, 2);
    auto gk = green_kubo(MapParameter(0.1), f, 8192, 60);
    CHECK(std::abs(rds - gk.at(0, 0)) < 1e-4);

    auto fc = Observable::constant(1.0);
    CHECK(std::abs(rds_sigma_sq(degenerate, fc, GridDensity::uniform(256), 10, 20, 2)) <
          1e-12);
}

TEST_CASE("rds sigma squared is positive and stable in the number of draws") {
    auto f = Observable::x_minus_half();
    auto proc = RandomProcess::iid(0.0, 0.3, 0.3, 12);
    GridDensity mu = GridDensity::uniform(1024);
    double a = rds_sigma_sq(proc, f, mu, 40, 200, 12);
    double b = rds_sigma_sq(proc, f, mu, 40, 200, 24);
    CHECK(a > 0.0);
    CHECK(std::abs(a - b) / b < 0.05);
}

TEST_CASE("covariance_of_S matches the doubling-map closed form") {
    auto f = Observable::x_minus_half();
    std::vector<MapParameter> sched(1023, MapParameter(0.0));
    std::size_t cps[] = {64, 1024};
    auto v = covariance_of_S(sched, f, GridDensity::uniform(2048), cps);
    for (std::size_t c = 0; c < 2; ++c) {
        double N = c == 0 ? 64.0 : 1024.0;
        double expect = N / 12.0;
        for (int k = 1; k < static_cast<int>(N); ++k)
            expect += 2.0 * (N - static_cast<double>(k)) * std::pow(2.0, -k) / 12.0;
        REQUIRE(v[c].at(0, 0) == doctest::Approx(expect).epsilon(1e-12));
    }
}
