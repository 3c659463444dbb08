#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "nonstat_pm/schedules.hpp"

using namespace nspm;

TEST_CASE("fixed schedules replay their rule") {
    auto c = FixedSchedule::constant(0.1, 0.3);
    for (std::size_t i = 0; i < 100; ++i) CHECK(c.alpha_at(i) == 0.1);

    auto alt = FixedSchedule::alternating(0.05, 0.25, 0.3);
    CHECK(alt.alpha_at(0) == 0.05);
    CHECK(alt.alpha_at(1) == 0.25);
    CHECK(alt.alpha_at(8) == 0.05);

    auto list = FixedSchedule::from_list({0.1, 0.2, 0.3}, 0.3);
    CHECK(list.alpha_at(5) == 0.3);  // cyclic replay
}

TEST_CASE("inadmissible values are rejected with their index") {
    CHECK_THROWS_WITH_AS(FixedSchedule::from_list({0.4}, 0.3),
                         doctest::Contains("inadmissible at index 0"), std::domain_error);
    CHECK_THROWS_WITH_AS(FixedSchedule::from_list({0.1, 0.2, 0.35}, 0.3),
                         doctest::Contains("inadmissible at index 2"), std::domain_error);
    auto rule = FixedSchedule::from_rule(
        [](std::size_t i) { return i < 3 ? 0.1 : 0.9; }, 0.3);
    CHECK(rule.alpha_at(2) == 0.1);
    CHECK_THROWS_WITH_AS(rule.alpha_at(3), doctest::Contains("inadmissible at index 3"),
                         std::domain_error);
}

TEST_CASE("omega sampling is reproducible and stream-separated") {
    auto proc = RandomProcess::iid(0.0, 0.3, 0.3, 12345);
    auto a = sample_omega(proc, 5, 0).values(5);
    auto b = sample_omega(proc, 5, 0).values(5);
    auto c = sample_omega(proc, 5, 1).values(5);
    CHECK(a == b);  // bitwise
    CHECK(a != c);
    for (double v : a) {
        CHECK(v >= 0.0);
        CHECK(v <= 0.3);
    }
}

TEST_CASE("distinct streams share the marginal distribution") {
    auto proc = RandomProcess::iid(0.0, 0.3, 0.3, 999);
    const std::size_t n = 10000;
    auto a = sample_omega(proc, n, 7).values(n);
    auto b = sample_omega(proc, n, 8).values(n);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    // two-sample Kolmogorov-Smirnov distance
    double ks = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < n && ib < n) {
        if (a[ia] <= b[ib])
            ++ia;
        else
            ++ib;
        ks = std::max(ks, std::abs(static_cast<double>(ia) - static_cast<double>(ib)) /
                              static_cast<double>(n));
    }
    CHECK(ks < 0.02);
}

TEST_CASE("admissibility fuzz over many draws") {
    auto proc = RandomProcess::iid(0.0, 0.3, 0.3, 31337);
    auto sched = sample_omega(proc, 100000, 3);
    for (std::size_t i = 0; i < 100000; ++i) {
        double v = sched.alpha_at(i);
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 0.3);
    }
}

TEST_CASE("markov chain with identity transition is constant") {
    auto proc = RandomProcess::markov({0.1}, {{1.0}}, 0.3, 1);
    auto sched = sample_omega(proc, 50, 0);
    for (std::size_t i = 0; i < 50; ++i) CHECK(sched.alpha_at(i) == 0.1);
}

TEST_CASE("markov stationarity: empirical state distribution matches pi") {
    auto proc = RandomProcess::markov({0.05, 0.15, 0.25},
                                      {{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}, {0.3, 0.3, 0.4}}, 0.3,
                                      777);
    auto pi = proc.stationary();
    const std::size_t n = 100000;
    auto vals = sample_omega(proc, n, 0).values(n);
    std::map<double, std::size_t> counts;
    for (double v : vals) counts[v]++;
    double tv = 0.0;
    const double states[3] = {0.05, 0.15, 0.25};
    for (int s = 0; s < 3; ++s)
        tv += std::abs(static_cast<double>(counts[states[s]]) / static_cast<double>(n) - pi[s]);
    CHECK(tv / 2.0 < 0.01);
}

TEST_CASE("mixing profiles") {
    auto iid = RandomProcess::iid(0.0, 0.3, 0.3, 0);
    auto mp = mixing_profile(iid);
    CHECK(mp.mixing());
    CHECK(mp.bound(1) == 0.0);
    CHECK(mp.bound(10) == 0.0);
    CHECK(mp.bound(0) == 1.0);

    auto two = RandomProcess::markov({0.05, 0.25}, {{0.75, 0.25}, {0.25, 0.75}}, 0.3, 0);
    auto mp2 = mixing_profile(two);
    CHECK(mp2.mixing());
    CHECK(mp2.lambda == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mp2.bound(3) == doctest::Approx(0.125).epsilon(1e-12));

    auto frozen = RandomProcess::markov({0.05, 0.25}, {{1.0, 0.0}, {0.0, 1.0}}, 0.3, 0);
    auto mp3 = mixing_profile(frozen);
    CHECK_FALSE(mp3.mixing());
}

TEST_CASE("qds rows track the limit curve") {
    auto flat = QdsArray::constant_curve(0.1, 0.3);
    auto row = qds_row(flat, 8).values(8);
    for (double v : row) CHECK(v == 0.1);

    auto lin = QdsArray::linear_curve(0.05, 0.2, 0.3);
    auto r4 = qds_row(lin, 4).values(4);
    CHECK(r4[0] == doctest::Approx(0.10).epsilon(1e-15));
    CHECK(r4[1] == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(r4[2] == doctest::Approx(0.20).epsilon(1e-15));
    CHECK(r4[3] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("qds perturbations respect the n^-eta envelope") {
    auto lin = QdsArray::linear_curve(0.05, 0.2, 0.3);
    lin.c_pert = 0.5;
    lin.eta = 1.0;
    lin.seed = 5;
    for (std::size_t n : {16u, 64u, 256u}) {
        auto row = qds_row(lin, n).values(n);
        double bound = 0.5 / static_cast<double>(n);
        for (std::size_t k = 1; k <= n; ++k) {
            double tau = 0.05 + 0.2 * static_cast<double>(k) / static_cast<double>(n);
            REQUIRE(std::abs(row[k - 1] - tau) <= bound + 1e-15);
        }
    }
}

TEST_CASE("qds convergence at fixed t") {
    auto lin = QdsArray::linear_curve(0.05, 0.2, 0.3);  // Lipschitz constant 0.2
    lin.c_pert = 0.3;
    lin.eta = 1.0;
    const double t = 0.37;
    for (std::size_t n : {32u, 128u, 1024u}) {
        auto row = qds_row(lin, n).values(n);
        auto k = static_cast<std::size_t>(static_cast<double>(n) * t);
        double tau_t = 0.05 + 0.2 * t;
        double envelope = (0.2 + 0.3) / static_cast<double>(n) + 1e-15;
        REQUIRE(std::abs(row[k == 0 ? 0 : k - 1] - tau_t) <= envelope + 0.2 / static_cast<double>(n));
    }
}

TEST_CASE("schedule serialization round trip") {
    auto proc = RandomProcess::iid(0.0, 0.3, 0.3, 42);
    auto vals = sample_omega(proc, 17, 3).values(17);
    std::stringstream buf;
    save_schedule(buf, vals, "iid_uniform", 0.3, 42);

    std::string first_line;
    std::getline(buf, first_line);
    CHECK(first_line.rfind("#schedule kind=iid_uniform beta_star=", 0) == 0);
    buf.seekg(0);

    auto loaded = load_schedule(buf);
    CHECK(loaded.kind == "iid_uniform");
    CHECK(loaded.beta_star == 0.3);
    CHECK(loaded.seed == 42);
    REQUIRE(loaded.alphas.size() == 17);
    for (std::size_t i = 0; i < 17; ++i) CHECK(loaded.alphas[i] == vals[i]);  // bitwise via %.17g
}
