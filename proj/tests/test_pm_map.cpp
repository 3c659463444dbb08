#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nonstat_pm/pm_map.hpp"
#include "nonstat_pm/rng.hpp"

using namespace nspm;

TEST_CASE("map parameter validation") {
    CHECK_NOTHROW(MapParameter(0.0));
    CHECK_NOTHROW(MapParameter(0.999));
    CHECK_THROWS_AS(MapParameter(1.0), std::domain_error);
    CHECK_THROWS_AS(MapParameter(-0.1), std::domain_error);
}

TEST_CASE("apply_map branch values") {
    MapParameter half(0.5);
    CHECK(apply_map(MapParameter(0.3), 0.0) == 0.0);  // neutral fixed point
    CHECK(apply_map(MapParameter(0.7), 0.75) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(apply_map(half, 0.25) == doctest::Approx(0.4267766952966369).epsilon(1e-12));
    CHECK_THROWS_AS(apply_map(half, -0.01), std::domain_error);
    CHECK_THROWS_AS(apply_map(half, 1.01), std::domain_error);
    CHECK_THROWS_AS(apply_map(half, std::nan("")), std::domain_error);
}

TEST_CASE("map_derivative values") {
    CHECK(map_derivative(MapParameter(0.3), 0.0) == 1.0);
    CHECK(map_derivative(MapParameter(0.42), 0.9) == 2.0);
    CHECK(map_derivative(MapParameter(0.42), 0.5) == 2.0);  // 1/2 is on the right branch
    CHECK(map_derivative(MapParameter(0.5), 0.25) ==
          doctest::Approx(2.0606601717798212).epsilon(1e-12));
}

TEST_CASE("inverse_branches examples") {
    auto both = inverse_branches(MapParameter(0.37), 0.0);
    CHECK(both.left == 0.0);
    CHECK(both.right == 0.5);

    auto doubling = inverse_branches(MapParameter(0.0), 0.6);
    CHECK(doubling.left == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(doubling.right == doctest::Approx(0.8).epsilon(1e-15));

    auto inv = inverse_branches(MapParameter(0.5), 0.4267766952966369);
    CHECK(inv.left == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(inv.right == doctest::Approx(0.71338834764831845).epsilon(1e-12));
}

TEST_CASE("inverse_branches round trip on a grid") {
    for (double a : {0.0, 0.1, 0.25, 0.33}) {
        MapParameter p(a);
        for (int i = 0; i < 10000; ++i) {
            double x = i / 10000.0;
            auto inv = inverse_branches(p, x);
            REQUIRE(std::abs(apply_map(p, inv.left) - x) < 1e-12);
            REQUIRE(std::abs(apply_map(p, inv.right) - x) < 1e-12);
            REQUIRE(inv.left < 0.5);
            REQUIRE(inv.right >= 0.5);
        }
    }
}

TEST_CASE("monotonicity and expansion properties") {
    CounterRng rng(7, 0);
    for (double a : {0.0, 0.15, 0.3, 0.45}) {
        MapParameter p(a);
        double prev_left = apply_map(p, 0.0);
        double prev_right = apply_map(p, 0.5);
        for (int i = 1; i < 2000; ++i) {
            double xl = 0.5 * i / 2000.0;
            double xr = 0.5 + 0.5 * i / 2000.0;
            double yl = apply_map(p, xl), yr = apply_map(p, xr);
            REQUIRE(yl > prev_left);   // strictly increasing on [0,1/2)
            REQUIRE(yr > prev_right);  // strictly increasing on [1/2,1]
            REQUIRE(yl >= xl);         // T(x) >= x left of 1/2
            prev_left = yl;
            prev_right = yr;
        }
        for (int i = 0; i < 500; ++i) {
            double x = rng.uniform(i);
            if (x == 0.5) continue;
            REQUIRE(map_derivative(p, x) >= 1.0);
            if (x > 0.0) REQUIRE(map_derivative(p, x) > 1.0);
        }
    }
}

TEST_CASE("alpha zero is exactly the doubling map") {
    MapParameter zero(0.0);
    for (int i = 0; i <= 4096; ++i) {
        double x = i / 4096.0;
        double want = x < 0.5 ? 2.0 * x : 2.0 * x - 1.0;
        CHECK(apply_map(zero, x) == want);  // bit-exact on both branches
    }
    // preimage of a dyadic point is the exact half
    CHECK(inverse_branches(zero, 0.375).left == 0.1875);
}

TEST_CASE("iterate folds the prefix") {
    std::vector<MapParameter> empty;
    CHECK(iterate(empty, 0.42) == 0.42);

    std::vector<MapParameter> twice(2, MapParameter(0.0));
    CHECK(iterate(twice, 0.3) == doctest::Approx(0.2).epsilon(1e-14));

    std::vector<MapParameter> once{MapParameter(0.5)};
    CHECK(iterate(once, 0.25) == doctest::Approx(0.4267766952966369).epsilon(1e-12));
}
