#include <catch2/catch_amalgamated.hpp>

#include "oneshot/rng.hpp"

using namespace oneshot;

TEST_CASE("rng: fixed seed reproduces the stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.gaussian() == b.gaussian());
}

TEST_CASE("rng: child seeds are decorrelated and stable") {
    Rng r(7);
    REQUIRE(r.child_seed(0) != r.child_seed(1));
    REQUIRE(r.child_seed(3) == Rng(7).child_seed(3));
}

TEST_CASE("rng: gaussian moments") {
    Rng r(1234);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = r.gaussian();
        s += x;
        s2 += x * x;
    }
    double mean = s / n;
    double var = s2 / n - mean * mean;
    REQUIRE(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
    REQUIRE(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("rng: uniform01 stays in range") {
    Rng r(9);
    for (int i = 0; i < 1000; ++i) {
        double u = r.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}
