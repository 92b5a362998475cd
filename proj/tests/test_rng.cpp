#include <doctest.h>

#include <cmath>

#include <qsens/rng.hpp>

using qsens::Rng;
using qsens::normal_quantile;

TEST_CASE("same seed reproduces the stream") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("substreams are seed-and-counter determined") {
    const Rng master(99);
    Rng s0 = master.substream(0);
    Rng s1 = master.substream(1);
    CHECK(s0.next_u64() != s1.next_u64());

    Rng again = master.substream(1);
    Rng s1b = master.substream(1);
    for (int i = 0; i < 10; ++i) {
        CHECK(again.next_u64() == s1b.next_u64());
    }
}

TEST_CASE("uniform01 stays strictly inside (0,1)") {
    Rng rng(7);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform01();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("uniform_below covers [0,n)") {
    Rng rng(5);
    bool seen[7] = {};
    for (int i = 0; i < 1000; ++i) {
        const std::size_t k = rng.uniform_below(7);
        REQUIRE(k < 7);
        seen[k] = true;
    }
    for (bool s : seen) CHECK(s);
}

TEST_CASE("normal quantile matches reference values") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(0.01) == doctest::Approx(-2.3263478740408408).epsilon(1e-12));
    CHECK(normal_quantile(0.8413447460685429) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS(normal_quantile(0.0));
    CHECK_THROWS(normal_quantile(1.0));
}

TEST_CASE("normal quantile is antisymmetric") {
    for (double p : {0.001, 0.05, 0.2, 0.37, 0.49}) {
        CHECK(normal_quantile(p) == doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-12));
    }
}
