#include <doctest.h>

#include "oracles.hpp"
#include "survkit/error.hpp"
#include "survkit/timegrid.hpp"

using namespace survkit;

namespace {

std::vector<double> ones_then_zeros(std::size_t n, std::size_t ones) {
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < ones; ++i) v[i] = 1.0;
    return v;
}

}  // namespace

TEST_CASE("grid boundaries") {
    const auto g = build_grid(3000, 15);
    REQUIRE(g.boundaries().size() == 16);
    for (int i = 0; i <= 15; ++i) CHECK(g.boundary(i) == 200.0 * i);
    CHECK(build_grid(10, 2).boundaries() == std::vector<double>{0, 5, 10});

    const auto odd = build_grid(1234.5, 7);
    for (int i = 0; i <= 7; ++i) CHECK(odd.boundary(i) == i * 1234.5 / 7);

    CHECK_THROWS_AS(build_grid(3000, 1), Error);
    CHECK_THROWS_AS(build_grid(0, 15), Error);
    CHECK_THROWS_AS(build_grid(-5, 15), Error);
}

TEST_CASE("targets for the worked cases") {
    const auto g = build_grid(3000, 15);
    const auto dead = make_target(g, 450, 1);
    CHECK(dead.survived == ones_then_zeros(15, 2));
    std::vector<double> f(15, 0.0);
    f[2] = 1.0;
    CHECK(dead.failed == f);

    const auto cens = make_target(g, 450, 0);
    CHECK(cens.survived == ones_then_zeros(15, 2));
    CHECK(cens.failed == std::vector<double>(15, 0.0));

    CHECK(make_target(g, 500, 0).survived == ones_then_zeros(15, 3));
    CHECK(make_target(g, 0, 0).survived == ones_then_zeros(15, 0));
    CHECK(make_target(g, 3000, 0).survived == ones_then_zeros(15, 15));
}

TEST_CASE("a death at the horizon falls in the last interval") {
    const auto g = build_grid(3000, 15);
    const auto t = make_target(g, 3000, 1);
    CHECK(t.survived == ones_then_zeros(15, 14));
    CHECK(t.failed[14] == 1.0);
    const auto b = make_target(g, 200, 1);
    CHECK(b.failed[1] == 1.0);
    CHECK(b.survived == ones_then_zeros(15, 1));
}

TEST_CASE("targets agree with the direct transcription and keep their invariants") {
    const auto g = build_grid(600, 6);
    for (int event = 0; event <= 1; ++event) {
        std::vector<double> previous(6, 0.0);
        for (int t = 0; t <= 600; ++t) {
            const auto got = make_target(g, t, event);
            const auto want = oracle::target(600, 6, t, event);
            CHECK(got.survived == want.s);
            CHECK(got.failed == want.f);
            double sum_f = 0;
            for (double v : got.failed) sum_f += v;
            CHECK(sum_f == (event ? 1.0 : 0.0));
            // surv_s is a prefix of ones and never overlaps surv_f.
            for (std::size_t i = 0; i < 6; ++i) {
                if (i > 0 && got.survived[i] == 1.0) CHECK(got.survived[i - 1] == 1.0);
                CHECK(got.survived[i] * got.failed[i] == 0.0);
                if (event == 1 && t > 0) CHECK(got.survived[i] >= previous[i]);
            }
            if (event == 1) previous = got.survived;
        }
    }
}

TEST_CASE("out-of-range times") {
    const auto g = build_grid(100, 4);
    CHECK_THROWS_AS(make_target(g, -1, 1), Error);
    CHECK_THROWS_AS(make_target(g, 100.5, 0), Error);
    bool clamped = false;
    CHECK(clamp_to_grid(g, 150, &clamped) == 100);
    CHECK(clamped);
    CHECK(clamp_to_grid(g, 50, &clamped) == 50);
    CHECK_FALSE(clamped);
}
