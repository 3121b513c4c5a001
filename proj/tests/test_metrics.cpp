#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "survkit/error.hpp"
#include "survkit/metrics.hpp"

using namespace survkit;

namespace {

std::vector<SurvivalCurve> random_curves(std::size_t n, const TimeGrid& grid, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.3, 1.0);
    Eigen::MatrixXd cond(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.n_intervals()));
    for (Eigen::Index r = 0; r < cond.rows(); ++r) {
        // Some patients share a curve so prediction ties occur.
        if (r > 0 && rng() % 5 == 0) {
            cond.row(r) = cond.row(r - 1);
            continue;
        }
        for (Eigen::Index c = 0; c < cond.cols(); ++c) cond(r, c) = u(rng);
    }
    return curves_from_predictions(cond, grid, 10);
}

// The 8-patient example. Censored at 3 and 7, so the censoring survival G
// is 1 before 3, 5/6 on [3, 7) and 5/12 from 7.
const std::vector<double> kTimes{1, 2, 3, 4, 5, 6, 7, 8};
const std::vector<int> kEvents{1, 1, 0, 1, 1, 1, 0, 1};
const std::vector<double> kMarker{0.9, 0.3, 0.8, 0.6, 0.7, 0.2, 0.1, 0.6};

}  // namespace

TEST_CASE("kaplan-meier product limit") {
    const auto km = km_estimator(std::vector<double>{1, 2, 3, 4}, std::vector<int>{1, 1, 1, 1});
    CHECK(km.values == std::vector<double>{0.75, 0.5, 0.25, 0.0});
    CHECK(km.at(0.5) == 1.0);
    CHECK(km.at(2) == 0.5);
    CHECK(km.before(2) == 0.75);

    const auto none = km_estimator(std::vector<double>{1, 2, 3}, std::vector<int>{0, 0, 0});
    CHECK(none.at(10) == 1.0);

    // times 2 2 3 5 5 8, events 1 0 1 1 1 0:
    // t=2: 6 at risk, 1 death -> 5/6; t=3: 4 at risk -> 5/6*3/4 = 5/8;
    // t=5: 3 at risk, 2 deaths -> 5/8*1/3 = 5/24; t=8: censored only.
    const auto mixed = km_estimator(std::vector<double>{5, 2, 8, 3, 2, 5}, std::vector<int>{1, 1, 0, 1, 0, 1});
    CHECK(mixed.times == std::vector<double>{2, 3, 5});
    CHECK(mixed.values[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(mixed.values[1] == doctest::Approx(5.0 / 8.0).epsilon(1e-15));
    CHECK(mixed.values[2] == doctest::Approx(5.0 / 24.0).epsilon(1e-15));

    const auto g = km_estimator(kTimes, kEvents, true);
    CHECK(g.at(3) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(g.before(3) == 1.0);
    CHECK(g.at(7) == doctest::Approx(5.0 / 12.0).epsilon(1e-15));
}

TEST_CASE("c_td trivial cases") {
    const auto grid = build_grid(200, 2);
    Eigen::MatrixXd cond(2, 2);
    cond << 0.2, 1.0, 0.9, 1.0;  // S_1(100) = 0.2, S_2(100) = 0.9
    const auto curves = curves_from_predictions(cond, grid);
    const auto r = c_td(curves, std::vector<double>{100, 150}, std::vector<int>{1, 0});
    CHECK(r.c_td == 1.0);
    CHECK(r.comparable_pairs == 1);

    Eigen::MatrixXd same = Eigen::MatrixXd::Constant(5, 2, 0.7);
    const auto flat = curves_from_predictions(same, grid);
    CHECK(c_td(flat, std::vector<double>{10, 20, 30, 40, 50}, std::vector<int>{1, 0, 1, 1, 0}).c_td == 0.5);

    CHECK_THROWS_AS(c_td(flat, std::vector<double>{10, 20, 30, 40, 50}, std::vector<int>{0, 0, 0, 0, 0}), Error);
}

TEST_CASE("c_td agrees with the pair enumerator") {
    std::mt19937_64 rng(99);
    const auto grid = build_grid(100, 5);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = 2 + rng() % 49;
        const auto curves = random_curves(n, grid, rng);
        std::vector<double> times(n);
        std::vector<int> events(n);
        for (std::size_t i = 0; i < n; ++i) {
            times[i] = static_cast<double>(rng() % 101);  // integer times give ties
            events[i] = rng() % 3 == 0 ? 0 : 1;
        }
        const auto pairs = oracle::ctd_pairs(curves, times, events);
        if (pairs.comparable == 0) {
            CHECK_THROWS_AS(c_td(curves, times, events), Error);
            continue;
        }
        const auto got = c_td(curves, times, events);
        CHECK(got.comparable_pairs == pairs.comparable);
        CHECK(got.concordant == pairs.concordant);
        CHECK(got.c_td == pairs.concordant / static_cast<double>(pairs.comparable));
        ++checked;
    }
    CHECK(checked > 900);
}

TEST_CASE("c_td is invariant under a common increasing transform") {
    std::mt19937_64 rng(5);
    const auto grid = build_grid(100, 5);
    const auto curves = random_curves(30, grid, rng);
    std::vector<double> times(30);
    std::vector<int> events(30);
    for (int i = 0; i < 30; ++i) {
        times[i] = static_cast<double>(rng() % 100);
        events[i] = static_cast<int>(rng() % 2);
    }
    events[0] = 1;
    times[0] = 1;
    const double base = c_td(curves, times, events).c_td;
    const SurvivalQuery squashed = [&](std::size_t i, double t) {
        return std::pow(probability_at(curves[i], t), 3.0);
    };
    CHECK(c_td(squashed, times, events).c_td == base);
}

TEST_CASE("risk-score concordance") {
    const std::vector<double> times{1, 2, 3, 4};
    const std::vector<int> events{1, 1, 1, 0};
    CHECK(concordance_from_risk(std::vector<double>{4, 3, 2, 1}, times, events).c_td == 1.0);
    CHECK(concordance_from_risk(std::vector<double>{1, 2, 3, 4}, times, events).c_td == 0.0);
}

TEST_CASE("cumulative dynamic auc hand case") {
    // t = 4.5: cases 1, 2, 4 (weights 1, 1, 6/5), controls 5..8.
    //   wins: case 1 beats all 4; case 2 beats 0.2, 0.1; case 4 beats 0.2,
    //   0.1 and ties 0.6. AUC = (4 + 2 + 1.2 * 2.5) / (3.2 * 4) = 9 / 12.8.
    // t = 6.5: cases 1, 2, 4, 5, 6 (weights 1, 1, 1.2, 1.2, 1.2), controls 7, 8.
    //   wins 2, 1, 1.5, 2, 1. AUC = (3 + 1.2 * 4.5) / (5.6 * 2) = 8.4 / 11.2.
    // KM survival: 0.6 at 4.5 and 0.3 at 6.5, so weights 0.4 and 0.3.
    Eigen::MatrixXd marker(8, 2);
    for (int i = 0; i < 8; ++i) marker(i, 0) = marker(i, 1) = kMarker[static_cast<std::size_t>(i)];
    const std::vector<double> at{4.5, 6.5};
    const auto r = cumulative_dynamic_auc(marker, kTimes, kEvents, at);
    REQUIRE(r.curve.size() == 2);
    CHECK(std::abs(r.curve[0].auc - 9.0 / 12.8) < 1e-10);
    CHECK(std::abs(r.curve[1].auc - 8.4 / 11.2) < 1e-10);
    CHECK(r.curve[0].n_cases == 3);
    CHECK(r.curve[0].n_controls == 4);
    CHECK(std::abs(r.integrated_auc - (0.4 * 9.0 / 12.8 + 0.3 * 0.75) / 0.7) < 1e-10);
}

TEST_CASE("auc extremes, reversal and dropped times") {
    const std::vector<double> at{2.5, 4.5, 6.5};
    Eigen::MatrixXd perfect(8, 3);
    Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(8, 3, 0.4);
    for (int i = 0; i < 8; ++i)
        for (int k = 0; k < 3; ++k) perfect(i, k) = kTimes[static_cast<std::size_t>(i)] <= at[k] ? 1.0 : 0.0;
    const auto p = cumulative_dynamic_auc(perfect, kTimes, kEvents, at);
    for (const auto& pt : p.curve) CHECK(pt.auc == 1.0);
    CHECK(p.integrated_auc == 1.0);
    const auto c = cumulative_dynamic_auc(flat, kTimes, kEvents, at);
    for (const auto& pt : c.curve) CHECK(pt.auc == 0.5);
    CHECK(c.integrated_auc == 0.5);

    std::mt19937_64 rng(4);
    Eigen::MatrixXd random = Eigen::MatrixXd::Random(8, 3);
    const auto a = cumulative_dynamic_auc(random, kTimes, kEvents, at);
    const auto b = cumulative_dynamic_auc(Eigen::MatrixXd(-random), kTimes, kEvents, at);
    for (std::size_t k = 0; k < a.curve.size(); ++k) CHECK(std::abs(a.curve[k].auc + b.curve[k].auc - 1.0) < 1e-12);

    Eigen::MatrixXd two(8, 2);
    two.setRandom();
    const auto dropped = cumulative_dynamic_auc(two, kTimes, kEvents, std::vector<double>{0.5, 4.5});
    CHECK(dropped.curve.size() == 1);
    CHECK(dropped.notes.size() == 1);
}

TEST_CASE("default evaluation times") {
    const auto grid = build_grid(10, 10);
    const auto t = default_eval_times(grid, kTimes, kEvents);
    CHECK(t == std::vector<double>{1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("precision, recall and f1") {
    const std::vector<std::vector<double>> diag{{5, 0, 0, 0}, {0, 3, 0, 0}, {0, 0, 7, 0}, {0, 0, 0, 1}};
    const auto d = classification_prf(diag);
    CHECK(d.macro_precision == 1.0);
    CHECK(d.macro_recall == 1.0);
    CHECK(d.macro_f1 == 1.0);

    const std::vector<std::vector<double>> miss{{4, 1, 0, 0}, {2, 0, 0, 0}, {0, 0, 3, 0}, {0, 0, 0, 2}};
    const auto m = classification_prf(miss);
    CHECK(m.per_class[1].precision == 0.0);
    CHECK(m.per_class[1].f1 == 0.0);
    CHECK(m.per_class[1].zero_division);

    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::vector<double>> c(4, std::vector<double>(4));
        for (auto& row : c)
            for (auto& v : row) v = static_cast<double>(rng() % 10);
        const auto r = classification_prf(c);
        double mp = 0, mr = 0, mf = 0;
        for (int k = 0; k < 4; ++k) {
            double col = 0, row = 0;
            for (int j = 0; j < 4; ++j) {
                col += c[j][k];
                row += c[k][j];
            }
            const double p = col > 0 ? c[k][k] / col : 0.0;
            const double q = row > 0 ? c[k][k] / row : 0.0;
            const double f = p + q > 0 ? 2 * p * q / (p + q) : 0.0;
            CHECK(r.per_class[k].precision == doctest::Approx(p).epsilon(1e-14));
            CHECK(r.per_class[k].recall == doctest::Approx(q).epsilon(1e-14));
            CHECK(r.per_class[k].f1 == doctest::Approx(f).epsilon(1e-14));
            mp += p;
            mr += q;
            mf += f;
        }
        CHECK(r.macro_precision == doctest::Approx(mp / 4).epsilon(1e-14));
        CHECK(r.macro_recall == doctest::Approx(mr / 4).epsilon(1e-14));
        CHECK(r.macro_f1 == doctest::Approx(mf / 4).epsilon(1e-14));
    }
    CHECK_THROWS_AS(classification_prf({{1, 2}, {3}}), Error);
}
