#include "survkit/curves.hpp"

#include <algorithm>
#include <ostream>

#include "survkit/error.hpp"
#include "survkit/format.hpp"

namespace survkit {

std::vector<double> cumulative_survival(std::span<const double> conditional) {
    std::vector<double> knots;
    knots.reserve(conditional.size() + 1);
    knots.push_back(1.0);
    double s = 1.0;
    for (double p : conditional) {
        s *= p;
        knots.push_back(s);
    }
    return knots;
}

SurvivalCurve interpolate(const TimeGrid& grid, std::vector<double> knots, std::size_t points_per_interval) {
    const std::size_t n = grid.n_intervals();
    if (knots.size() != n + 1) throw Error("interpolate: expected " + std::to_string(n + 1) + " knots");
    if (points_per_interval < 1) throw Error("interpolate: points_per_interval must be >= 1");
    SurvivalCurve curve;
    curve.knot_times = grid.boundaries();
    curve.knots = std::move(knots);
    curve.dense_times.reserve(n * points_per_interval);
    curve.dense_values.reserve(n * points_per_interval);
    const double p = static_cast<double>(points_per_interval);
    for (std::size_t k = 0; k < n; ++k) {
        const double t0 = curve.knot_times[k], t1 = curve.knot_times[k + 1];
        const double s0 = curve.knots[k], s1 = curve.knots[k + 1];
        for (std::size_t j = 1; j < points_per_interval; ++j) {
            const double frac = static_cast<double>(j) / p;
            curve.dense_times.push_back(t0 + frac * (t1 - t0));
            curve.dense_values.push_back(s0 + frac * (s1 - s0));
        }
        curve.dense_times.push_back(t1);
        curve.dense_values.push_back(s1);
    }
    return curve;
}

double probability_at(const SurvivalCurve& curve, double t) {
    const auto& kt = curve.knot_times;
    t = std::clamp(t, kt.front(), kt.back());
    // First knot strictly greater than t; t lies in [kt[k-1], kt[k]).
    const auto it = std::upper_bound(kt.begin(), kt.end(), t);
    if (it == kt.end()) return curve.knots.back();
    const auto k = static_cast<std::size_t>(it - kt.begin());
    const double t0 = kt[k - 1], t1 = kt[k];
    if (t == t0) return curve.knots[k - 1];
    return curve.knots[k - 1] + (curve.knots[k] - curve.knots[k - 1]) * (t - t0) / (t1 - t0);
}

std::vector<SurvivalCurve> curves_from_predictions(const Eigen::MatrixXd& conditional, const TimeGrid& grid,
                                                   std::size_t points_per_interval) {
    if (static_cast<std::size_t>(conditional.cols()) != grid.n_intervals()) {
        throw Error("curves_from_predictions: prediction width differs from the grid");
    }
    std::vector<SurvivalCurve> out;
    out.reserve(static_cast<std::size_t>(conditional.rows()));
    std::vector<double> row(grid.n_intervals());
    for (Eigen::Index r = 0; r < conditional.rows(); ++r) {
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = conditional(r, static_cast<Eigen::Index>(i));
        out.push_back(interpolate(grid, cumulative_survival(row), points_per_interval));
    }
    return out;
}

void write_curves(std::ostream& out, std::span<const std::string> ids, std::span<const SurvivalCurve> curves) {
    if (ids.size() != curves.size()) throw Error("write_curves: ids and curves differ in length");
    out << "patient_id,t,probability\n";
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto& c = curves[i];
        for (std::size_t k = 0; k < c.dense_times.size(); ++k) {
            out << ids[i] << ',' << format_double(c.dense_times[k]) << ',' << format_double(c.dense_values[k])
                << '\n';
        }
    }
}

}  // namespace survkit
