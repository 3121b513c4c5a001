#include "survkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "survkit/error.hpp"
#include "survkit/format.hpp"

namespace survkit {

double StepFunction::at(double t) const {
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    return it == times.begin() ? 1.0 : values[static_cast<std::size_t>(it - times.begin()) - 1];
}

double StepFunction::before(double t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    return it == times.begin() ? 1.0 : values[static_cast<std::size_t>(it - times.begin()) - 1];
}

StepFunction km_estimator(std::span<const double> times, std::span<const int> events, bool censoring_distribution) {
    if (times.empty()) throw Error("km_estimator: empty input");
    if (times.size() != events.size()) throw Error("km_estimator: times and events differ in length");
    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });

    StepFunction km;
    double s = 1.0;
    std::size_t at_risk = times.size();
    for (std::size_t i = 0; i < order.size();) {
        const double t = times[order[i]];
        if (t < 0.0) throw Error("km_estimator: negative time");
        std::size_t j = i, d = 0;
        for (; j < order.size() && times[order[j]] == t; ++j) {
            const bool observed = events[order[j]] == 1;
            d += (observed != censoring_distribution) ? 1 : 0;
        }
        if (d > 0) {
            s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
            km.times.push_back(t);
            km.values.push_back(s);
        }
        at_risk -= j - i;
        i = j;
    }
    return km;
}

Concordance c_td(const SurvivalQuery& survival, std::span<const double> times, std::span<const int> events) {
    const std::size_t n = times.size();
    if (events.size() != n) throw Error("c_td: times and events differ in length");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });

    Concordance out;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = order[k];
        if (events[i] != 1) continue;
        const double ti = times[i];
        const double si = survival(i, ti);
        // Everyone after the block of patients tied with t_i outlived them.
        auto later = std::upper_bound(order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), ti,
                                      [&](double t, std::size_t j) { return t < times[j]; });
        for (; later != order.end(); ++later) {
            const double sj = survival(*later, ti);
            ++out.comparable_pairs;
            if (si < sj) {
                out.concordant += 1.0;
            } else if (si == sj) {
                out.concordant += 0.5;
            }
        }
    }
    if (out.comparable_pairs == 0) throw Error("c_td: no comparable pairs (need an event before a later time)");
    out.c_td = out.concordant / static_cast<double>(out.comparable_pairs);
    return out;
}

Concordance c_td(std::span<const SurvivalCurve> curves, std::span<const double> times, std::span<const int> events) {
    if (curves.size() != times.size()) throw Error("c_td: curves and times differ in length");
    return c_td([&](std::size_t i, double t) { return probability_at(curves[i], t); }, times, events);
}

Concordance concordance_from_risk(std::span<const double> risk, std::span<const double> times,
                                  std::span<const int> events) {
    if (risk.size() != times.size()) throw Error("concordance: risk and times differ in length");
    return c_td([&](std::size_t i, double) { return -risk[i]; }, times, events);
}

AucResult cumulative_dynamic_auc(const Eigen::MatrixXd& marker, std::span<const double> times,
                                 std::span<const int> events, std::span<const double> eval_times) {
    const std::size_t n = times.size();
    if (events.size() != n || static_cast<std::size_t>(marker.rows()) != n ||
        static_cast<std::size_t>(marker.cols()) != eval_times.size()) {
        throw Error("cumulative_dynamic_auc: inputs are not aligned");
    }
    const StepFunction censoring = km_estimator(times, events, true);
    const StepFunction survival = km_estimator(times, events, false);
    const double last = *std::max_element(times.begin(), times.end());

    AucResult result;
    double previous_s = 1.0, weighted = 0.0, weight_total = 0.0;
    for (std::size_t k = 0; k < eval_times.size(); ++k) {
        const double t = eval_times[k];
        if (!(t > 0.0 && t < last)) {
            result.notes.push_back("eval time " + format_double(t) + " outside (0, max observed time); dropped");
            continue;
        }
        std::vector<std::size_t> cases, controls;
        for (std::size_t i = 0; i < n; ++i) {
            if (events[i] == 1 && times[i] <= t) cases.push_back(i);
            if (times[i] > t) controls.push_back(i);
        }
        if (cases.empty() || controls.empty()) {
            result.notes.push_back("eval time " + format_double(t) + " has no " +
                                   (cases.empty() ? "cases" : "controls") + "; dropped");
            continue;
        }
        double num = 0.0, den = 0.0;
        for (auto i : cases) {
            const double g = censoring.before(times[i]);
            if (!(g > 0.0)) throw Error("cumulative_dynamic_auc: censoring survival is zero before a case");
            const double w = 1.0 / g;
            double wins = 0.0;
            for (auto j : controls) {
                const double mi = marker(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
                const double mj = marker(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
                wins += mi > mj ? 1.0 : (mi == mj ? 0.5 : 0.0);
            }
            num += w * wins;
            den += w * static_cast<double>(controls.size());
        }
        const AucPoint point{t, num / den, cases.size(), controls.size()};
        result.curve.push_back(point);
        const double s = survival.at(t);
        weighted += point.auc * (previous_s - s);
        weight_total += previous_s - s;
        previous_s = s;
    }
    if (result.curve.empty()) throw Error("cumulative_dynamic_auc: no usable evaluation time");
    if (weight_total > 0.0) {
        result.integrated_auc = weighted / weight_total;
    } else {
        double sum = 0.0;
        for (const auto& p : result.curve) sum += p.auc;
        result.integrated_auc = sum / static_cast<double>(result.curve.size());
    }
    return result;
}

AucResult cumulative_dynamic_auc(std::span<const SurvivalCurve> curves, std::span<const double> times,
                                 std::span<const int> events, std::span<const double> eval_times) {
    Eigen::MatrixXd marker(static_cast<Eigen::Index>(curves.size()), static_cast<Eigen::Index>(eval_times.size()));
    for (std::size_t i = 0; i < curves.size(); ++i) {
        for (std::size_t k = 0; k < eval_times.size(); ++k) {
            marker(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                1.0 - probability_at(curves[i], eval_times[k]);
        }
    }
    return cumulative_dynamic_auc(marker, times, events, eval_times);
}

std::vector<double> default_eval_times(const TimeGrid& grid, std::span<const double> times,
                                       std::span<const int> events) {
    double first_event = std::numeric_limits<double>::infinity();
    double last = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (events[i] == 1) first_event = std::min(first_event, times[i]);
        last = std::max(last, times[i]);
    }
    std::vector<double> out;
    for (std::size_t i = 1; i < grid.n_intervals(); ++i) {
        const double t = grid.boundary(i);
        if (t >= first_event && t < last) out.push_back(t);
    }
    return out;
}

void write_auc_curve(std::ostream& out, const AucResult& auc) {
    out << "t,auc,n_cases,n_controls\n";
    for (const auto& p : auc.curve) {
        out << format_double(p.t) << ',' << format_double(p.auc) << ',' << p.n_cases << ',' << p.n_controls << '\n';
    }
}

PrfReport classification_prf(const std::vector<std::vector<double>>& confusion) {
    const std::size_t k = confusion.size();
    if (k == 0) throw Error("classification_prf: empty confusion matrix");
    for (const auto& row : confusion) {
        if (row.size() != k) throw Error("classification_prf: confusion matrix must be square");
        for (double v : row) {
            if (!(v >= 0.0)) throw Error("classification_prf: counts must be non-negative");
        }
    }
    PrfReport report;
    for (std::size_t c = 0; c < k; ++c) {
        const double tp = confusion[c][c];
        double predicted = 0.0, actual = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            predicted += confusion[r][c];
            actual += confusion[c][r];
        }
        ClassMetrics m;
        if (predicted > 0.0) m.precision = tp / predicted; else m.zero_division = true;
        if (actual > 0.0) m.recall = tp / actual; else m.zero_division = true;
        if (m.precision + m.recall > 0.0) {
            m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        } else {
            m.zero_division = true;
        }
        report.macro_precision += m.precision;
        report.macro_recall += m.recall;
        report.macro_f1 += m.f1;
        report.per_class.push_back(m);
    }
    report.macro_precision /= static_cast<double>(k);
    report.macro_recall /= static_cast<double>(k);
    report.macro_f1 /= static_cast<double>(k);
    return report;
}

}  // namespace survkit
