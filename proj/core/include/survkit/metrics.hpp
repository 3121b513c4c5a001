#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "survkit/curves.hpp"
#include "survkit/timegrid.hpp"

namespace survkit {

/// Right-continuous step function starting at 1.
struct StepFunction {
    std::vector<double> times;   // jump times, sorted and distinct
    std::vector<double> values;  // value from each jump on

    /// Value at t (includes a jump at t).
    double at(double t) const;
    /// Left limit at t (excludes a jump at t).
    double before(double t) const;
};

/// Product-limit estimate prod_{t_j <= t} (1 - d_j / n_j). With
/// `censoring_distribution` the event flags are flipped, giving the
/// censoring survival function G used for IPCW.
StepFunction km_estimator(std::span<const double> times, std::span<const int> events,
                          bool censoring_distribution = false);

/// Predicted survival of patient i at time t.
using SurvivalQuery = std::function<double(std::size_t patient, double t)>;

struct Concordance {
    double c_td = 0.0;
    std::size_t comparable_pairs = 0;
    double concordant = 0.0;  // ties count one half
};

/// Antolini's time-dependent concordance: over pairs with event_i = 1 and
/// time_i < time_j, concordant when S_i(time_i) < S_j(time_i); prediction
/// ties count 0.5. Throws when no pair is comparable.
Concordance c_td(const SurvivalQuery& survival, std::span<const double> times, std::span<const int> events);
Concordance c_td(std::span<const SurvivalCurve> curves, std::span<const double> times, std::span<const int> events);

/// Concordance of a time-constant risk score (higher = earlier death).
Concordance concordance_from_risk(std::span<const double> risk, std::span<const double> times,
                                  std::span<const int> events);

struct AucPoint {
    double t = 0.0;
    double auc = 0.0;
    std::size_t n_cases = 0;
    std::size_t n_controls = 0;
};

struct AucResult {
    std::vector<AucPoint> curve;
    double integrated_auc = 0.0;
    std::vector<std::string> notes;
};

/// Cumulative/dynamic AUC. marker(i, k) is patient i's risk at
/// eval_times[k]. Cases at t: event = 1 and time <= t, weighted by
/// 1 / G(time-); controls: time > t. Eval times without a case or a control
/// are dropped with a note. The integrated value weights each retained time
/// by the drop of the Kaplan-Meier survival since the previous one.
AucResult cumulative_dynamic_auc(const Eigen::MatrixXd& marker, std::span<const double> times,
                                 std::span<const int> events, std::span<const double> eval_times);

/// Marker 1 - S(t) from predicted curves.
AucResult cumulative_dynamic_auc(std::span<const SurvivalCurve> curves, std::span<const double> times,
                                 std::span<const int> events, std::span<const double> eval_times);

/// Interior grid boundaries within [first event time, last observed time).
std::vector<double> default_eval_times(const TimeGrid& grid, std::span<const double> times,
                                       std::span<const int> events);

void write_auc_curve(std::ostream& out, const AucResult& auc);

// ---------------------------------------------------------------------------
// Classification metrics

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool zero_division = false;  // some ratio had a zero denominator and was set to 0
};

struct PrfReport {
    std::vector<ClassMetrics> per_class;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

/// One-vs-rest precision, recall and F1 from a square confusion matrix
/// (rows = true class, columns = predicted), plus unweighted macro means.
PrfReport classification_prf(const std::vector<std::vector<double>>& confusion);

}  // namespace survkit
