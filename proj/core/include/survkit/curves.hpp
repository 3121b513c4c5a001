#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "survkit/timegrid.hpp"

namespace survkit {

/// Piecewise-linear survival curve through the grid knots, plus its dense
/// sampling for export.
struct SurvivalCurve {
    std::vector<double> knot_times;  // t_0 = 0, t_1, ..., t_n = M
    std::vector<double> knots;       // S(t_0) = 1, then cumulative products
    std::vector<double> dense_times;
    std::vector<double> dense_values;

    double max_time() const { return knot_times.back(); }
};

/// S_0 = 1, S_k = prod_{i <= k} conditional_i.
std::vector<double> cumulative_survival(std::span<const double> conditional);

/// Each interval contributes `points_per_interval` samples at
/// t_k + j * width / points_per_interval, j = 1..points_per_interval; t = 0
/// itself is not sampled.
SurvivalCurve interpolate(const TimeGrid& grid, std::vector<double> knots, std::size_t points_per_interval = 100);

/// Linear interpolation between knots; t is clamped into [0, M].
double probability_at(const SurvivalCurve& curve, double t);

/// One curve per row of a conditional-probability prediction matrix.
std::vector<SurvivalCurve> curves_from_predictions(const Eigen::MatrixXd& conditional, const TimeGrid& grid,
                                                   std::size_t points_per_interval = 100);

/// Long format: patient_id,t,probability.
void write_curves(std::ostream& out, std::span<const std::string> ids, std::span<const SurvivalCurve> curves);

// ---------------------------------------------------------------------------
// Violin summaries

constexpr std::size_t kDensityPoints = 256;

struct ViolinSummary {
    std::string group;
    std::vector<std::string> ids;
    std::vector<double> raw;
    double q1 = 0.0, median = 0.0, q3 = 0.0;
    double bandwidth = 0.0;
    std::vector<double> grid;     // kDensityPoints points over [0, 1]
    std::vector<double> density;  // integrates to 1 on `grid` (trapezoid rule)
};

/// Linear-interpolation quantile of sorted data (h = (n - 1) p).
double quantile_sorted(std::span<const double> sorted, double p);

/// Silverman's rule of thumb, floored so the kernel spans a few grid steps.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian KDE on [0, 1], truncated and renormalized.
ViolinSummary summarize_group(std::string group, std::vector<std::string> ids, std::vector<double> values);

struct ViolinData {
    std::vector<ViolinSummary> groups;
    std::vector<std::string> notes;
};

enum class CensoredAt { censoring_time, max_time };

/// Groups patients into {Censored,Dead}_<label>; each raw value is the
/// patient's curve at their death or censoring time (or at M for censored
/// patients with CensoredAt::max_time). Empty groups are dropped with a note.
ViolinData violin_data(std::span<const SurvivalCurve> curves, std::span<const std::string> ids,
                       std::span<const double> times, std::span<const int> events,
                       std::span<const std::string> split_labels,
                       CensoredAt censored_at = CensoredAt::censoring_time);

/// group,patient_id,probability
void write_violin_csv(std::ostream& out, const ViolinData& data);

/// Self-contained static SVG, one mirrored density per group on a shared
/// [0, 1] axis with median and quartile marks.
std::string render_violin_svg(const std::vector<ViolinSummary>& groups);

}  // namespace survkit
