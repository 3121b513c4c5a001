#pragma once

#include <cstddef>
#include <vector>

namespace survkit {

/// Equidistant partition of [0, M] into n intervals. Interval i (1-based)
/// spans [t_{i-1}, t_i).
class TimeGrid {
public:
    TimeGrid(double max_time, std::size_t n_intervals);

    std::size_t n_intervals() const noexcept { return n_; }
    double max_time() const noexcept { return max_time_; }
    /// t_0 = 0, ..., t_n = M; t_i = i * M / n.
    const std::vector<double>& boundaries() const noexcept { return boundaries_; }
    double boundary(std::size_t i) const { return boundaries_.at(i); }
    double width() const noexcept { return max_time_ / static_cast<double>(n_); }

private:
    double max_time_;
    std::size_t n_;
    std::vector<double> boundaries_;
};

TimeGrid build_grid(double max_time, std::size_t n_intervals);

/// Ground-truth indicator vectors for the logistic-hazard loss.
struct SurvivalTarget {
    std::vector<double> survived;  // surv_s: 1 for intervals the patient lived through
    std::vector<double> failed;    // surv_f: 1 at the death interval, all zero if censored
};

/// Uncensored: survived(i) = [t >= t_i], failed(i) = [t_{i-1} <= t < t_i];
/// a death at exactly M falls in the last interval.
/// Censored: survived(i) = [t >= (t_{i-1} + t_i) / 2], failed all zero.
/// Throws for t outside [0, M].
SurvivalTarget make_target(const TimeGrid& grid, double time, int event);

/// Clamps an inference-time value into [0, M]; sets `clamped` when it moved.
double clamp_to_grid(const TimeGrid& grid, double time, bool* clamped = nullptr);

}  // namespace survkit
