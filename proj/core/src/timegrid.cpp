#include "survkit/timegrid.hpp"

#include <cmath>

#include "survkit/error.hpp"

namespace survkit {

TimeGrid::TimeGrid(double max_time, std::size_t n_intervals) : max_time_(max_time), n_(n_intervals) {
    if (!(max_time > 0.0) || !std::isfinite(max_time)) throw Error("time grid: max_time must be positive");
    if (n_intervals < 2) throw Error("time grid: need at least 2 intervals");
    boundaries_.resize(n_ + 1);
    for (std::size_t i = 0; i <= n_; ++i) {
        boundaries_[i] = static_cast<double>(i) * max_time_ / static_cast<double>(n_);
    }
}

TimeGrid build_grid(double max_time, std::size_t n_intervals) { return TimeGrid(max_time, n_intervals); }

SurvivalTarget make_target(const TimeGrid& grid, double time, int event) {
    if (!(time >= 0.0) || time > grid.max_time()) {
        throw Error("make_target: time " + std::to_string(time) + " outside [0, " +
                    std::to_string(grid.max_time()) + "]");
    }
    if (event != 0 && event != 1) throw Error("make_target: event must be 0 or 1");
    const std::size_t n = grid.n_intervals();
    const auto& t = grid.boundaries();
    SurvivalTarget target{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    if (event == 1) {
        for (std::size_t i = 1; i <= n; ++i) {
            if (t[i - 1] <= time && time < t[i]) {
                target.failed[i - 1] = 1.0;
            } else if (time >= t[i]) {
                target.survived[i - 1] = 1.0;
            }
        }
        if (time == grid.max_time()) {
            target.survived[n - 1] = 0.0;
            target.failed[n - 1] = 1.0;
        }
    } else {
        for (std::size_t i = 1; i <= n; ++i) {
            if (time >= 0.5 * (t[i - 1] + t[i])) target.survived[i - 1] = 1.0;
        }
    }
    return target;
}

double clamp_to_grid(const TimeGrid& grid, double time, bool* clamped) {
    const double out = std::min(std::max(time, 0.0), grid.max_time());
    if (clamped) *clamped = out != time;
    return out;
}

}  // namespace survkit
