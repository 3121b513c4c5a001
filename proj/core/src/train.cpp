#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "survkit/error.hpp"
#include "survkit/format.hpp"
#include "survkit/survnet.hpp"

namespace survkit {

namespace {

Matrix take_rows(const Matrix& X, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(rows[k]));
    }
    return out;
}

/// One Adam update on a mini-batch; returns the summed loss before the update.
double train_step(SurvivalNetwork& net, AdamState& adam, const TrainData& data,
                  std::span<const std::size_t> rows, double lr, const AdamConfig& config, Rng& rng) {
    const Matrix X = take_rows(data.X, rows);
    const TargetBatch targets = take_rows(data.targets, rows);
    const ForwardCache cache = forward(net, X, Mode::train, &rng);
    const double batch_loss = loss(cache.pred, targets);
    const ParamSet grads = backward(net, cache, targets);
    adam_step(net.params, grads, adam, lr, config);
    update_running_stats(net, cache);
    return batch_loss;
}

}  // namespace

TrainData make_train_data(Matrix X, std::span<const double> times, std::span<const int> events,
                          const TimeGrid& grid, std::size_t* n_clamped) {
    if (static_cast<std::size_t>(X.rows()) != times.size() || times.size() != events.size()) {
        throw Error("make_train_data: row counts differ");
    }
    std::vector<SurvivalTarget> targets;
    targets.reserve(times.size());
    std::size_t clamped_count = 0;
    for (std::size_t r = 0; r < times.size(); ++r) {
        bool clamped = false;
        const double t = clamp_to_grid(grid, times[r], &clamped);
        clamped_count += clamped ? 1 : 0;
        targets.push_back(make_target(grid, t, events[r]));
    }
    if (n_clamped) *n_clamped = clamped_count;
    TrainData data;
    data.X = std::move(X);
    data.targets = stack_targets(targets);
    if (targets.empty()) {
        data.targets.survived.resize(0, static_cast<Eigen::Index>(grid.n_intervals()));
        data.targets.failed.resize(0, static_cast<Eigen::Index>(grid.n_intervals()));
    }
    return data;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, bool batch_norm,
                                                   Rng& rng) {
    if (batch_size == 0) throw Error("make_batches: batch size must be positive");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t stop = std::min(n, start + batch_size);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(stop));
    }
    if (batch_norm && batches.size() > 1 && batches.back().size() == 1) {
        batches[batches.size() - 2].push_back(batches.back().front());
        batches.pop_back();
    }
    return batches;
}

double evaluate_loss(const SurvivalNetwork& net, const TrainData& data) {
    if (data.size() == 0) throw Error("evaluate_loss: empty data");
    return loss(predict(net, data.X), data.targets) / static_cast<double>(data.size());
}

TrainResult train(SurvivalNetwork net, const TrainData& train_data, const TrainData& val_data,
                  const TrainConfig& config) {
    if (train_data.size() == 0 || val_data.size() == 0) throw Error("train: empty training or validation set");
    if (net.shape.batch_norm && train_data.size() < 2) throw Error("train: batch norm needs >= 2 training rows");
    if (config.max_epochs == 0) throw Error("train: max_epochs must be positive");
    if (!(config.learning_rate > 0.0)) throw Error("train: learning rate must be positive");

    Rng rng = make_rng(config.seed, 0x747261696eULL);
    AdamState adam;
    TrainResult result;
    auto& history = result.history;
    history.initial_val_loss = evaluate_loss(net, val_data);
    double best = history.initial_val_loss;
    result.network = net;

    std::size_t stale = 0;
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (const auto& rows : make_batches(train_data.size(), config.batch_size, net.shape.batch_norm, rng)) {
            epoch_loss += train_step(net, adam, train_data, rows, config.learning_rate, config.adam, rng);
        }
        history.train_loss.push_back(epoch_loss / static_cast<double>(train_data.size()));
        const double val = evaluate_loss(net, val_data);
        history.val_loss.push_back(val);
        history.stopped_epoch = epoch;
        if (val < best) {
            best = val;
            history.best_epoch = epoch;
            result.network = net;
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }
    return result;
}

void write_history(std::ostream& out, const TrainHistory& history) {
    out << "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < history.train_loss.size(); ++e) {
        out << e + 1 << ',' << format_double(history.train_loss[e]) << ',' << format_double(history.val_loss[e])
            << '\n';
    }
}

// ---------------------------------------------------------------------------

LrRangeResult lr_sweep(const std::function<double(double)>& step, double lr_min, double lr_max,
                       std::size_t n_steps) {
    if (!(lr_min > 0.0) || !(lr_max > 0.0)) throw Error("lr_range_test: learning rates must be positive");
    if (!(lr_min < lr_max)) throw Error("lr_range_test: lr_min must be smaller than lr_max");
    if (n_steps < 2) throw Error("lr_range_test: need at least 2 steps");

    LrRangeResult result;
    const double log_span = std::log(lr_max / lr_min);
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double lr = lr_min * std::exp(log_span * static_cast<double>(k) / static_cast<double>(n_steps - 1));
        const double value = step(lr);
        result.lrs.push_back(lr);
        result.losses.push_back(value);
        if (!std::isfinite(value) || value > 4.0 * result.losses.front()) {
            result.diverged = true;
            break;
        }
    }

    const std::size_t m = result.losses.size();
    std::vector<double> smooth(m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t lo = k >= 2 ? k - 2 : 0;
        const std::size_t hi = std::min(m - 1, k + 2);
        double sum = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) sum += std::isfinite(result.losses[j]) ? result.losses[j] : 0.0;
        smooth[k] = sum / static_cast<double>(hi - lo + 1);
    }
    result.suggested_lr = result.lrs.front();
    double steepest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const double slope = smooth[k + 1] - smooth[k];
        if (slope < steepest) {
            steepest = slope;
            result.suggested_lr = result.lrs[k];
        }
    }
    return result;
}

LrRangeResult lr_range_test(const SurvivalNetwork& net, const TrainData& data, double lr_min, double lr_max,
                            std::size_t n_steps, std::size_t batch_size, std::uint64_t seed) {
    if (data.size() == 0) throw Error("lr_range_test: empty data");
    SurvivalNetwork work = net;
    AdamState adam;
    Rng rng = make_rng(seed, 0x6c7266696e64ULL);
    std::vector<std::vector<std::size_t>> batches;
    std::size_t next = 0;
    auto step = [&](double lr) {
        if (next == batches.size()) {
            batches = make_batches(data.size(), batch_size, work.shape.batch_norm, rng);
            next = 0;
        }
        const auto& rows = batches[next++];
        const double sum = train_step(work, adam, data, rows, lr, AdamConfig{}, rng);
        return sum / static_cast<double>(rows.size());
    };
    return lr_sweep(step, lr_min, lr_max, n_steps);
}

void write_lr_range(std::ostream& out, const LrRangeResult& result) {
    out << "lr,loss\n";
    for (std::size_t k = 0; k < result.lrs.size(); ++k) {
        out << format_double(result.lrs[k]) << ',' << format_double(result.losses[k]) << '\n';
    }
}

}  // namespace survkit
