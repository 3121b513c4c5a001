#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "survkit/random.hpp"
#include "survkit/timegrid.hpp"

namespace survkit {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// Three fully connected layers: input -> hidden1 -> hidden2 -> n_intervals.
/// Hidden layers run affine -> batch norm -> ReLU -> dropout; the output
/// layer is affine -> sigmoid, one conditional survival probability per
/// interval.
struct NetworkShape {
    std::size_t input_dim = 1;
    std::size_t hidden1 = 500;
    std::size_t hidden2 = 100;
    std::size_t n_intervals = 15;
    double dropout = 0.3;
    bool batch_norm = true;
};

enum class Mode { train, eval };

/// Slots of the parameter set. Biases and batch-norm vectors are 1 x k.
enum ParamSlot : std::size_t {
    kW1, kB1, kGamma1, kBeta1,
    kW2, kB2, kGamma2, kBeta2,
    kW3, kB3,
    kParamCount
};

using ParamSet = std::array<Matrix, kParamCount>;

const char* param_name(std::size_t slot);

struct RunningStats {
    RowVector mean;
    RowVector var;
};

struct SurvivalNetwork {
    static constexpr double kBatchNormEps = 1e-5;
    static constexpr double kBatchNormMomentum = 0.1;

    NetworkShape shape;
    ParamSet params;
    std::array<RunningStats, 2> running;
};

/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases 0, batch-norm
/// scale 1 and shift 0, running mean 0 and variance 1.
SurvivalNetwork init_network(const NetworkShape& shape, std::uint64_t seed);

/// Everything backward() needs from a train-mode forward pass.
struct ForwardCache {
    struct Hidden {
        Matrix z;       // affine output
        Matrix xhat;    // normalized z (batch norm only)
        Matrix y;       // batch-norm output, pre-ReLU
        Matrix mask;    // dropout mask, already scaled by 1 / (1 - rate)
        Matrix h;       // layer output
        RowVector mean;
        RowVector var;
        RowVector inv_std;
    };
    Mode mode = Mode::eval;
    Matrix input;
    std::array<Hidden, 2> hidden;
    Matrix logits;
    Matrix pred;
};

/// Train mode needs `rng` for dropout and a batch of at least 2 rows when
/// batch norm is on. Running statistics are not touched here; see
/// update_running_stats.
ForwardCache forward(const SurvivalNetwork& net, const Matrix& batch, Mode mode, Rng* rng = nullptr);

/// Eval-mode forward pass: batch x n_intervals conditional survival probabilities.
Matrix predict(const SurvivalNetwork& net, const Matrix& batch);

/// Exponential moving average of the batch moments held in a train-mode cache.
void update_running_stats(SurvivalNetwork& net, const ForwardCache& cache);

// ---------------------------------------------------------------------------
// Loss

constexpr double kPredClamp = 1e-7;

struct TargetBatch {
    Matrix survived;  // surv_s, patients x intervals
    Matrix failed;    // surv_f
};

TargetBatch stack_targets(const std::vector<SurvivalTarget>& targets);
TargetBatch take_rows(const TargetBatch& targets, std::span<const std::size_t> rows);

/// L = -sum_x sum_i [ln(1 + s (p - 1)) + ln(1 - f p)]. Predictions outside
/// [1e-7, 1 - 1e-7] count as saturated (exactly 0 or 1) and log arguments are
/// floored at 1e-7. Returns the batch sum.
double loss(const Matrix& pred, const TargetBatch& targets);

/// dL/dp, zero wherever the prediction was clamped.
Matrix loss_gradient(const Matrix& pred, const TargetBatch& targets);

/// Analytic gradients of loss(pred, targets) for a train-mode cache.
ParamSet backward(const SurvivalNetwork& net, const ForwardCache& cache, const TargetBatch& targets);

// ---------------------------------------------------------------------------
// Optimization

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    long step = 0;
};

/// Bias-corrected Adam update. Moments are created on the first call.
void adam_step(std::span<Matrix> params, std::span<const Matrix> grads, AdamState& state, double lr,
               const AdamConfig& config = {});

struct TrainConfig {
    std::size_t max_epochs = 500;
    std::size_t patience = 10;
    double learning_rate = 0.01;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    AdamConfig adam;
};

struct TrainData {
    Matrix X;
    TargetBatch targets;

    std::size_t size() const noexcept { return static_cast<std::size_t>(X.rows()); }
};

/// Targets for every row; times beyond the grid are clamped to M and counted
/// in `n_clamped`.
TrainData make_train_data(Matrix X, std::span<const double> times, std::span<const int> events,
                          const TimeGrid& grid, std::size_t* n_clamped = nullptr);

struct TrainHistory {
    std::vector<double> train_loss;  // per-patient mean over the epoch
    std::vector<double> val_loss;    // per-patient mean, eval mode
    double initial_val_loss = 0.0;
    std::size_t best_epoch = 0;      // 1-based; 0 = never improved on the initial network
    std::size_t stopped_epoch = 0;
};

struct TrainResult {
    SurvivalNetwork network;  // parameters from the best epoch
    TrainHistory history;
};

/// Mini-batch indices for one epoch: a seeded shuffle cut into batch_size
/// chunks. With batch norm a trailing single row joins the previous chunk.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, bool batch_norm,
                                                   Rng& rng);

/// Mean per-patient loss in eval mode.
double evaluate_loss(const SurvivalNetwork& net, const TrainData& data);

/// Adam on the summed loss; early stopping on validation loss.
TrainResult train(SurvivalNetwork net, const TrainData& train_data, const TrainData& val_data,
                  const TrainConfig& config);

void write_history(std::ostream& out, const TrainHistory& history);

// ---------------------------------------------------------------------------
// Learning-rate range test

struct LrRangeResult {
    std::vector<double> lrs;
    std::vector<double> losses;
    double suggested_lr = 0.0;
    bool diverged = false;
};

/// Geometric sweep; `step(lr)` performs one update and returns the loss
/// measured before it. Stops once a loss exceeds 4x the first one. The
/// suggestion is the lr where the 5-point moving average falls fastest.
LrRangeResult lr_sweep(const std::function<double(double)>& step, double lr_min, double lr_max,
                       std::size_t n_steps);

/// Sweep over a copy of `net` with Adam and seeded mini-batches.
LrRangeResult lr_range_test(const SurvivalNetwork& net, const TrainData& data, double lr_min, double lr_max,
                            std::size_t n_steps, std::size_t batch_size, std::uint64_t seed);

void write_lr_range(std::ostream& out, const LrRangeResult& result);

// ---------------------------------------------------------------------------
// Checkpoints

/// Versioned plain-text checkpoint with shapes, parameters, running stats and
/// the digest of the preprocessing state the inputs were normalized with.
void write_checkpoint(std::ostream& out, const SurvivalNetwork& net, std::uint64_t preprocess_hash,
                      double max_time);

struct Checkpoint {
    SurvivalNetwork network;
    std::uint64_t preprocess_hash = 0;
    double max_time = 0.0;
};

Checkpoint read_checkpoint(std::istream& in);

}  // namespace survkit
