#include "survkit/survnet.hpp"

#include <algorithm>
#include <cmath>

#include "survkit/error.hpp"

namespace survkit {

namespace {

constexpr std::array<ParamSlot, 2> kWeights{kW1, kW2};
constexpr std::array<ParamSlot, 2> kBiases{kB1, kB2};
constexpr std::array<ParamSlot, 2> kGammas{kGamma1, kGamma2};
constexpr std::array<ParamSlot, 2> kBetas{kBeta1, kBeta2};

Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
    // Fill row-major so the draw order does not depend on Eigen's storage order.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
    return w;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

const char* param_name(std::size_t slot) {
    static constexpr std::array<const char*, kParamCount> names{
        "W1", "b1", "gamma1", "beta1", "W2", "b2", "gamma2", "beta2", "W3", "b3"};
    return names.at(slot);
}

SurvivalNetwork init_network(const NetworkShape& shape, std::uint64_t seed) {
    if (shape.input_dim < 1) throw Error("init_network: input_dim must be >= 1");
    if (shape.hidden1 < 1 || shape.hidden2 < 1) throw Error("init_network: hidden widths must be >= 1");
    if (shape.n_intervals < 1) throw Error("init_network: n_intervals must be >= 1");
    if (!(shape.dropout >= 0.0 && shape.dropout < 1.0)) throw Error("init_network: dropout must lie in [0, 1)");

    SurvivalNetwork net;
    net.shape = shape;
    const std::array<std::size_t, 4> widths{shape.input_dim, shape.hidden1, shape.hidden2, shape.n_intervals};
    const std::array<ParamSlot, 3> weights{kW1, kW2, kW3};
    const std::array<ParamSlot, 3> biases{kB1, kB2, kB3};
    for (std::size_t l = 0; l < 3; ++l) {
        auto rng = make_rng(seed, l);
        net.params[weights[l]] = glorot_uniform(widths[l], widths[l + 1], rng);
        net.params[biases[l]] = Matrix::Zero(1, static_cast<Eigen::Index>(widths[l + 1]));
    }
    for (std::size_t l = 0; l < 2; ++l) {
        const auto width = static_cast<Eigen::Index>(widths[l + 1]);
        net.params[kGammas[l]] = Matrix::Ones(1, width);
        net.params[kBetas[l]] = Matrix::Zero(1, width);
        net.running[l].mean = RowVector::Zero(width);
        net.running[l].var = RowVector::Ones(width);
    }
    return net;
}

ForwardCache forward(const SurvivalNetwork& net, const Matrix& batch, Mode mode, Rng* rng) {
    const auto& shape = net.shape;
    if (static_cast<std::size_t>(batch.cols()) != shape.input_dim) {
        throw Error("forward: batch has " + std::to_string(batch.cols()) + " columns, network expects " +
                    std::to_string(shape.input_dim));
    }
    if (mode == Mode::train) {
        if (shape.batch_norm && batch.rows() < 2) throw Error("forward: train-mode batch norm needs >= 2 rows");
        if (shape.dropout > 0.0 && rng == nullptr) throw Error("forward: train-mode dropout needs a generator");
    }

    ForwardCache cache;
    cache.mode = mode;
    cache.input = batch;
    const double keep = 1.0 - shape.dropout;
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const Matrix* prev = &cache.input;
    for (std::size_t l = 0; l < 2; ++l) {
        auto& layer = cache.hidden[l];
        layer.z = (*prev) * net.params[kWeights[l]];
        layer.z.rowwise() += net.params[kBiases[l]].row(0);
        if (shape.batch_norm) {
            if (mode == Mode::train) {
                const double n = static_cast<double>(layer.z.rows());
                layer.mean = layer.z.colwise().mean();
                layer.var = (layer.z.rowwise() - layer.mean).array().square().colwise().sum() / n;
            } else {
                layer.mean = net.running[l].mean;
                layer.var = net.running[l].var;
            }
            layer.inv_std = (layer.var.array() + SurvivalNetwork::kBatchNormEps).rsqrt();
            layer.xhat = (layer.z.rowwise() - layer.mean).array().rowwise() * layer.inv_std.array();
            layer.y = layer.xhat.array().rowwise() * net.params[kGammas[l]].row(0).array();
            layer.y.rowwise() += net.params[kBetas[l]].row(0);
        } else {
            layer.y = layer.z;
        }
        layer.h = layer.y.cwiseMax(0.0);
        if (mode == Mode::train && shape.dropout > 0.0) {
            layer.mask.resize(layer.h.rows(), layer.h.cols());
            for (Eigen::Index r = 0; r < layer.mask.rows(); ++r) {
                for (Eigen::Index c = 0; c < layer.mask.cols(); ++c) {
                    layer.mask(r, c) = unit(*rng) < shape.dropout ? 0.0 : 1.0 / keep;
                }
            }
            layer.h.array() *= layer.mask.array();
        }
        prev = &layer.h;
    }
    cache.logits = (*prev) * net.params[kW3];
    cache.logits.rowwise() += net.params[kB3].row(0);
    cache.pred = cache.logits.unaryExpr([](double x) { return sigmoid(x); });
    return cache;
}

Matrix predict(const SurvivalNetwork& net, const Matrix& batch) {
    return forward(net, batch, Mode::eval).pred;
}

void update_running_stats(SurvivalNetwork& net, const ForwardCache& cache) {
    if (!net.shape.batch_norm || cache.mode != Mode::train) return;
    constexpr double m = SurvivalNetwork::kBatchNormMomentum;
    for (std::size_t l = 0; l < 2; ++l) {
        net.running[l].mean = (1.0 - m) * net.running[l].mean + m * cache.hidden[l].mean;
        net.running[l].var = (1.0 - m) * net.running[l].var + m * cache.hidden[l].var;
    }
}

// ---------------------------------------------------------------------------

TargetBatch stack_targets(const std::vector<SurvivalTarget>& targets) {
    TargetBatch out;
    if (targets.empty()) return out;
    const auto n = static_cast<Eigen::Index>(targets.front().survived.size());
    out.survived.resize(static_cast<Eigen::Index>(targets.size()), n);
    out.failed.resize(static_cast<Eigen::Index>(targets.size()), n);
    for (std::size_t r = 0; r < targets.size(); ++r) {
        for (Eigen::Index i = 0; i < n; ++i) {
            out.survived(static_cast<Eigen::Index>(r), i) = targets[r].survived[static_cast<std::size_t>(i)];
            out.failed(static_cast<Eigen::Index>(r), i) = targets[r].failed[static_cast<std::size_t>(i)];
        }
    }
    return out;
}

TargetBatch take_rows(const TargetBatch& targets, std::span<const std::size_t> rows) {
    TargetBatch out;
    out.survived.resize(static_cast<Eigen::Index>(rows.size()), targets.survived.cols());
    out.failed.resize(static_cast<Eigen::Index>(rows.size()), targets.failed.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.survived.row(static_cast<Eigen::Index>(k)) = targets.survived.row(static_cast<Eigen::Index>(rows[k]));
        out.failed.row(static_cast<Eigen::Index>(k)) = targets.failed.row(static_cast<Eigen::Index>(rows[k]));
    }
    return out;
}

namespace {

void check_shapes(const Matrix& pred, const TargetBatch& targets) {
    if (pred.rows() != targets.survived.rows() || pred.cols() != targets.survived.cols() ||
        pred.rows() != targets.failed.rows() || pred.cols() != targets.failed.cols()) {
        throw Error("loss: prediction and target shapes differ");
    }
}

}  // namespace

double loss(const Matrix& pred, const TargetBatch& targets) {
    check_shapes(pred, targets);
    // Saturated predictions snap to 0 or 1, so the loss is flat outside the
    // clamp band and exactly zero at the target; log arguments are floored.
    const auto q = (pred.array() < kPredClamp)
                       .select(0.0, (pred.array() > 1.0 - kPredClamp).select(1.0, pred.array()));
    const auto& s = targets.survived.array();
    const auto& f = targets.failed.array();
    return 0.0 - ((1.0 + s * (q - 1.0)).cwiseMax(kPredClamp).log() + (1.0 - f * q).cwiseMax(kPredClamp).log()).sum();
}

Matrix loss_gradient(const Matrix& pred, const TargetBatch& targets) {
    check_shapes(pred, targets);
    Matrix grad(pred.rows(), pred.cols());
    for (Eigen::Index r = 0; r < pred.rows(); ++r) {
        for (Eigen::Index c = 0; c < pred.cols(); ++c) {
            const double p = pred(r, c);
            const double s = targets.survived(r, c);
            const double f = targets.failed(r, c);
            grad(r, c) = p < kPredClamp || p > 1.0 - kPredClamp
                             ? 0.0
                             : -s / (1.0 + s * (p - 1.0)) + f / (1.0 - f * p);
        }
    }
    return grad;
}

ParamSet backward(const SurvivalNetwork& net, const ForwardCache& cache, const TargetBatch& targets) {
    if (cache.mode != Mode::train) throw Error("backward: cache is not from a train-mode forward pass");
    if (cache.pred.rows() != targets.survived.rows()) throw Error("backward: stale cache (batch size differs)");
    const auto& shape = net.shape;

    ParamSet grads;
    for (std::size_t k = 0; k < kParamCount; ++k) grads[k] = Matrix::Zero(net.params[k].rows(), net.params[k].cols());

    // Through the sigmoid: dp/dlogit = p (1 - p).
    Matrix delta = loss_gradient(cache.pred, targets).array() * cache.pred.array() * (1.0 - cache.pred.array());
    grads[kW3] = cache.hidden[1].h.transpose() * delta;
    grads[kB3] = delta.colwise().sum();
    Matrix upstream = delta * net.params[kW3].transpose();

    for (int l = 1; l >= 0; --l) {
        const auto& layer = cache.hidden[static_cast<std::size_t>(l)];
        if (layer.mask.size() != 0) upstream.array() *= layer.mask.array();
        Matrix dy = upstream.array() * (layer.y.array() > 0.0).cast<double>();
        Matrix dz;
        if (shape.batch_norm) {
            const auto gamma = kGammas[static_cast<std::size_t>(l)];
            grads[gamma] = (dy.array() * layer.xhat.array()).colwise().sum();
            grads[kBetas[static_cast<std::size_t>(l)]] = dy.colwise().sum();
            const Matrix dxhat = dy.array().rowwise() * net.params[gamma].row(0).array();
            const double n = static_cast<double>(dxhat.rows());
            const RowVector sum_dxhat = dxhat.colwise().sum();
            const RowVector sum_dxhat_xhat = (dxhat.array() * layer.xhat.array()).colwise().sum();
            // dz = inv_std / n * (n dxhat - sum(dxhat) - xhat * sum(dxhat xhat))
            Matrix centered = (n * dxhat).rowwise() - sum_dxhat;
            centered.array() -= layer.xhat.array().rowwise() * sum_dxhat_xhat.array();
            dz = centered.array().rowwise() * (layer.inv_std.array() / n);
        } else {
            dz = std::move(dy);
        }
        const Matrix& input = l == 0 ? cache.input : cache.hidden[0].h;
        grads[kWeights[static_cast<std::size_t>(l)]] = input.transpose() * dz;
        grads[kBiases[static_cast<std::size_t>(l)]] = dz.colwise().sum();
        if (l > 0) upstream = dz * net.params[kWeights[static_cast<std::size_t>(l)]].transpose();
    }
    return grads;
}

void adam_step(std::span<Matrix> params, std::span<const Matrix> grads, AdamState& state, double lr,
               const AdamConfig& config) {
    if (params.size() != grads.size()) throw Error("adam_step: parameter and gradient counts differ");
    if (state.m.empty()) {
        for (const auto& p : params) {
            state.m.push_back(Matrix::Zero(p.rows(), p.cols()));
            state.v.push_back(Matrix::Zero(p.rows(), p.cols()));
        }
    }
    if (state.m.size() != params.size()) throw Error("adam_step: optimizer state does not match parameters");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k].rows() != grads[k].rows() || params[k].cols() != grads[k].cols()) {
            throw Error("adam_step: shape mismatch in parameter " + std::to_string(k));
        }
        state.m[k] = config.beta1 * state.m[k] + (1.0 - config.beta1) * grads[k];
        state.v[k] = config.beta2 * state.v[k] + (1.0 - config.beta2) * grads[k].cwiseAbs2();
        params[k].array() -= lr * (state.m[k].array() / c1) / ((state.v[k].array() / c2).sqrt() + config.eps);
    }
}

}  // namespace survkit
