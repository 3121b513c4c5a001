#include "survkit/forest.hpp"

#include <algorithm>
#include <numeric>
#include <string_view>

#include "survkit/error.hpp"
#include "survkit/random.hpp"

namespace survkit {

namespace {

struct Split {
    int variable = -1;
    double threshold = 0.0;
    double reduction = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& X, std::span<const double> y, const ForestParams& params)
        : X_(X), y_(y), params_(params), column_keys_(static_cast<std::size_t>(X.cols())) {
        // Ties between variables go to the smaller content hash rather than
        // the smaller index, which keeps the tree independent of column order.
        for (Eigen::Index v = 0; v < X.cols(); ++v) {
            std::uint64_t h = 0xcbf29ce484222325ULL;
            for (Eigen::Index r = 0; r < X.rows(); ++r) {
                const double x = X(r, v);
                h = fnv1a(std::string_view(reinterpret_cast<const char*>(&x), sizeof x), h);
            }
            column_keys_[static_cast<std::size_t>(v)] = h;
        }
    }

    RegressionTree build(std::vector<std::size_t> rows) {
        tree_.n_training = rows.size();
        grow(std::move(rows), 0);
        return std::move(tree_);
    }

private:
    int grow(std::vector<std::size_t> rows, std::size_t depth) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        const double n = static_cast<double>(rows.size());

        double sum = 0.0, lo = y_[rows.front()], hi = lo;
        for (auto r : rows) {
            sum += y_[r];
            lo = std::min(lo, y_[r]);
            hi = std::max(hi, y_[r]);
        }
        const double mean = sum / n;
        tree_.nodes[id].value = mean;
        tree_.nodes[id].n_samples = rows.size();

        const bool depth_limited = params_.max_depth != 0 && depth >= params_.max_depth;
        if (rows.size() < params_.min_samples_split || depth_limited || lo == hi) return id;

        double sse = 0.0;
        for (auto r : rows) sse += (y_[r] - mean) * (y_[r] - mean);
        const Split best = best_split(rows);
        if (best.variable < 0 || !(best.reduction > 1e-12 * sse)) return id;

        std::vector<std::size_t> left, right;
        for (auto r : rows) {
            (X_(static_cast<Eigen::Index>(r), best.variable) <= best.threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        tree_.nodes[id].variable = best.variable;
        tree_.nodes[id].threshold = best.threshold;
        tree_.nodes[id].sse_reduction = best.reduction;
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        tree_.nodes[id].left = l;
        tree_.nodes[id].right = r;
        return id;
    }

    Split best_split(const std::vector<std::size_t>& rows) const {
        Split best;
        const std::size_t n = rows.size();
        std::vector<std::size_t> order(rows);
        std::vector<double> prefix(n + 1);
        for (Eigen::Index v = 0; v < X_.cols(); ++v) {
            auto x = [&](std::size_t r) { return X_(static_cast<Eigen::Index>(r), v); };
            std::copy(rows.begin(), rows.end(), order.begin());
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x(a) < x(b); });
            prefix[0] = 0.0;
            for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + y_[order[k]];
            const double total = prefix[n];
            for (std::size_t k = 0; k + 1 < n; ++k) {
                const double a = x(order[k]), b = x(order[k + 1]);
                if (!(a < b)) continue;
                const double n_left = static_cast<double>(k + 1);
                const double n_right = static_cast<double>(n - k - 1);
                const double diff = prefix[k + 1] / n_left - (total - prefix[k + 1]) / n_right;
                // SSE(parent) - SSE(left) - SSE(right) = nL nR / n (mean_L - mean_R)^2
                const double reduction = n_left * n_right / static_cast<double>(n) * diff * diff;
                if (better(reduction, static_cast<int>(v), best)) {
                    double threshold = 0.5 * (a + b);
                    if (!(threshold < b)) threshold = a;
                    best = {static_cast<int>(v), threshold, reduction};
                }
            }
        }
        return best;
    }

    // Reductions within a relative 1e-12 count as tied; the same partition
    // reached through different columns differs only by rounding.
    bool better(double reduction, int variable, const Split& best) const {
        if (best.variable < 0) return reduction > 0.0;
        const double tol = 1e-12 * best.reduction;
        if (reduction > best.reduction + tol) return true;
        if (reduction < best.reduction - tol || variable == best.variable) return false;
        const auto key = column_keys_[static_cast<std::size_t>(variable)];
        const auto best_key = column_keys_[static_cast<std::size_t>(best.variable)];
        return key < best_key;
    }

    const Eigen::MatrixXd& X_;
    std::span<const double> y_;
    const ForestParams& params_;
    std::vector<std::uint64_t> column_keys_;
    RegressionTree tree_;
};

}  // namespace

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    int id = 0;
    while (!nodes[id].is_leaf()) {
        const auto& node = nodes[id];
        id = x(node.variable) <= node.threshold ? node.left : node.right;
    }
    return nodes[id].value;
}

std::size_t RegressionTree::depth() const {
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    std::size_t deepest = 0;
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes[id].is_leaf()) {
            stack.emplace_back(nodes[id].left, d + 1);
            stack.emplace_back(nodes[id].right, d + 1);
        }
    }
    return deepest;
}

double Forest::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(x);
    return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
}

RegressionTree fit_tree(const Eigen::MatrixXd& X, std::span<const double> y, std::vector<std::size_t> rows,
                        const ForestParams& params) {
    if (rows.empty()) throw Error("fit_tree: no training rows");
    if (static_cast<std::size_t>(X.rows()) != y.size()) throw Error("fit_tree: X and y row counts differ");
    return TreeBuilder(X, y, params).build(std::move(rows));
}

Forest fit_forest(const Eigen::MatrixXd& X, std::span<const double> y, const ForestParams& params,
                  std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(X.rows());
    if (n < 2) throw Error("fit_forest: need at least 2 samples");
    if (y.size() != n) throw Error("fit_forest: X and y row counts differ");
    if (params.n_trees == 0) throw Error("fit_forest: n_trees must be positive");

    Forest forest;
    forest.n_variables = static_cast<std::size_t>(X.cols());
    forest.trees.reserve(params.n_trees);
    for (std::size_t k = 0; k < params.n_trees; ++k) {
        const std::uint64_t tree_seed = derive_seed(seed, k);
        std::vector<std::size_t> rows(n);
        if (params.bootstrap) {
            Rng rng(tree_seed);
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (auto& r : rows) r = pick(rng);
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        forest.trees.push_back(fit_tree(X, y, std::move(rows), params));
        forest.tree_seeds.push_back(tree_seed);
    }
    return forest;
}

std::vector<double> tree_importance(const RegressionTree& tree, std::size_t n_variables) {
    std::vector<double> out(n_variables, 0.0);
    const double total = static_cast<double>(tree.n_training);
    for (const auto& node : tree.nodes) {
        // (weighted variance reduction) x (node fraction) = SSE reduction / N
        if (!node.is_leaf()) out[static_cast<std::size_t>(node.variable)] += node.sse_reduction / total;
    }
    return out;
}

std::vector<double> forest_importance(const Forest& forest) {
    std::vector<double> out(forest.n_variables, 0.0);
    for (const auto& tree : forest.trees) {
        const auto imp = tree_importance(tree, forest.n_variables);
        for (std::size_t v = 0; v < out.size(); ++v) out[v] += imp[v];
    }
    double sum = 0.0;
    for (auto& v : out) {
        v /= static_cast<double>(forest.trees.size());
        sum += v;
    }
    if (sum > 0.0) {
        for (auto& v : out) v /= sum;
    }
    return out;
}

}  // namespace survkit
