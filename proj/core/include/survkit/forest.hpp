#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace survkit {

struct ForestParams {
    std::size_t n_trees = 100;
    std::size_t min_samples_split = 2;
    std::size_t max_depth = 0;  // 0 = grow until pure
    bool bootstrap = true;
};

struct TreeNode {
    int variable = -1;  // -1 marks a leaf
    double threshold = 0.0;  // rows with x <= threshold go left
    double value = 0.0;      // mean target of the node's training rows
    int left = -1;
    int right = -1;
    std::size_t n_samples = 0;
    /// Sum-of-squares reduction achieved by this node's split (0 for leaves).
    double sse_reduction = 0.0;

    bool is_leaf() const noexcept { return variable < 0; }
};

/// CART regression tree grown greedily on variance reduction. Candidate
/// thresholds are midpoints between consecutive distinct sorted values.
/// Within a variable the smallest tied threshold wins; between variables the
/// tie goes to the one whose column has the smaller content hash, so trees
/// do not depend on column order.
struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    std::size_t n_training = 0;   // rows the tree was grown on (with repeats)

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    std::size_t depth() const;
};

struct Forest {
    std::vector<RegressionTree> trees;
    std::vector<std::uint64_t> tree_seeds;
    std::size_t n_variables = 0;

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

/// Grows one tree on X.row(r), y[r] for r in `rows` (repeats allowed).
RegressionTree fit_tree(const Eigen::MatrixXd& X, std::span<const double> y,
                        std::vector<std::size_t> rows, const ForestParams& params);

/// Tree k is grown on a bootstrap sample drawn from a generator seeded by
/// (seed, k), so the forest does not depend on the order trees are built in.
Forest fit_forest(const Eigen::MatrixXd& X, std::span<const double> y, const ForestParams& params,
                  std::uint64_t seed);

/// Per-variable SSE reduction of one tree divided by its training size.
std::vector<double> tree_importance(const RegressionTree& tree, std::size_t n_variables);

/// Mean decrease in impurity averaged over trees and normalized to sum 1.
/// Left all zero when no tree split at all.
std::vector<double> forest_importance(const Forest& forest);

}  // namespace survkit
