#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "survkit/cohort.hpp"
#include "survkit/forest.hpp"

namespace survkit {

/// Ranks 1..n; tied values share the mean of the ranks they occupy.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of the average ranks. Returns 0 when either input is
/// constant and sets `degenerate`.
double spearman(std::span<const double> x, std::span<const double> y, bool* degenerate = nullptr);

struct VariableScore {
    std::string variable;
    double s_score = 0.0;  // Spearman vs observed time, in [-1, 1]
    double i_score = 0.0;  // normalized forest importance, in [0, 1]
    bool constant = false; // s_score forced to 0 for a constant column
};

/// Spearman score of every clinical variable against observed time.
/// Event flags are ignored; censored times enter as-is.
std::vector<VariableScore> score_spearman(const Cohort& cohort);

/// Clinical block of an encoded cohort as a matrix, one column per variable.
Eigen::MatrixXd clinical_matrix(const Cohort& cohort);

/// Spearman and forest-importance scores for every clinical variable. The
/// forest regresses observed time on the clinical block.
std::vector<VariableScore> score_variables(const Cohort& cohort, const ForestParams& params,
                                           std::uint64_t seed);

void write_scores(std::ostream& out, const std::vector<VariableScore>& scores);
std::vector<VariableScore> read_scores(std::istream& in);

enum class SelectionMode { spearman, importance };

SelectionMode parse_selection_mode(const std::string& text);
std::string to_string(SelectionMode mode);

/// Spearman mode keeps |s_score| >= threshold, importance mode keeps
/// i_score >= threshold. Sorted by descending magnitude, then by name.
std::vector<std::string> select_variables(const std::vector<VariableScore>& scores, SelectionMode mode,
                                          double threshold);

// ---------------------------------------------------------------------------
// Experiments

enum class ClinicalMode { none, all, spearman_threshold, importance_threshold };

struct ExperimentConfig {
    int id = 0;
    bool use_image_features = true;
    ClinicalMode clinical = ClinicalMode::none;
    double threshold = 0.0;

    bool needs_scores() const noexcept {
        return clinical == ClinicalMode::spearman_threshold || clinical == ClinicalMode::importance_threshold;
    }
    std::string describe() const;
};

/// The nine-experiment matrix: 1 features only, 2 clinical only, 3 both,
/// 4-6 features + |S| >= 0.1/0.05/0.01, 7-9 features + I >= 0.1/0.01/0.001.
ExperimentConfig canonical_experiment(int id);
std::vector<ExperimentConfig> canonical_experiments();

struct DesignMatrix {
    Eigen::MatrixXd values;             // patients x columns
    std::vector<std::string> manifest;  // column names, feat_* first then clin_*
    std::vector<std::string> clinical;  // selected clinical variable names
    bool selection_empty = false;       // thresholding kept no variable
};

/// Feature columns (if enabled) followed by the selected clinical columns.
/// `scores` is consulted only for thresholded experiments.
DesignMatrix build_design_matrix(const Cohort& cohort, const ExperimentConfig& config,
                                 const std::vector<VariableScore>& scores);

/// Same column layout as a previously built manifest.
Eigen::MatrixXd design_from_manifest(const Cohort& cohort, const std::vector<std::string>& manifest);

void write_manifest(std::ostream& out, const std::vector<std::string>& names);
std::vector<std::string> read_manifest(std::istream& in);

}  // namespace survkit
