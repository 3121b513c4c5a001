#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "survkit/cohort.hpp"
#include "survkit/config.hpp"
#include "survkit/curves.hpp"
#include "survkit/forest.hpp"
#include "survkit/metrics.hpp"
#include "survkit/select.hpp"
#include "survkit/survnet.hpp"
#include "survkit/timegrid.hpp"

namespace survkit {

struct RunConfig {
    std::filesystem::path cohort;
    std::filesystem::path schema;  // empty = infer from the cohort file
    std::filesystem::path output = "runs";

    std::size_t n_intervals = 15;
    std::optional<double> max_time;  // nullopt = largest observed time in the training split

    SplitFractions fractions;
    NetworkShape network;  // input_dim and n_intervals are filled per experiment
    TrainConfig train;
    ForestParams forest;

    bool lr_find = false;
    double lr_min = 1e-5;
    double lr_max = 1.0;
    std::size_t lr_steps = 100;

    std::vector<ExperimentConfig> experiments = canonical_experiments();
    std::uint64_t seed = 0;
    std::size_t points_per_interval = 100;
    CensoredAt violin_censored_at = CensoredAt::censoring_time;
    /// Shuffle (time, event) pairs across patients before splitting; a null
    /// baseline that keeps covariates and label marginals intact.
    bool permute_labels = false;
    std::size_t jobs = 1;
};

/// Every recognized key with its section, in the order they are written.
const std::vector<std::pair<std::string, std::string>>& config_keys();

/// Missing keys keep their defaults; unknown keys are an error.
RunConfig run_config_from(const KeyValueConfig& kv);
KeyValueConfig to_key_values(const RunConfig& config);

/// Parses "1,3,8", "all", or custom entries "spearman@0.2", "importance@0.05",
/// optionally suffixed "/clinical-only". Custom experiments get ids from 10.
std::vector<ExperimentConfig> parse_experiments(const std::string& text);
std::string format_experiments(const std::vector<ExperimentConfig>& experiments);

// ---------------------------------------------------------------------------

/// Split, preprocessing state fitted on the training split, and the grid.
struct PreparedData {
    Cohort cohort;         // as loaded (labels permuted if requested)
    CohortSplit raw;       // unnormalized
    PreprocessState state;
    CohortSplit encoded;   // normalized with `state`
    TimeGrid grid{1.0, 2};
};

Cohort load_run_cohort(const RunConfig& config);
PreparedData prepare(const RunConfig& config, const Cohort& cohort);

/// Variable scores from the training split only.
std::vector<VariableScore> compute_scores(const RunConfig& config, const PreparedData& data);

struct Evaluation {
    Concordance concordance;
    AucResult auc;
    std::vector<double> eval_times;
    std::vector<SurvivalCurve> test_curves;
    ViolinData violin;
};

Evaluation evaluate(const RunConfig& config, const SurvivalNetwork& net, const PreparedData& data,
                    const std::vector<std::string>& manifest);

struct ExperimentOutcome {
    ExperimentConfig experiment;
    std::filesystem::path directory;
    DesignMatrix design;
    TrainResult trained;
    Evaluation evaluation;
    std::vector<std::string> warnings;
    bool failed = false;
    std::string error;
};

std::filesystem::path experiment_dir(const RunConfig& config, const ExperimentConfig& experiment);

/// Design matrices, training (and optional LR range test) for one
/// experiment. Writes config, split manifests, scores, manifest,
/// checkpoint and history into the experiment directory.
ExperimentOutcome train_experiment(const RunConfig& config, const PreparedData& data,
                                   const std::vector<VariableScore>& scores, const ExperimentConfig& experiment);

/// Evaluation on the test split plus report, curves and violin outputs.
void evaluate_experiment(const RunConfig& config, const PreparedData& data, ExperimentOutcome& outcome);

/// Full run of one experiment: split -> preprocess -> score -> train ->
/// evaluate. Stage failures are rethrown as StageError.
ExperimentOutcome run_experiment(const RunConfig& config, int experiment_id);

struct SummaryRow {
    int experiment = 0;
    std::size_t n_clinical_selected = 0;
    double c_td = 0.0;
    double integrated_auc = 0.0;
    bool failed = false;
    std::string error;
};

/// All configured experiments on one shared split and preprocessing state.
/// A failing experiment is recorded and the rest still run. Writes
/// summary.csv into the output directory.
std::vector<SummaryRow> run_matrix(const RunConfig& config);

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Re-evaluates a trained experiment directory from its resolved config and
/// checkpoint.
ExperimentOutcome evaluate_run(const std::filesystem::path& run_dir);

void write_ids(const std::filesystem::path& path, const Cohort& cohort);

}  // namespace survkit
