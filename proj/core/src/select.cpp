#include "survkit/select.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "survkit/config.hpp"
#include "survkit/error.hpp"
#include "survkit/format.hpp"

namespace survkit {

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        // ranks i+1 .. j are tied
        const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mean_rank;
        i = j;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y, bool* degenerate) {
    if (x.size() != y.size()) throw Error("spearman: length mismatch");
    if (x.size() < 3) throw Error("spearman: need at least 3 observations");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    // Both rank vectors have mean (n + 1) / 2.
    const double center = 0.5 * static_cast<double>(x.size() + 1);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double a = rx[i] - center, b = ry[i] - center;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (sxx == 0.0 || syy == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    if (degenerate) *degenerate = false;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<VariableScore> score_spearman(const Cohort& cohort) {
    const auto times = cohort.times();
    std::vector<VariableScore> out;
    for (std::size_t v = 0; v < cohort.schema.variables.size(); ++v) {
        VariableScore s;
        s.variable = cohort.schema.variables[v].name;
        const auto column = cohort.clinical_column(v);
        s.s_score = spearman(column, times, &s.constant);
        out.push_back(std::move(s));
    }
    return out;
}

Eigen::MatrixXd clinical_matrix(const Cohort& cohort) {
    const auto n = static_cast<Eigen::Index>(cohort.size());
    const auto p = static_cast<Eigen::Index>(cohort.schema.variables.size());
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index v = 0; v < p; ++v) {
            X(r, v) = numeric_value(cohort.patients[static_cast<std::size_t>(r)].clinical[static_cast<std::size_t>(v)]);
        }
    }
    return X;
}

std::vector<VariableScore> score_variables(const Cohort& cohort, const ForestParams& params, std::uint64_t seed) {
    auto scores = score_spearman(cohort);
    if (scores.empty()) return scores;
    const auto times = cohort.times();
    const auto forest = fit_forest(clinical_matrix(cohort), times, params, seed);
    const auto importance = forest_importance(forest);
    for (std::size_t v = 0; v < scores.size(); ++v) scores[v].i_score = importance[v];
    return scores;
}

void write_scores(std::ostream& out, const std::vector<VariableScore>& scores) {
    out << "variable,s_score,i_score\n";
    for (const auto& s : scores) {
        out << s.variable << ',' << format_double(s.s_score) << ',' << format_double(s.i_score) << '\n';
    }
}

std::vector<VariableScore> read_scores(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "variable,s_score,i_score") {
        throw Error("scores: expected header variable,s_score,i_score");
    }
    std::vector<VariableScore> out;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(trim(line), ',');
        VariableScore s;
        if (f.size() != 3 || !parse_double(f[1], s.s_score) || !parse_double(f[2], s.i_score)) {
            throw Error("scores: malformed line '" + line + "'");
        }
        s.variable = f[0];
        out.push_back(std::move(s));
    }
    return out;
}

SelectionMode parse_selection_mode(const std::string& text) {
    if (text == "spearman") return SelectionMode::spearman;
    if (text == "importance") return SelectionMode::importance;
    throw Error("unknown selection mode '" + text + "' (expected spearman or importance)");
}

std::string to_string(SelectionMode mode) {
    return mode == SelectionMode::spearman ? "spearman" : "importance";
}

std::vector<std::string> select_variables(const std::vector<VariableScore>& scores, SelectionMode mode,
                                          double threshold) {
    auto magnitude = [mode](const VariableScore& s) {
        return mode == SelectionMode::spearman ? std::abs(s.s_score) : s.i_score;
    };
    std::vector<const VariableScore*> kept;
    for (const auto& s : scores) {
        if (magnitude(s) >= threshold) kept.push_back(&s);
    }
    std::sort(kept.begin(), kept.end(), [&](const VariableScore* a, const VariableScore* b) {
        const double ma = magnitude(*a), mb = magnitude(*b);
        if (ma != mb) return ma > mb;
        return a->variable < b->variable;
    });
    std::vector<std::string> out;
    for (const auto* s : kept) out.push_back(s->variable);
    return out;
}

// ---------------------------------------------------------------------------

std::string ExperimentConfig::describe() const {
    std::string out = use_image_features ? "features" : "";
    auto join = [&](const std::string& part) { out += (out.empty() ? "" : " + ") + part; };
    switch (clinical) {
        case ClinicalMode::none: break;
        case ClinicalMode::all: join("all clinical"); break;
        case ClinicalMode::spearman_threshold: join("clinical |S| >= " + format_double(threshold)); break;
        case ClinicalMode::importance_threshold: join("clinical I >= " + format_double(threshold)); break;
    }
    return out;
}

ExperimentConfig canonical_experiment(int id) {
    switch (id) {
        case 1: return {1, true, ClinicalMode::none, 0.0};
        case 2: return {2, false, ClinicalMode::all, 0.0};
        case 3: return {3, true, ClinicalMode::all, 0.0};
        case 4: return {4, true, ClinicalMode::spearman_threshold, 0.1};
        case 5: return {5, true, ClinicalMode::spearman_threshold, 0.05};
        case 6: return {6, true, ClinicalMode::spearman_threshold, 0.01};
        case 7: return {7, true, ClinicalMode::importance_threshold, 0.1};
        case 8: return {8, true, ClinicalMode::importance_threshold, 0.01};
        case 9: return {9, true, ClinicalMode::importance_threshold, 0.001};
        default: throw Error("experiment id must be 1..9, got " + std::to_string(id));
    }
}

std::vector<ExperimentConfig> canonical_experiments() {
    std::vector<ExperimentConfig> out;
    for (int id = 1; id <= 9; ++id) out.push_back(canonical_experiment(id));
    return out;
}

DesignMatrix build_design_matrix(const Cohort& cohort, const ExperimentConfig& config,
                                 const std::vector<VariableScore>& scores) {
    DesignMatrix design;
    switch (config.clinical) {
        case ClinicalMode::none: break;
        case ClinicalMode::all:
            for (const auto& var : cohort.schema.variables) design.clinical.push_back(var.name);
            break;
        case ClinicalMode::spearman_threshold:
        case ClinicalMode::importance_threshold: {
            if (scores.size() != cohort.schema.variables.size()) {
                throw Error("build_design_matrix: experiment " + std::to_string(config.id) +
                            " needs one score per clinical variable");
            }
            const auto mode = config.clinical == ClinicalMode::spearman_threshold ? SelectionMode::spearman
                                                                                  : SelectionMode::importance;
            design.clinical = select_variables(scores, mode, config.threshold);
            design.selection_empty = design.clinical.empty();
            break;
        }
    }
    if (config.use_image_features) {
        for (std::size_t k = 0; k < cohort.schema.feature_dim; ++k) design.manifest.push_back("feat_" + std::to_string(k));
    }
    for (const auto& name : design.clinical) design.manifest.push_back("clin_" + name);
    if (design.manifest.empty()) {
        throw Error("build_design_matrix: experiment " + std::to_string(config.id) + " has no input columns");
    }
    design.values = design_from_manifest(cohort, design.manifest);
    return design;
}

Eigen::MatrixXd design_from_manifest(const Cohort& cohort, const std::vector<std::string>& manifest) {
    if (!cohort.encoded) throw Error("design matrix requires a preprocessed cohort");
    struct Source {
        bool feature;
        std::size_t index;
    };
    std::vector<Source> sources;
    for (const auto& col : manifest) {
        if (col.rfind("feat_", 0) == 0) {
            long long k = 0;
            if (!parse_int(std::string_view(col).substr(5), k) || k < 0 ||
                static_cast<std::size_t>(k) >= cohort.schema.feature_dim) {
                throw Error("manifest column '" + col + "' not in cohort");
            }
            sources.push_back({true, static_cast<std::size_t>(k)});
        } else if (col.rfind("clin_", 0) == 0) {
            sources.push_back({false, cohort.schema.index_of(col.substr(5))});
        } else {
            throw Error("manifest column '" + col + "' has no feat_/clin_ prefix");
        }
    }
    Eigen::MatrixXd X(static_cast<Eigen::Index>(cohort.size()), static_cast<Eigen::Index>(sources.size()));
    for (std::size_t r = 0; r < cohort.size(); ++r) {
        const auto& p = cohort.patients[r];
        for (std::size_t c = 0; c < sources.size(); ++c) {
            X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                sources[c].feature ? p.features[sources[c].index] : numeric_value(p.clinical[sources[c].index]);
        }
    }
    return X;
}

void write_manifest(std::ostream& out, const std::vector<std::string>& names) {
    for (const auto& n : names) out << n << '\n';
}

std::vector<std::string> read_manifest(std::istream& in) {
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        auto name = trim(line);
        if (!name.empty()) out.push_back(std::move(name));
    }
    return out;
}

}  // namespace survkit
