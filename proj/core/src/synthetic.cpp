#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "survkit/cohort.hpp"
#include "survkit/config.hpp"
#include "survkit/error.hpp"
#include "survkit/format.hpp"
#include "survkit/random.hpp"

namespace survkit {

namespace {

// Stream ids for the generator's independent random sources. Clinical
// variables draw from a stream keyed by their name, so reordering the
// variable list only reorders columns.
constexpr std::uint64_t kFeatureStream = 0x6665617475726573ULL;
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;
constexpr std::uint64_t kSurvivalStream = 0x737572766976616cULL;
constexpr std::uint64_t kCensorStream = 0x63656e736f72ULL;

std::string category_label(std::size_t code) { return "cat" + std::to_string(code); }

/// Numeric contribution of a categorical code, spread evenly over [-1, 1].
double category_score(std::size_t code, std::size_t n_categories) {
    const double half = static_cast<double>(n_categories - 1) / 2.0;
    return (static_cast<double>(code) - half) / half;
}

}  // namespace

SyntheticSpec informative_spec() {
    SyntheticSpec spec;
    spec.n_patients = 250;
    spec.feature_dim = 32;
    spec.feature_weight = 3.0;
    spec.informative_features = 8;
    spec.noise_sd = 0.25;
    spec.event_rate = 0.15;
    spec.max_followup = 3000.0;
    // Clinical and feature blocks carry comparable risk so that combining
    // them helps; bmi and sex are pure noise.
    spec.variables = {
        {"age", VariableKind::continuous, 0, 1.2},
        {"tumor_size", VariableKind::continuous, 0, 1.6},
        {"stage", VariableKind::categorical, 4, 1.4},
        {"grade", VariableKind::categorical, 3, 1.0},
        {"creatinine", VariableKind::continuous, 0, 0.6},
        {"smoker", VariableKind::categorical, 2, 0.6},
        {"bmi", VariableKind::continuous, 0, 0.0},
        {"sex", VariableKind::categorical, 2, 0.0},
    };
    return spec;
}

SyntheticCohort generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (!(spec.event_rate > 0.0 && spec.event_rate < 1.0)) {
        throw Error("generate_synthetic: event rate must lie in (0, 1)");
    }
    if (spec.n_patients == 0) throw Error("generate_synthetic: n_patients must be positive");
    if (!(spec.max_followup > 0.0)) throw Error("generate_synthetic: max_followup must be positive");
    if (spec.informative_features > spec.feature_dim) {
        throw Error("generate_synthetic: informative_features exceeds feature_dim");
    }
    const std::size_t n = spec.n_patients;
    const std::size_t d = spec.feature_dim;

    Cohort cohort;
    cohort.schema.feature_dim = d;
    for (const auto& v : spec.variables) {
        ClinicalVariable var{v.name, v.kind, {}};
        if (v.kind == VariableKind::categorical) {
            if (v.n_categories < 2) throw Error("generate_synthetic: '" + v.name + "' needs >= 2 categories");
            for (std::size_t c = 0; c < v.n_categories; ++c) var.categories.push_back(category_label(c));
            std::sort(var.categories.begin(), var.categories.end());
        }
        cohort.schema.variables.push_back(std::move(var));
    }

    const std::size_t width = static_cast<std::size_t>(std::to_string(n).size());
    cohort.patients.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto id = std::to_string(i + 1);
        cohort.patients[i].id = "P" + std::string(width - id.size(), '0') + id;
        cohort.patients[i].clinical.resize(spec.variables.size());
    }

    // Clinical values and their per-patient score.
    std::vector<std::vector<double>> scores(spec.variables.size(), std::vector<double>(n));
    for (std::size_t v = 0; v < spec.variables.size(); ++v) {
        const auto& sv = spec.variables[v];
        auto rng = make_rng(seed, fnv1a(sv.name));
        if (sv.kind == VariableKind::continuous) {
            std::normal_distribution<double> normal(0.0, 1.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double x = normal(rng);
                cohort.patients[i].clinical[v] = x;
                scores[v][i] = x;
            }
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, sv.n_categories - 1);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t code = pick(rng);
                cohort.patients[i].clinical[v] = category_label(code);
                scores[v][i] = category_score(code, sv.n_categories);
            }
        }
    }

    {
        auto rng = make_rng(seed, kFeatureStream);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& p : cohort.patients) {
            p.features.resize(d);
            for (auto& f : p.features) f = normal(rng);
        }
    }

    // Sum the clinical terms in name order so the result does not depend on
    // the order the variables were listed in.
    std::vector<std::size_t> by_name(spec.variables.size());
    std::iota(by_name.begin(), by_name.end(), std::size_t{0});
    std::sort(by_name.begin(), by_name.end(),
              [&](auto a, auto b) { return spec.variables[a].name < spec.variables[b].name; });

    const std::size_t informative = spec.informative_features == 0 ? d : spec.informative_features;
    const double beta = informative > 0 ? spec.feature_weight / std::sqrt(static_cast<double>(informative)) : 0.0;

    std::vector<double> risk(n, 0.0);
    {
        auto rng = make_rng(seed, kNoiseStream);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0;
            for (auto v : by_name) r += spec.variables[v].weight * scores[v][i];
            for (std::size_t k = 0; k < informative && k < d; ++k) r += beta * cohort.patients[i].features[k];
            const double eps = normal(rng);
            risk[i] = r + spec.noise_sd * eps;
        }
    }

    std::vector<double> neg_log_u(n), censor(n);
    {
        auto rng_s = make_rng(seed, kSurvivalStream);
        auto rng_c = make_rng(seed, kCensorStream);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            neg_log_u[i] = -std::log1p(-unit(rng_s));  // Exp(1)
            censor[i] = spec.max_followup * unit(rng_c);
        }
    }

    // Patient i dies before censoring iff baseline >= threshold[i]; choosing
    // the baseline between order statistics fixes the realized event count.
    std::vector<double> threshold(n);
    for (std::size_t i = 0; i < n; ++i) {
        threshold[i] = censor[i] > 0.0 ? neg_log_u[i] / (std::exp(risk[i]) * censor[i])
                                       : std::numeric_limits<double>::infinity();
    }
    auto sorted = threshold;
    std::sort(sorted.begin(), sorted.end());
    const auto target = static_cast<std::size_t>(std::llround(spec.event_rate * static_cast<double>(n)));
    double baseline = 0.0;
    if (target == 0) {
        baseline = sorted.front() / 2.0;
    } else if (target >= n || !std::isfinite(sorted[target])) {
        baseline = sorted[std::min(target, n) - 1] * 2.0;
    } else {
        baseline = std::sqrt(sorted[target - 1] * sorted[target]);
    }

    for (std::size_t i = 0; i < n; ++i) {
        auto& p = cohort.patients[i];
        const double survival = neg_log_u[i] / (baseline * std::exp(risk[i]));
        if (threshold[i] <= baseline) {
            p.event = 1;
            p.time = std::min(survival, censor[i]);
        } else {
            p.event = 0;
            p.time = censor[i];
        }
    }
    return {std::move(cohort), std::move(risk)};
}

void write_truth(std::ostream& out, const SyntheticCohort& synth) {
    out << "id,true_risk\n";
    for (std::size_t i = 0; i < synth.cohort.size(); ++i) {
        out << synth.cohort.patients[i].id << ',' << format_double(synth.true_risk[i]) << '\n';
    }
}

SyntheticSpec read_synthetic_spec(std::istream& in) {
    const auto cfg = KeyValueConfig::parse(in);
    SyntheticSpec spec;
    spec.n_patients = static_cast<std::size_t>(cfg.get_int("n_patients", 250));
    spec.feature_dim = static_cast<std::size_t>(cfg.get_int("feature_dim", 32));
    spec.feature_weight = cfg.get_double("feature_weight", spec.feature_weight);
    spec.informative_features = static_cast<std::size_t>(cfg.get_int("informative_features", 0));
    spec.noise_sd = cfg.get_double("noise_sd", spec.noise_sd);
    spec.event_rate = cfg.get_double("event_rate", spec.event_rate);
    spec.max_followup = cfg.get_double("max_followup", spec.max_followup);
    // [clinical] entries: `name = continuous <weight>` or `name = categorical <k> <weight>`.
    for (const auto& e : cfg.entries()) {
        if (e.section != "clinical") continue;
        std::vector<std::string> parts;
        for (auto& p : split(e.value, ' ')) {
            if (!p.empty()) parts.push_back(p);
        }
        SyntheticVariable v;
        v.name = e.key;
        long long k = 0;
        if (parts.size() == 2 && parts[0] == "continuous" && parse_double(parts[1], v.weight)) {
            v.kind = VariableKind::continuous;
        } else if (parts.size() == 3 && parts[0] == "categorical" && parse_int(parts[1], k) && k >= 2 &&
                   parse_double(parts[2], v.weight)) {
            v.kind = VariableKind::categorical;
            v.n_categories = static_cast<std::size_t>(k);
        } else {
            throw Error("synthetic spec: cannot parse clinical variable '" + e.key + " = " + e.value + "'");
        }
        spec.variables.push_back(std::move(v));
    }
    return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open synthetic spec " + path.string());
    return read_synthetic_spec(in);
}

}  // namespace survkit
