#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace survkit {

enum class VariableKind { continuous, categorical };

struct ClinicalVariable {
    std::string name;  // without the "clin_" column prefix
    VariableKind kind = VariableKind::continuous;
    std::vector<std::string> categories;  // categorical only
};

struct Schema {
    std::vector<ClinicalVariable> variables;
    std::size_t feature_dim = 0;

    std::size_t index_of(const std::string& name) const;  // throws if absent
};

/// A clinical cell: raw category label, or a number (continuous values and,
/// after preprocessing, categorical codes).
using ClinicalValue = std::variant<double, std::string>;

double numeric_value(const ClinicalValue& v);

struct Patient {
    std::string id;
    double time = 0.0;  // days
    int event = 0;      // 1 = death observed, 0 = censored
    std::vector<ClinicalValue> clinical;  // aligned with Schema::variables
    std::vector<double> features;
};

struct Cohort {
    Schema schema;
    std::vector<Patient> patients;
    /// True once apply_preprocess has replaced categories by integer codes.
    bool encoded = false;

    std::size_t size() const noexcept { return patients.size(); }
    std::size_t n_events() const noexcept;
    std::vector<double> times() const;
    std::vector<int> events() const;
    std::vector<std::string> ids() const;
    /// Numeric column of one clinical variable (requires encoded cohort or a
    /// continuous variable).
    std::vector<double> clinical_column(std::size_t var) const;

    /// Checks every Patient against the schema; throws Error on violation.
    void validate() const;
};

// ---------------------------------------------------------------------------
// CSV ingestion

/// Parses the cohort CSV. Columns: id,time,event,clin_<name>...,feat_0..feat_{d-1}.
Cohort read_cohort(std::istream& in, const Schema& schema);
Cohort load_cohort(const std::filesystem::path& path, const Schema& schema);

/// Writes the canonical form: shortest round-trip decimals, schema column order.
void write_cohort(std::ostream& out, const Cohort& cohort);
void save_cohort(const std::filesystem::path& path, const Cohort& cohort);

/// Schema guessed from a CSV: a clinical column is categorical iff some value
/// is non-numeric; categories are the sorted distinct labels.
Schema infer_schema(std::istream& in);
Schema infer_schema(const std::filesystem::path& path);

/// Schema file: one `clin_<name> = continuous` or
/// `clin_<name> = categorical:a|b|c` line per variable plus `feature_dim = d`.
Schema read_schema(std::istream& in);
Schema load_schema(const std::filesystem::path& path);
void write_schema(std::ostream& out, const Schema& schema);
void save_schema(const std::filesystem::path& path, const Schema& schema);

// ---------------------------------------------------------------------------
// Preprocessing

struct ColumnMoments {
    double mean = 0.0;
    double stddev = 1.0;      // population convention
    bool degenerate = false;  // zero variance: transformed values are all 0
};

struct PreprocessState {
    std::map<std::string, ColumnMoments> continuous;          // by variable name
    std::map<std::string, std::vector<std::string>> codes;    // category list, code = index
    std::vector<ColumnMoments> features;

    std::vector<std::string> degenerate_columns() const;
    /// FNV-1a digest of the serialized state; recorded in model checkpoints.
    std::uint64_t hash() const;
};

void write_preprocess(std::ostream& out, const PreprocessState& state);
PreprocessState read_preprocess(std::istream& in);

ColumnMoments column_moments(const std::vector<double>& values);

PreprocessState fit_preprocess(const Cohort& cohort);
Cohort apply_preprocess(const Cohort& cohort, const PreprocessState& state);
/// Inverse z-score for one continuous value.
double invert_continuous(double z, const ColumnMoments& m);

// ---------------------------------------------------------------------------
// Splitting

struct SplitFractions {
    double train = 0.57;
    double val = 0.10;
    double test = 0.33;
};

struct CohortSplit {
    Cohort train, val, test;
};

/// Largest-remainder allocation of `count` items over the three fractions.
/// Remainder ties go to the earlier split.
std::array<std::size_t, 3> allocate_counts(std::size_t count, const SplitFractions& f);

/// Allocates events and censored patients separately (largest remainder) so
/// every split keeps the cohort's event proportion. Within each stratum the
/// assignment follows a seeded shuffle; each split keeps file order.
CohortSplit stratified_split(const Cohort& cohort, const SplitFractions& fractions,
                             std::uint64_t seed);

/// Per-stratum counts used by stratified_split: [events, censored] x [train, val, test].
std::array<std::array<std::size_t, 3>, 2> split_counts(std::size_t n_events,
                                                       std::size_t n_censored,
                                                       const SplitFractions& f);

Cohort subset(const Cohort& cohort, const std::vector<std::size_t>& rows);

// ---------------------------------------------------------------------------
// Synthetic cohorts

struct SyntheticVariable {
    std::string name;
    VariableKind kind = VariableKind::continuous;
    std::size_t n_categories = 2;  // categorical only
    double weight = 0.0;           // contribution to the latent log-hazard
};

struct SyntheticSpec {
    std::size_t n_patients = 250;
    std::size_t feature_dim = 32;
    std::vector<SyntheticVariable> variables;
    /// Norm of the feature-projection coefficient vector.
    double feature_weight = 1.0;
    /// How many leading feature columns carry the projection (0 = all).
    std::size_t informative_features = 0;
    double noise_sd = 0.0;
    double event_rate = 0.15;
    double max_followup = 3000.0;
};

/// Cohort with n=250, d=32, 8 clinical variables and ~15% events, where both
/// the clinical block and the feature block carry part of the risk.
SyntheticSpec informative_spec();

struct SyntheticCohort {
    Cohort cohort;
    std::vector<double> true_risk;  // latent log-hazard, aligned with cohort
};

/// Exponential survival with rate proportional to exp(risk), censoring
/// uniform on [0, max_followup]. The baseline rate is solved so the realized
/// event count is round(event_rate * n).
SyntheticCohort generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

void write_truth(std::ostream& out, const SyntheticCohort& synth);

SyntheticSpec read_synthetic_spec(std::istream& in);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

}  // namespace survkit
