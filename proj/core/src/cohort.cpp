#include "survkit/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "survkit/config.hpp"
#include "survkit/error.hpp"
#include "survkit/format.hpp"
#include "survkit/random.hpp"

namespace survkit {

namespace {

constexpr std::string_view kClinPrefix = "clin_";
constexpr std::string_view kFeatPrefix = "feat_";

std::string row_tag(std::size_t row) {
    // Data rows are numbered from 1; the header is line 1 of the file.
    return "row " + std::to_string(row) + " (line " + std::to_string(row + 1) + ")";
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

struct HeaderLayout {
    std::size_t id = 0, time = 0, event = 0;
    std::vector<std::size_t> clinical;  // column index per schema variable
    std::vector<std::size_t> features;  // column index per feature
    std::size_t width = 0;
};

HeaderLayout map_header(const std::vector<std::string>& header, const Schema& schema) {
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (!pos.emplace(header[c], c).second) {
            throw Error("header: duplicate column '" + header[c] + "'");
        }
    }
    auto need = [&](const std::string& name) {
        auto it = pos.find(name);
        if (it == pos.end()) throw Error("header: missing column '" + name + "'");
        return it->second;
    };
    HeaderLayout layout;
    layout.width = header.size();
    layout.id = need("id");
    layout.time = need("time");
    layout.event = need("event");
    for (const auto& var : schema.variables) {
        layout.clinical.push_back(need(std::string(kClinPrefix) + var.name));
    }
    for (std::size_t k = 0; k < schema.feature_dim; ++k) {
        layout.features.push_back(need(std::string(kFeatPrefix) + std::to_string(k)));
    }
    const std::size_t expected = 3 + schema.variables.size() + schema.feature_dim;
    if (header.size() != expected) {
        for (const auto& h : header) {
            if (h == "id" || h == "time" || h == "event") continue;
            bool known = false;
            if (starts_with(h, kClinPrefix)) {
                const auto name = h.substr(kClinPrefix.size());
                for (const auto& v : schema.variables) known = known || v.name == name;
            } else if (starts_with(h, kFeatPrefix)) {
                long long k = 0;
                known = parse_int(std::string_view(h).substr(kFeatPrefix.size()), k) && k >= 0 &&
                        static_cast<std::size_t>(k) < schema.feature_dim;
            }
            if (!known) throw Error("header: column '" + h + "' not in schema");
        }
    }
    return layout;
}

std::vector<std::string> read_fields(const std::string& line) {
    std::string_view text(line);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    return split(text, ',');
}

std::string strip_utf8_bom(std::string line) {
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
    }
    return line;
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t Schema::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (variables[i].name == name) return i;
    }
    throw Error("unknown clinical variable '" + name + "'");
}

double numeric_value(const ClinicalValue& v) {
    if (const double* d = std::get_if<double>(&v)) return *d;
    throw Error("clinical value '" + std::get<std::string>(v) + "' is not numeric (cohort not encoded)");
}

std::size_t Cohort::n_events() const noexcept {
    return static_cast<std::size_t>(std::count_if(patients.begin(), patients.end(),
                                                  [](const Patient& p) { return p.event == 1; }));
}

std::vector<double> Cohort::times() const {
    std::vector<double> out;
    out.reserve(patients.size());
    for (const auto& p : patients) out.push_back(p.time);
    return out;
}

std::vector<int> Cohort::events() const {
    std::vector<int> out;
    out.reserve(patients.size());
    for (const auto& p : patients) out.push_back(p.event);
    return out;
}

std::vector<std::string> Cohort::ids() const {
    std::vector<std::string> out;
    out.reserve(patients.size());
    for (const auto& p : patients) out.push_back(p.id);
    return out;
}

std::vector<double> Cohort::clinical_column(std::size_t var) const {
    std::vector<double> out;
    out.reserve(patients.size());
    for (const auto& p : patients) out.push_back(numeric_value(p.clinical.at(var)));
    return out;
}

void Cohort::validate() const {
    if (schema.feature_dim == 0 && schema.variables.empty()) {
        throw Error("cohort has neither clinical variables nor features");
    }
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < patients.size(); ++r) {
        const auto& p = patients[r];
        const auto where = "patient '" + p.id + "' (" + row_tag(r + 1) + ")";
        if (!seen.insert(p.id).second) throw Error("duplicate id " + where);
        if (!(p.time >= 0.0) || !std::isfinite(p.time)) throw Error("negative or non-finite time for " + where);
        if (p.event != 0 && p.event != 1) throw Error("event must be 0 or 1 for " + where);
        if (p.features.size() != schema.feature_dim) throw Error("feature count mismatch for " + where);
        if (p.clinical.size() != schema.variables.size()) throw Error("clinical count mismatch for " + where);
        for (std::size_t v = 0; v < schema.variables.size(); ++v) {
            const auto& var = schema.variables[v];
            const auto& cell = p.clinical[v];
            if (var.kind == VariableKind::continuous || encoded) {
                if (!std::holds_alternative<double>(cell)) {
                    throw Error("non-numeric value in clin_" + var.name + " for " + where);
                }
            } else {
                const auto* label = std::get_if<std::string>(&cell);
                if (!label || std::find(var.categories.begin(), var.categories.end(), *label) ==
                                  var.categories.end()) {
                    throw Error("unknown category in clin_" + var.name + " for " + where);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// CSV

Cohort read_cohort(std::istream& in, const Schema& schema) {
    std::string line;
    if (!std::getline(in, line)) throw Error("cohort file is empty");
    const HeaderLayout layout = map_header(read_fields(strip_utf8_bom(line)), schema);

    Cohort cohort;
    cohort.schema = schema;
    std::unordered_set<std::string> ids;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto fields = read_fields(line);
        if (fields.size() != layout.width) {
            throw Error(row_tag(row) + ": expected " + std::to_string(layout.width) + " fields, got " +
                        std::to_string(fields.size()));
        }
        Patient p;
        p.id = fields[layout.id];
        if (p.id.empty()) throw Error(row_tag(row) + ": empty id");
        if (!ids.insert(p.id).second) throw Error(row_tag(row) + ": duplicate id '" + p.id + "'");

        if (!parse_double(fields[layout.time], p.time) || !std::isfinite(p.time)) {
            throw Error(row_tag(row) + ": non-numeric time '" + fields[layout.time] + "'");
        }
        if (p.time < 0.0) throw Error(row_tag(row) + ": negative time");
        const auto& ev = fields[layout.event];
        if (ev == "0") {
            p.event = 0;
        } else if (ev == "1") {
            p.event = 1;
        } else {
            throw Error(row_tag(row) + ": event must be 0 or 1, got '" + ev + "'");
        }

        p.clinical.reserve(schema.variables.size());
        for (std::size_t v = 0; v < schema.variables.size(); ++v) {
            const auto& var = schema.variables[v];
            const auto& text = fields[layout.clinical[v]];
            if (text.empty()) throw Error(row_tag(row) + ": missing value in clin_" + var.name);
            if (var.kind == VariableKind::continuous) {
                double value = 0.0;
                if (!parse_double(text, value) || !std::isfinite(value)) {
                    throw Error(row_tag(row) + ": non-numeric value '" + text + "' in clin_" + var.name);
                }
                p.clinical.emplace_back(value);
            } else {
                if (std::find(var.categories.begin(), var.categories.end(), text) == var.categories.end()) {
                    throw Error(row_tag(row) + ": unknown category '" + text + "' in clin_" + var.name);
                }
                p.clinical.emplace_back(text);
            }
        }
        p.features.reserve(schema.feature_dim);
        for (std::size_t k = 0; k < schema.feature_dim; ++k) {
            const auto& text = fields[layout.features[k]];
            double value = 0.0;
            if (!parse_double(text, value) || !std::isfinite(value)) {
                throw Error(row_tag(row) + ": non-numeric value '" + text + "' in feat_" + std::to_string(k));
            }
            p.features.push_back(value);
        }
        cohort.patients.push_back(std::move(p));
    }
    return cohort;
}

Cohort load_cohort(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open cohort file " + path.string());
    try {
        return read_cohort(in, schema);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_cohort(std::ostream& out, const Cohort& cohort) {
    const auto& schema = cohort.schema;
    out << "id,time,event";
    for (const auto& var : schema.variables) out << ',' << kClinPrefix << var.name;
    for (std::size_t k = 0; k < schema.feature_dim; ++k) out << ',' << kFeatPrefix << k;
    out << '\n';
    for (const auto& p : cohort.patients) {
        out << p.id << ',' << format_double(p.time) << ',' << p.event;
        for (const auto& cell : p.clinical) {
            out << ',';
            if (const double* d = std::get_if<double>(&cell)) {
                out << format_double(*d);
            } else {
                out << std::get<std::string>(cell);
            }
        }
        for (double f : p.features) out << ',' << format_double(f);
        out << '\n';
    }
}

void save_cohort(const std::filesystem::path& path, const Cohort& cohort) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write cohort file " + path.string());
    write_cohort(out, cohort);
}

Schema infer_schema(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("cohort file is empty");
    const auto header = read_fields(strip_utf8_bom(line));
    std::vector<std::size_t> clin_cols;
    std::size_t feature_dim = 0;
    Schema schema;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto& h = header[c];
        if (starts_with(h, kClinPrefix)) {
            clin_cols.push_back(c);
            schema.variables.push_back({h.substr(kClinPrefix.size()), VariableKind::continuous, {}});
        } else if (starts_with(h, kFeatPrefix)) {
            ++feature_dim;
        } else if (h != "id" && h != "time" && h != "event") {
            throw Error("header: unrecognized column '" + h + "'");
        }
    }
    schema.feature_dim = feature_dim;
    std::vector<std::set<std::string>> labels(clin_cols.size());
    std::vector<bool> numeric(clin_cols.size(), true);
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = read_fields(line);
        if (fields.size() != header.size()) continue;  // reported properly by read_cohort
        for (std::size_t v = 0; v < clin_cols.size(); ++v) {
            const auto& text = fields[clin_cols[v]];
            double value = 0.0;
            if (!parse_double(text, value)) numeric[v] = false;
            if (!text.empty()) labels[v].insert(text);
        }
    }
    for (std::size_t v = 0; v < clin_cols.size(); ++v) {
        if (!numeric[v]) {
            schema.variables[v].kind = VariableKind::categorical;
            schema.variables[v].categories.assign(labels[v].begin(), labels[v].end());
        }
    }
    return schema;
}

Schema infer_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open cohort file " + path.string());
    return infer_schema(in);
}

Schema read_schema(std::istream& in) {
    const auto cfg = KeyValueConfig::parse(in);
    Schema schema;
    bool have_dim = false;
    for (const auto& e : cfg.entries()) {
        if (e.key == "feature_dim") {
            long long d = 0;
            if (!parse_int(e.value, d) || d < 0) throw Error("schema: invalid feature_dim '" + e.value + "'");
            schema.feature_dim = static_cast<std::size_t>(d);
            have_dim = true;
        } else if (starts_with(e.key, kClinPrefix)) {
            ClinicalVariable var;
            var.name = e.key.substr(kClinPrefix.size());
            if (e.value == "continuous") {
                var.kind = VariableKind::continuous;
            } else if (starts_with(e.value, "categorical:")) {
                var.kind = VariableKind::categorical;
                for (auto& c : split(std::string_view(e.value).substr(12), '|')) {
                    c = trim(c);
                    if (c.empty()) throw Error("schema: empty category for " + e.key);
                    var.categories.push_back(c);
                }
                std::sort(var.categories.begin(), var.categories.end());
                if (std::adjacent_find(var.categories.begin(), var.categories.end()) != var.categories.end()) {
                    throw Error("schema: duplicate category for " + e.key);
                }
            } else {
                throw Error("schema: unknown kind '" + e.value + "' for " + e.key);
            }
            schema.variables.push_back(std::move(var));
        } else {
            throw Error("schema: unrecognized key '" + e.key + "'");
        }
    }
    if (!have_dim) throw Error("schema: missing feature_dim");
    return schema;
}

Schema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open schema file " + path.string());
    return read_schema(in);
}

void write_schema(std::ostream& out, const Schema& schema) {
    out << "feature_dim = " << schema.feature_dim << '\n';
    for (const auto& var : schema.variables) {
        out << kClinPrefix << var.name << " = ";
        if (var.kind == VariableKind::continuous) {
            out << "continuous\n";
        } else {
            out << "categorical:";
            for (std::size_t i = 0; i < var.categories.size(); ++i) {
                out << (i ? "|" : "") << var.categories[i];
            }
            out << '\n';
        }
    }
}

void save_schema(const std::filesystem::path& path, const Schema& schema) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write schema file " + path.string());
    write_schema(out, schema);
}

// ---------------------------------------------------------------------------
// Preprocessing

ColumnMoments column_moments(const std::vector<double>& values) {
    ColumnMoments m;
    if (values.empty()) {
        m.degenerate = true;
        return m;
    }
    const double n = static_cast<double>(values.size());
    m.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    double scale = 0.0;
    for (double v : values) {
        ss += (v - m.mean) * (v - m.mean);
        scale = std::max(scale, std::abs(v));
    }
    m.stddev = std::sqrt(ss / n);
    // A constant column can leave rounding residue in the mean.
    if (m.stddev <= 1e-12 * std::max(1.0, scale)) {
        m.stddev = 0.0;
        m.degenerate = true;
    }
    return m;
}

std::vector<std::string> PreprocessState::degenerate_columns() const {
    std::vector<std::string> out;
    for (const auto& [name, m] : continuous) {
        if (m.degenerate) out.push_back(std::string(kClinPrefix) + name);
    }
    for (std::size_t k = 0; k < features.size(); ++k) {
        if (features[k].degenerate) out.push_back(std::string(kFeatPrefix) + std::to_string(k));
    }
    return out;
}

void write_preprocess(std::ostream& out, const PreprocessState& state) {
    out << "# z-score moments use the population standard deviation\n";
    out << "[continuous]\n";
    for (const auto& [name, m] : state.continuous) {
        out << kClinPrefix << name << " = " << format_double(m.mean) << ' ' << format_double(m.stddev)
            << (m.degenerate ? " degenerate" : "") << '\n';
    }
    out << "\n[categorical]\n";
    for (const auto& [name, cats] : state.codes) {
        out << kClinPrefix << name << " = ";
        for (std::size_t i = 0; i < cats.size(); ++i) out << (i ? "|" : "") << cats[i];
        out << '\n';
    }
    out << "\n[features]\n";
    for (std::size_t k = 0; k < state.features.size(); ++k) {
        const auto& m = state.features[k];
        out << kFeatPrefix << k << " = " << format_double(m.mean) << ' ' << format_double(m.stddev)
            << (m.degenerate ? " degenerate" : "") << '\n';
    }
}

PreprocessState read_preprocess(std::istream& in) {
    const auto cfg = KeyValueConfig::parse(in);
    PreprocessState state;
    auto parse_moments = [](const KeyValueConfig::Entry& e) {
        const auto parts = split(e.value, ' ');
        ColumnMoments m;
        if (parts.size() < 2 || !parse_double(parts[0], m.mean) || !parse_double(parts[1], m.stddev)) {
            throw Error("preprocess state: malformed moments for " + e.key);
        }
        m.degenerate = parts.size() > 2 && parts[2] == "degenerate";
        return m;
    };
    for (const auto& e : cfg.entries()) {
        if (e.section == "continuous") {
            state.continuous[e.key.substr(kClinPrefix.size())] = parse_moments(e);
        } else if (e.section == "categorical") {
            state.codes[e.key.substr(kClinPrefix.size())] = split(e.value, '|');
        } else if (e.section == "features") {
            state.features.push_back(parse_moments(e));
        } else {
            throw Error("preprocess state: unexpected key " + e.key);
        }
    }
    return state;
}

std::uint64_t PreprocessState::hash() const {
    std::ostringstream os;
    write_preprocess(os, *this);
    return fnv1a(os.str());
}

PreprocessState fit_preprocess(const Cohort& cohort) {
    if (cohort.patients.empty()) throw Error("fit_preprocess: empty cohort");
    if (cohort.encoded) throw Error("fit_preprocess: cohort is already preprocessed");
    PreprocessState state;
    const auto& schema = cohort.schema;
    for (std::size_t v = 0; v < schema.variables.size(); ++v) {
        const auto& var = schema.variables[v];
        if (var.kind == VariableKind::continuous) {
            state.continuous[var.name] = column_moments(cohort.clinical_column(v));
        } else {
            auto cats = var.categories;
            std::sort(cats.begin(), cats.end());
            state.codes[var.name] = std::move(cats);
        }
    }
    state.features.resize(schema.feature_dim);
    std::vector<double> column(cohort.size());
    for (std::size_t k = 0; k < schema.feature_dim; ++k) {
        for (std::size_t r = 0; r < cohort.size(); ++r) column[r] = cohort.patients[r].features[k];
        state.features[k] = column_moments(column);
    }
    return state;
}

namespace {

double zscore(double x, const ColumnMoments& m) {
    return m.degenerate ? 0.0 : (x - m.mean) / m.stddev;
}

}  // namespace

double invert_continuous(double z, const ColumnMoments& m) {
    return m.degenerate ? m.mean : z * m.stddev + m.mean;
}

Cohort apply_preprocess(const Cohort& cohort, const PreprocessState& state) {
    if (cohort.encoded) throw Error("apply_preprocess: cohort is already preprocessed");
    const auto& schema = cohort.schema;
    if (state.features.size() != schema.feature_dim) {
        throw Error("apply_preprocess: feature dimension differs from preprocessing state");
    }
    struct Plan {
        const ColumnMoments* moments = nullptr;
        const std::vector<std::string>* codes = nullptr;
    };
    std::vector<Plan> plans(schema.variables.size());
    for (std::size_t v = 0; v < schema.variables.size(); ++v) {
        const auto& var = schema.variables[v];
        if (var.kind == VariableKind::continuous) {
            auto it = state.continuous.find(var.name);
            if (it == state.continuous.end()) {
                throw Error("apply_preprocess: no moments for clin_" + var.name);
            }
            plans[v].moments = &it->second;
        } else {
            auto it = state.codes.find(var.name);
            if (it == state.codes.end()) {
                throw Error("apply_preprocess: no code table for clin_" + var.name);
            }
            plans[v].codes = &it->second;
        }
    }

    Cohort out = cohort;
    out.encoded = true;
    for (std::size_t r = 0; r < out.patients.size(); ++r) {
        auto& p = out.patients[r];
        for (std::size_t v = 0; v < plans.size(); ++v) {
            if (plans[v].moments) {
                p.clinical[v] = zscore(numeric_value(p.clinical[v]), *plans[v].moments);
            } else {
                const auto& label = std::get<std::string>(p.clinical[v]);
                const auto& codes = *plans[v].codes;
                const auto it = std::find(codes.begin(), codes.end(), label);
                if (it == codes.end()) {
                    throw Error("apply_preprocess: unseen category '" + label + "' in clin_" +
                                schema.variables[v].name + " for patient '" + p.id + "'");
                }
                p.clinical[v] = static_cast<double>(it - codes.begin());
            }
        }
        for (std::size_t k = 0; k < p.features.size(); ++k) {
            p.features[k] = zscore(p.features[k], state.features[k]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Splitting

std::array<std::size_t, 3> allocate_counts(std::size_t count, const SplitFractions& f) {
    const std::array<double, 3> fr{f.train, f.val, f.test};
    std::array<std::size_t, 3> out{};
    std::array<double, 3> rem{};
    std::size_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
        const double quota = fr[s] * static_cast<double>(count);
        out[s] = static_cast<std::size_t>(std::floor(quota + 1e-9));
        rem[s] = quota - static_cast<double>(out[s]);
        assigned += out[s];
    }
    while (assigned > count) {
        // Only reachable through the 1e-9 floor slack on fractions summing to 1+eps.
        for (int s = 2; s >= 0 && assigned > count; --s) {
            if (out[s] > 0) {
                --out[s];
                --assigned;
            }
        }
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
    for (int k = 0; assigned < count; k = (k + 1) % 3) {
        if (fr[order[k]] > 0.0) {
            ++out[order[k]];
            ++assigned;
        }
    }
    return out;
}

std::array<std::array<std::size_t, 3>, 2> split_counts(std::size_t n_events, std::size_t n_censored,
                                                       const SplitFractions& f) {
    auto events = allocate_counts(n_events, f);
    const std::array<double, 3> fr{f.train, f.val, f.test};
    // Give each split with a nonzero fraction at least one event when there are enough.
    const std::size_t active = static_cast<std::size_t>(std::count_if(fr.begin(), fr.end(),
                                                                      [](double x) { return x > 0.0; }));
    if (n_events >= active) {
        for (int s = 0; s < 3; ++s) {
            if (fr[s] > 0.0 && events[s] == 0) {
                const auto donor = static_cast<int>(std::max_element(events.begin(), events.end()) - events.begin());
                --events[donor];
                ++events[s];
            }
        }
    }
    return {events, allocate_counts(n_censored, f)};
}

Cohort subset(const Cohort& cohort, const std::vector<std::size_t>& rows) {
    Cohort out;
    out.schema = cohort.schema;
    out.encoded = cohort.encoded;
    out.patients.reserve(rows.size());
    for (auto r : rows) out.patients.push_back(cohort.patients.at(r));
    return out;
}

CohortSplit stratified_split(const Cohort& cohort, const SplitFractions& fractions, std::uint64_t seed) {
    if (cohort.patients.empty()) throw Error("stratified_split: empty cohort");
    const std::array<double, 3> fr{fractions.train, fractions.val, fractions.test};
    for (double x : fr) {
        if (!(x >= 0.0)) throw Error("stratified_split: fractions must be non-negative");
    }
    if (std::abs(fr[0] + fr[1] + fr[2] - 1.0) > 1e-9) {
        throw Error("stratified_split: fractions must sum to 1");
    }

    std::array<std::vector<std::size_t>, 2> strata;  // events, censored
    for (std::size_t r = 0; r < cohort.size(); ++r) {
        strata[cohort.patients[r].event == 1 ? 0 : 1].push_back(r);
    }
    const auto counts = split_counts(strata[0].size(), strata[1].size(), fractions);

    std::array<std::vector<std::size_t>, 3> rows;
    for (int s = 0; s < 2; ++s) {
        auto rng = make_rng(seed, static_cast<std::uint64_t>(s));
        auto members = strata[s];
        std::shuffle(members.begin(), members.end(), rng);
        std::size_t next = 0;
        for (int part = 0; part < 3; ++part) {
            for (std::size_t k = 0; k < counts[s][part]; ++k) rows[part].push_back(members[next++]);
        }
    }
    for (auto& r : rows) std::sort(r.begin(), r.end());
    return {subset(cohort, rows[0]), subset(cohort, rows[1]), subset(cohort, rows[2])};
}

}  // namespace survkit
