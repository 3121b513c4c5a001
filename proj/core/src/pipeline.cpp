#include "survkit/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>

#include "survkit/error.hpp"
#include "survkit/format.hpp"
#include "survkit/random.hpp"

namespace survkit {

namespace fs = std::filesystem;

namespace {

// Independent seed streams derived from the run seed.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kForestStream = 2;
constexpr std::uint64_t kInitStream = 3;
constexpr std::uint64_t kTrainStream = 4;
constexpr std::uint64_t kPermuteStream = 5;
constexpr std::uint64_t kLrFindStream = 6;

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    fn(out);
    if (!out) throw Error("write failed for " + path.string());
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw Error("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

template <class Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

const std::vector<std::pair<std::string, std::string>>& config_keys() {
    static const std::vector<std::pair<std::string, std::string>> keys{
        {"data", "cohort"},        {"data", "schema"},           {"data", "output"},
        {"grid", "n_intervals"},   {"grid", "max_time"},
        {"split", "train_fraction"}, {"split", "val_fraction"},  {"split", "test_fraction"},
        {"network", "hidden1"},    {"network", "hidden2"},       {"network", "dropout"},
        {"network", "batch_norm"},
        {"train", "max_epochs"},   {"train", "patience"},        {"train", "learning_rate"},
        {"train", "batch_size"},   {"train", "lr_find"},         {"train", "lr_min"},
        {"train", "lr_max"},       {"train", "lr_steps"},
        {"select", "n_trees"},     {"select", "min_samples_split"}, {"select", "max_depth"},
        {"run", "experiments"},    {"run", "seed"},              {"run", "points_per_interval"},
        {"run", "violin_censored_at"}, {"run", "permute_labels"}, {"run", "jobs"},
    };
    return keys;
}

std::vector<ExperimentConfig> parse_experiments(const std::string& text) {
    const std::string spec = trim(text);
    if (spec == "all") return canonical_experiments();
    std::vector<ExperimentConfig> out;
    int next_custom = 10;
    for (auto item : split(spec, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        long long id = 0;
        if (parse_int(item, id)) {
            out.push_back(canonical_experiment(static_cast<int>(id)));
            continue;
        }
        ExperimentConfig custom;
        custom.id = next_custom++;
        std::string body = item;
        const auto slash = body.find('/');
        if (slash != std::string::npos) {
            if (body.substr(slash + 1) != "clinical-only") throw Error("experiment '" + item + "': unknown suffix");
            custom.use_image_features = false;
            body = body.substr(0, slash);
        }
        const auto at = body.find('@');
        if (at == std::string::npos || !parse_double(body.substr(at + 1), custom.threshold) ||
            !(custom.threshold >= 0.0)) {
            throw Error("experiment '" + item + "': expected <id>, all, or <spearman|importance>@<threshold>");
        }
        custom.clinical = parse_selection_mode(body.substr(0, at)) == SelectionMode::spearman
                              ? ClinicalMode::spearman_threshold
                              : ClinicalMode::importance_threshold;
        out.push_back(custom);
    }
    if (out.empty()) throw Error("no experiments requested");
    return out;
}

std::string format_experiments(const std::vector<ExperimentConfig>& experiments) {
    std::string out;
    for (const auto& e : experiments) {
        if (!out.empty()) out += ',';
        if (e.id >= 1 && e.id <= 9) {
            out += std::to_string(e.id);
        } else {
            out += e.clinical == ClinicalMode::spearman_threshold ? "spearman@" : "importance@";
            out += format_double(e.threshold);
            if (!e.use_image_features) out += "/clinical-only";
        }
    }
    return out;
}

RunConfig run_config_from(const KeyValueConfig& kv) {
    for (const auto& e : kv.entries()) {
        const auto& keys = config_keys();
        if (std::none_of(keys.begin(), keys.end(), [&](const auto& k) { return k.second == e.key; })) {
            throw Error("unknown config key '" + e.key + "'");
        }
    }
    auto size = [&](const std::string& key, std::size_t fallback) {
        const long long v = kv.get_int(key, static_cast<long long>(fallback));
        if (v < 0) throw Error("config key '" + key + "' must be non-negative");
        return static_cast<std::size_t>(v);
    };

    RunConfig c;
    c.cohort = kv.get_or("cohort", "");
    c.schema = kv.get_or("schema", "");
    c.output = kv.get_or("output", c.output.string());
    c.n_intervals = size("n_intervals", c.n_intervals);
    const auto max_time = kv.get_or("max_time", "auto");
    if (max_time != "auto") {
        double m = 0.0;
        if (!parse_double(max_time, m) || !(m > 0.0)) throw Error("config key 'max_time': expected auto or a positive number");
        c.max_time = m;
    }
    c.fractions.train = kv.get_double("train_fraction", c.fractions.train);
    c.fractions.val = kv.get_double("val_fraction", c.fractions.val);
    c.fractions.test = kv.get_double("test_fraction", c.fractions.test);
    c.network.hidden1 = size("hidden1", c.network.hidden1);
    c.network.hidden2 = size("hidden2", c.network.hidden2);
    c.network.dropout = kv.get_double("dropout", c.network.dropout);
    c.network.batch_norm = parse_bool("batch_norm", kv.get_or("batch_norm", bool_text(c.network.batch_norm)));
    c.train.max_epochs = size("max_epochs", c.train.max_epochs);
    c.train.patience = size("patience", c.train.patience);
    c.train.learning_rate = kv.get_double("learning_rate", c.train.learning_rate);
    c.train.batch_size = size("batch_size", c.train.batch_size);
    c.lr_find = parse_bool("lr_find", kv.get_or("lr_find", bool_text(c.lr_find)));
    c.lr_min = kv.get_double("lr_min", c.lr_min);
    c.lr_max = kv.get_double("lr_max", c.lr_max);
    c.lr_steps = size("lr_steps", c.lr_steps);
    c.forest.n_trees = size("n_trees", c.forest.n_trees);
    c.forest.min_samples_split = size("min_samples_split", c.forest.min_samples_split);
    c.forest.max_depth = size("max_depth", c.forest.max_depth);
    if (auto e = kv.get("experiments")) c.experiments = parse_experiments(*e);
    c.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
    c.points_per_interval = size("points_per_interval", c.points_per_interval);
    const auto at = kv.get_or("violin_censored_at", "censoring_time");
    if (at == "censoring_time") {
        c.violin_censored_at = CensoredAt::censoring_time;
    } else if (at == "max_time") {
        c.violin_censored_at = CensoredAt::max_time;
    } else {
        throw Error("config key 'violin_censored_at': expected censoring_time or max_time");
    }
    c.permute_labels = parse_bool("permute_labels", kv.get_or("permute_labels", bool_text(c.permute_labels)));
    c.jobs = std::max<std::size_t>(1, size("jobs", c.jobs));

    if (c.train.batch_size == 0) throw Error("config key 'batch_size' must be positive");
    if (c.train.max_epochs == 0) throw Error("config key 'max_epochs' must be positive");
    if (c.train.patience >= c.train.max_epochs) throw Error("config key 'patience' must be below max_epochs");
    if (!(c.train.learning_rate > 0.0)) throw Error("config key 'learning_rate' must be positive");
    for (const auto& e : c.experiments) {
        if (e.needs_scores() && !(e.threshold > 0.0)) {
            throw Error("experiment " + std::to_string(e.id) + ": threshold must be positive");
        }
    }
    return c;
}

KeyValueConfig to_key_values(const RunConfig& c) {
    KeyValueConfig kv;
    auto put = [&](const std::string& key, const std::string& value) {
        const auto& keys = config_keys();
        const auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) { return k.second == key; });
        kv.set(key, value, it->first);
    };
    put("cohort", c.cohort.string());
    put("schema", c.schema.string());
    put("output", c.output.string());
    put("n_intervals", std::to_string(c.n_intervals));
    put("max_time", c.max_time ? format_double(*c.max_time) : "auto");
    put("train_fraction", format_double(c.fractions.train));
    put("val_fraction", format_double(c.fractions.val));
    put("test_fraction", format_double(c.fractions.test));
    put("hidden1", std::to_string(c.network.hidden1));
    put("hidden2", std::to_string(c.network.hidden2));
    put("dropout", format_double(c.network.dropout));
    put("batch_norm", bool_text(c.network.batch_norm));
    put("max_epochs", std::to_string(c.train.max_epochs));
    put("patience", std::to_string(c.train.patience));
    put("learning_rate", format_double(c.train.learning_rate));
    put("batch_size", std::to_string(c.train.batch_size));
    put("lr_find", bool_text(c.lr_find));
    put("lr_min", format_double(c.lr_min));
    put("lr_max", format_double(c.lr_max));
    put("lr_steps", std::to_string(c.lr_steps));
    put("n_trees", std::to_string(c.forest.n_trees));
    put("min_samples_split", std::to_string(c.forest.min_samples_split));
    put("max_depth", std::to_string(c.forest.max_depth));
    put("experiments", format_experiments(c.experiments));
    put("seed", std::to_string(c.seed));
    put("points_per_interval", std::to_string(c.points_per_interval));
    put("violin_censored_at", c.violin_censored_at == CensoredAt::max_time ? "max_time" : "censoring_time");
    put("permute_labels", bool_text(c.permute_labels));
    put("jobs", std::to_string(c.jobs));
    return kv;
}

// ---------------------------------------------------------------------------
// Stages

Cohort load_run_cohort(const RunConfig& config) {
    return stage("load", [&] {
        if (config.cohort.empty()) throw Error("no cohort file configured (key 'cohort')");
        const Schema schema = config.schema.empty() ? infer_schema(config.cohort) : load_schema(config.schema);
        Cohort cohort = load_cohort(config.cohort, schema);
        if (cohort.patients.empty()) throw Error("cohort file has no patients");
        return cohort;
    });
}

PreparedData prepare(const RunConfig& config, const Cohort& cohort) {
    PreparedData data;
    data.cohort = cohort;
    if (config.permute_labels) {
        auto rng = make_rng(config.seed, kPermuteStream);
        std::vector<std::size_t> order(cohort.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i = 0; i < order.size(); ++i) {
            data.cohort.patients[i].time = cohort.patients[order[i]].time;
            data.cohort.patients[i].event = cohort.patients[order[i]].event;
        }
    }
    stage("split", [&] {
        if (data.cohort.n_events() == 0) throw Error("cohort has no events");
        data.raw = stratified_split(data.cohort, config.fractions, derive_seed(config.seed, kSplitStream));
        if (data.raw.train.patients.empty() || data.raw.val.patients.empty() || data.raw.test.patients.empty()) {
            throw Error("train, validation and test splits must all be non-empty");
        }
    });
    stage("preprocess", [&] {
        data.state = fit_preprocess(data.raw.train);
        data.encoded.train = apply_preprocess(data.raw.train, data.state);
        data.encoded.val = apply_preprocess(data.raw.val, data.state);
        data.encoded.test = apply_preprocess(data.raw.test, data.state);
    });
    stage("grid", [&] {
        double m = 0.0;
        if (config.max_time) {
            m = *config.max_time;
        } else {
            for (const auto& p : data.raw.train.patients) m = std::max(m, p.time);
        }
        data.grid = build_grid(m, config.n_intervals);
    });
    return data;
}

std::vector<VariableScore> compute_scores(const RunConfig& config, const PreparedData& data) {
    return stage("select", [&] {
        return score_variables(data.encoded.train, config.forest, derive_seed(config.seed, kForestStream));
    });
}

Evaluation evaluate(const RunConfig& config, const SurvivalNetwork& net, const PreparedData& data,
                    const std::vector<std::string>& manifest) {
    return stage("evaluate", [&] {
        Evaluation ev;
        const auto& test = data.encoded.test;
        const auto times = test.times();
        const auto events = test.events();
        ev.test_curves = curves_from_predictions(predict(net, design_from_manifest(test, manifest)), data.grid,
                                                 config.points_per_interval);
        ev.concordance = c_td(ev.test_curves, times, events);
        ev.eval_times = default_eval_times(data.grid, times, events);
        ev.auc = cumulative_dynamic_auc(ev.test_curves, times, events, ev.eval_times);

        const auto train_curves = curves_from_predictions(predict(net, design_from_manifest(data.encoded.train, manifest)),
                                                          data.grid, config.points_per_interval);
        std::vector<SurvivalCurve> curves = ev.test_curves;
        curves.insert(curves.end(), train_curves.begin(), train_curves.end());
        std::vector<std::string> ids = test.ids(), labels(test.size(), "Test");
        auto train_ids = data.encoded.train.ids();
        ids.insert(ids.end(), train_ids.begin(), train_ids.end());
        labels.resize(ids.size(), "Train");
        std::vector<double> all_times = times;
        std::vector<int> all_events = events;
        for (const auto& p : data.encoded.train.patients) {
            all_times.push_back(p.time);
            all_events.push_back(p.event);
        }
        ev.violin = violin_data(curves, ids, all_times, all_events, labels, config.violin_censored_at);
        return ev;
    });
}

fs::path experiment_dir(const RunConfig& config, const ExperimentConfig& experiment) {
    return config.output / ("exp" + std::to_string(experiment.id));
}

void write_ids(const fs::path& path, const Cohort& cohort) {
    write_file(path, [&](std::ostream& out) {
        for (const auto& p : cohort.patients) out << p.id << '\n';
    });
}

ExperimentOutcome train_experiment(const RunConfig& config, const PreparedData& data,
                                   const std::vector<VariableScore>& scores, const ExperimentConfig& experiment) {
    ExperimentOutcome outcome;
    outcome.experiment = experiment;
    outcome.directory = experiment_dir(config, experiment);
    const auto& dir = outcome.directory;

    stage("write", [&] {
        fs::create_directories(dir);
        RunConfig resolved = config;
        resolved.experiments = {experiment};
        resolved.max_time = data.grid.max_time();
        write_file(dir / "config.resolved", [&](std::ostream& out) { to_key_values(resolved).write(out); });
        write_ids(dir / "split_train.txt", data.raw.train);
        write_ids(dir / "split_val.txt", data.raw.val);
        write_ids(dir / "split_test.txt", data.raw.test);
        // Selection scores are computed from these patients only.
        write_ids(dir / "selection_inputs.txt", data.encoded.train);
        write_file(dir / "scores.csv", [&](std::ostream& out) { write_scores(out, scores); });
        write_file(dir / "preprocess.txt", [&](std::ostream& out) { write_preprocess(out, data.state); });
    });

    outcome.design = stage("design", [&] { return build_design_matrix(data.encoded.train, experiment, scores); });
    if (outcome.design.selection_empty) {
        outcome.warnings.push_back("no clinical variable passed the threshold; inputs are image features only");
    }
    stage("write", [&] {
        write_file(dir / "selection.txt", [&](std::ostream& out) { write_manifest(out, outcome.design.clinical); });
        write_file(dir / "manifest.txt", [&](std::ostream& out) { write_manifest(out, outcome.design.manifest); });
    });

    outcome.trained = stage("train", [&] {
        std::size_t clamped = 0;
        const auto train_data = make_train_data(outcome.design.values, data.encoded.train.times(),
                                                data.encoded.train.events(), data.grid);
        const auto val_data = make_train_data(design_from_manifest(data.encoded.val, outcome.design.manifest),
                                              data.encoded.val.times(), data.encoded.val.events(), data.grid,
                                              &clamped);
        if (clamped > 0) {
            outcome.warnings.push_back(std::to_string(clamped) + " validation time(s) beyond max_time clamped");
        }
        NetworkShape shape = config.network;
        shape.input_dim = outcome.design.manifest.size();
        shape.n_intervals = data.grid.n_intervals();
        const auto net = init_network(shape, derive_seed(config.seed, kInitStream));
        TrainConfig tc = config.train;
        tc.seed = derive_seed(config.seed, kTrainStream);
        if (config.lr_find) {
            const auto sweep = lr_range_test(net, train_data, config.lr_min, config.lr_max, config.lr_steps,
                                             tc.batch_size, derive_seed(config.seed, kLrFindStream));
            write_file(dir / "lr_range.csv", [&](std::ostream& out) { write_lr_range(out, sweep); });
            tc.learning_rate = sweep.suggested_lr;
            outcome.warnings.push_back("learning rate from range test: " + format_double(sweep.suggested_lr));
        }
        return train(net, train_data, val_data, tc);
    });

    stage("write", [&] {
        write_file(dir / "model.ckpt", [&](std::ostream& out) {
            write_checkpoint(out, outcome.trained.network, data.state.hash(), data.grid.max_time());
        });
        write_file(dir / "history.csv", [&](std::ostream& out) { write_history(out, outcome.trained.history); });
    });
    return outcome;
}

void evaluate_experiment(const RunConfig& config, const PreparedData& data, ExperimentOutcome& outcome) {
    outcome.evaluation = evaluate(config, outcome.trained.network, data, outcome.design.manifest);
    const auto& ev = outcome.evaluation;
    const auto& dir = outcome.directory;
    const auto& test = data.raw.test;
    stage("report", [&] {
        std::size_t clamped = 0;
        for (const auto& p : test.patients) clamped += p.time > data.grid.max_time() ? 1 : 0;
        if (clamped > 0) {
            outcome.warnings.push_back(std::to_string(clamped) +
                                       " test time(s) beyond max_time; curves read at max_time");
        }

        write_file(dir / "metrics.csv", [&](std::ostream& out) {
            out << "metric,value\n";
            out << "c_td," << format_double(ev.concordance.c_td) << '\n';
            out << "comparable_pairs," << ev.concordance.comparable_pairs << '\n';
            out << "integrated_auc," << format_double(ev.auc.integrated_auc) << '\n';
            out << "n_test," << test.size() << '\n';
            out << "n_test_events," << test.n_events() << '\n';
            out << "best_epoch," << outcome.trained.history.best_epoch << '\n';
            out << "stopped_epoch," << outcome.trained.history.stopped_epoch << '\n';
        });
        write_file(dir / "auc_curve.csv", [&](std::ostream& out) { write_auc_curve(out, ev.auc); });
        write_file(dir / "curves.csv", [&](std::ostream& out) {
            const auto ids = test.ids();
            write_curves(out, ids, ev.test_curves);
        });
        write_file(dir / "violin.csv", [&](std::ostream& out) { write_violin_csv(out, ev.violin); });
        if (!ev.violin.groups.empty()) {
            write_file(dir / "violin.svg", [&](std::ostream& out) { out << render_violin_svg(ev.violin.groups); });
        }

        write_file(dir / "report.txt", [&](std::ostream& out) {
            const auto& h = outcome.trained.history;
            out << "experiment " << outcome.experiment.id << ": " << outcome.experiment.describe() << '\n';
            out << "inputs: " << outcome.design.manifest.size() << " columns ("
                << outcome.design.clinical.size() << " clinical)\n";
            out << "grid: " << data.grid.n_intervals() << " intervals over [0, " << format_double(data.grid.max_time())
                << "] days\n";
            out << "split: train " << data.raw.train.size() << " (" << data.raw.train.n_events() << " events), val "
                << data.raw.val.size() << " (" << data.raw.val.n_events() << " events), test " << test.size() << " ("
                << test.n_events() << " events)\n";
            out << "training: best epoch " << h.best_epoch << ", stopped at " << h.stopped_epoch << ", initial val loss "
                << format_fixed(h.initial_val_loss, 6) << '\n';
            if (!h.val_loss.empty()) {
                out << "best val loss: "
                    << format_fixed(h.best_epoch > 0 ? h.val_loss[h.best_epoch - 1] : h.initial_val_loss, 6) << '\n';
            }
            out << '\n';
            out << "c_td: " << format_fixed(ev.concordance.c_td, 6) << " over " << ev.concordance.comparable_pairs
                << " comparable pairs\n";
            out << "integrated_auc: " << format_fixed(ev.auc.integrated_auc, 6) << '\n';
            out << "\n[auc_curve]\n";
            write_auc_curve(out, ev.auc);
            out << "\n[violin]\ngroup,n,q1,median,q3\n";
            for (const auto& g : ev.violin.groups) {
                out << g.group << ',' << g.raw.size() << ',' << format_fixed(g.q1, 6) << ','
                    << format_fixed(g.median, 6) << ',' << format_fixed(g.q3, 6) << '\n';
            }
            out << "\nnotes:\n";
            out << "- continuous and feature columns standardized with the population standard deviation\n";
            const auto degenerate = data.state.degenerate_columns();
            if (!degenerate.empty()) {
                out << "- zero-variance columns mapped to 0:";
                for (const auto& c : degenerate) out << ' ' << c;
                out << '\n';
            }
            out << "- variable scores regress observed time and ignore censoring\n";
            for (const auto& n : ev.auc.notes) out << "- " << n << '\n';
            for (const auto& n : ev.violin.notes) out << "- " << n << '\n';
            for (const auto& w : outcome.warnings) out << "- " << w << '\n';
        });
    });
}

ExperimentOutcome run_experiment(const RunConfig& config, int experiment_id) {
    const auto it = std::find_if(config.experiments.begin(), config.experiments.end(),
                                 [&](const ExperimentConfig& e) { return e.id == experiment_id; });
    const ExperimentConfig experiment = it != config.experiments.end() ? *it : canonical_experiment(experiment_id);
    const Cohort cohort = load_run_cohort(config);
    const PreparedData data = prepare(config, cohort);
    const auto scores = compute_scores(config, data);
    ExperimentOutcome outcome;
    try {
        outcome = train_experiment(config, data, scores, experiment);
        evaluate_experiment(config, data, outcome);
    } catch (const StageError& e) {
        const auto dir = experiment_dir(config, experiment);
        if (fs::exists(dir)) {
            write_file(dir / "FAILED", [&](std::ostream& out) { out << e.what() << '\n'; });
        }
        throw;
    }
    return outcome;
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "experiment,n_clinical_selected,c_td,integrated_auc\n";
    for (const auto& r : rows) {
        out << r.experiment << ',' << r.n_clinical_selected << ',';
        if (r.failed) {
            out << "failed,failed\n";
        } else {
            out << format_double(r.c_td) << ',' << format_double(r.integrated_auc) << '\n';
        }
    }
}

std::vector<SummaryRow> run_matrix(const RunConfig& config) {
    const Cohort cohort = load_run_cohort(config);
    const PreparedData data = prepare(config, cohort);
    const auto scores = compute_scores(config, data);
    fs::create_directories(config.output);

    auto run_one = [&](const ExperimentConfig& experiment) {
        SummaryRow row;
        row.experiment = experiment.id;
        try {
            auto outcome = train_experiment(config, data, scores, experiment);
            evaluate_experiment(config, data, outcome);
            row.n_clinical_selected = outcome.design.clinical.size();
            row.c_td = outcome.evaluation.concordance.c_td;
            row.integrated_auc = outcome.evaluation.auc.integrated_auc;
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
            const auto dir = experiment_dir(config, experiment);
            fs::create_directories(dir);
            write_file(dir / "FAILED", [&](std::ostream& out) { out << e.what() << '\n'; });
        }
        return row;
    };

    std::vector<SummaryRow> rows(config.experiments.size());
    if (config.jobs <= 1) {
        for (std::size_t k = 0; k < rows.size(); ++k) rows[k] = run_one(config.experiments[k]);
    } else {
        for (std::size_t start = 0; start < rows.size(); start += config.jobs) {
            std::vector<std::future<SummaryRow>> running;
            const std::size_t stop = std::min(rows.size(), start + config.jobs);
            for (std::size_t k = start; k < stop; ++k) {
                running.push_back(std::async(std::launch::async, run_one, std::cref(config.experiments[k])));
            }
            for (std::size_t k = start; k < stop; ++k) rows[k] = running[k - start].get();
        }
    }
    write_file(config.output / "summary.csv", [&](std::ostream& out) { write_summary(out, rows); });
    return rows;
}

ExperimentOutcome evaluate_run(const fs::path& run_dir) {
    const RunConfig config = stage("load", [&] { return run_config_from(KeyValueConfig::load(run_dir / "config.resolved")); });
    if (config.experiments.size() != 1) throw StageError("load", "config.resolved must name exactly one experiment");
    const Cohort cohort = load_run_cohort(config);
    const PreparedData data = prepare(config, cohort);

    ExperimentOutcome outcome;
    outcome.experiment = config.experiments.front();
    outcome.directory = run_dir;
    stage("load", [&] {
        std::ifstream ckpt_in(run_dir / "model.ckpt");
        if (!ckpt_in) throw Error("missing model.ckpt in " + run_dir.string());
        auto ckpt = read_checkpoint(ckpt_in);
        if (ckpt.preprocess_hash != data.state.hash()) {
            throw Error("checkpoint was trained with a different preprocessing state");
        }
        outcome.trained.network = std::move(ckpt.network);
        std::ifstream manifest_in(run_dir / "manifest.txt");
        if (!manifest_in) throw Error("missing manifest.txt in " + run_dir.string());
        outcome.design.manifest = read_manifest(manifest_in);
        std::ifstream selection_in(run_dir / "selection.txt");
        if (selection_in) outcome.design.clinical = read_manifest(selection_in);
    });
    evaluate_experiment(config, data, outcome);
    return outcome;
}

}  // namespace survkit
