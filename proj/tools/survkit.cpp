#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "survkit/error.hpp"
#include "survkit/format.hpp"
#include "survkit/pipeline.hpp"

namespace fs = std::filesystem;
using namespace survkit;

namespace {

/// `--config` plus one `--<key>` flag per recognized config key.
struct ConfigFlags {
    std::string config_file;
    std::map<std::string, std::string> overrides;
    std::optional<std::string> seed;

    void attach(CLI::App* app, bool seed_required) {
        app->add_option("--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
        for (const auto& [section, key] : config_keys()) {
            if (key == "seed") continue;
            auto* opt = app->add_option_function<std::string>(
                "--" + key, [this, key = key](const std::string& v) { overrides[key] = v; },
                "override '" + key + "' [" + section + "]");
            opt->type_name("VALUE");
        }
        auto* seed_opt = app->add_option_function<std::string>(
            "--seed", [this](const std::string& v) { seed = v; }, "random seed");
        if (seed_required) seed_opt->required();
    }

    RunConfig resolve() const {
        try {
            KeyValueConfig kv = config_file.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_file);
            const auto& keys = config_keys();
            auto section_of = [&](const std::string& key) {
                for (const auto& k : keys)
                    if (k.second == key) return k.first;
                return std::string{};
            };
            for (const auto& [key, value] : overrides) kv.set(key, value, section_of(key));
            if (seed) {
                long long s = 0;
                if (!parse_int(*seed, s) || s < 0) throw Error("--seed expects a non-negative integer");
                kv.set("seed", *seed, "run");
            }
            return run_config_from(kv);
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError("config", e.what());
        }
    }
};

ExperimentConfig single_experiment(const std::string& text) {
    try {
        const auto list = parse_experiments(text);
        if (list.size() != 1) throw Error("expected exactly one experiment, got '" + text + "'");
        return list.front();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError("config", e.what());
    }
}

void print_outcome(const ExperimentOutcome& o) {
    std::cout << "experiment " << o.experiment.id << " (" << o.experiment.describe() << ") -> "
              << o.directory.string() << '\n';
    for (const auto& w : o.warnings) std::cout << "  warning: " << w << '\n';
}

void print_metrics(const ExperimentOutcome& o) {
    std::cout << "  c_td " << format_fixed(o.evaluation.concordance.c_td, 4) << "  integrated_auc "
              << format_fixed(o.evaluation.auc.integrated_auc, 4) << '\n';
}

template <class Fn>
void write_to(const fs::path& path, Fn&& fn) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StageError("write", "cannot write " + path.string());
    fn(out);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StageError("report", "cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Rebuilds the summary table from experiment directories under `dir`.
std::vector<SummaryRow> collect_summary(const fs::path& dir) {
    std::vector<SummaryRow> rows;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        long long id = 0;
        if (!entry.is_directory() || name.rfind("exp", 0) != 0 || !parse_int(name.substr(3), id)) continue;
        SummaryRow row;
        row.experiment = static_cast<int>(id);
        if (fs::exists(entry.path() / "FAILED") || !fs::exists(entry.path() / "metrics.csv")) {
            row.failed = true;
        } else {
            auto kv_lines = split(slurp(entry.path() / "metrics.csv"), '\n');
            for (const auto& line : kv_lines) {
                const auto cells = split(line, ',');
                if (cells.size() != 2) continue;
                if (cells[0] == "c_td") parse_double(cells[1], row.c_td);
                if (cells[0] == "integrated_auc") parse_double(cells[1], row.integrated_auc);
            }
        }
        if (fs::exists(entry.path() / "selection.txt")) {
            std::ifstream in(entry.path() / "selection.txt");
            row.n_clinical_selected = read_manifest(in).size();
        }
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.experiment < b.experiment; });
    return rows;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"survkit: discrete-time survival toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "survkit 0.1.0");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
    std::string synth_spec, synth_out, synth_truth, synth_schema;
    long long synth_seed = 0;
    std::optional<long long> synth_n;
    std::optional<double> synth_rate;
    synth->add_option("--spec", synth_spec, "synthetic cohort spec file (default: built-in informative cohort)")
        ->check(CLI::ExistingFile);
    synth->add_option("--seed", synth_seed, "random seed")->check(CLI::NonNegativeNumber);
    synth->add_option("--out", synth_out, "cohort CSV to write")->required();
    synth->add_option("--truth", synth_truth, "latent risk sidecar (default: <out>.truth.csv)");
    synth->add_option("--schema_out", synth_schema, "schema file (default: <out>.schema)");
    synth->add_option("--n_patients", synth_n, "override cohort size");
    synth->add_option("--event_rate", synth_rate, "override event fraction");

    ConfigFlags prep_flags, select_flags, train_flags, experiment_flags, matrix_flags;
    auto* prep = app.add_subcommand("prep", "split the cohort and fit preprocessing on the training split");
    prep_flags.attach(prep, false);

    auto* select = app.add_subcommand("select", "score clinical variables on the training split");
    select_flags.attach(select, false);
    std::string select_mode = "spearman";
    double select_threshold = 0.1;
    select->add_option("--mode", select_mode, "spearman or importance");
    select->add_option("--threshold", select_threshold, "keep variables with |score| >= threshold")
        ->check(CLI::PositiveNumber);

    auto* train_cmd = app.add_subcommand("train", "train one experiment without evaluating it");
    train_flags.attach(train_cmd, true);
    std::string train_experiment_id;
    train_cmd->add_option("--experiment", train_experiment_id, "experiment id 1-9 or mode@threshold")->required();

    auto* eval = app.add_subcommand("eval", "evaluate a trained experiment directory on its test split");
    std::string eval_run;
    eval->add_option("--run", eval_run, "experiment directory")->required()->check(CLI::ExistingDirectory);

    auto* experiment = app.add_subcommand("experiment", "train and evaluate one experiment");
    experiment_flags.attach(experiment, true);
    std::string experiment_id;
    experiment->add_option("--experiment", experiment_id, "experiment id 1-9 or mode@threshold")->required();

    auto* matrix = app.add_subcommand("matrix", "run all configured experiments on one shared split");
    matrix_flags.attach(matrix, true);

    auto* report = app.add_subcommand("report", "print an experiment report or rebuild a matrix summary");
    std::string report_path;
    report->add_option("path", report_path, "experiment or matrix output directory")
        ->required()
        ->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;  // --help and --version exit 0
    }

    try {
        if (*synth) {
            SyntheticSpec spec = informative_spec();
            if (!synth_spec.empty()) {
                try {
                    spec = load_synthetic_spec(synth_spec);
                } catch (const std::exception& e) {
                    throw StageError("config", e.what());
                }
            }
            if (synth_n) {
                if (*synth_n < 2) throw StageError("config", "--n_patients must be at least 2");
                spec.n_patients = static_cast<std::size_t>(*synth_n);
            }
            if (synth_rate) spec.event_rate = *synth_rate;
            SyntheticCohort cohort;
            try {
                cohort = generate_synthetic(spec, static_cast<std::uint64_t>(synth_seed));
            } catch (const std::exception& e) {
                throw StageError("synth", e.what());
            }
            const fs::path out = synth_out;
            const fs::path truth = synth_truth.empty() ? fs::path(synth_out + ".truth.csv") : fs::path(synth_truth);
            const fs::path schema = synth_schema.empty() ? fs::path(synth_out + ".schema") : fs::path(synth_schema);
            write_to(out, [&](std::ostream& o) { write_cohort(o, cohort.cohort); });
            write_to(truth, [&](std::ostream& o) { write_truth(o, cohort); });
            write_to(schema, [&](std::ostream& o) { write_schema(o, cohort.cohort.schema); });
            std::cout << "wrote " << out.string() << ": " << cohort.cohort.size() << " patients, "
                      << cohort.cohort.n_events() << " events\n";
        } else if (*prep) {
            const RunConfig config = prep_flags.resolve();
            const PreparedData data = prepare(config, load_run_cohort(config));
            fs::create_directories(config.output);
            write_ids(config.output / "split_train.txt", data.raw.train);
            write_ids(config.output / "split_val.txt", data.raw.val);
            write_ids(config.output / "split_test.txt", data.raw.test);
            write_to(config.output / "preprocess.txt", [&](std::ostream& o) { write_preprocess(o, data.state); });
            write_to(config.output / "schema.txt", [&](std::ostream& o) { write_schema(o, data.cohort.schema); });
            std::cout << "split: train " << data.raw.train.size() << ", val " << data.raw.val.size() << ", test "
                      << data.raw.test.size() << "; max_time " << format_double(data.grid.max_time()) << '\n';
        } else if (*select) {
            const RunConfig config = select_flags.resolve();
            SelectionMode mode{};
            try {
                mode = parse_selection_mode(select_mode);
            } catch (const std::exception& e) {
                throw StageError("config", e.what());
            }
            const PreparedData data = prepare(config, load_run_cohort(config));
            const auto scores = compute_scores(config, data);
            const auto chosen = select_variables(scores, mode, select_threshold);
            fs::create_directories(config.output);
            write_ids(config.output / "selection_inputs.txt", data.encoded.train);
            write_to(config.output / "scores.csv", [&](std::ostream& o) { write_scores(o, scores); });
            write_to(config.output / "selection.txt", [&](std::ostream& o) { write_manifest(o, chosen); });
            write_scores(std::cout, scores);
            std::cout << chosen.size() << " variable(s) with " << to_string(mode)
                      << " |score| >= " << format_double(select_threshold) << '\n';
        } else if (*train_cmd) {
            RunConfig config = train_flags.resolve();
            const auto exp = single_experiment(train_experiment_id);
            config.experiments = {exp};
            const PreparedData data = prepare(config, load_run_cohort(config));
            const auto scores = compute_scores(config, data);
            const auto outcome = train_experiment(config, data, scores, exp);
            print_outcome(outcome);
            std::cout << "  best epoch " << outcome.trained.history.best_epoch << " of "
                      << outcome.trained.history.stopped_epoch << '\n';
        } else if (*eval) {
            const auto outcome = evaluate_run(eval_run);
            print_outcome(outcome);
            print_metrics(outcome);
        } else if (*experiment) {
            RunConfig config = experiment_flags.resolve();
            const auto exp = single_experiment(experiment_id);
            config.experiments = {exp};
            const auto outcome = run_experiment(config, exp.id);
            print_outcome(outcome);
            print_metrics(outcome);
        } else if (*matrix) {
            const RunConfig config = matrix_flags.resolve();
            const auto rows = run_matrix(config);
            write_summary(std::cout, rows);
            std::size_t failed = 0;
            for (const auto& r : rows) {
                if (r.failed) {
                    ++failed;
                    std::cerr << "experiment " << r.experiment << " failed: " << r.error << '\n';
                }
            }
            if (failed == rows.size()) throw StageError("matrix", "every experiment failed");
        } else if (*report) {
            const fs::path dir = report_path;
            if (fs::exists(dir / "report.txt")) {
                std::cout << slurp(dir / "report.txt");
            } else {
                const auto rows = collect_summary(dir);
                if (rows.empty()) throw StageError("report", "no report.txt or exp* directories in " + dir.string());
                write_summary(std::cout, rows);
            }
        }
    } catch (const StageError& e) {
        std::cerr << "survkit: [" << e.stage() << "] " << e.cause() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "survkit: [internal] " << e.what() << '\n';
        return 3;
    }
    return 0;
}
