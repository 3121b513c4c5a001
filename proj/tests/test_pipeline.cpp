#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "survkit/error.hpp"
#include "survkit/pipeline.hpp"

using namespace survkit;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in, "missing ", p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const fs::path& p) {
    std::vector<std::string> out;
    std::istringstream in(slurp(p));
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

// Fresh scratch directory under the build tree.
fs::path scratch(const std::string& name) {
    const auto dir = fs::current_path() / "pipeline_scratch" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunConfig quick_config(const fs::path& dir, std::uint64_t seed, const SyntheticSpec& spec = informative_spec()) {
    const auto synth = generate_synthetic(spec, seed);
    save_cohort(dir / "cohort.csv", synth.cohort);
    save_schema(dir / "cohort.schema", synth.cohort.schema);
    RunConfig c;
    c.cohort = dir / "cohort.csv";
    c.schema = dir / "cohort.schema";
    c.output = dir / "runs";
    c.seed = seed;
    c.train.max_epochs = 15;
    c.forest.n_trees = 20;
    c.points_per_interval = 10;
    return c;
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(SURVKIT_CLI) + " " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("experiment lists") {
    CHECK(parse_experiments("all").size() == 9);
    const auto list = parse_experiments("1, 3,8,spearman@0.2,importance@0.05/clinical-only");
    REQUIRE(list.size() == 5);
    CHECK(list[2].id == 8);
    CHECK(list[3].id == 10);
    CHECK(list[3].clinical == ClinicalMode::spearman_threshold);
    CHECK(list[3].threshold == 0.2);
    CHECK(list[4].id == 11);
    CHECK_FALSE(list[4].use_image_features);
    CHECK(format_experiments(list) == "1,3,8,spearman@0.2,importance@0.05/clinical-only");
    CHECK_THROWS_AS(parse_experiments("12"), Error);
    CHECK_THROWS_AS(parse_experiments("lasso@0.1"), Error);
    CHECK_THROWS_AS(parse_experiments("spearman@x"), Error);
    CHECK_THROWS_AS(parse_experiments(""), Error);
}

TEST_CASE("run configs round trip through key-value form") {
    RunConfig c;
    c.cohort = "data/c.csv";
    c.max_time = 2500.0;
    c.seed = 77;
    c.train.patience = 4;
    c.experiments = parse_experiments("2,spearman@0.3");
    c.violin_censored_at = CensoredAt::max_time;
    const auto kv = to_key_values(c);
    std::ostringstream text;
    kv.write(text);
    std::istringstream in(text.str());
    const auto back = run_config_from(KeyValueConfig::parse(in));
    CHECK(back.cohort == c.cohort);
    CHECK(back.max_time == c.max_time);
    CHECK(back.seed == 77);
    CHECK(back.train.patience == 4);
    CHECK(format_experiments(back.experiments) == "2,spearman@0.3");
    CHECK(back.violin_censored_at == CensoredAt::max_time);
    std::ostringstream again;
    to_key_values(back).write(again);
    CHECK(again.str() == text.str());

    KeyValueConfig unknown;
    unknown.set("learning_rat", "0.1");
    CHECK_THROWS_AS(run_config_from(unknown), Error);
    KeyValueConfig bad;
    bad.set("experiments", "spearman@0");
    CHECK_THROWS_AS(run_config_from(bad), Error);
    KeyValueConfig neg;
    neg.set("max_time", "-3");
    CHECK_THROWS_AS(run_config_from(neg), Error);
}

TEST_CASE("label permutation keeps the time and event marginals") {
    const auto dir = scratch("permute");
    auto c = quick_config(dir, 3);
    const auto cohort = load_run_cohort(c);
    c.permute_labels = true;
    const auto data = prepare(c, cohort);
    auto a = cohort.times();
    auto b = data.cohort.times();
    CHECK(a != b);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    CHECK(data.cohort.n_events() == cohort.n_events());
    CHECK(data.cohort.ids() == cohort.ids());
}

TEST_CASE("matrix runs share one split and score on training rows only") {
    const auto dir = scratch("matrix");
    auto c = quick_config(dir, 5);
    c.experiments = parse_experiments("1,2,3,8");
    const auto rows = run_matrix(c);
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) CHECK_FALSE(r.failed);

    const auto summary = lines(c.output / "summary.csv");
    CHECK(summary.front() == "experiment,n_clinical_selected,c_td,integrated_auc");
    CHECK(summary.size() == 5);

    const auto train = lines(c.output / "exp1" / "split_train.txt");
    const auto test = lines(c.output / "exp1" / "split_test.txt");
    for (const char* exp : {"exp2", "exp3", "exp8"}) {
        for (const char* part : {"split_train.txt", "split_val.txt", "split_test.txt"}) {
            CHECK(slurp(c.output / exp / part) == slurp(c.output / "exp1" / part));
        }
        const auto inputs = lines(c.output / exp / "selection_inputs.txt");
        CHECK(inputs == train);
        const std::set<std::string> test_ids(test.begin(), test.end());
        for (const auto& id : inputs) CHECK(test_ids.count(id) == 0);
    }

    auto manifest = [&](const char* exp) { return lines(c.output / exp / "manifest.txt"); };
    for (const auto& col : manifest("exp1")) CHECK(col.rfind("feat_", 0) == 0);
    auto joined = manifest("exp1");
    const auto clinical = manifest("exp2");
    joined.insert(joined.end(), clinical.begin(), clinical.end());
    CHECK(manifest("exp3") == joined);

    for (const char* file : {"config.resolved", "scores.csv", "manifest.txt", "model.ckpt", "history.csv",
                             "report.txt", "metrics.csv", "auc_curve.csv", "curves.csv", "violin.csv", "violin.svg",
                             "preprocess.txt", "selection.txt"}) {
        CHECK_MESSAGE(fs::exists(c.output / "exp3" / file), file);
    }

    SUBCASE("a single experiment reproduces its matrix row") {
        auto single = c;
        single.output = dir / "single";
        const auto outcome = run_experiment(single, 3);
        for (const char* file : {"report.txt", "metrics.csv", "curves.csv", "violin.svg", "model.ckpt"}) {
            CHECK_MESSAGE(slurp(single.output / "exp3" / file) == slurp(c.output / "exp3" / file), file);
        }
        CHECK(outcome.evaluation.concordance.c_td == rows[2].c_td);
    }

    SUBCASE("re-evaluating a run directory") {
        const auto again = evaluate_run(c.output / "exp8");
        CHECK(again.evaluation.concordance.c_td == rows[3].c_td);
        CHECK(again.evaluation.auc.integrated_auc == rows[3].integrated_auc);

        auto text = slurp(c.output / "exp8" / "model.ckpt");
        const auto pos = text.find("preprocess_hash ");
        text[pos + 16] = text[pos + 16] == '1' ? '2' : '1';
        std::ofstream(c.output / "exp8" / "model.ckpt", std::ios::binary) << text;
        CHECK_THROWS_WITH_AS(evaluate_run(c.output / "exp8"), doctest::Contains("preprocessing"), StageError);
    }
}

TEST_CASE("failed experiments are marked and the matrix continues") {
    const auto dir = scratch("failures");
    SyntheticSpec spec = informative_spec();
    spec.variables.clear();
    auto c = quick_config(dir, 2, spec);
    c.experiments = parse_experiments("1,2");
    const auto rows = run_matrix(c);
    REQUIRE(rows.size() == 2);
    CHECK_FALSE(rows[0].failed);
    CHECK(rows[1].failed);
    CHECK(fs::exists(c.output / "exp2" / "FAILED"));
    const auto summary = lines(c.output / "summary.csv");
    CHECK(summary[2] == "2,0,failed,failed");
}

TEST_CASE("stage errors") {
    RunConfig c;
    c.cohort = "does/not/exist.csv";
    CHECK_THROWS_WITH_AS(load_run_cohort(c), doctest::Contains("load:"), StageError);
    try {
        load_run_cohort(c);
    } catch (const StageError& e) {
        CHECK(e.stage() == "load");
        CHECK(std::string(e.what()) == "load: " + std::string(e.cause()));
    }
}

TEST_CASE("command-line tool") {
    const auto dir = scratch("cli");
    const auto log = dir / "log.txt";
    const auto cohort = (dir / "c.csv").string();

    REQUIRE(run_cli("synth --seed 4 --out " + cohort, log) == 0);
    const auto first = slurp(cohort);
    REQUIRE(run_cli("synth --seed 4 --out " + cohort, log) == 0);
    CHECK(slurp(cohort) == first);
    CHECK(fs::exists(cohort + ".truth.csv"));
    CHECK(fs::exists(cohort + ".schema"));
    CHECK(lines(cohort).front().find("feat_31") != std::string::npos);

    const std::string common = " --cohort " + cohort + " --schema " + cohort + ".schema --max_epochs 10 --patience 3 --n_trees 10";
    CHECK(run_cli("experiment --experiment 1" + common + " --output " + (dir / "out").string(), log) != 0);
    CHECK(slurp(log).find("seed") != std::string::npos);

    REQUIRE(run_cli("experiment --experiment 3 --seed 1" + common + " --output " + (dir / "out").string(), log) == 0);
    CHECK(fs::exists(dir / "out" / "exp3" / "report.txt"));
    const auto resolved = slurp(dir / "out" / "exp3" / "config.resolved");
    CHECK(resolved.find("max_epochs = 10") != std::string::npos);
    CHECK(resolved.find("seed = 1") != std::string::npos);

    REQUIRE(run_cli("report " + (dir / "out" / "exp3").string(), log) == 0);
    CHECK(slurp(log).find("c_td:") != std::string::npos);
    REQUIRE(run_cli("eval --run " + (dir / "out" / "exp3").string(), log) == 0);
    REQUIRE(run_cli("report " + (dir / "out").string(), log) == 0);
    CHECK(slurp(log).rfind("experiment,n_clinical_selected", 0) == 0);

    REQUIRE(run_cli("train --experiment 1 --seed 2" + common + " --output " + (dir / "t").string(), log) == 0);
    CHECK(fs::exists(dir / "t" / "exp1" / "model.ckpt"));
    CHECK_FALSE(fs::exists(dir / "t" / "exp1" / "report.txt"));
    REQUIRE(run_cli("eval --run " + (dir / "t" / "exp1").string(), log) == 0);
    CHECK(fs::exists(dir / "t" / "exp1" / "report.txt"));

    REQUIRE(run_cli("prep --seed 2" + common + " --output " + (dir / "p").string(), log) == 0);
    CHECK(fs::exists(dir / "p" / "split_test.txt"));
    REQUIRE(run_cli("select --seed 2 --mode importance --threshold 0.05" + common + " --output " +
                        (dir / "p").string(),
                    log) == 0);
    CHECK(fs::exists(dir / "p" / "scores.csv"));

    CHECK(run_cli("experiment --experiment 3 --seed 1 --cohort " + (dir / "missing.csv").string(), log) == 2);
    CHECK(slurp(log).find("[load]") != std::string::npos);
    CHECK(run_cli("matrix --seed 1 --bogus_key 3", log) != 0);
    CHECK(run_cli("experiment --experiment 3 --seed 1 --batch_norm maybe --cohort " + cohort, log) == 2);
    CHECK(slurp(log).find("[config]") != std::string::npos);
}
