#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "survkit/cohort.hpp"
#include "survkit/config.hpp"
#include "survkit/error.hpp"

using namespace survkit;

namespace {

Cohort parse(const std::string& csv) {
    std::istringstream schema_in(csv), data_in(csv);
    return read_cohort(data_in, infer_schema(schema_in));
}

std::string to_csv(const Cohort& c) {
    std::ostringstream out;
    write_cohort(out, c);
    return out.str();
}

std::string error_of(const std::string& csv) {
    try {
        parse(csv);
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

SyntheticSpec small_spec(std::size_t n, std::size_t d) {
    SyntheticSpec spec;
    spec.n_patients = n;
    spec.feature_dim = d;
    spec.feature_weight = 0.5;
    spec.variables = {{"age", VariableKind::continuous, 0, 0.5},
                      {"stage", VariableKind::categorical, 3, 0.5},
                      {"sex", VariableKind::categorical, 2, 0.0}};
    return spec;
}

}  // namespace

TEST_CASE("three-row file parses into a cohort") {
    const auto c = parse(
        "id,time,event,clin_a,clin_b,feat_0,feat_1,feat_2,feat_3\n"
        "p1,10,1,1.5,x,0,1,2,3\n"
        "p2,20,0,2.5,y,1,1,1,1\n"
        "p3,30.5,1,3,x,-1,0.5,2,4\n");
    CHECK(c.size() == 3);
    CHECK(c.schema.feature_dim == 4);
    REQUIRE(c.schema.variables.size() == 2);
    CHECK(c.schema.variables[0].kind == VariableKind::continuous);
    CHECK(c.schema.variables[1].kind == VariableKind::categorical);
    CHECK(c.schema.variables[1].categories == std::vector<std::string>{"x", "y"});
    CHECK(c.patients[2].time == 30.5);
    CHECK(c.n_events() == 2);
    CHECK(std::get<std::string>(c.patients[1].clinical[1]) == "y");
}

TEST_CASE("columns are matched by header name") {
    const auto a = parse("id,time,event,clin_a,feat_0\np1,1,1,2,3\n");
    const auto b = parse("feat_0,event,clin_a,time,id\n3,1,2,1,p1\n");
    CHECK(to_csv(a) == to_csv(b));
}

TEST_CASE("ingestion errors name the offending row") {
    std::string csv = "id,time,event,clin_a,feat_0\n";
    for (int r = 1; r <= 8; ++r) {
        csv += "p" + std::to_string(r) + ",5," + (r == 7 ? "2" : "1") + ",1,0\n";
    }
    const auto msg = error_of(csv);
    CHECK(msg.find("row 7") != std::string::npos);
    CHECK(msg.find("event") != std::string::npos);

    CHECK(error_of("id,time,event,feat_0\np1,1,1,0\np1,2,0,1\n").find("duplicate id") != std::string::npos);
    CHECK(error_of("id,time,event,feat_0\np1,1,1,abc\n").find("non-numeric") != std::string::npos);
    CHECK(error_of("id,time,event,feat_0\np1,-1,1,0\n").find("negative time") != std::string::npos);
    CHECK(error_of("id,time,event,feat_0\np1,1,1\n").find("expected 4 fields") != std::string::npos);
    CHECK(error_of("id,time,feat_0\np1,1,0\n").find("missing column 'event'") != std::string::npos);

    Schema schema;
    schema.variables = {{"sex", VariableKind::categorical, {"f", "m"}}};
    std::istringstream in("id,time,event,clin_sex\np1,1,1,x\n");
    CHECK_THROWS_WITH_AS(read_cohort(in, schema), doctest::Contains("unknown category"), Error);
}

TEST_CASE("write_cohort after load reproduces canonical files") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = 3 + rng() % 40;
        const auto d = rng() % 6;
        const auto synth = generate_synthetic(small_spec(n, d), rng());
        const std::string canonical = to_csv(synth.cohort);
        const auto reread = parse(canonical);
        CHECK(to_csv(reread) == canonical);
    }
}

TEST_CASE("schema files round trip") {
    Schema s;
    s.feature_dim = 7;
    s.variables = {{"age", VariableKind::continuous, {}}, {"sex", VariableKind::categorical, {"f", "m"}}};
    std::stringstream io;
    write_schema(io, s);
    const auto back = read_schema(io);
    CHECK(back.feature_dim == 7);
    REQUIRE(back.variables.size() == 2);
    CHECK(back.variables[1].categories == s.variables[1].categories);
    CHECK(back.variables[0].kind == VariableKind::continuous);
}

TEST_CASE("population standard deviation and z-scores") {
    const auto m = column_moments({2.0, 4.0, 6.0});
    CHECK(m.mean == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(m.stddev == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-15));
    CHECK_FALSE(m.degenerate);

    const ColumnMoments two{4.0, 2.0, false};
    CHECK(invert_continuous(1.0, two) == 6.0);

    const auto c = parse("id,time,event,clin_v,feat_0\na,1,1,2,5\nb,2,0,6,5\n");
    const auto state = fit_preprocess(c);
    CHECK(state.continuous.at("v").mean == 4.0);
    CHECK(state.continuous.at("v").stddev == 2.0);
    CHECK(state.features[0].degenerate);
    const auto enc = apply_preprocess(c, state);
    CHECK(numeric_value(enc.patients[1].clinical[0]) == 1.0);
    CHECK(enc.patients[0].features[0] == 0.0);
    CHECK(enc.patients[1].features[0] == 0.0);
    CHECK(state.degenerate_columns() == std::vector<std::string>{"feat_0"});
}

TEST_CASE("categories are coded in lexicographic order") {
    const auto c = parse("id,time,event,clin_sex\na,1,1,male\nb,2,0,female\nc,3,0,male\n");
    const auto state = fit_preprocess(c);
    CHECK(state.codes.at("sex") == std::vector<std::string>{"female", "male"});
    const auto enc = apply_preprocess(c, state);
    CHECK(enc.encoded);
    CHECK(numeric_value(enc.patients[0].clinical[0]) == 1.0);
    CHECK(numeric_value(enc.patients[1].clinical[0]) == 0.0);
}

TEST_CASE("fitted state standardizes the training columns") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto synth = generate_synthetic(small_spec(60, 5), seed);
        const auto state = fit_preprocess(synth.cohort);
        const auto enc = apply_preprocess(synth.cohort, state);
        for (std::size_t k = 0; k < 5; ++k) {
            double mean = 0.0, sq = 0.0;
            for (const auto& p : enc.patients) mean += p.features[k];
            mean /= 60.0;
            for (const auto& p : enc.patients) sq += (p.features[k] - mean) * (p.features[k] - mean);
            CHECK(std::abs(mean) < 1e-12);
            CHECK(std::abs(std::sqrt(sq / 60.0) - 1.0) < 1e-12);
        }
        const auto age = enc.clinical_column(0);
        double mean = 0.0;
        for (double v : age) mean += v;
        CHECK(std::abs(mean / 60.0) < 1e-12);
    }
}

TEST_CASE("train-fitted state applied to held-out rows matches a per-cell recomputation") {
    const auto train = generate_synthetic(small_spec(40, 3), 1).cohort;
    const auto held = generate_synthetic(small_spec(25, 3), 2).cohort;
    const auto state = fit_preprocess(train);
    const auto enc = apply_preprocess(held, state);
    for (std::size_t k = 0; k < 3; ++k) {
        double mean = 0.0;
        for (const auto& p : train.patients) mean += p.features[k];
        mean /= 40.0;
        double var = 0.0;
        for (const auto& p : train.patients) var += (p.features[k] - mean) * (p.features[k] - mean);
        const double sd = std::sqrt(var / 40.0);
        for (std::size_t r = 0; r < held.size(); ++r) {
            CHECK(std::abs(enc.patients[r].features[k] - (held.patients[r].features[k] - mean) / sd) < 1e-12);
        }
    }
}

TEST_CASE("preprocess state serializes and its hash tracks content") {
    const auto c = generate_synthetic(small_spec(30, 2), 4).cohort;
    const auto state = fit_preprocess(c);
    std::stringstream io;
    write_preprocess(io, state);
    const auto back = read_preprocess(io);
    CHECK(back.hash() == state.hash());
    auto other = state;
    other.features[0].mean += 1.0;
    CHECK(other.hash() != state.hash());
}

TEST_CASE("unseen category at apply time is an error") {
    const auto train = parse("id,time,event,clin_sex\na,1,1,m\nb,2,0,f\n");
    const auto state = fit_preprocess(train);
    Cohort held = train;
    held.schema.variables[0].categories.push_back("x");
    held.patients[0].clinical[0] = std::string("x");
    CHECK_THROWS_AS(apply_preprocess(held, state), Error);
}

TEST_CASE("largest-remainder counts for the reference cohort") {
    // Independent rounding: floor of each share, then hand the leftovers to
    // the largest fractional parts.
    auto reference = [](std::size_t count, std::array<double, 3> f) {
        std::array<std::size_t, 3> out{};
        std::array<double, 3> frac{};
        std::size_t used = 0;
        for (int k = 0; k < 3; ++k) {
            const double share = f[k] * static_cast<double>(count);
            out[k] = static_cast<std::size_t>(std::floor(share));
            frac[k] = share - std::floor(share);
            used += out[k];
        }
        while (used < count) {
            int best = 0;
            for (int k = 1; k < 3; ++k)
                if (frac[k] > frac[best]) best = k;
            ++out[best];
            frac[best] = -1.0;
            ++used;
        }
        return out;
    };
    const auto counts = split_counts(32, 212, SplitFractions{});
    CHECK(counts[0] == std::array<std::size_t, 3>{18, 3, 11});
    CHECK(counts[1] == std::array<std::size_t, 3>{121, 21, 70});
    CHECK(counts[0] == reference(32, {0.57, 0.10, 0.33}));
    CHECK(counts[1] == reference(212, {0.57, 0.10, 0.33}));
    CHECK(allocate_counts(10, SplitFractions{1.0, 0.0, 0.0}) == std::array<std::size_t, 3>{10, 0, 0});
}

TEST_CASE("stratified split partitions the cohort and is seed-deterministic") {
    SyntheticSpec spec = small_spec(244, 2);
    spec.event_rate = 32.0 / 244.0;
    const auto cohort = generate_synthetic(spec, 3).cohort;
    REQUIRE(cohort.n_events() == 32);
    std::vector<std::string> first_train;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto a = stratified_split(cohort, {}, seed);
        const auto b = stratified_split(cohort, {}, seed);
        CHECK(a.train.ids() == b.train.ids());
        CHECK(a.test.ids() == b.test.ids());
        CHECK(a.train.n_events() == 18);
        CHECK(a.val.n_events() == 3);
        CHECK(a.test.n_events() == 11);
        CHECK(a.train.size() == 139);
        CHECK(a.val.size() == 24);
        CHECK(a.test.size() == 81);

        std::multiset<std::string> all;
        for (const auto* part : {&a.train, &a.val, &a.test}) {
            for (const auto& id : part->ids()) all.insert(id);
        }
        const auto ids = cohort.ids();
        CHECK(all == std::multiset<std::string>(ids.begin(), ids.end()));
        if (seed == 0) {
            first_train = a.train.ids();
        } else if (seed == 1) {
            CHECK(a.train.ids() != first_train);
        }
    }
    const auto all_train = stratified_split(cohort, {1.0, 0.0, 0.0}, 5);
    CHECK(all_train.train.size() == cohort.size());
    CHECK(all_train.train.ids() == cohort.ids());
    CHECK(all_train.test.size() == 0);
}

TEST_CASE("every nonzero split gets an event when possible") {
    const auto cohort = generate_synthetic([] {
        auto s = small_spec(40, 1);
        s.event_rate = 3.0 / 40.0;
        return s;
    }(), 9).cohort;
    REQUIRE(cohort.n_events() == 3);
    const auto split = stratified_split(cohort, {0.8, 0.1, 0.1}, 1);
    CHECK(split.train.n_events() >= 1);
    CHECK(split.val.n_events() >= 1);
    CHECK(split.test.n_events() >= 1);
}

TEST_CASE("bad split fractions are rejected") {
    const auto cohort = generate_synthetic(small_spec(20, 1), 1).cohort;
    CHECK_THROWS_AS(stratified_split(cohort, {0.5, 0.3, 0.3}, 1), Error);
    CHECK_THROWS_AS(stratified_split(cohort, {1.2, -0.1, -0.1}, 1), Error);
}

TEST_CASE("synthetic generator hits the event rate and is reproducible") {
    const auto spec = informative_spec();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto synth = generate_synthetic(spec, seed);
        const double rate = static_cast<double>(synth.cohort.n_events()) / static_cast<double>(synth.cohort.size());
        CHECK(std::abs(rate - spec.event_rate) <= 0.05);
        CHECK(synth.cohort.schema.feature_dim == 32);
        CHECK(synth.cohort.schema.variables.size() == 8);
        for (const auto& p : synth.cohort.patients) {
            CHECK(p.time >= 0.0);
            CHECK(p.time <= spec.max_followup);
        }
    }
    CHECK(to_csv(generate_synthetic(spec, 42).cohort) == to_csv(generate_synthetic(spec, 42).cohort));
    CHECK(to_csv(generate_synthetic(spec, 42).cohort) != to_csv(generate_synthetic(spec, 43).cohort));
}

TEST_CASE("zero signal weights give a constant true risk") {
    auto spec = informative_spec();
    spec.feature_weight = 0.0;
    spec.noise_sd = 0.0;
    for (auto& v : spec.variables) v.weight = 0.0;
    const auto synth = generate_synthetic(spec, 1);
    for (double r : synth.true_risk) CHECK(r == synth.true_risk.front());
}

TEST_CASE("reordering generator variables only reorders clinical columns") {
    auto spec = informative_spec();
    const auto a = generate_synthetic(spec, 5);
    std::reverse(spec.variables.begin(), spec.variables.end());
    const auto b = generate_synthetic(spec, 5);
    CHECK(a.true_risk == b.true_risk);
    const auto age_a = a.cohort.schema.index_of("age");
    const auto age_b = b.cohort.schema.index_of("age");
    for (std::size_t r = 0; r < a.cohort.size(); ++r) {
        CHECK(numeric_value(a.cohort.patients[r].clinical[age_a]) ==
              numeric_value(b.cohort.patients[r].clinical[age_b]));
    }
}

TEST_CASE("synthetic spec files") {
    std::istringstream in(
        "[cohort]\nn_patients = 12\nfeature_dim = 3\nevent_rate = 0.5\n"
        "[clinical]\nage = continuous 0.4\nstage = categorical 3 0.2\n");
    const auto spec = read_synthetic_spec(in);
    CHECK(spec.n_patients == 12);
    CHECK(spec.feature_dim == 3);
    REQUIRE(spec.variables.size() == 2);
    CHECK(spec.variables[1].n_categories == 3);
    const auto synth = generate_synthetic(spec, 1);
    CHECK(synth.cohort.n_events() == 6);

    std::istringstream bad("[clinical]\nage = ordinal 2\n");
    CHECK_THROWS_AS(read_synthetic_spec(bad), Error);
}

TEST_CASE("key-value config files") {
    std::istringstream in("# comment\n[a]\nx = 1\ny = hello world\n; full-line comment\n[b]\nz=2.5\n");
    const auto kv = KeyValueConfig::parse(in);
    CHECK(kv.get_int("x", 0) == 1);
    CHECK(kv.get_or("y", "") == "hello world");
    CHECK(kv.get_double("z", 0.0) == 2.5);
    CHECK_FALSE(kv.contains("w"));

    std::istringstream dup("[a]\nx = 1\n[b]\nx = 2\n");
    CHECK_THROWS_AS(KeyValueConfig::parse(dup), Error);

    std::ostringstream out;
    kv.write(out);
    std::istringstream again(out.str());
    const auto back = KeyValueConfig::parse(again);
    CHECK(back.entries().size() == 3);
    CHECK(back.get_or("y", "") == "hello world");
}
