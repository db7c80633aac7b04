#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "cfmm_privacy/harness.hpp"

using namespace cfmm;

namespace {

ScenarioConfig base_config(std::size_t trials = 40) {
    ScenarioConfig c;
    c.trials = trials;
    c.master_seed = 2024;
    c.reserve_range = std::pair{1.0, 1e6};
    return c;
}

}  // namespace

TEST(Config, ParsesMinimalDocumentWithDefaults) {
    const Json j = Json::parse(R"({"schema_version": 1, "pool": {"family": "cp", "reserves": [4, 9]},
                                    "trials": 3, "master_seed": 5})");
    const ScenarioConfig c = config_from_json(j);
    EXPECT_EQ(c.spec, TradingFunctionSpec::constant_product(2));
    EXPECT_EQ(c.reserves, (Vec{4.0, 9.0}));
    EXPECT_EQ(c.fee, 1.0);
    EXPECT_EQ(c.mitigation, MitigationKind::None);
    EXPECT_EQ(c.alice_min_fraction, 1e-4);
    EXPECT_EQ(c.alice_max_fraction, 0.5);
    EXPECT_EQ(c.trials, 3u);
    EXPECT_EQ(c.master_seed, 5u);
}

TEST(Config, RoundTripsThroughJson) {
    ScenarioConfig c = base_config();
    c.spec = TradingFunctionSpec::constant_mean({0.2, 0.3, 0.5}, 2.0);
    c.reserves = {1.0, 2.0, 3.0};
    c.fee = 0.997;
    c.mitigation = MitigationKind::Batch;
    c.batch = {4, 1e-3, 0.01};
    c.probe_size = 0.5;
    const ScenarioConfig back = config_from_json(config_to_json(c));
    EXPECT_EQ(config_to_json(back), config_to_json(c));
    EXPECT_EQ(back.spec, c.spec);
}

TEST(Config, RejectsBadDocuments) {
    auto bad = [](const char* text) { return config_from_json(Json::parse(text)); };
    EXPECT_THROW(bad(R"({"schema_version": 2, "pool": {"family": "cp", "reserves": [1, 1]}, "trials": 1, "master_seed": 0})"),
                 ValidationError);
    EXPECT_THROW(bad(R"({"schema_version": 1, "pool": {"family": "cp", "reserves": [1, 1]}, "trials": 0, "master_seed": 0})"),
                 ValidationError);
    EXPECT_THROW(bad(R"({"schema_version": 1, "pool": {"family": "cp", "reserves": [1, 1]}, "trials": 1, "master_seed": 0,
                         "alice": {"max_fraction": 0.9}})"),
                 ValidationError);
    EXPECT_THROW(bad(R"({"schema_version": 1, "pool": {"family": "cp", "reserves": [1, 1], "colour": 1}, "trials": 1,
                         "master_seed": 0})"),
                 ValidationError);
    EXPECT_THROW(bad(R"({"schema_version": 1, "pool": {"family": "xyz", "reserves": [1, 1]}, "trials": 1, "master_seed": 0})"),
                 ValidationError);
    EXPECT_THROW(bad(R"({"schema_version": 1, "pool": {"family": "cp", "reserves": [1, -1]}, "trials": 1, "master_seed": 0})"),
                 std::exception);
    EXPECT_THROW(bad(R"({"schema_version": 1, "pool": {"family": "cp", "reserves": [1, 1]}, "trials": "many",
                         "master_seed": 0})"),
                 ValidationError);
}

TEST(Trial, ConstantProductAttackIsExact) {
    const ScenarioConfig c = base_config();
    for (std::size_t i = 0; i < c.trials; ++i) {
        const TrialReport r = run_trial(c, i);
        ASSERT_TRUE(r.solver_ok) << r.error;
        EXPECT_LE(r.relative_error, 1e-6);
        EXPECT_TRUE(r.success);
        EXPECT_GT(r.query_count, 0u);
        // Alice's trade really is feasible for the sampled pool.
        EXPECT_TRUE(is_feasible(PoolState{c.spec, r.reserves, c.fee}, r.true_delta));
    }
}

TEST(Trial, Deterministic) {
    const ScenarioConfig c = base_config();
    EXPECT_EQ(trial_to_json(run_trial(c, 17)), trial_to_json(run_trial(c, 17)));
    EXPECT_NE(trial_to_json(run_trial(c, 17)), trial_to_json(run_trial(c, 18)));
}

TEST(Trial, ConstantSumUsesBinarySearch) {
    ScenarioConfig c = base_config(20);
    c.spec = TradingFunctionSpec::constant_sum(2);
    c.reserve_range = std::pair{1.0, 1000.0};
    c.epsilon = 1e-3;
    for (std::size_t i = 0; i < c.trials; ++i) {
        const TrialReport r = run_trial(c, i);
        ASSERT_TRUE(r.solver_ok) << r.error;
        EXPECT_LE(r.max_abs_error, c.epsilon);
    }
}

TEST(Trial, FailuresAreRecordedNotThrown) {
    ScenarioConfig c = base_config(5);
    c.query_budget = 10;  // far too few queries to build a probe
    for (std::size_t i = 0; i < c.trials; ++i) {
        const TrialReport r = run_trial(c, i);
        EXPECT_FALSE(r.solver_ok);
        EXPECT_FALSE(r.success);
        EXPECT_FALSE(r.error.empty());
        EXPECT_TRUE(std::isinf(r.relative_error));
    }
}

TEST(Experiment, SingleTrialAggregateEqualsRow) {
    const ExperimentReport rep = run_experiment(base_config(1));
    ASSERT_EQ(rep.rows.size(), 1u);
    EXPECT_EQ(rep.summary.median_error, rep.rows[0].relative_error);
    EXPECT_EQ(rep.summary.p90_error, rep.rows[0].relative_error);
    EXPECT_EQ(rep.summary.success_rate, 1.0);
}

TEST(Experiment, AggregateIsRecomputableFromRows) {
    const ExperimentReport rep = run_experiment(base_config(25));
    Vec e;
    for (const auto& r : rep.rows) e.push_back(r.relative_error);
    std::sort(e.begin(), e.end());
    EXPECT_EQ(rep.summary.median_error, e[12]);
    EXPECT_EQ(rep.summary.p90_error, e[22]);  // nearest rank: ceil(0.9 * 25) = 23rd value
    EXPECT_EQ(rep.summary.max_error, e.back());
}

TEST(Experiment, IndependentOfThreadCount) {
    const ScenarioConfig c = base_config(12);
    EXPECT_EQ(report_document(run_experiment(c, 1)), report_document(run_experiment(c, 4)));
}

TEST(Experiment, ByteIdenticalOnRerun) {
    ScenarioConfig c = base_config(10);
    c.mitigation = MitigationKind::Noise;
    c.sigma = 0.01;
    EXPECT_EQ(report_document(run_experiment(c)), report_document(run_experiment(c)));
    EXPECT_EQ(report_csv(run_experiment(c)), report_csv(run_experiment(c)));
}

TEST(Experiment, NoiseSweepIsMonotone) {
    ScenarioConfig c = base_config(60);
    double prev = -1.0;
    for (double sigma : {0.0, 0.01, 0.1}) {
        c.mitigation = sigma == 0.0 ? MitigationKind::None : MitigationKind::Noise;
        c.sigma = sigma;
        const double med = run_experiment(c).summary.median_error;
        EXPECT_GE(med, prev) << "sigma " << sigma;
        prev = med;
    }
    EXPECT_GT(prev, 1e-3);
}

TEST(Experiment, ZeroDecoysMatchNoMitigation) {
    ScenarioConfig none = base_config(10);
    ScenarioConfig batch = none;
    batch.mitigation = MitigationKind::Batch;
    batch.batch.decoy_count = 0;
    const auto a = run_experiment(none), b = run_experiment(batch);
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        EXPECT_EQ(trial_to_json(a.rows[i]), trial_to_json(b.rows[i]));
}

TEST(Report, JsonRoundTrip) {
    ScenarioConfig c = base_config(5);
    c.query_budget = 10;  // failures exercise the null encoding
    const ExperimentReport rep = run_experiment(c);
    const ExperimentReport back = report_from_json(Json::parse(report_document(rep)));
    EXPECT_EQ(report_document(back), report_document(rep));
    const ExperimentReport ok = run_experiment(base_config(5));
    EXPECT_EQ(report_document(report_from_json(Json::parse(report_document(ok)))), report_document(ok));
}

TEST(Report, CsvShape) {
    const ExperimentReport rep = run_experiment(base_config(4));
    const std::string csv = report_csv(rep);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
    EXPECT_EQ(csv.rfind("trial_index,seed,relative_error", 0), 0u);
    const std::string header = csv.substr(0, csv.find('\n'));
    const std::string first = csv.substr(header.size() + 1, csv.find('\n', header.size() + 1) - header.size() - 1);
    EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(first.begin(), first.end(), ','));
}

TEST(Privacy, NoMitigationReducesToTheExactAttack) {
    const PrivacyReport p = evaluate_mitigation(base_config(30));
    EXPECT_EQ(p.mitigation, "none");
    EXPECT_LE(p.median_error, 1e-6);
    EXPECT_EQ(p.success_rate, 1.0);
}
