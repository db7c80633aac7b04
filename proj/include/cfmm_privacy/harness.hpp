// Seeded Monte-Carlo experiments: Alice trades, Eve attacks through the
// (possibly mitigated) pool, and the reconstruction error is tabulated.
//
// Everything random in trial t is drawn from derive_seed(master_seed, t),
// so rows do not depend on thread count or completion order.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cfmm_privacy/attack.hpp"
#include "cfmm_privacy/core.hpp"
#include "cfmm_privacy/mitigations.hpp"
#include "cfmm_privacy/rng.hpp"
#include "cfmm_privacy/serialization.hpp"

namespace cfmm {

inline constexpr int kSchemaVersion = 1;
inline constexpr double kSuccessThreshold = 0.01;

enum class MitigationKind { None, Noise, Batch };

inline const char* mitigation_name(MitigationKind k) {
    switch (k) {
        case MitigationKind::None: return "none";
        case MitigationKind::Noise: return "noise";
        case MitigationKind::Batch: return "batch";
    }
    return "none";
}

struct ScenarioConfig {
    TradingFunctionSpec spec = TradingFunctionSpec::constant_product(2);
    Vec reserves{4.0, 9.0};
    double fee = 1.0;
    std::optional<std::pair<double, double>> reserve_range;  // per-trial log-uniform reserves

    double alice_min_fraction = 1e-4;  // of the output-side reserve
    double alice_max_fraction = 0.5;

    std::size_t query_budget = 200000;
    std::optional<double> probe_size;  // cap on probe input; unset = no cap
    double probe_impact = 0.1;
    double epsilon = 1e-6;  // constant-sum search accuracy

    MitigationKind mitigation = MitigationKind::None;
    double sigma = 0.0;
    BatchConfig batch;

    std::size_t trials = 1;
    std::uint64_t master_seed = 0;

    void validate() const {
        spec.validate();
        if (reserves.size() != spec.n_assets) throw ValidationError("config: pool.reserves must have one entry per asset");
        detail::require_positive(reserves);
        if (!(fee > 0.0) || fee > 1.0) throw ValidationError("config: pool.fee must lie in (0, 1]");
        if (reserve_range && (!(reserve_range->first > 0.0) || !(reserve_range->second >= reserve_range->first) ||
                              !std::isfinite(reserve_range->second)))
            throw ValidationError("config: pool.reserve_range must satisfy 0 < lo <= hi");
        if (!(alice_min_fraction > 0.0) || !(alice_max_fraction >= alice_min_fraction) || alice_max_fraction > 0.5)
            throw ValidationError("config: alice fractions must satisfy 0 < min <= max <= 0.5");
        if (query_budget == 0) throw ValidationError("config: eve.query_budget must be positive");
        if (probe_size && (!(*probe_size > 0.0) || !std::isfinite(*probe_size)))
            throw ValidationError("config: eve.probe_size must be positive");
        if (!(probe_impact > 0.0)) throw ValidationError("config: eve.probe_impact must be positive");
        if (!(epsilon > 0.0)) throw ValidationError("config: eve.epsilon must be positive");
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("config: mitigation.sigma must be nonnegative");
        if (mitigation == MitigationKind::Batch && batch.decoy_count > 0 &&
            (!(batch.min_fraction > 0.0) || !(batch.max_fraction >= batch.min_fraction) || batch.max_fraction >= 1.0))
            throw ValidationError("config: decoy fractions must satisfy 0 < min <= max < 1");
        if (trials < 1) throw ValidationError("config: trials must be at least 1");
    }
};

namespace detail {

inline void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError("config: " + where + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : j.items())
        if (!ok.count(item.key())) throw ValidationError("config: unknown key '" + item.key() + "' in " + where);
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return j.at(key).get<T>();
}

}  // namespace detail

inline ScenarioConfig config_from_json(const Json& j) {
    try {
        detail::reject_unknown_keys(j, {"schema_version", "pool", "alice", "eve", "mitigation", "trials", "master_seed"}, "config");
        if (!j.contains("schema_version") || j.at("schema_version") != kSchemaVersion)
            throw ValidationError("config: schema_version must be 1");
        ScenarioConfig c;

        const Json& pool = j.at("pool");
        detail::reject_unknown_keys(pool, {"family", "params", "degree", "n_assets", "reserves", "fee", "reserve_range"}, "pool");
        std::size_t n = 0;
        if (pool.contains("reserves")) n = pool.at("reserves").size();
        if (pool.contains("n_assets")) n = pool.at("n_assets").get<std::size_t>();
        if (n == 0) n = pool.contains("params") && parse_family(pool.at("family").get<std::string>()) == Family::ConstantMean
                            ? pool.at("params").size()
                            : 2;
        c.spec = spec_from_json(pool, n);
        c.fee = detail::get_or(pool, "fee", 1.0);
        if (pool.contains("reserve_range")) {
            const Vec r = pool.at("reserve_range").get<Vec>();
            if (r.size() != 2) throw ValidationError("config: pool.reserve_range must be [lo, hi]");
            c.reserve_range = std::pair{r[0], r[1]};
        }
        if (pool.contains("reserves"))
            c.reserves = pool.at("reserves").get<Vec>();
        else if (c.reserve_range)
            c.reserves.assign(c.spec.n_assets, c.reserve_range->first);
        else
            throw ValidationError("config: pool needs reserves or reserve_range");

        if (j.contains("alice")) {
            const Json& a = j.at("alice");
            detail::reject_unknown_keys(a, {"min_fraction", "max_fraction"}, "alice");
            c.alice_min_fraction = detail::get_or(a, "min_fraction", c.alice_min_fraction);
            c.alice_max_fraction = detail::get_or(a, "max_fraction", c.alice_max_fraction);
        }
        if (j.contains("eve")) {
            const Json& e = j.at("eve");
            detail::reject_unknown_keys(e, {"query_budget", "probe_size", "probe_impact", "epsilon"}, "eve");
            c.query_budget = detail::get_or(e, "query_budget", c.query_budget);
            if (e.contains("probe_size") && !e.at("probe_size").is_null()) c.probe_size = e.at("probe_size").get<double>();
            c.probe_impact = detail::get_or(e, "probe_impact", c.probe_impact);
            c.epsilon = detail::get_or(e, "epsilon", c.epsilon);
        }
        if (j.contains("mitigation")) {
            const Json& m = j.at("mitigation");
            const std::string kind = detail::get_or<std::string>(m, "kind", "none");
            if (kind == "none") {
                detail::reject_unknown_keys(m, {"kind"}, "mitigation");
            } else if (kind == "noise") {
                detail::reject_unknown_keys(m, {"kind", "sigma"}, "mitigation");
                c.mitigation = MitigationKind::Noise;
                c.sigma = m.at("sigma").get<double>();
            } else if (kind == "batch") {
                detail::reject_unknown_keys(m, {"kind", "decoy_count", "min_fraction", "max_fraction"}, "mitigation");
                c.mitigation = MitigationKind::Batch;
                c.batch.decoy_count = m.at("decoy_count").get<std::size_t>();
                c.batch.min_fraction = detail::get_or(m, "min_fraction", c.batch.min_fraction);
                c.batch.max_fraction = detail::get_or(m, "max_fraction", c.batch.max_fraction);
            } else {
                throw ValidationError("config: unknown mitigation kind '" + kind + "'");
            }
        }
        c.trials = j.at("trials").get<std::size_t>();
        c.master_seed = j.at("master_seed").get<std::uint64_t>();
        c.validate();
        return c;
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw ValidationError("config: " + std::string(e.what()));
    }
    return config_from_json(j);
}

inline Json config_to_json(const ScenarioConfig& c) {
    Json pool = spec_to_json(c.spec);
    pool["reserves"] = c.reserves;
    pool["fee"] = c.fee;
    if (c.reserve_range) pool["reserve_range"] = Vec{c.reserve_range->first, c.reserve_range->second};
    Json mitigation{{"kind", mitigation_name(c.mitigation)}};
    if (c.mitigation == MitigationKind::Noise) mitigation["sigma"] = c.sigma;
    if (c.mitigation == MitigationKind::Batch) {
        mitigation["decoy_count"] = c.batch.decoy_count;
        mitigation["min_fraction"] = c.batch.min_fraction;
        mitigation["max_fraction"] = c.batch.max_fraction;
    }
    return Json{{"schema_version", kSchemaVersion},
                {"pool", pool},
                {"alice", {{"min_fraction", c.alice_min_fraction}, {"max_fraction", c.alice_max_fraction}}},
                {"eve",
                 {{"query_budget", c.query_budget},
                  {"probe_size", c.probe_size ? Json(*c.probe_size) : Json(nullptr)},
                  {"probe_impact", c.probe_impact},
                  {"epsilon", c.epsilon}}},
                {"mitigation", mitigation},
                {"trials", c.trials},
                {"master_seed", c.master_seed}};
}

struct TrialReport {
    std::size_t trial_index = 0;
    std::uint64_t seed = 0;
    Vec reserves;        // pool state Alice traded against
    Trade true_delta;    // Alice's trade
    Trade recovered_delta;
    double relative_error = std::numeric_limits<double>::infinity();  // ||D_hat - D|| / ||D||
    double max_abs_error = std::numeric_limits<double>::infinity();
    std::size_t query_count = 0;
    double residual_price = 0.0;  // worse of the two snapshots
    double residual_trade = 0.0;
    bool solver_ok = false;
    bool success = false;  // relative_error <= 1%
    std::string error;
};

/// One trial: sample reserves and Alice's trade, apply the mitigation, run
/// the attack on the before/after snapshots. Attack failures land in the row.
inline TrialReport run_trial(const ScenarioConfig& cfg, std::size_t trial_index) {
    TrialReport row;
    row.trial_index = trial_index;
    row.seed = derive_seed(cfg.master_seed, trial_index);
    const std::size_t n = cfg.spec.n_assets;

    Vec reserves = cfg.reserves;
    if (cfg.reserve_range) {
        Rng r(derive_seed(row.seed, 3));
        for (double& v : reserves) v = r.log_uniform(cfg.reserve_range->first, cfg.reserve_range->second);
    }
    const PoolState before{cfg.spec, reserves, cfg.fee};
    before.validate();
    row.reserves = reserves;

    Rng alice(derive_seed(row.seed, 0));
    const std::size_t in = alice.index(n);
    std::size_t out = alice.index(n - 1);
    if (out >= in) ++out;
    const double y = alice.log_uniform(cfg.alice_min_fraction, cfg.alice_max_fraction) * reserves[out];
    row.true_delta = quote_input(before, in, out, y);

    PoolState after;
    std::unique_ptr<CfmmOracle> eve_before, eve_after;
    if (cfg.mitigation == MitigationKind::Batch) {
        Rng decoy_rng(derive_seed(row.seed, 2));
        std::vector<Trade> batch{row.true_delta};
        for (Trade& t : sample_decoys(before, row.true_delta, cfg.batch, decoy_rng)) batch.push_back(std::move(t));
        after = batch_execute(before, batch).state;
    } else {
        after = execute_trade(before, row.true_delta);
    }
    if (cfg.mitigation == MitigationKind::Noise) {
        const NoiseConfig noise{cfg.sigma, derive_seed(row.seed, 1)};
        eve_before = std::make_unique<NoisyPriceOracle>(before, noise, 0);
        eve_after = std::make_unique<NoisyPriceOracle>(after, noise, 1);
    } else {
        eve_before = std::make_unique<PoolOracle>(before);
        eve_after = std::make_unique<PoolOracle>(after);
    }

    AttackOptions opt;
    opt.probe.query_budget = cfg.query_budget;
    opt.probe.target_impact = cfg.probe_impact;
    if (cfg.probe_size) {
        opt.probe.max_input = *cfg.probe_size;
        opt.probe.seed_input = std::min(opt.probe.seed_input, *cfg.probe_size);
    }
    opt.constant_sum_epsilon = cfg.epsilon;
    try {
        const RecoveryResult r0 = recover_from_oracle(*eve_before, cfg.spec, cfg.fee, opt);
        const RecoveryResult r1 = recover_from_oracle(*eve_after, cfg.spec, cfg.fee, opt);
        row.recovered_delta.delta.resize(n);
        for (std::size_t i = 0; i < n; ++i) row.recovered_delta.delta[i] = r1.reserves[i] - r0.reserves[i];
        row.residual_price = std::max(r0.residual_price, r1.residual_price);
        row.residual_trade = std::max(r0.residual_trade, r1.residual_trade);
        double diff2 = 0.0, ref2 = 0.0, max_abs = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = row.recovered_delta[i] - row.true_delta[i];
            diff2 += d * d;
            ref2 += row.true_delta[i] * row.true_delta[i];
            max_abs = std::max(max_abs, std::abs(d));
        }
        row.relative_error = std::sqrt(diff2) / std::sqrt(ref2);
        row.max_abs_error = max_abs;
        row.solver_ok = true;
        row.success = row.relative_error <= kSuccessThreshold;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    row.query_count = eve_before->query_count() + eve_after->query_count();
    return row;
}

struct Aggregate {
    std::size_t trials = 0;
    std::size_t failures = 0;  // rows where the attack did not complete
    double median_error = 0.0;
    double p90_error = 0.0;
    double max_error = 0.0;
    double success_rate = 0.0;
    double mean_queries = 0.0;
};

/// Median (mean of the middle pair for even counts) and nearest-rank p90;
/// failed rows count as infinite error.
inline Aggregate aggregate(const std::vector<TrialReport>& rows) {
    Aggregate a;
    a.trials = rows.size();
    if (rows.empty()) return a;
    Vec err;
    double queries = 0.0;
    std::size_t wins = 0;
    for (const auto& r : rows) {
        err.push_back(r.relative_error);
        if (!r.solver_ok) ++a.failures;
        if (r.success) ++wins;
        queries += static_cast<double>(r.query_count);
    }
    std::sort(err.begin(), err.end());
    const std::size_t m = err.size();
    a.median_error = m % 2 ? err[m / 2] : 0.5 * (err[m / 2 - 1] + err[m / 2]);
    a.p90_error = err[static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(m))) - 1];
    a.max_error = err.back();
    a.success_rate = static_cast<double>(wins) / static_cast<double>(m);
    a.mean_queries = queries / static_cast<double>(m);
    return a;
}

struct ExperimentReport {
    ScenarioConfig config;
    std::vector<TrialReport> rows;
    Aggregate summary;
};

/// Runs all trials on `threads` workers (0 = hardware concurrency). Rows
/// are stored by trial index, so the result is the same for any thread count.
inline ExperimentReport run_experiment(const ScenarioConfig& cfg, unsigned threads = 0) {
    cfg.validate();
    ExperimentReport rep;
    rep.config = cfg;
    rep.rows.resize(cfg.trials);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.trials));

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](unsigned w) {
        try {
            for (std::size_t i = next++; i < cfg.trials; i = next++) rep.rows[i] = run_trial(cfg, i);
        } catch (...) {
            errors[w] = std::current_exception();
            next = cfg.trials;
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < threads; ++w) pool.emplace_back(work, w);
    work(0);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    rep.summary = aggregate(rep.rows);
    return rep;
}

inline Json trial_to_json(const TrialReport& r) {
    return Json{{"trial_index", r.trial_index},
                {"seed", r.seed},
                {"reserves", vec_to_json(r.reserves)},
                {"true_delta", vec_to_json(r.true_delta.delta)},
                {"recovered_delta", r.solver_ok ? vec_to_json(r.recovered_delta.delta) : Json(nullptr)},
                {"relative_error", number_or_null(r.relative_error)},
                {"max_abs_error", number_or_null(r.max_abs_error)},
                {"query_count", r.query_count},
                {"residual_price", number_or_null(r.residual_price)},
                {"residual_trade", number_or_null(r.residual_trade)},
                {"solver_ok", r.solver_ok},
                {"success", r.success},
                {"error", r.error.empty() ? Json(nullptr) : Json(r.error)}};
}

inline TrialReport trial_from_json(const Json& j) {
    TrialReport r;
    r.trial_index = j.at("trial_index").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.reserves = vec_from_json(j.at("reserves"));
    r.true_delta.delta = vec_from_json(j.at("true_delta"));
    if (!j.at("recovered_delta").is_null()) r.recovered_delta.delta = vec_from_json(j.at("recovered_delta"));
    r.relative_error = number_from(j.at("relative_error"));
    r.max_abs_error = number_from(j.at("max_abs_error"));
    r.query_count = j.at("query_count").get<std::size_t>();
    r.residual_price = number_from(j.at("residual_price"));
    r.residual_trade = number_from(j.at("residual_trade"));
    r.solver_ok = j.at("solver_ok").get<bool>();
    r.success = j.at("success").get<bool>();
    if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
    return r;
}

inline Json aggregate_to_json(const Aggregate& a) {
    return Json{{"trials", a.trials},
                {"failures", a.failures},
                {"median_error", number_or_null(a.median_error)},
                {"p90_error", number_or_null(a.p90_error)},
                {"max_error", number_or_null(a.max_error)},
                {"success_rate", a.success_rate},
                {"mean_queries", a.mean_queries},
                {"arbitrage_loss", nullptr}};
}

inline Aggregate aggregate_from_json(const Json& j) {
    Aggregate a;
    a.trials = j.at("trials").get<std::size_t>();
    a.failures = j.at("failures").get<std::size_t>();
    a.median_error = number_from(j.at("median_error"));
    a.p90_error = number_from(j.at("p90_error"));
    a.max_error = number_from(j.at("max_error"));
    a.success_rate = j.at("success_rate").get<double>();
    a.mean_queries = j.at("mean_queries").get<double>();
    return a;
}

inline Json report_to_json(const ExperimentReport& rep) {
    Json rows = Json::array();
    for (const auto& r : rep.rows) rows.push_back(trial_to_json(r));
    return Json{{"schema_version", kSchemaVersion},
                {"config", config_to_json(rep.config)},
                {"trials", rows},
                {"aggregate", aggregate_to_json(rep.summary)}};
}

inline ExperimentReport report_from_json(const Json& j) {
    ExperimentReport rep;
    rep.config = config_from_json(j.at("config"));
    for (const auto& r : j.at("trials")) rep.rows.push_back(trial_from_json(r));
    rep.summary = aggregate_from_json(j.at("aggregate"));
    return rep;
}

inline std::string report_document(const ExperimentReport& rep) { return report_to_json(rep).dump(2) + "\n"; }

namespace detail {

inline std::string csv_number(double v) {
    if (!std::isfinite(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_text(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

}  // namespace detail

/// One row per trial, header first, LF line endings; empty cells for
/// missing or non-finite values.
inline std::string report_csv(const ExperimentReport& rep) {
    const std::size_t n = rep.config.spec.n_assets;
    std::ostringstream os;
    os << "trial_index,seed,relative_error,max_abs_error,query_count,residual_price,residual_trade,solver_ok,success";
    for (std::size_t i = 0; i < n; ++i) os << ",true_delta_" << i;
    for (std::size_t i = 0; i < n; ++i) os << ",recovered_delta_" << i;
    os << ",error\n";
    for (const auto& r : rep.rows) {
        os << r.trial_index << ',' << r.seed << ',' << detail::csv_number(r.relative_error) << ','
           << detail::csv_number(r.max_abs_error) << ',' << r.query_count << ',' << detail::csv_number(r.residual_price)
           << ',' << detail::csv_number(r.residual_trade) << ',' << (r.solver_ok ? "true" : "false") << ','
           << (r.success ? "true" : "false");
        for (std::size_t i = 0; i < n; ++i) os << ',' << detail::csv_number(i < r.true_delta.size() ? r.true_delta[i] : NAN);
        for (std::size_t i = 0; i < n; ++i)
            os << ',' << detail::csv_number(i < r.recovered_delta.size() ? r.recovered_delta[i] : NAN);
        os << ',' << detail::csv_text(r.error) << '\n';
    }
    return os.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

/// Attack error under the configured mitigation.
struct PrivacyReport {
    std::string mitigation;
    std::size_t trials = 0;
    double median_error = 0.0;
    double p90_error = 0.0;
    double success_rate = 0.0;
    std::size_t failures = 0;
};

inline PrivacyReport evaluate_mitigation(const ScenarioConfig& scenario, unsigned threads = 0) {
    const ExperimentReport rep = run_experiment(scenario, threads);
    return {mitigation_name(scenario.mitigation), rep.summary.trials, rep.summary.median_error, rep.summary.p90_error,
            rep.summary.success_rate, rep.summary.failures};
}

inline Json privacy_to_json(const PrivacyReport& p) {
    return Json{{"mitigation", p.mitigation},
                {"trials", p.trials},
                {"median_error", number_or_null(p.median_error)},
                {"p90_error", number_or_null(p.p90_error)},
                {"success_rate", p.success_rate},
                {"failures", p.failures}};
}

}  // namespace cfmm
