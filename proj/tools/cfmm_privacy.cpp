// cfmm-privacy: command-line front end for the reserve-recovery attack.
//
// Exit codes: 0 success, 1 invalid input, 2 solver/convergence failure.
// Text output uses 12 significant digits unless --precision says otherwise;
// --format json prints full-precision documents that parse back into the
// library's report types.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "cfmm_privacy.hpp"

using namespace cfmm;

namespace {

constexpr const char* kOutDirEnv = "CFMM_PRIVACY_OUT_DIR";

struct Output {
    std::string format = "text";
    int precision = 12;

    std::string num(double v) const {
        if (std::isnan(v)) return "nan";
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        std::ostringstream os;
        os.precision(precision);
        os << v;
        return os.str();
    }
    std::string vec(std::span<const double> v) const {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v[i]);
        return s;
    }
    bool json() const { return format == "json"; }
};

void add_output_options(CLI::App* cmd, Output& out) {
    cmd->add_option("--format", out.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--precision", out.precision, "significant digits in text output")->check(CLI::Range(1, 17));
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    try {
        Json j;
        in >> j;
        return j;
    } catch (const Json::exception& e) {
        throw ValidationError("'" + path + "': " + e.what());
    }
}

void print_recovery(const Output& out, const RecoveryResult& r) {
    if (out.json()) {
        std::cout << recovery_to_json(r).dump(2) << '\n';
        return;
    }
    std::cout << "reserves: " << out.vec(r.reserves) << '\n'
              << "lambda: " << out.num(r.lambda) << '\n'
              << "residual_price: " << out.num(r.residual_price) << '\n'
              << "residual_trade: " << out.num(r.residual_trade) << '\n'
              << "unique: " << (r.unique ? "true" : "false") << '\n';
}

void print_geometry(const Output& out, const GeometryReport& g) {
    std::cout << g.spec_id << ' ' << property_name(g.property) << ": " << (g.pass ? "pass" : "FAIL")
              << " (samples " << g.samples << ", max violation " << out.num(g.max_violation) << ", tolerance "
              << out.num(g.tolerance) << ")\n";
}

/// Snapshot fixture: {"pool": {family, params, degree, fee}, "before": [...], "after": [...]}.
struct Fixture {
    TradingFunctionSpec spec;
    double fee = 1.0;
    Vec before, after;
};

Fixture load_fixture(const std::string& path) {
    const Json j = read_json_file(path);
    try {
        Fixture f;
        f.before = j.at("before").get<Vec>();
        f.after = j.at("after").get<Vec>();
        if (f.before.size() != f.after.size()) throw ValidationError("fixture: before and after differ in length");
        const Json& pool = j.at("pool");
        f.spec = spec_from_json(pool, f.before.size());
        if (pool.contains("fee")) f.fee = pool.at("fee").get<double>();
        return f;
    } catch (const Json::exception& e) {
        throw ValidationError("fixture: " + std::string(e.what()));
    }
}

std::string default_out_path() {
    const char* dir = std::getenv(kOutDirEnv);
    const std::filesystem::path base = dir && *dir ? dir : ".";
    return (base / "report.json").string();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reserve-recovery attack on constant function market makers"};
    app.require_subcommand(1);
    Output out;

    // recover-reserves
    std::string spec_text, price_text, trade_text, reserves_text;
    double fee = 1.0;
    auto* rr = app.add_subcommand("recover-reserves", "reserves from a marginal price and one feasible trade");
    rr->add_option("--spec", spec_text, "trading function, e.g. cp, cm:0.3,0.7, curve:1,1")->required();
    rr->add_option("--price", price_text, "marginal price vector (csv)")->required();
    rr->add_option("--trade", trade_text, "feasible trade (csv, positive = deposit)")->required();
    rr->add_option("--fee", fee, "fee parameter gamma in (0, 1]");
    add_output_options(rr, out);

    // recover-trade
    std::string fixture_path;
    double epsilon = 1e-6, impact = 0.1;
    auto* rt = app.add_subcommand("recover-trade", "hidden trade from pool snapshots before and after it");
    rt->add_option("--fixture", fixture_path, "JSON file with pool, before and after reserves")->required();
    rt->add_option("--epsilon", epsilon, "accuracy of the constant-sum search");
    rt->add_option("--probe-impact", impact, "price impact of the probe trade");
    add_output_options(rt, out);

    // estimate-price
    double probe_size = 1e-4;
    auto* ep = app.add_subcommand("estimate-price", "marginal price of a hidden pool from feasible trades only");
    ep->add_option("--spec", spec_text, "trading function")->required();
    ep->add_option("--reserves", reserves_text, "hidden reserves (csv)")->required();
    ep->add_option("--probe-size", probe_size, "input amount of every probe trade");
    ep->add_option("--fee", fee, "fee parameter gamma in (0, 1]");
    add_output_options(ep, out);

    // verify-geometry
    double k_min = 0.1, k_max = 10.0;
    std::size_t points = 50;
    auto* vg = app.add_subcommand("verify-geometry", "ray invariance and scale-sign scans");
    vg->add_option("--spec", spec_text, "trading function")->required();
    vg->add_option("--reserves", reserves_text, "reserves (csv)")->required();
    vg->add_option("--trade", trade_text, "trade for the scale-sign scan (csv, optional)");
    vg->add_option("--k-min", k_min, "smallest scale");
    vg->add_option("--k-max", k_max, "largest scale");
    vg->add_option("--points", points, "number of log-spaced scales");
    add_output_options(vg, out);

    // simulate
    std::string config_path, out_path, csv_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    auto* sim = app.add_subcommand("simulate", "run a seeded experiment from a config file");
    sim->add_option("--config", config_path, "scenario config (JSON)")->required();
    sim->add_option("--out", out_path, std::string("report path (default $") + kOutDirEnv + "/report.json)");
    sim->add_option("--csv", csv_path, "optional per-trial CSV export");
    sim->add_option("--seed", seed, "override the config's master_seed");
    sim->add_option("--threads", threads, "worker threads (0 = all cores)");
    add_output_options(sim, out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const auto parsed = app.get_subcommands();
        std::cerr << (parsed.empty() ? app.help() : parsed.front()->help());
        return 1;
    }

    try {
        if (*rr) {
            const PriceVector c{parse_csv(price_text)};
            const Trade t{parse_csv(trade_text)};
            const TradingFunctionSpec spec = parse_spec(spec_text, c.size());
            print_recovery(out, recover_reserves(spec, c, t, fee));
        } else if (*rt) {
            const Fixture f = load_fixture(fixture_path);
            PoolOracle before(PoolState{f.spec, f.before, f.fee});
            PoolOracle after(PoolState{f.spec, f.after, f.fee});
            AttackOptions opt;
            opt.constant_sum_epsilon = epsilon;
            opt.probe.target_impact = impact;
            const Trade d = recover_trade(before, after, f.spec, f.fee, opt);
            const std::size_t queries = before.query_count() + after.query_count();
            if (out.json())
                std::cout << Json{{"delta", vec_to_json(d.delta)}, {"query_count", queries}}.dump(2) << '\n';
            else
                std::cout << "delta: " << out.vec(d.delta) << "\nqueries: " << queries << '\n';
        } else if (*ep) {
            const Vec r = parse_csv(reserves_text);
            const TradingFunctionSpec spec = parse_spec(spec_text, r.size());
            PoolOracle pool(PoolState{spec, r, fee});
            const PriceEstimate est = estimate_price_with_probes(pool, probe_size, fee);
            if (out.json())
                std::cout << Json{{"price", vec_to_json(est.price.components)}, {"query_count", est.queries}}.dump(2)
                          << '\n';
            else
                std::cout << "price: " << out.vec(est.price.components) << "\nqueries: " << est.queries << '\n';
        } else if (*vg) {
            const Vec r = parse_csv(reserves_text);
            const TradingFunctionSpec spec = parse_spec(spec_text, r.size());
            const Vec grid = log_grid(k_min, k_max, points);
            std::vector<GeometryReport> reports{verify_ray_invariance(spec, r, grid)};
            if (!trade_text.empty()) reports.push_back(scan_scale_sign(spec, r, Trade{parse_csv(trade_text)}, grid));
            if (out.json()) {
                Json a = Json::array();
                for (const auto& g : reports) a.push_back(geometry_to_json(g));
                std::cout << a.dump(2) << '\n';
            } else {
                for (const auto& g : reports) print_geometry(out, g);
            }
        } else if (*sim) {
            ScenarioConfig cfg = load_config(config_path);
            if (seed) cfg.master_seed = *seed;
            const auto t0 = std::chrono::steady_clock::now();
            const ExperimentReport rep = run_experiment(cfg, threads);
            // Wall time stays out of the report so reruns are byte-identical.
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const std::string path = out_path.empty() ? default_out_path() : out_path;
            write_text_file(path, report_document(rep));
            if (!csv_path.empty()) write_text_file(csv_path, report_csv(rep));
            const Aggregate& a = rep.summary;
            if (out.json()) {
                std::cout << Json{{"report", path}, {"aggregate", aggregate_to_json(a)}, {"wall_time_s", wall}}.dump(2) << '\n';
            } else {
                std::cout << "report: " << path << '\n'
                          << "trials: " << a.trials << " (failures " << a.failures << ")\n"
                          << "median_error: " << out.num(a.median_error) << '\n'
                          << "p90_error: " << out.num(a.p90_error) << '\n'
                          << "success_rate: " << out.num(a.success_rate) << '\n'
                          << "wall_time_s: " << out.num(wall) << '\n';
            }
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const RejectedTrade& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
