#include "evtaxi/cli.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "evtaxi/config.hpp"
#include "evtaxi/csv.hpp"
#include "evtaxi/engine.hpp"

namespace evtaxi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ScenarioConfig load_scenario(const std::string& path) {
    return scenario_from_tree(load_config_tree(path));
}

ScenarioConfig default_or_loaded(const std::string& config_path) {
    return config_path.empty() ? ScenarioConfig{} : load_scenario(config_path);
}

std::vector<TripRequest> trips_for_run(const ScenarioConfig& cfg) {
    std::vector<TripRequest> trips;
    if (!cfg.trips_path.empty()) {
        RowReport report;
        trips = load_trips(cfg.trips_path, cfg.region, &report);
        if (report.rejected > 0)
            std::cerr << cfg.trips_path << ": skipped " << report.rejected << " invalid rows\n";
    } else if (!cfg.profile_path.empty()) {
        DemandProfile profile = load_profile(cfg.profile_path);
        trips = synthesize(profile, cfg.region, cfg.fare, cfg.window_days, cfg.seed);
    } else {
        throw CliError("config needs either 'trips' or 'profile' as demand source");
    }
    if (cfg.density_factor != 1.0)
        trips = scale_density(trips, cfg.density_factor, cfg.step_seconds, cfg.seed);
    return trips;
}

std::vector<StationSite> sites_for_run(const ScenarioConfig& cfg, const std::vector<TripRequest>& trips,
                                       bool capacity_override) {
    if (!cfg.sites_path.empty()) {
        auto sites = load_sites(cfg.sites_path, cfg.region);
        if (capacity_override) {
            for (auto& s : sites) s.capacity = cfg.station_capacity;
        }
        return sites;
    }
    return auto_site(cfg, trips);
}

void write_run_dir(const fs::path& dir, const ScenarioConfig& cfg, const RunOutput& out,
                   const std::string& hash) {
    fs::create_directories(dir);
    json cfg_echo = canonical_scenario_tree(cfg);
    cfg_echo["seed"] = cfg.seed;
    write_file((dir / "config.json").string(), cfg_echo.dump(2) + "\n");
    write_file((dir / "summary.json").string(), out.summary_json(hash, cfg.seed));
    write_file((dir / "timeseries.csv").string(), out.timeseries_csv(cfg.step_seconds));
    write_file((dir / "taxi_ledger.csv").string(), out.taxi_ledger_csv());
    write_file((dir / "trip_outcomes.csv").string(), out.trip_outcomes_csv(cfg.step_seconds));
    write_file((dir / "station_chart.csv").string(), out.chart_csv());
}

struct RunMetricsRow {
    double fill_rate = 0.0;
    double unsatisfied_rate = 0.0;
    double avg_wait_min = 0.0;
    double gini = 0.0;
    std::size_t requests = 0;
    bool ok = false;
    std::string error;
    bool cached = false;
};

RunMetricsRow metrics_from_summary(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw CliError("cannot read " + file.string());
    json j = json::parse(in);
    RunMetricsRow row;
    row.fill_rate = j.at("fill_rate").get<double>();
    row.unsatisfied_rate = j.at("unsatisfied_rate").get<double>();
    row.avg_wait_min = j.at("avg_wait_min").get<double>();
    row.gini = j.at("gini").get<double>();
    row.requests = j.at("requests").get<std::size_t>();
    row.ok = true;
    row.cached = true;
    return row;
}

int cmd_site(const std::string& trips_path, const std::string& config_path, int stations, int capacity,
             std::uint64_t seed, const std::string& out_path) {
    ScenarioConfig cfg = default_or_loaded(config_path);
    RowReport report;
    auto trips = load_trips(trips_path, cfg.region, &report);
    if (report.rejected > 0) std::cerr << trips_path << ": skipped " << report.rejected << " invalid rows\n";
    std::vector<PlanePoint> origins;
    origins.reserve(trips.size());
    for (const auto& t : trips) origins.push_back(cfg.region.project(t.origin));
    auto sites = kmeans_sites(origins, stations, seed, capacity, cfg.kmeans_sample_cap);
    save_sites(out_path, sites, cfg.region);
    std::cout << "wrote " << sites.size() << " stations to " << out_path << "\n";
    return 0;
}

int cmd_extract(const std::string& pings_path, const std::string& config_path, const std::string& out_path) {
    ScenarioConfig cfg = default_or_loaded(config_path);
    RowReport ping_report;
    auto pings = load_pings(pings_path, &ping_report);
    RowReport trip_report;
    auto trips = extract_trips(std::move(pings), cfg.region, cfg.fare, &trip_report);
    save_trips(out_path, trips);
    std::cerr << "pings: " << ping_report.accepted << " read, " << ping_report.rejected << " skipped; trips: "
              << trip_report.accepted << " kept, " << trip_report.rejected << " dropped\n";
    std::cout << "wrote " << trips.size() << " trips to " << out_path << "\n";
    return 0;
}

int cmd_gen_demand(const std::string& profile_path, const std::string& config_path,
                   const std::string& density, double scale, double days, std::uint64_t seed,
                   const std::string& out_path) {
    ScenarioConfig cfg = default_or_loaded(config_path);
    DemandProfile profile = load_profile(profile_path);
    if (!density.empty()) {
        try {
            profile.weekly_total = demand_level_weekly_total(density);
        } catch (const std::invalid_argument&) {
            double factor = 0.0;
            if (!parse_double(density, factor) || factor <= 0.0)
                throw CliError("--density must be low|middle|high or a positive factor");
            profile.weekly_total *= factor;
        }
    }
    profile.weekly_total *= scale;
    auto trips = synthesize(profile, cfg.region, cfg.fare, days, seed);
    save_trips(out_path, trips);
    std::cout << "wrote " << trips.size() << " trips to " << out_path << "\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_root, bool force) {
    ScenarioConfig cfg = load_scenario(config_path);
    std::string hash = config_hash_hex(cfg);
    fs::path dir = fs::path(out_root) / (hash + "-s" + std::to_string(cfg.seed));
    if (fs::exists(dir / "summary.json") && !force)
        throw CliError("run directory " + dir.string() + " already has results (use --force to overwrite)");

    auto trips = trips_for_run(cfg);
    auto sites = sites_for_run(cfg, trips, !cfg.station_capacity_from_sites);
    RunOutput out = simulate_scenario(cfg, std::move(trips), std::move(sites));
    write_run_dir(dir, cfg, out, hash);
    std::cout << dir.string() << "\n"
              << "requests=" << out.total_requests << " fill_rate=" << fmt_double(out.fill_rate, 4)
              << " avg_wait_min=" << fmt_double(out.avg_wait_min, 2) << " gini=" << fmt_double(out.gini, 4)
              << "\n";
    return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_root, int parallelism, bool force) {
    std::string base_dir = fs::path(spec_path).parent_path().string();
    SweepSpec spec = sweep_from_tree(load_config_tree(spec_path), base_dir);
    std::vector<SweepCell> jobs = expand_sweep(spec);
    fs::create_directories(fs::path(out_root) / "runs");

    // Base trips loaded once when they come from a file; profile-driven
    // scenarios synthesize per seed inside the job.
    std::vector<TripRequest> base_trips;
    if (!spec.base.trips_path.empty()) {
        RowReport report;
        base_trips = load_trips(spec.base.trips_path, spec.base.region, &report);
        if (report.rejected > 0)
            std::cerr << spec.base.trips_path << ": skipped " << report.rejected << " invalid rows\n";
    }

    std::vector<RunMetricsRow> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const ScenarioConfig& cfg = jobs[i].config;
            std::string hash = config_hash_hex(cfg);
            fs::path dir = fs::path(out_root) / "runs" / (hash + "-s" + std::to_string(cfg.seed));
            try {
                if (!force && fs::exists(dir / "summary.json")) {
                    results[i] = metrics_from_summary(dir / "summary.json");
                    continue;
                }
                std::vector<TripRequest> trips;
                if (!cfg.trips_path.empty()) {
                    trips = base_trips;
                } else if (!cfg.profile_path.empty()) {
                    DemandProfile profile = load_profile(cfg.profile_path);
                    trips = synthesize(profile, cfg.region, cfg.fare, cfg.window_days, cfg.seed);
                } else {
                    throw CliError("sweep base config needs 'trips' or 'profile'");
                }
                if (cfg.density_factor != 1.0)
                    trips = scale_density(trips, cfg.density_factor, cfg.step_seconds, cfg.seed);
                auto sites = sites_for_run(cfg, trips, !cfg.station_capacity_from_sites);
                RunOutput out = simulate_scenario(cfg, std::move(trips), std::move(sites));
                write_run_dir(dir, cfg, out, hash);
                RunMetricsRow row;
                row.fill_rate = out.fill_rate;
                row.unsatisfied_rate = out.unsatisfied_rate;
                row.avg_wait_min = out.avg_wait_min;
                row.gini = out.gini;
                row.requests = out.total_requests;
                row.ok = true;
                results[i] = row;
            } catch (const std::exception& e) {
                results[i].ok = false;
                results[i].error = e.what();
            }
        }
    };
    int threads = std::max(1, parallelism);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    // Per-run detail, in deterministic job order.
    std::ostringstream detail;
    detail << "fleet_size,battery_range_km,station_capacity,strategy_index,density_factor,seed,"
              "requests,fill_rate,unsatisfied_rate,avg_wait_min,gini,status\n";
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const ScenarioConfig& cfg = jobs[i].config;
        const RunMetricsRow& r = results[i];
        detail << cfg.fleet_size << ',' << fmt_double(cfg.battery_range_km, 1) << ',' << cfg.station_capacity
               << ',' << cfg.strategy_index << ',' << fmt_double(cfg.density_factor, 4) << ',' << cfg.seed
               << ',' << r.requests << ',' << fmt_double(r.fill_rate, 6) << ','
               << fmt_double(r.unsatisfied_rate, 6) << ',' << fmt_double(r.avg_wait_min, 4) << ','
               << fmt_double(r.gini, 6) << ',' << (r.ok ? (r.cached ? "cached" : "ok") : "failed") << '\n';
    }
    write_file((fs::path(out_root) / "detail.csv").string(), detail.str());

    // Aggregate over seeds per cell.
    std::size_t cells = sweep_cell_count(spec);
    std::size_t per_cell = spec.seeds.size();
    std::ostringstream agg;
    agg << "fleet_size,battery_range_km,station_capacity,strategy_index,density_factor,seeds,"
           "fill_rate_mean,fill_rate_sd,avg_wait_min_mean,avg_wait_min_sd,gini_mean,gini_sd,"
           "unsatisfied_rate_mean,unsatisfied_rate_sd,failed\n";
    std::size_t failures = 0;
    for (std::size_t c = 0; c < cells; ++c) {
        const ScenarioConfig& cfg = jobs[c * per_cell].config;
        std::vector<double> fill, wait, gini_v, unsat;
        std::size_t failed = 0;
        for (std::size_t s = 0; s < per_cell; ++s) {
            const RunMetricsRow& r = results[c * per_cell + s];
            if (!r.ok) {
                ++failed;
                continue;
            }
            fill.push_back(r.fill_rate);
            wait.push_back(r.avg_wait_min);
            gini_v.push_back(r.gini);
            unsat.push_back(r.unsatisfied_rate);
        }
        failures += failed;
        auto mean = [](const std::vector<double>& v) {
            if (v.empty()) return 0.0;
            double s = 0.0;
            for (double x : v) s += x;
            return s / static_cast<double>(v.size());
        };
        auto sd = [&](const std::vector<double>& v) {
            if (v.size() < 2) return 0.0;
            double m = mean(v);
            double s = 0.0;
            for (double x : v) s += (x - m) * (x - m);
            return std::sqrt(s / static_cast<double>(v.size() - 1));
        };
        agg << cfg.fleet_size << ',' << fmt_double(cfg.battery_range_km, 1) << ',' << cfg.station_capacity
            << ',' << cfg.strategy_index << ',' << fmt_double(cfg.density_factor, 4) << ','
            << (per_cell - failed) << ',' << fmt_double(mean(fill), 6) << ',' << fmt_double(sd(fill), 6)
            << ',' << fmt_double(mean(wait), 4) << ',' << fmt_double(sd(wait), 4) << ','
            << fmt_double(mean(gini_v), 6) << ',' << fmt_double(sd(gini_v), 6) << ','
            << fmt_double(mean(unsat), 6) << ',' << fmt_double(sd(unsat), 6) << ',' << failed << '\n';
    }
    write_file((fs::path(out_root) / "aggregate.csv").string(), agg.str());

    std::cout << "sweep: " << jobs.size() << " runs, " << cells << " cells, " << failures
              << " failures; results in " << out_root << "\n";
    if (failures > 0) {
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (!results[i].ok) std::cerr << "run " << i << " failed: " << results[i].error << "\n";
        }
        return 1;
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("evtaxi");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Electric taxi fleet simulator: station siting, rule-based dispatch, capacity-limited "
                 "charging, efficiency and equity metrics"};
    app.require_subcommand(1);

    std::string config_path, trips_path, pings_path, profile_path, out_path, density, spec_path;
    int stations = 100, capacity = 16, parallelism = 1;
    std::uint64_t seed = 1;
    double scale = 1.0, days = 7.0;
    bool force = false;

    auto* site = app.add_subcommand("site", "Place charging stations by clustering trip origins");
    site->add_option("--trips", trips_path, "trip CSV file")->required();
    site->add_option("--stations", stations, "number of stations (default 100)");
    site->add_option("--capacity", capacity, "chargers per station");
    site->add_option("--seed", seed, "clustering seed");
    site->add_option("--config", config_path, "scenario file supplying region bounds");
    site->add_option("--out", out_path, "output sites CSV")->required();

    auto* extract = app.add_subcommand("extract", "Extract trips from raw vehicle pings");
    extract->add_option("--pings", pings_path, "ping CSV file")->required();
    extract->add_option("--config", config_path, "scenario file supplying region bounds and fare");
    extract->add_option("--out", out_path, "output trips CSV")->required();

    auto* gen = app.add_subcommand("gen-demand", "Synthesize a trip file from a demand profile");
    gen->add_option("--profile", profile_path, "demand profile JSON/TOML")->required();
    gen->add_option("--density", density, "low|middle|high or numeric factor");
    gen->add_option("--scale", scale, "extra rate factor (desk scaling)");
    gen->add_option("--days", days, "window length in days");
    gen->add_option("--seed", seed, "generation seed");
    gen->add_option("--config", config_path, "scenario file supplying region bounds and fare");
    gen->add_option("--out", out_path, "output trips CSV")->required();

    auto* sim = app.add_subcommand("simulate", "Run one scenario and write a run directory");
    sim->add_option("--config", config_path, "scenario config (JSON or TOML)")->required();
    sim->add_option("--out", out_path, "run output root (default runs)");
    sim->add_flag("--force", force, "overwrite an existing run directory");

    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and aggregate results");
    sweep->add_option("--spec", spec_path, "sweep spec file")->required();
    sweep->add_option("--out", out_path, "sweep output root (default sweep_out)");
    sweep->add_option("--parallelism", parallelism, "worker threads (default 1)");
    sweep->add_flag("--force", force, "re-run cached cells");

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (site->parsed()) return cmd_site(trips_path, config_path, stations, capacity, seed,
                                            out_path.empty() ? "sites.csv" : out_path);
        if (extract->parsed()) return cmd_extract(pings_path, config_path, out_path);
        if (gen->parsed()) return cmd_gen_demand(profile_path, config_path, density, scale, days, seed, out_path);
        if (sim->parsed()) return cmd_simulate(config_path, out_path.empty() ? "runs" : out_path, force);
        if (sweep->parsed())
            return cmd_sweep(spec_path, out_path.empty() ? "sweep_out" : out_path, parallelism, force);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace evtaxi
