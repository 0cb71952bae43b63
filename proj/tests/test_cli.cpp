#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "evtaxi/cli.hpp"
#include "evtaxi/csv.hpp"

using namespace evtaxi;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("/tmp") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
};

std::string toy_trips_csv() {
    std::ostringstream out;
    out << "trip_id,request_time_s,origin_lon,origin_lat,dest_lon,dest_lat,distance_km,duration_min,fare\n";
    int id = 0;
    for (int i = 0; i < 30; ++i) {
        double olon = 116.2 + 0.01 * (i % 10);
        double olat = 39.8 + 0.01 * (i % 7);
        double dlon = olon + 0.03;
        double dlat = olat + 0.02;
        out << id++ << ',' << i * 900 << ',' << olon << ',' << olat << ',' << dlon << ',' << dlat
            << ",5.0,12.0,17.6\n";
    }
    return out.str();
}

}  // namespace

TEST_CASE("site clusters a toy trips file") {
    TempDir dir("evtaxi_cli_site");
    std::string trips = (dir.path / "trips.csv").string();
    write_file(trips, toy_trips_csv());
    std::string out = (dir.path / "sites.csv").string();
    CHECK(run_cli({"site", "--trips", trips, "--stations", "2", "--seed", "4", "--out", out}) == 0);
    std::string content = slurp(out);
    CHECK(content.rfind("station_id,lon,lat,capacity\n", 0) == 0);
    CHECK(std::count(content.begin(), content.end(), '\n') == 3);  // header + 2 sites

    CHECK(run_cli({"site", "--trips", (dir.path / "nope.csv").string(), "--out", out}) == 2);
    // More stations than distinct origins: degenerate input.
    CHECK(run_cli({"site", "--trips", trips, "--stations", "2000", "--out", out}) == 2);
}

TEST_CASE("extract turns pings into trips") {
    TempDir dir("evtaxi_cli_extract");
    std::string pings = (dir.path / "pings.csv").string();
    write_file(pings,
               "vehicle_id,timestamp,lon,lat,speed,in_service\n"
               "a,0,116.30,39.90,0,0\n"
               "a,30,116.30,39.90,35,1\n"
               "a,90,,,40,1\n"
               "a,180,116.40,39.95,30,1\n"
               "a,210,116.40,39.95,0,0\n"
               "b,0,116.50,40.00,20,1\n"
               "b,60,116.52,40.01,20,1\n"  // 60 s run: dropped
               "b,90,116.52,40.01,0,0\n"
               "junk-row\n");
    std::string out = (dir.path / "trips.csv").string();
    CHECK(run_cli({"extract", "--pings", pings, "--out", out}) == 0);
    std::string content = slurp(out);
    CHECK(std::count(content.begin(), content.end(), '\n') == 2);  // header + 1 trip
    CHECK(run_cli({"extract", "--pings", (dir.path / "nope.csv").string(), "--out", out}) == 2);
}

TEST_CASE("gen-demand is deterministic per seed and honors density levels") {
    TempDir dir("evtaxi_cli_gen");
    std::string profile = (dir.path / "profile.json").string();
    write_file(profile, R"({
      "weekly_total": 2000,
      "clusters": [{"lon": 116.4, "lat": 40.0, "weight": 1.0, "spread_km": 5.0}]
    })");
    std::string out1 = (dir.path / "a.csv").string();
    std::string out2 = (dir.path / "b.csv").string();
    CHECK(run_cli({"gen-demand", "--profile", profile, "--seed", "5", "--days", "2", "--out", out1}) == 0);
    CHECK(run_cli({"gen-demand", "--profile", profile, "--seed", "5", "--days", "2", "--out", out2}) == 0);
    CHECK(slurp(out1) == slurp(out2));

    // Low demand level with heavy desk scaling: 1.66M/week * 0.001.
    std::string out3 = (dir.path / "low.csv").string();
    CHECK(run_cli({"gen-demand", "--profile", profile, "--density", "low", "--scale", "0.001", "--days",
                   "7", "--seed", "5", "--out", out3}) == 0);
    std::string content = slurp(out3);
    auto lines = std::count(content.begin(), content.end(), '\n') - 1;
    CHECK(lines > 1400);
    CHECK(lines < 1900);  // ~1660 expected

    CHECK(run_cli({"gen-demand", "--profile", profile, "--density", "noidea", "--out", out3}) == 2);
}

TEST_CASE("simulate writes a run directory and guards against overwrite") {
    TempDir dir("evtaxi_cli_sim");
    std::string trips = (dir.path / "trips.csv").string();
    write_file(trips, toy_trips_csv());
    std::string config = (dir.path / "scenario.json").string();
    write_file(config, std::string(R"({
      "fleet_size": 3, "station_count": 1, "station_capacity": 2,
      "window_days": 0.5, "seed": 7,
      "trips": ")") + trips + "\"}\n");
    std::string out_root = (dir.path / "runs").string();
    CHECK(run_cli({"simulate", "--config", config, "--out", out_root}) == 0);

    fs::path run_dir;
    for (const auto& e : fs::directory_iterator(out_root)) run_dir = e.path();
    REQUIRE(!run_dir.empty());
    CHECK(fs::exists(run_dir / "summary.json"));
    CHECK(fs::exists(run_dir / "timeseries.csv"));
    CHECK(fs::exists(run_dir / "taxi_ledger.csv"));
    CHECK(fs::exists(run_dir / "trip_outcomes.csv"));
    CHECK(fs::exists(run_dir / "station_chart.csv"));
    std::string summary = slurp(run_dir / "summary.json");
    CHECK(summary.find("\"fill_rate\": 1.0") != std::string::npos);

    // Same config and seed: refuse without --force.
    CHECK(run_cli({"simulate", "--config", config, "--out", out_root}) == 2);
    CHECK(run_cli({"simulate", "--config", config, "--out", out_root, "--force"}) == 0);

    CHECK(run_cli({"simulate", "--config", (dir.path / "nope.json").string()}) == 2);
    std::string bad = (dir.path / "bad.json").string();
    write_file(bad, R"({"fleet_size": -4})");
    CHECK(run_cli({"simulate", "--config", bad, "--out", out_root}) == 2);
}

TEST_CASE("sweep runs the grid and aggregates deterministically") {
    TempDir dir("evtaxi_cli_sweep");
    std::string trips = (dir.path / "trips.csv").string();
    write_file(trips, toy_trips_csv());
    std::string spec = (dir.path / "sweep.json").string();
    write_file(spec, R"({
      "base": {"fleet_size": 3, "station_count": 1, "station_capacity": 2,
               "window_days": 0.5, "trips": "trips.csv"},
      "axes": {"fleet_size": [2, 3], "battery_range_km": [150, 200], "seeds": [1, 2, 3]}
    })");
    std::string out_a = (dir.path / "out_a").string();
    std::string out_b = (dir.path / "out_b").string();
    CHECK(run_cli({"sweep", "--spec", spec, "--out", out_a, "--parallelism", "1"}) == 0);
    CHECK(run_cli({"sweep", "--spec", spec, "--out", out_b, "--parallelism", "4"}) == 0);

    std::string agg_a = slurp(fs::path(out_a) / "aggregate.csv");
    CHECK(agg_a == slurp(fs::path(out_b) / "aggregate.csv"));
    CHECK(slurp(fs::path(out_a) / "detail.csv") == slurp(fs::path(out_b) / "detail.csv"));
    CHECK(std::count(agg_a.begin(), agg_a.end(), '\n') == 5);  // header + 4 cells
    std::string detail = slurp(fs::path(out_a) / "detail.csv");
    CHECK(std::count(detail.begin(), detail.end(), '\n') == 13);  // header + 12 runs

    // Re-running reuses the cached cells and reports them.
    CHECK(run_cli({"sweep", "--spec", spec, "--out", out_a, "--parallelism", "2"}) == 0);
    std::string detail2 = slurp(fs::path(out_a) / "detail.csv");
    CHECK(detail2.find("cached") != std::string::npos);
}
