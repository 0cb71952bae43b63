#include <doctest.h>

#include "evtaxi/config.hpp"
#include "evtaxi/csv.hpp"

using namespace evtaxi;
using nlohmann::json;

TEST_CASE("an empty tree yields the default scenario") {
    ScenarioConfig cfg = scenario_from_tree(json::object());
    CHECK(cfg.step_seconds == 30);
    CHECK(cfg.fleet_size == 300);
    CHECK(cfg.battery_range_km == 200.0);
    CHECK(cfg.recharge_threshold_km == 20.0);
    CHECK(cfg.recharge_minutes == 30.0);
    CHECK(cfg.waiting_threshold_min == 3.0);
    CHECK(cfg.cancel_threshold_min == 15.0);
    CHECK(cfg.weights.busy_threshold == 0.5);
    CHECK(cfg.strategy_index == 1);
    CHECK(cfg.region.lon_min == 115.5);
    CHECK(cfg.region.width_km == 165.0);
}

TEST_CASE("toml subset parses sections, arrays, and comments") {
    std::string text =
        "# scenario\n"
        "fleet_size = 240\n"
        "battery_range_km = 150.5\n"
        "soc_proportional_charge = true\n"
        "weights = [1, 0, 1, 1]\n"
        "trips = \"week.csv\"\n"
        "[fare]\n"
        "flag_fall = 14.0  # currency\n"
        "[region]\n"
        "lon_min = 115.5\n";
    json tree = parse_toml_lite(text);
    CHECK(tree["fleet_size"] == 240);
    CHECK(tree["battery_range_km"] == 150.5);
    CHECK(tree["soc_proportional_charge"] == true);
    CHECK(tree["weights"].size() == 4);
    CHECK(tree["trips"] == "week.csv");
    CHECK(tree["fare"]["flag_fall"] == 14.0);

    ScenarioConfig cfg = scenario_from_tree(tree);
    CHECK(cfg.fleet_size == 240);
    CHECK(cfg.strategy_index == 0);
    CHECK(cfg.weights.w3 == 1.0);
    CHECK(cfg.fare.flag_fall == 14.0);

    CHECK_THROWS(parse_toml_lite("fleet_size 240\n"));
    CHECK_THROWS(parse_toml_lite("x = [1, 2\n"));
}

TEST_CASE("json and toml forms of one config hash identically") {
    std::string toml_path = "/tmp/evtaxi_cfg.toml";
    write_file(toml_path, "fleet_size = 200\nstation_capacity = 4\nseed = 9\n");
    std::string json_path = "/tmp/evtaxi_cfg.json";
    write_file(json_path, "{\"station_capacity\": 4, \"seed\": 3, \"fleet_size\": 200}\n");
    ScenarioConfig a = scenario_from_tree(load_config_tree(toml_path));
    ScenarioConfig b = scenario_from_tree(load_config_tree(json_path));
    // The seed names the run, not the configuration.
    CHECK(config_hash_hex(a) == config_hash_hex(b));

    ScenarioConfig c = a;
    c.fleet_size = 201;
    CHECK(config_hash_hex(a) != config_hash_hex(c));
    CHECK(config_hash_hex(a).size() == 16);
}

TEST_CASE("field diagnostics name the offending keys") {
    json tree{{"fleet_size", "many"}, {"recharge_minutes", -3}};
    try {
        scenario_from_tree(tree);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        bool saw_fleet = false, saw_recharge = false;
        for (const auto& d : e.details) {
            if (d.find("fleet_size") != std::string::npos) saw_fleet = true;
            if (d.find("recharge_minutes") != std::string::npos) saw_recharge = true;
        }
        CHECK(saw_fleet);
        CHECK(saw_recharge);
    }
}

TEST_CASE("strategy index and custom weights are mutually exclusive") {
    CHECK_THROWS_AS(scenario_from_tree(json{{"strategy_index", 3}, {"weights", {1, 0, 0, 0}}}), ConfigError);
    ScenarioConfig by_index = scenario_from_tree(json{{"strategy_index", 13}});
    auto w = by_index.resolved_weights();
    CHECK((w.w1 == 1 && w.w2 == 0 && w.w3 == 1 && w.w4 == 1));
    CHECK(w.q4 == doctest::Approx(1.0 / 200.0));  // auto from battery range

    ScenarioConfig custom = scenario_from_tree(json{{"weights", {0, 1, 0, 1}}, {"q", {1, 1, 1, 0.004}}});
    auto cw = custom.resolved_weights();
    CHECK(cw.w2 == 1.0);
    CHECK(cw.q4 == 0.004);
}

TEST_CASE("demand profile parsing and validation") {
    json tree{
        {"weekly_total", 20000},
        {"clusters", json::array({json{{"lon", 116.4}, {"lat", 40.0}, {"weight", 0.7}, {"spread_km", 6.0}},
                                  json{{"lon", 116.8}, {"lat", 40.2}, {"weight", 0.3}, {"spread_km", 12.0}}})},
        {"intensity", json{{"bin_minutes", 60}, {"values", {1, 2, 3}}}},
    };
    DemandProfile p = profile_from_tree(tree);
    CHECK(p.weekly_total == 20000.0);
    CHECK(p.clusters.size() == 2);
    CHECK(p.intensity.values.size() == 3);

    json bad = tree;
    bad["clusters"][0]["spread_km"] = -1;
    CHECK_THROWS_AS(profile_from_tree(bad), ConfigError);
    CHECK_THROWS_AS(profile_from_tree(json{{"weekly_total", 10}}), ConfigError);
}

TEST_CASE("sweep expansion covers the cross product with seeds innermost") {
    json tree{
        {"base", json{{"fleet_size", 100}, {"trips", "t.csv"}}},
        {"axes", json{{"fleet_size", {200, 300}}, {"station_capacity", {2, 4}}, {"seeds", {1, 2, 3}}}},
    };
    SweepSpec spec = sweep_from_tree(tree, "");
    CHECK(sweep_cell_count(spec) == 4);
    auto jobs = expand_sweep(spec);
    REQUIRE(jobs.size() == 12);
    CHECK(jobs[0].config.fleet_size == 200);
    CHECK(jobs[0].config.station_capacity == 2);
    CHECK(jobs[0].config.seed == 1);
    CHECK(jobs[2].config.seed == 3);
    CHECK(jobs[3].config.station_capacity == 4);
    CHECK(jobs[11].config.fleet_size == 300);
    // Cells keep the base demand source.
    CHECK(jobs[5].config.trips_path == "t.csv");

    json dup = tree;
    dup["axes"]["seeds"] = {1, 1};
    CHECK_THROWS_AS(sweep_from_tree(dup, ""), ConfigError);

    json unknown = tree;
    unknown["axes"]["speed"] = {1, 2};
    CHECK_THROWS_AS(sweep_from_tree(unknown, ""), ConfigError);

    json too_big = tree;
    too_big["max_cells"] = 5;
    CHECK_THROWS_AS(sweep_from_tree(too_big, ""), ConfigError);
}
