#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evtaxi/engine.hpp"
#include "evtaxi/trips.hpp"

namespace evtaxi {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::vector<std::string>& errors)
        : std::runtime_error(join(errors)), details(errors) {}
    std::vector<std::string> details;

  private:
    static std::string join(const std::vector<std::string>& errors) {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) msg += "\n  - " + e;
        return msg;
    }
};

// Minimal TOML reader covering the key/value subset used by scenario
// files: sections, bare keys, strings, numbers, booleans, flat arrays,
// and # comments. Produces the same tree a JSON config would.
nlohmann::json parse_toml_lite(const std::string& text);

// Loads .toml or .json by extension (JSON accepted under any extension).
nlohmann::json load_config_tree(const std::string& path);

ScenarioConfig scenario_from_tree(const nlohmann::json& tree);
DemandProfile profile_from_tree(const nlohmann::json& tree);
DemandProfile load_profile(const std::string& path);

// Canonical serialization of every effective parameter except the seed;
// the run directory key is hash + seed.
nlohmann::json canonical_scenario_tree(const ScenarioConfig& cfg);
std::string config_hash_hex(const ScenarioConfig& cfg);

struct SweepSpec {
    ScenarioConfig base;
    std::vector<int> fleet_size;
    std::vector<double> battery_range_km;
    std::vector<int> station_capacity;
    std::vector<int> strategy_index;
    std::vector<double> density_factor;
    std::vector<std::uint64_t> seeds;
    std::size_t max_cells = 8192;
};

SweepSpec sweep_from_tree(const nlohmann::json& tree, const std::string& base_dir);

// All (cell, seed) scenario configs in deterministic cross-product order.
struct SweepCell {
    std::size_t cell_index = 0;
    ScenarioConfig config;
};
std::vector<SweepCell> expand_sweep(const SweepSpec& spec);
std::size_t sweep_cell_count(const SweepSpec& spec);

}  // namespace evtaxi
