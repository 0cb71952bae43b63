#include "evtaxi/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "evtaxi/csv.hpp"
#include "evtaxi/rng.hpp"

namespace evtaxi {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

json parse_toml_scalar(const std::string& raw, int line_no) {
    std::string v = trim(raw);
    if (v.empty()) throw std::runtime_error("toml line " + std::to_string(line_no) + ": empty value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw std::runtime_error("toml line " + std::to_string(line_no) + ": unterminated string");
        return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    try {
        if (v.find_first_of(".eE") == std::string::npos) {
            std::size_t pos = 0;
            long long n = std::stoll(v, &pos);
            if (pos == v.size()) return n;
        }
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos == v.size()) return d;
    } catch (...) {
    }
    throw std::runtime_error("toml line " + std::to_string(line_no) + ": cannot parse value '" + v + "'");
}

json parse_toml_value(const std::string& raw, int line_no) {
    std::string v = trim(raw);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']')
            throw std::runtime_error("toml line " + std::to_string(line_no) + ": unterminated array");
        json arr = json::array();
        std::string inner = v.substr(1, v.size() - 2);
        std::string item;
        bool in_str = false;
        for (char c : inner) {
            if (c == '"') in_str = !in_str;
            if (c == ',' && !in_str) {
                if (!trim(item).empty()) arr.push_back(parse_toml_scalar(item, line_no));
                item.clear();
            } else {
                item.push_back(c);
            }
        }
        if (!trim(item).empty()) arr.push_back(parse_toml_scalar(item, line_no));
        return arr;
    }
    return parse_toml_scalar(v, line_no);
}

}  // namespace

json parse_toml_lite(const std::string& text) {
    json root = json::object();
    json* section = &root;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // Strip comments outside strings.
        bool in_str = false;
        std::string clean;
        for (char c : line) {
            if (c == '"') in_str = !in_str;
            if (c == '#' && !in_str) break;
            clean.push_back(c);
        }
        clean = trim(clean);
        if (clean.empty()) continue;
        if (clean.front() == '[') {
            if (clean.back() != ']')
                throw std::runtime_error("toml line " + std::to_string(line_no) + ": bad section header");
            std::string name = trim(clean.substr(1, clean.size() - 2));
            section = &root;
            std::istringstream parts(name);
            std::string part;
            while (std::getline(parts, part, '.')) {
                part = trim(part);
                if (part.empty())
                    throw std::runtime_error("toml line " + std::to_string(line_no) + ": bad section name");
                section = &((*section)[part]);
                if (!section->is_object() && !section->is_null())
                    throw std::runtime_error("toml line " + std::to_string(line_no) + ": section clashes with key");
                if (section->is_null()) *section = json::object();
            }
            continue;
        }
        std::size_t eq = clean.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("toml line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(clean.substr(0, eq));
        if (key.empty()) throw std::runtime_error("toml line " + std::to_string(line_no) + ": empty key");
        (*section)[key] = parse_toml_value(clean.substr(eq + 1), line_no);
    }
    return root;
}

json load_config_tree(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    bool looks_toml = path.size() > 5 && path.substr(path.size() - 5) == ".toml";
    if (looks_toml) return parse_toml_lite(text);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

namespace {

class FieldReader {
  public:
    FieldReader(const json& tree, std::vector<std::string>& errors, std::string prefix = "")
        : tree_(tree), errors_(errors), prefix_(std::move(prefix)) {}

    template <typename T>
    void number(const char* key, T& out) {
        auto it = tree_.find(key);
        if (it == tree_.end()) return;
        if (!it->is_number()) {
            errors_.push_back(prefix_ + key + ": expected a number");
            return;
        }
        out = it->get<T>();
    }

    void boolean(const char* key, bool& out) {
        auto it = tree_.find(key);
        if (it == tree_.end()) return;
        if (!it->is_boolean()) {
            errors_.push_back(prefix_ + key + ": expected true/false");
            return;
        }
        out = it->get<bool>();
    }

    void string(const char* key, std::string& out) {
        auto it = tree_.find(key);
        if (it == tree_.end()) return;
        if (!it->is_string()) {
            errors_.push_back(prefix_ + key + ": expected a string");
            return;
        }
        out = it->get<std::string>();
    }

    bool has(const char* key) const { return tree_.contains(key); }
    const json& tree() const { return tree_; }
    std::vector<std::string>& errors() { return errors_; }
    const std::string& prefix() const { return prefix_; }

  private:
    const json& tree_;
    std::vector<std::string>& errors_;
    std::string prefix_;
};

void read_region(const json& tree, RegionBounds& region, std::vector<std::string>& errors) {
    FieldReader r(tree, errors, "region.");
    r.number("lon_min", region.lon_min);
    r.number("lon_max", region.lon_max);
    r.number("lat_min", region.lat_min);
    r.number("lat_max", region.lat_max);
    r.number("width_km", region.width_km);
    r.number("height_km", region.height_km);
}

std::vector<double> read_number_array(const json& arr, const std::string& key,
                                      std::vector<std::string>& errors) {
    std::vector<double> out;
    if (!arr.is_array()) {
        errors.push_back(key + ": expected an array of numbers");
        return out;
    }
    for (const auto& v : arr) {
        if (!v.is_number()) {
            errors.push_back(key + ": expected an array of numbers");
            return {};
        }
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

ScenarioConfig scenario_from_tree(const json& tree) {
    std::vector<std::string> errors;
    if (!tree.is_object()) throw ConfigError({"scenario config must be a table/object"});
    ScenarioConfig cfg;
    FieldReader r(tree, errors);

    if (tree.contains("region")) read_region(tree["region"], cfg.region, errors);
    r.number("step_seconds", cfg.step_seconds);
    r.number("window_days", cfg.window_days);
    r.number("fleet_size", cfg.fleet_size);
    r.number("battery_range_km", cfg.battery_range_km);
    r.number("station_count", cfg.station_count);
    r.number("station_capacity", cfg.station_capacity);
    r.boolean("station_capacity_from_sites", cfg.station_capacity_from_sites);
    r.number("k_adjacent", cfg.k_adjacent);
    r.number("empty_speed_kmh", cfg.empty_speed_kmh);
    r.number("waiting_threshold_min", cfg.waiting_threshold_min);
    r.number("cancel_threshold_min", cfg.cancel_threshold_min);
    r.number("recharge_threshold_km", cfg.recharge_threshold_km);
    r.number("recharge_minutes", cfg.recharge_minutes);
    r.boolean("soc_proportional_charge", cfg.soc_proportional_charge);
    r.number("bin_minutes", cfg.bin_minutes);
    r.number("seed", cfg.seed);
    r.number("density_factor", cfg.density_factor);
    r.number("kmeans_sample_cap", cfg.kmeans_sample_cap);
    r.string("trips", cfg.trips_path);
    r.string("profile", cfg.profile_path);
    r.string("sites", cfg.sites_path);

    if (tree.contains("fare")) {
        FieldReader fr(tree["fare"], errors, "fare.");
        fr.number("flag_fall", cfg.fare.flag_fall);
        fr.number("base_km", cfg.fare.base_km);
        fr.number("per_km", cfg.fare.per_km);
    }

    bool has_weights = tree.contains("weights");
    bool has_index = tree.contains("strategy_index");
    if (has_weights && has_index) {
        errors.push_back("strategy_index and weights are mutually exclusive");
    } else if (has_weights) {
        auto w = read_number_array(tree["weights"], "weights", errors);
        if (w.size() == 4) {
            cfg.strategy_index = 0;
            cfg.weights.w1 = w[0];
            cfg.weights.w2 = w[1];
            cfg.weights.w3 = w[2];
            cfg.weights.w4 = w[3];
        } else if (errors.empty() || w.empty()) {
            errors.push_back("weights: expected exactly 4 numbers [w1,w2,w3,w4]");
        }
    } else if (has_index) {
        r.number("strategy_index", cfg.strategy_index);
        if (cfg.strategy_index < 1 || cfg.strategy_index > 16)
            errors.push_back("strategy_index: must be 1..16");
    }
    if (tree.contains("q")) {
        auto q = read_number_array(tree["q"], "q", errors);
        if (q.size() == 4) {
            cfg.weights.q1 = q[0];
            cfg.weights.q2 = q[1];
            cfg.weights.q3 = q[2];
            cfg.weights.q4 = q[3];
        } else {
            errors.push_back("q: expected exactly 4 numbers [q1,q2,q3,q4]");
        }
    }
    r.number("busy_threshold", cfg.weights.busy_threshold);

    auto more = cfg.validate();
    errors.insert(errors.end(), more.begin(), more.end());
    if (!errors.empty()) throw ConfigError(errors);
    return cfg;
}

DemandProfile profile_from_tree(const json& tree) {
    std::vector<std::string> errors;
    DemandProfile profile;
    if (!tree.is_object()) throw ConfigError({"demand profile must be a table/object"});
    FieldReader r(tree, errors);
    r.number("weekly_total", profile.weekly_total);
    if (tree.contains("clusters") && tree["clusters"].is_array()) {
        for (const auto& c : tree["clusters"]) {
            ClusterSpec spec;
            FieldReader cr(c, errors, "clusters[]: ");
            cr.number("lon", spec.center.lon);
            cr.number("lat", spec.center.lat);
            cr.number("weight", spec.weight);
            cr.number("spread_km", spec.spread_km);
            if (spec.weight < 0) errors.push_back("clusters[]: weight must be non-negative");
            if (spec.spread_km <= 0) errors.push_back("clusters[]: spread_km must be positive");
            profile.clusters.push_back(spec);
        }
    } else {
        errors.push_back("clusters: required array");
    }
    if (tree.contains("intensity")) {
        FieldReader ir(tree["intensity"], errors, "intensity.");
        ir.number("bin_minutes", profile.intensity.bin_minutes);
        if (ir.tree().contains("values")) {
            auto vals = read_number_array(ir.tree()["values"], "intensity.values", errors);
            for (double v : vals) {
                if (v < 0) errors.push_back("intensity.values: must be non-negative");
            }
            profile.intensity.values = vals;
        }
        if (profile.intensity.bin_minutes <= 0) errors.push_back("intensity.bin_minutes: must be positive");
    }
    if (tree.contains("passenger_speed")) {
        FieldReader sr(tree["passenger_speed"], errors, "passenger_speed.");
        sr.number("mean_kmh", profile.passenger_speed.mean_kmh);
        sr.number("sd_kmh", profile.passenger_speed.sd_kmh);
        sr.number("min_kmh", profile.passenger_speed.min_kmh);
        sr.number("max_kmh", profile.passenger_speed.max_kmh);
        if (profile.passenger_speed.min_kmh <= 0 ||
            profile.passenger_speed.max_kmh < profile.passenger_speed.min_kmh)
            errors.push_back("passenger_speed: bounds must satisfy 0 < min <= max");
    }
    if (profile.weekly_total < 0) errors.push_back("weekly_total: must be non-negative");
    if (!errors.empty()) throw ConfigError(errors);
    return profile;
}

DemandProfile load_profile(const std::string& path) { return profile_from_tree(load_config_tree(path)); }

json canonical_scenario_tree(const ScenarioConfig& cfg) {
    json j;
    j["region"] = {{"lon_min", cfg.region.lon_min}, {"lon_max", cfg.region.lon_max},
                   {"lat_min", cfg.region.lat_min}, {"lat_max", cfg.region.lat_max},
                   {"width_km", cfg.region.width_km}, {"height_km", cfg.region.height_km}};
    j["step_seconds"] = cfg.step_seconds;
    j["window_days"] = cfg.window_days;
    j["fleet_size"] = cfg.fleet_size;
    j["battery_range_km"] = cfg.battery_range_km;
    j["station_count"] = cfg.station_count;
    j["station_capacity"] = cfg.station_capacity;
    j["station_capacity_from_sites"] = cfg.station_capacity_from_sites;
    j["k_adjacent"] = cfg.k_adjacent;
    j["strategy_index"] = cfg.strategy_index;
    j["weights"] = {cfg.weights.w1, cfg.weights.w2, cfg.weights.w3, cfg.weights.w4};
    j["q"] = {cfg.weights.q1, cfg.weights.q2, cfg.weights.q3, cfg.weights.q4};
    j["busy_threshold"] = cfg.weights.busy_threshold;
    j["empty_speed_kmh"] = cfg.empty_speed_kmh;
    j["waiting_threshold_min"] = cfg.waiting_threshold_min;
    j["cancel_threshold_min"] = cfg.cancel_threshold_min;
    j["recharge_threshold_km"] = cfg.recharge_threshold_km;
    j["recharge_minutes"] = cfg.recharge_minutes;
    j["soc_proportional_charge"] = cfg.soc_proportional_charge;
    j["fare"] = {{"flag_fall", cfg.fare.flag_fall}, {"base_km", cfg.fare.base_km}, {"per_km", cfg.fare.per_km}};
    j["bin_minutes"] = cfg.bin_minutes;
    j["trips"] = cfg.trips_path;
    j["profile"] = cfg.profile_path;
    j["sites"] = cfg.sites_path;
    j["density_factor"] = cfg.density_factor;
    j["kmeans_sample_cap"] = cfg.kmeans_sample_cap;
    return j;
}

std::string config_hash_hex(const ScenarioConfig& cfg) {
    std::string canon = canonical_scenario_tree(cfg).dump();
    std::uint64_t h = fnv1a64(canon);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string join_path(const std::string& dir, const std::string& file) {
    if (file.empty() || file.front() == '/' || dir.empty()) return file;
    return dir + "/" + file;
}

}  // namespace

SweepSpec sweep_from_tree(const json& tree, const std::string& base_dir) {
    std::vector<std::string> errors;
    if (!tree.is_object()) throw ConfigError({"sweep spec must be a table/object"});
    SweepSpec spec;
    if (tree.contains("base")) {
        spec.base = scenario_from_tree(tree["base"]);
    } else if (tree.contains("base_path")) {
        spec.base = scenario_from_tree(load_config_tree(join_path(base_dir, tree["base_path"].get<std::string>())));
    } else {
        throw ConfigError({"sweep spec needs 'base' (inline scenario) or 'base_path'"});
    }
    // Input paths are resolved relative to the sweep file's directory.
    spec.base.trips_path = join_path(base_dir, spec.base.trips_path);
    spec.base.profile_path = join_path(base_dir, spec.base.profile_path);
    spec.base.sites_path = join_path(base_dir, spec.base.sites_path);

    if (tree.contains("axes")) {
        const json& axes = tree["axes"];
        if (!axes.is_object()) throw ConfigError({"axes: expected a table/object"});
        for (auto it = axes.begin(); it != axes.end(); ++it) {
            const std::string& key = it.key();
            auto nums = read_number_array(it.value(), "axes." + key, errors);
            if (nums.empty() && errors.empty()) errors.push_back("axes." + key + ": empty axis");
            if (key == "fleet_size") {
                for (double v : nums) spec.fleet_size.push_back(static_cast<int>(v));
            } else if (key == "battery_range_km") {
                spec.battery_range_km = nums;
            } else if (key == "station_capacity") {
                for (double v : nums) spec.station_capacity.push_back(static_cast<int>(v));
            } else if (key == "strategy_index") {
                for (double v : nums) spec.strategy_index.push_back(static_cast<int>(v));
            } else if (key == "density_factor") {
                spec.density_factor = nums;
            } else if (key == "seeds") {
                for (double v : nums) spec.seeds.push_back(static_cast<std::uint64_t>(v));
            } else {
                errors.push_back("axes." + key + ": unknown axis");
            }
        }
    }
    if (tree.contains("max_cells")) {
        if (!tree["max_cells"].is_number_unsigned() && !tree["max_cells"].is_number_integer())
            errors.push_back("max_cells: expected an integer");
        else
            spec.max_cells = tree["max_cells"].get<std::size_t>();
    }
    for (std::size_t i = 0; i < spec.seeds.size(); ++i)
        for (std::size_t k = i + 1; k < spec.seeds.size(); ++k)
            if (spec.seeds[i] == spec.seeds[k]) errors.push_back("axes.seeds: seeds must be distinct");

    if (spec.fleet_size.empty()) spec.fleet_size = {spec.base.fleet_size};
    if (spec.battery_range_km.empty()) spec.battery_range_km = {spec.base.battery_range_km};
    if (spec.station_capacity.empty()) spec.station_capacity = {spec.base.station_capacity};
    if (spec.strategy_index.empty()) spec.strategy_index = {spec.base.strategy_index};
    if (spec.density_factor.empty()) spec.density_factor = {spec.base.density_factor};
    if (spec.seeds.empty()) spec.seeds = {spec.base.seed};

    if (!errors.empty()) throw ConfigError(errors);
    std::size_t cells = sweep_cell_count(spec) * spec.seeds.size();
    if (cells > spec.max_cells) {
        throw ConfigError({"sweep expands to " + std::to_string(cells) + " runs, above max_cells=" +
                           std::to_string(spec.max_cells)});
    }
    return spec;
}

std::size_t sweep_cell_count(const SweepSpec& spec) {
    return spec.fleet_size.size() * spec.battery_range_km.size() * spec.station_capacity.size() *
           spec.strategy_index.size() * spec.density_factor.size();
}

std::vector<SweepCell> expand_sweep(const SweepSpec& spec) {
    std::vector<SweepCell> cells;
    std::size_t cell_index = 0;
    for (int fleet : spec.fleet_size)
        for (double range : spec.battery_range_km)
            for (int cap : spec.station_capacity)
                for (int strat : spec.strategy_index)
                    for (double density : spec.density_factor) {
                        for (std::uint64_t seed : spec.seeds) {
                            ScenarioConfig cfg = spec.base;
                            cfg.fleet_size = fleet;
                            cfg.battery_range_km = range;
                            cfg.station_capacity = cap;
                            if (strat >= 1) cfg.strategy_index = strat;
                            cfg.density_factor = density;
                            cfg.seed = seed;
                            cells.push_back({cell_index, cfg});
                        }
                        ++cell_index;
                    }
    return cells;
}

}  // namespace evtaxi
