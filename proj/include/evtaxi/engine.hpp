#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "evtaxi/dispatch.hpp"
#include "evtaxi/geo.hpp"
#include "evtaxi/metrics.hpp"
#include "evtaxi/rng.hpp"
#include "evtaxi/siting.hpp"
#include "evtaxi/station.hpp"
#include "evtaxi/taxi.hpp"
#include "evtaxi/trips.hpp"

namespace evtaxi {

struct ScenarioConfig {
    RegionBounds region;
    int step_seconds = 30;
    double window_days = 7.0;

    int fleet_size = 300;
    double battery_range_km = 200.0;
    int station_count = 20;
    int station_capacity = 16;
    bool station_capacity_from_sites = false;  // sites-file capacities win when true
    int k_adjacent = 3;

    int strategy_index = 1;   // 1..16; 0 = use custom weights below
    StrategyWeights weights;  // q4 <= 0 resolves to 1/battery_range

    double empty_speed_kmh = 30.0;
    double waiting_threshold_min = 3.0;
    double cancel_threshold_min = 15.0;
    double recharge_threshold_km = 20.0;
    double recharge_minutes = 30.0;
    bool soc_proportional_charge = false;

    FareSchedule fare;
    double bin_minutes = 15.0;
    std::uint64_t seed = 1;

    // Demand / siting sources for the CLI; in-memory callers pass data directly.
    std::string trips_path;
    std::string profile_path;
    std::string sites_path;
    double density_factor = 1.0;
    std::size_t kmeans_sample_cap = 200000;

    Step window_steps() const {
        return static_cast<Step>(window_days * 86400.0 / step_seconds + 0.5);
    }
    std::int64_t window_seconds() const { return window_steps() * step_seconds; }
    StrategyWeights resolved_weights() const;
    std::vector<std::string> validate() const;
};

struct TripResultRow {
    std::int64_t trip_id = 0;
    TripStatus status = TripStatus::Residual;
    int taxi_id = -1;
    Step request_step = 0;
    Step pickup_step = -1;
    Step dropoff_step = -1;
    double wait_min = 0.0;
};

struct TaxiLedgerRow {
    int taxi_id = 0;
    double income = 0.0;
    int trips_served = 0;
    double km_driven = 0.0;
    int charge_count = 0;
    double final_soc_km = 0.0;
};

struct RunOutput {
    std::size_t total_requests = 0;
    std::size_t served = 0;
    std::size_t cancelled = 0;
    std::size_t residual = 0;
    std::size_t charge_sessions = 0;
    double fill_rate = 1.0;
    double unsatisfied_rate = 0.0;
    double avg_wait_min = 0.0;
    double gini = 0.0;
    std::optional<double> peak_lag_min;

    TimeSeries curves;
    std::vector<Step> request_steps;
    std::vector<Step> charge_steps;
    std::vector<std::int32_t> waiting_len;  // per simulation step inside the window
    std::vector<TripResultRow> trips;
    std::vector<TaxiLedgerRow> taxis;
    std::vector<ChartRow> chart;

    std::string summary_json(const std::string& config_hash, std::uint64_t seed) const;
    std::string timeseries_csv(int step_seconds) const;
    std::string taxi_ledger_csv() const;
    std::string trip_outcomes_csv(int step_seconds) const;
    std::string chart_csv() const;
};

// Proportional fleet allocation with largest-remainder rounding; exposed
// for tests.
std::vector<int> allocate_fleet(const std::vector<std::int64_t>& region_demand, int fleet_size);

// One scenario = one deterministic single-threaded event sequence.
class Engine {
  public:
    Engine(const ScenarioConfig& cfg, std::vector<TripRequest> trips, std::vector<StationSite> sites);

    RunOutput run();

    // Exposed for white-box tests.
    const std::vector<TaxiState>& fleet() const { return taxis_; }
    const Partition& partition() const { return partition_; }
    void step();
    Step now() const { return now_; }

  private:
    struct TripRuntime {
        std::int64_t trip_id = 0;
        PlanePoint origin;
        PlanePoint dest;
        Step request_step = 0;
        Step duration_steps = 1;
        double trip_km = 0.0;
        double fare = 0.0;
        int origin_region = 0;
        int dest_region = 0;
        double dest_station_km = 0.0;
        TripStatus status = TripStatus::Residual;
        int taxi_id = -1;
        Step pickup_step = -1;
        Step dropoff_step = -1;
    };

    void init_fleet(const std::vector<TripRequest>& trips);
    void advance_motion(TaxiState& t);
    void begin_motion(TaxiState& t, const PlanePoint& to, double km, double speed_kmh);
    void handle_arrival(TaxiState& t);
    void handle_dropoff(TaxiState& t);
    void make_available(TaxiState& t);
    void rebuild_buckets();
    bool dest_busy(const TripRuntime& tr) const;
    std::optional<int> try_dispatch(std::int64_t trip_index, int region);
    void commit_assignment(std::int64_t trip_index, int taxi_id);
    Step charge_duration_steps(const TaxiState& t) const;
    void fail(const std::string& what) const;

    ScenarioConfig cfg_;
    StrategyWeights weights_;
    Partition partition_;
    StationYard yard_;
    std::vector<TaxiState> taxis_;
    std::vector<TripRuntime> trips_;
    std::deque<WaitingEntry> waiting_;
    std::vector<std::vector<TaxiView>> buckets_;  // per region, rebuilt per step
    Rng tie_rng_;
    Step now_ = 0;
    std::size_t next_trip_ = 0;  // cursor into time-sorted trips_
    bool draining_ = false;

    std::vector<Step> request_steps_;
    std::vector<Step> charge_steps_;
    std::vector<std::int32_t> waiting_len_;
};

// Builds sites (from config or provided), runs the scenario, returns output.
RunOutput simulate_scenario(const ScenarioConfig& cfg, std::vector<TripRequest> trips,
                            std::vector<StationSite> sites);

// Auto-site stations from trip origins when no sites file is given.
std::vector<StationSite> auto_site(const ScenarioConfig& cfg, const std::vector<TripRequest>& trips);

}  // namespace evtaxi
