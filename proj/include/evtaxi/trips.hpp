#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evtaxi/geo.hpp"
#include "evtaxi/sim_time.hpp"

namespace evtaxi {

// Flag fall covers the first base_km, then per_km beyond.
struct FareSchedule {
    double flag_fall = 13.0;
    double base_km = 3.0;
    double per_km = 2.3;

    double fare(double km) const {
        return km <= base_km ? flag_fall : flag_fall + (km - base_km) * per_km;
    }
};

struct VehiclePing {
    std::string vehicle_id;
    std::int64_t timestamp = 0;  // seconds since window start
    std::optional<GeoPoint> location;
    double speed_kmh = 0.0;
    bool in_service = false;
};

struct TripRequest {
    std::int64_t trip_id = 0;
    std::int64_t request_time_s = 0;
    GeoPoint origin;
    GeoPoint destination;
    double distance_km = 0.0;
    double duration_min = 0.0;
    double fare = 0.0;

    Step request_step(int step_seconds) const { return request_time_s / step_seconds; }
};

struct ClusterSpec {
    GeoPoint center;
    double weight = 1.0;
    double spread_km = 5.0;
};

// Daily arrival-rate profile; bins tile over the generation window.
struct IntensityCurve {
    double bin_minutes = 60.0;
    std::vector<double> values;  // relative rates, normalized internally
};

struct SpeedModel {
    double mean_kmh = 25.0;
    double sd_kmh = 5.0;
    double min_kmh = 10.0;
    double max_kmh = 60.0;
};

struct DemandProfile {
    std::vector<ClusterSpec> clusters;
    IntensityCurve intensity;
    double weekly_total = 0.0;
    SpeedModel passenger_speed;
};

struct RowReport {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

// One trip per maximal in-service run of a vehicle's ping sequence.
// Missing endpoint coordinates fall back to the nearest located ping
// within three minutes; trips shorter than two minutes are dropped.
std::vector<TripRequest> extract_trips(std::vector<VehiclePing> pings, const RegionBounds& region,
                                       const FareSchedule& fare, RowReport* report = nullptr);

// CSV columns: vehicle_id,timestamp,lon,lat,speed,in_service (lon/lat may be empty).
std::vector<VehiclePing> load_pings(const std::string& path, RowReport* report = nullptr);

// CSV columns: trip_id,request_time_s,origin_lon,origin_lat,dest_lon,dest_lat,
// distance_km,duration_min,fare. Output sorted by request time.
std::vector<TripRequest> load_trips(const std::string& path, const RegionBounds& region,
                                    RowReport* report = nullptr);

std::string trips_to_csv(const std::vector<TripRequest>& trips);
void save_trips(const std::string& path, const std::vector<TripRequest>& trips);

// Inhomogeneous arrival process over [0, window_days), rate scaled so a
// full week's expected count equals profile.weekly_total. Deterministic
// per seed.
std::vector<TripRequest> synthesize(const DemandProfile& profile, const RegionBounds& region,
                                    const FareSchedule& fare, double window_days, std::uint64_t seed);

// factor < 1: seeded thinning; factor > 1: bootstrap duplication with
// request times jittered by one step. Trip ids are reassigned.
std::vector<TripRequest> scale_density(const std::vector<TripRequest>& trips, double factor,
                                       int step_seconds, std::uint64_t seed);

// Named demand levels, trips per week.
double demand_level_weekly_total(const std::string& name);

}  // namespace evtaxi
