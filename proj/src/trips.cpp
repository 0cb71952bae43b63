#include "evtaxi/trips.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "evtaxi/csv.hpp"
#include "evtaxi/rng.hpp"

namespace evtaxi {

namespace {

constexpr double kMinTripMinutes = 2.0;
constexpr std::int64_t kEndpointFixWindowS = 180;  // three minutes

// Nearest located ping (by time distance) within the fix window of `anchor_ts`.
std::optional<GeoPoint> nearest_located(const std::vector<VehiclePing>& pings, std::int64_t anchor_ts) {
    std::optional<GeoPoint> best;
    std::int64_t best_dt = kEndpointFixWindowS + 1;
    for (const auto& p : pings) {
        if (!p.location) continue;
        std::int64_t dt = std::abs(p.timestamp - anchor_ts);
        if (dt <= kEndpointFixWindowS && dt < best_dt) {
            best_dt = dt;
            best = p.location;
        }
    }
    return best;
}

bool finalize_trip(TripRequest& t, const RegionBounds& region, const FareSchedule& fare) {
    if (!region.contains(t.origin) || !region.contains(t.destination)) return false;
    t.distance_km = manhattan(region.project(t.origin), region.project(t.destination));
    if (t.distance_km <= 0.0) return false;
    if (t.duration_min < kMinTripMinutes) return false;
    t.fare = fare.fare(t.distance_km);
    return true;
}

}  // namespace

std::vector<TripRequest> extract_trips(std::vector<VehiclePing> pings, const RegionBounds& region,
                                       const FareSchedule& fare, RowReport* report) {
    RowReport local;
    RowReport& rep = report ? *report : local;

    // Group by vehicle id, keep time order within each group.
    std::map<std::string, std::vector<VehiclePing>> by_vehicle;
    for (auto& p : pings) by_vehicle[p.vehicle_id].push_back(std::move(p));

    std::vector<TripRequest> trips;
    for (auto& [vid, vp] : by_vehicle) {
        std::stable_sort(vp.begin(), vp.end(),
                         [](const VehiclePing& a, const VehiclePing& b) { return a.timestamp < b.timestamp; });
        // Enforce strictly increasing timestamps; drop later duplicates.
        std::vector<VehiclePing> seq;
        seq.reserve(vp.size());
        for (auto& p : vp) {
            if (!seq.empty() && p.timestamp == seq.back().timestamp) {
                ++rep.rejected;
                continue;
            }
            seq.push_back(std::move(p));
        }
        std::size_t i = 0;
        while (i < seq.size()) {
            if (!seq[i].in_service) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j + 1 < seq.size() && seq[j + 1].in_service) ++j;

            TripRequest t;
            t.request_time_s = seq[i].timestamp;
            t.duration_min = static_cast<double>(seq[j].timestamp - seq[i].timestamp) / 60.0;
            auto origin = seq[i].location ? seq[i].location : nearest_located(seq, seq[i].timestamp);
            auto dest = seq[j].location ? seq[j].location : nearest_located(seq, seq[j].timestamp);
            if (origin && dest) {
                t.origin = *origin;
                t.destination = *dest;
                if (finalize_trip(t, region, fare)) {
                    t.trip_id = static_cast<std::int64_t>(trips.size());
                    trips.push_back(t);
                    ++rep.accepted;
                } else {
                    ++rep.rejected;
                }
            } else {
                ++rep.rejected;
            }
            i = j + 1;
        }
    }
    std::stable_sort(trips.begin(), trips.end(), [](const TripRequest& a, const TripRequest& b) {
        return a.request_time_s < b.request_time_s;
    });
    for (std::size_t k = 0; k < trips.size(); ++k) trips[k].trip_id = static_cast<std::int64_t>(k);
    return trips;
}

std::vector<VehiclePing> load_pings(const std::string& path, RowReport* report) {
    RowReport local;
    RowReport& rep = report ? *report : local;
    CsvReader reader(path);
    std::size_t c_vid = reader.column("vehicle_id");
    std::size_t c_ts = reader.column("timestamp");
    std::size_t c_lon = reader.column("lon");
    std::size_t c_lat = reader.column("lat");
    std::size_t c_speed = reader.column("speed");
    std::size_t c_svc = reader.column("in_service");

    std::vector<VehiclePing> pings;
    std::vector<std::string> f;
    while (reader.next(f)) {
        std::size_t need = std::max({c_vid, c_ts, c_lon, c_lat, c_speed, c_svc}) + 1;
        if (f.size() < need) {
            ++rep.rejected;
            continue;
        }
        VehiclePing p;
        p.vehicle_id = f[c_vid];
        double speed = 0.0;
        if (p.vehicle_id.empty() || !parse_int64(f[c_ts], p.timestamp) || !parse_double(f[c_speed], speed)) {
            ++rep.rejected;
            continue;
        }
        p.speed_kmh = speed;
        const std::string& svc = f[c_svc];
        if (svc == "1" || svc == "true") {
            p.in_service = true;
        } else if (svc == "0" || svc == "false") {
            p.in_service = false;
        } else {
            ++rep.rejected;
            continue;
        }
        GeoPoint g;
        if (!f[c_lon].empty() && !f[c_lat].empty() && parse_double(f[c_lon], g.lon) && parse_double(f[c_lat], g.lat)) {
            p.location = g;
        }
        pings.push_back(std::move(p));
        ++rep.accepted;
    }
    return pings;
}

std::vector<TripRequest> load_trips(const std::string& path, const RegionBounds& region, RowReport* report) {
    RowReport local;
    RowReport& rep = report ? *report : local;
    CsvReader reader(path);
    std::size_t c_id = reader.column("trip_id");
    std::size_t c_t = reader.column("request_time_s");
    std::size_t c_olon = reader.column("origin_lon");
    std::size_t c_olat = reader.column("origin_lat");
    std::size_t c_dlon = reader.column("dest_lon");
    std::size_t c_dlat = reader.column("dest_lat");
    std::size_t c_dist = reader.column("distance_km");
    std::size_t c_dur = reader.column("duration_min");
    std::size_t c_fare = reader.column("fare");

    std::vector<TripRequest> trips;
    std::vector<std::string> f;
    while (reader.next(f)) {
        std::size_t need = std::max({c_id, c_t, c_olon, c_olat, c_dlon, c_dlat, c_dist, c_dur, c_fare}) + 1;
        if (f.size() < need) {
            ++rep.rejected;
            continue;
        }
        TripRequest t;
        bool ok = parse_int64(f[c_id], t.trip_id) && parse_int64(f[c_t], t.request_time_s) &&
                  parse_double(f[c_olon], t.origin.lon) && parse_double(f[c_olat], t.origin.lat) &&
                  parse_double(f[c_dlon], t.destination.lon) && parse_double(f[c_dlat], t.destination.lat) &&
                  parse_double(f[c_dist], t.distance_km) && parse_double(f[c_dur], t.duration_min) &&
                  parse_double(f[c_fare], t.fare);
        ok = ok && t.request_time_s >= 0 && t.distance_km > 0.0 && t.duration_min >= kMinTripMinutes &&
             t.fare >= 0.0 && region.contains(t.origin) && region.contains(t.destination) &&
             (t.origin.lon != t.destination.lon || t.origin.lat != t.destination.lat);
        if (!ok) {
            ++rep.rejected;
            continue;
        }
        trips.push_back(t);
        ++rep.accepted;
    }
    std::stable_sort(trips.begin(), trips.end(), [](const TripRequest& a, const TripRequest& b) {
        return a.request_time_s < b.request_time_s;
    });
    return trips;
}

std::string trips_to_csv(const std::vector<TripRequest>& trips) {
    std::ostringstream out;
    out << "trip_id,request_time_s,origin_lon,origin_lat,dest_lon,dest_lat,distance_km,duration_min,fare\n";
    for (const auto& t : trips) {
        out << t.trip_id << ',' << t.request_time_s << ',' << fmt_double(t.origin.lon) << ','
            << fmt_double(t.origin.lat) << ',' << fmt_double(t.destination.lon) << ','
            << fmt_double(t.destination.lat) << ',' << fmt_double(t.distance_km, 4) << ','
            << fmt_double(t.duration_min, 3) << ',' << fmt_double(t.fare, 2) << '\n';
    }
    return out.str();
}

void save_trips(const std::string& path, const std::vector<TripRequest>& trips) {
    write_file(path, trips_to_csv(trips));
}

namespace {

// Normalized intensity: mean 1 over the daily curve, so the base rate
// alone fixes the weekly expectation.
double intensity_at(const IntensityCurve& curve, double minute_of_day, double values_mean) {
    if (curve.values.empty() || values_mean <= 0.0) return 1.0;
    double bin_span = curve.bin_minutes;
    std::size_t idx = static_cast<std::size_t>(minute_of_day / bin_span) % curve.values.size();
    return curve.values[idx] / values_mean;
}

GeoPoint draw_point(const std::vector<ClusterSpec>& clusters, const std::vector<double>& cum_weights,
                    const RegionBounds& region, Rng& rng) {
    double u = rng.uniform01();
    std::size_t ci = std::lower_bound(cum_weights.begin(), cum_weights.end(), u) - cum_weights.begin();
    if (ci >= clusters.size()) ci = clusters.size() - 1;
    const ClusterSpec& c = clusters[ci];
    PlanePoint center = region.project(c.center);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        PlanePoint p{center.x + rng.normal(0.0, c.spread_km), center.y + rng.normal(0.0, c.spread_km)};
        if (region.contains_plane(p)) return region.unproject(p);
    }
    return c.center;
}

}  // namespace

std::vector<TripRequest> synthesize(const DemandProfile& profile, const RegionBounds& region,
                                    const FareSchedule& fare, double window_days, std::uint64_t seed) {
    std::vector<TripRequest> trips;
    if (profile.weekly_total <= 0.0 || window_days <= 0.0 || profile.clusters.empty()) return trips;

    std::vector<double> cum_weights;
    double wsum = 0.0;
    for (const auto& c : profile.clusters) wsum += c.weight;
    if (wsum <= 0.0) return trips;
    double acc = 0.0;
    for (const auto& c : profile.clusters) {
        acc += c.weight / wsum;
        cum_weights.push_back(acc);
    }
    cum_weights.back() = 1.0;

    double values_mean = 0.0;
    if (!profile.intensity.values.empty()) {
        for (double v : profile.intensity.values) values_mean += v;
        values_mean /= static_cast<double>(profile.intensity.values.size());
    }

    Rng arrivals = Rng::stream(seed, "demand.arrivals");
    Rng points = Rng::stream(seed, "demand.points");
    Rng speeds = Rng::stream(seed, "demand.speeds");

    const double base_rate_per_min = profile.weekly_total / (7.0 * 24.0 * 60.0);
    const double window_min = window_days * 24.0 * 60.0;
    const double bin_min = profile.intensity.values.empty() ? window_min : profile.intensity.bin_minutes;

    // Piecewise-constant rate: regenerate exponential gaps from each bin
    // start (memorylessness makes that exact) and keep arrivals landing
    // inside the bin.
    for (double bin_start = 0.0; bin_start < window_min; bin_start += bin_min) {
        double bin_end = std::min(bin_start + bin_min, window_min);
        double minute_of_day = std::fmod(bin_start, 24.0 * 60.0);
        double rate = base_rate_per_min * intensity_at(profile.intensity, minute_of_day, values_mean);
        if (rate <= 0.0) continue;
        double t = bin_start;
        while (true) {
            t += arrivals.exponential(rate);
            if (t >= bin_end) break;
            TripRequest trip;
            trip.request_time_s = static_cast<std::int64_t>(t * 60.0);
            trip.origin = draw_point(profile.clusters, cum_weights, region, points);
            trip.distance_km = 0.0;
            for (int attempt = 0; attempt < 100 && trip.distance_km <= 0.0; ++attempt) {
                trip.destination = draw_point(profile.clusters, cum_weights, region, points);
                trip.distance_km = manhattan(region.project(trip.origin), region.project(trip.destination));
            }
            if (trip.distance_km <= 0.0) continue;
            const SpeedModel& sm = profile.passenger_speed;
            double speed = speeds.truncated_normal(sm.mean_kmh, sm.sd_kmh, sm.min_kmh, sm.max_kmh);
            trip.duration_min = std::max(kMinTripMinutes, trip.distance_km / speed * 60.0);
            trip.fare = fare.fare(trip.distance_km);
            trip.trip_id = static_cast<std::int64_t>(trips.size());
            trips.push_back(trip);
        }
    }
    return trips;
}

std::vector<TripRequest> scale_density(const std::vector<TripRequest>& trips, double factor,
                                       int step_seconds, std::uint64_t seed) {
    if (factor <= 0.0) throw std::invalid_argument("scale_density: factor must be positive");
    Rng rng = Rng::stream(seed, "demand.scale");
    std::vector<TripRequest> out;
    if (factor < 1.0) {
        for (const auto& t : trips) {
            if (rng.uniform01() < factor) out.push_back(t);
        }
    } else {
        std::int64_t base = static_cast<std::int64_t>(factor);
        double frac = factor - static_cast<double>(base);
        for (const auto& t : trips) {
            std::int64_t copies = base + (rng.uniform01() < frac ? 1 : 0);
            for (std::int64_t k = 0; k < copies; ++k) {
                TripRequest dup = t;
                if (k > 0) {
                    std::int64_t jitter = static_cast<std::int64_t>(rng.below(3)) - 1;  // one step either way
                    dup.request_time_s = std::max<std::int64_t>(0, t.request_time_s + jitter * step_seconds);
                }
                out.push_back(dup);
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const TripRequest& a, const TripRequest& b) {
        return a.request_time_s < b.request_time_s;
    });
    for (std::size_t k = 0; k < out.size(); ++k) out[k].trip_id = static_cast<std::int64_t>(k);
    return out;
}

double demand_level_weekly_total(const std::string& name) {
    if (name == "low") return 1.66e6;
    if (name == "middle") return 1.84e6;
    if (name == "high") return 2.03e6;
    throw std::invalid_argument("unknown demand level '" + name + "' (expected low|middle|high)");
}

}  // namespace evtaxi
