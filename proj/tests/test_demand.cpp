#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "evtaxi/csv.hpp"
#include "evtaxi/rng.hpp"
#include "evtaxi/trips.hpp"

using namespace evtaxi;

namespace {

const RegionBounds kRegion;
const FareSchedule kFare;

VehiclePing ping(const std::string& id, std::int64_t ts, bool in_service,
                 std::optional<GeoPoint> loc = std::nullopt) {
    VehiclePing p;
    p.vehicle_id = id;
    p.timestamp = ts;
    p.in_service = in_service;
    p.location = loc;
    return p;
}

std::string temp_csv(const std::string& name, const std::string& content) {
    std::string path = "/tmp/evtaxi_test_" + name;
    write_file(path, content);
    return path;
}

}  // namespace

TEST_CASE("fare schedule: flag fall plus per-km beyond the base") {
    CHECK(kFare.fare(2.0) == doctest::Approx(13.0));
    CHECK(kFare.fare(3.0) == doctest::Approx(13.0));
    CHECK(kFare.fare(10.0) == doctest::Approx(13.0 + 7.0 * 2.3));
}

TEST_CASE("extraction drops sub-two-minute trips") {
    GeoPoint a{116.3, 39.9}, b{116.35, 39.95};
    std::vector<VehiclePing> pings{
        ping("v1", 0, false, a),  ping("v1", 30, true, a),   ping("v1", 60, true),
        ping("v1", 90, true, b),  ping("v1", 120, false, b),
    };
    RowReport rep;
    auto trips = extract_trips(pings, kRegion, kFare, &rep);
    CHECK(trips.empty());
    CHECK(rep.rejected == 1);
}

TEST_CASE("extraction keeps a 150-second in-service run") {
    GeoPoint a{116.3, 39.9}, b{116.35, 39.95};
    std::vector<VehiclePing> pings{
        ping("v1", 0, false, a),  ping("v1", 30, true, a),  ping("v1", 90, true),
        ping("v1", 180, true, b), ping("v1", 210, false, b),
    };
    auto trips = extract_trips(pings, kRegion, kFare);
    REQUIRE(trips.size() == 1);
    CHECK(trips[0].request_time_s == 30);
    CHECK(trips[0].duration_min == doctest::Approx(2.5));
    CHECK(trips[0].origin.lon == a.lon);
    CHECK(trips[0].destination.lat == b.lat);
    CHECK(trips[0].distance_km > 0.0);
    CHECK(trips[0].fare == doctest::Approx(kFare.fare(trips[0].distance_km)));
}

TEST_CASE("missing origin coordinates use the nearest located ping within three minutes") {
    GeoPoint fix{116.30, 39.90}, b{116.40, 39.95};
    std::vector<VehiclePing> pings{
        ping("v1", 0, false, fix),   // 100 s before the trip start
        ping("v1", 100, true),       // trip starts here, no coordinates
        ping("v1", 160, true),
        ping("v1", 250, true, b),
        ping("v1", 280, false, b),
    };
    auto trips = extract_trips(pings, kRegion, kFare);
    REQUIRE(trips.size() == 1);
    CHECK(trips[0].origin.lon == fix.lon);
    CHECK(trips[0].origin.lat == fix.lat);

    // Beyond three minutes the endpoint cannot be fixed and the trip drops.
    pings[0].timestamp = -200;
    RowReport rep;
    auto none = extract_trips(pings, kRegion, kFare, &rep);
    CHECK(none.empty());
    CHECK(rep.rejected == 1);
}

TEST_CASE("runs separated by an off-service ping never merge") {
    GeoPoint a{116.3, 39.9}, b{116.4, 39.95}, c{116.5, 40.0};
    std::vector<VehiclePing> pings{
        ping("v1", 0, true, a),    ping("v1", 150, true, b),  ping("v1", 180, false, b),
        ping("v1", 210, true, b),  ping("v1", 360, true, c),
    };
    auto trips = extract_trips(pings, kRegion, kFare);
    REQUIRE(trips.size() == 2);
    CHECK(trips[0].request_time_s == 0);
    CHECK(trips[1].request_time_s == 210);
    CHECK(trips[0].destination.lon == b.lon);
    CHECK(trips[1].origin.lon == b.lon);
}

TEST_CASE("extraction output always satisfies trip invariants") {
    Rng rng(404);
    std::vector<VehiclePing> soup;
    for (int v = 0; v < 20; ++v) {
        std::int64_t t = 0;
        for (int i = 0; i < 200; ++i) {
            t += 30;
            std::optional<GeoPoint> loc;
            if (rng.uniform01() < 0.9)
                loc = GeoPoint{rng.uniform(116.0, 116.8), rng.uniform(39.7, 40.2)};
            soup.push_back(ping("v" + std::to_string(v), t, rng.uniform01() < 0.5, loc));
        }
    }
    auto trips = extract_trips(soup, kRegion, kFare);
    for (const auto& t : trips) {
        CHECK(t.duration_min >= 2.0);
        CHECK(t.distance_km > 0.0);
        bool distinct = t.origin.lon != t.destination.lon || t.origin.lat != t.destination.lat;
        CHECK(distinct);
    }
}

TEST_CASE("load_trips handles empty, dirty, and unsorted files") {
    const char* header =
        "trip_id,request_time_s,origin_lon,origin_lat,dest_lon,dest_lat,distance_km,duration_min,fare\n";

    auto empty = load_trips(temp_csv("empty.csv", header), kRegion);
    CHECK(empty.empty());

    std::string body = std::string(header) +
                       "0,600,116.3,39.9,116.4,39.95,10.0,20.0,29.1\n"
                       "1,60,116.3,39.9,116.4,39.95,10.0,1.0,29.1\n"  // under two minutes
                       "2,300,116.3,39.9,116.4,39.95,10.0,15.0,29.1\n"
                       "3,0,116.3,39.9,116.4,39.95,10.0,25.0,29.1\n";
    RowReport rep;
    auto trips = load_trips(temp_csv("dirty.csv", body), kRegion, &rep);
    REQUIRE(trips.size() == 3);
    CHECK(rep.rejected == 1);
    CHECK(trips[0].request_time_s == 0);
    CHECK(trips[1].request_time_s == 300);
    CHECK(trips[2].request_time_s == 600);

    std::string missing = "trip_id,request_time_s\n0,600\n";
    CHECK_THROWS(load_trips(temp_csv("missing.csv", missing), kRegion));
}

TEST_CASE("trip csv round-trips through save and load") {
    DemandProfile profile;
    profile.clusters = {{{116.4, 40.0}, 1.0, 5.0}};
    profile.weekly_total = 500.0;
    auto trips = synthesize(profile, kRegion, kFare, 1.0, 9);
    REQUIRE(!trips.empty());
    std::string path = temp_csv("roundtrip.csv", trips_to_csv(trips));
    auto loaded = load_trips(path, kRegion);
    REQUIRE(loaded.size() == trips.size());
    CHECK(loaded[3].request_time_s == trips[3].request_time_s);
    CHECK(loaded[3].distance_km == doctest::Approx(trips[3].distance_km).epsilon(1e-3));
}

TEST_CASE("synthesize honors the weekly total") {
    DemandProfile profile;
    profile.clusters = {{{116.4, 40.0}, 1.0, 5.0}};
    profile.weekly_total = 0.0;
    CHECK(synthesize(profile, kRegion, kFare, 7.0, 1).empty());

    profile.weekly_total = 7000.0;
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto trips = synthesize(profile, kRegion, kFare, 7.0, seed);
        double n = static_cast<double>(trips.size());
        CHECK(n > 7000.0 * 0.95);
        CHECK(n < 7000.0 * 1.05);
        sum += n;
    }
    double mean = sum / 20.0;
    CHECK(mean > 7000.0 * 0.99);
    CHECK(mean < 7000.0 * 1.01);
}

TEST_CASE("synthesize is deterministic per seed and valid per trip") {
    DemandProfile profile;
    profile.clusters = {{{116.35, 39.9}, 0.7, 6.0}, {{116.9, 40.3}, 0.3, 15.0}};
    profile.intensity.bin_minutes = 60.0;
    profile.intensity.values = {1, 1, 1, 1, 1, 2, 4, 6, 5, 3, 2, 2, 2, 2, 2, 3, 4, 6, 7, 5, 3, 2, 1, 1};
    profile.weekly_total = 3000.0;
    auto a = synthesize(profile, kRegion, kFare, 2.0, 77);
    auto b = synthesize(profile, kRegion, kFare, 2.0, 77);
    auto c = synthesize(profile, kRegion, kFare, 2.0, 78);
    CHECK(trips_to_csv(a) == trips_to_csv(b));
    CHECK(trips_to_csv(a) != trips_to_csv(c));
    for (const auto& t : a) {
        CHECK(t.duration_min >= 2.0);
        CHECK(t.distance_km > 0.0);
        CHECK(kRegion.contains(t.origin));
        CHECK(kRegion.contains(t.destination));
        CHECK(t.request_time_s >= 0);
        CHECK(t.request_time_s < 2 * 86400);
    }
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i].request_time_s >= a[i - 1].request_time_s);
}

TEST_CASE("scale_density thins, duplicates, and stays deterministic") {
    DemandProfile profile;
    profile.clusters = {{{116.4, 40.0}, 1.0, 5.0}};
    profile.weekly_total = 10000.0;
    auto base = synthesize(profile, kRegion, kFare, 7.0, 5);

    auto same = scale_density(base, 1.0, 30, 5);
    CHECK(trips_to_csv(same) == trips_to_csv(base));

    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        auto half = scale_density(base, 0.5, 30, seed);
        double expect = 0.5 * static_cast<double>(base.size());
        CHECK(std::abs(static_cast<double>(half.size()) - expect) <= 150.0);
        auto again = scale_density(base, 0.5, 30, seed);
        CHECK(trips_to_csv(half) == trips_to_csv(again));
    }

    auto doubled = scale_density(base, 2.0, 30, 1);
    CHECK(doubled.size() == 2 * base.size());
    for (std::size_t i = 1; i < doubled.size(); ++i)
        CHECK(doubled[i].request_time_s >= doubled[i - 1].request_time_s);
    for (std::size_t i = 0; i < doubled.size(); ++i)
        CHECK(doubled[i].trip_id == static_cast<std::int64_t>(i));
}

TEST_CASE("named demand levels match the published ratios") {
    CHECK(demand_level_weekly_total("low") == doctest::Approx(1.66e6));
    CHECK(demand_level_weekly_total("middle") == doctest::Approx(1.84e6));
    CHECK(demand_level_weekly_total("high") == doctest::Approx(2.03e6));
    CHECK(demand_level_weekly_total("high") / demand_level_weekly_total("middle") ==
          doctest::Approx(1.103).epsilon(1e-3));
    CHECK_THROWS(demand_level_weekly_total("extreme"));
}
