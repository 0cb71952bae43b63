#pragma once

#include <cstdint>

#include "evtaxi/geo.hpp"
#include "evtaxi/sim_time.hpp"
#include "evtaxi/station.hpp"

namespace evtaxi {

enum class Activity { Available, ToPickup, Occupied, ToStation, QueuedAtStation, Charging };

inline const char* activity_name(Activity a) {
    switch (a) {
        case Activity::Available: return "available";
        case Activity::ToPickup: return "to_pickup";
        case Activity::Occupied: return "occupied";
        case Activity::ToStation: return "to_station";
        case Activity::QueuedAtStation: return "queued";
        case Activity::Charging: return "charging";
    }
    return "?";
}

// Straight-line Manhattan leg (x first, then y), advanced step by step so
// battery drain accrues with distance covered.
struct Motion {
    Step depart = 0;
    Step arrive = 0;
    PlanePoint from;
    PlanePoint to;
    double total_km = 0.0;
    double covered_km = 0.0;
};

struct TaxiState {
    int taxi_id = 0;
    PlanePoint location;
    int region = 0;
    double soc_km = 0.0;
    Activity activity = Activity::Available;
    Step available_since = 0;
    double income = 0.0;
    Step entered_at = 0;
    std::int64_t assigned_trip = -1;
    Motion motion;          // valid while in a moving activity
    ChargeSession session;  // valid while queued or charging

    // per-run ledger
    int trips_served = 0;
    double km_driven = 0.0;
    int charge_count = 0;

    bool moving() const {
        return activity == Activity::ToPickup || activity == Activity::Occupied ||
               activity == Activity::ToStation;
    }
};

}  // namespace evtaxi
