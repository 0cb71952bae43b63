#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "evtaxi/geo.hpp"
#include "evtaxi/rng.hpp"
#include "evtaxi/siting.hpp"
#include "evtaxi/sim_time.hpp"

namespace evtaxi {

// Grading weights plus the magnitude-balancing constants. q4 <= 0 means
// "derive from battery range" (1/range), resolved at scenario setup.
struct StrategyWeights {
    double w1 = 1.0, w2 = 0.0, w3 = 0.0, w4 = 0.0;
    double q1 = 0.2;         // per km of pickup distance
    double q2 = 1.0 / 30.0;  // per minute of empty time
    double q3 = 0.6;         // per (currency / minute) of income rate
    double q4 = -1.0;        // per km of SOC; <=0 -> 1/battery_range
    double busy_threshold = 0.5;

    bool all_zero() const { return w1 == 0.0 && w2 == 0.0 && w3 == 0.0 && w4 == 0.0; }
};

// The 16 canonical strategies; index 1..16, row 16 is the all-zero
// (random selection) strategy.
StrategyWeights strategy_table(int index);

// One taxi's grading features at decision time.
struct Candidate {
    int taxi_id = -1;
    double pickup_km = 0.0;      // d^_en
    double empty_min = 0.0;      // l_e
    double income = 0.0;         // z_e
    double operating_min = 0.0;  // T_e
    double soc_km = 0.0;         // o_e / S_e
};

// SOC screen: the taxi must finish pickup + trip, and when that would
// leave it at or below the recharging threshold, still reach the
// station nearest the trip destination.
inline bool reachable(double soc_km, double pickup_km, double trip_km, double dest_station_km,
                      double recharge_threshold_km) {
    double remaining = soc_km - pickup_km - trip_km;
    if (remaining < 0.0) return false;
    if (remaining <= recharge_threshold_km && remaining - dest_station_km < 0.0) return false;
    return true;
}

// Busy destination rewards high SOC, otherwise low SOC is preferred to
// keep chargers utilized.
double score(const Candidate& c, bool dest_busy, const StrategyWeights& w);

// Argmax over pre-screened candidates. Ties go to the lowest taxi id,
// except under the all-zero strategy, which picks seeded-uniformly among
// the tied maxima.
std::optional<int> pick_best(const std::vector<Candidate>& candidates, bool dest_busy,
                             const StrategyWeights& w, Rng& tie_rng);

// Minimal taxi view used by selection; the engine materializes these
// from its fleet state, tests build them directly.
struct TaxiView {
    int taxi_id = -1;
    PlanePoint location;
    double soc_km = 0.0;
    double income = 0.0;
    double empty_min = 0.0;
    double operating_min = 0.0;
    bool available = false;
};

struct TripView {
    PlanePoint origin;
    double trip_km = 0.0;
    double dest_station_km = 0.0;  // destination to its nearest station
    bool dest_busy = false;
};

// Full selection pass for one request over one sub-region: gather
// available taxis located in the region, screen reachability, grade,
// and pick.
std::optional<int> select_taxi(const TripView& trip, int region, const Partition& partition,
                               const std::vector<TaxiView>& fleet, const StrategyWeights& w,
                               double recharge_threshold_km, Rng& tie_rng);

struct WaitingEntry {
    std::int64_t trip_index = 0;
    Step enqueue_step = 0;
    bool escalated = false;
    int origin_region = 0;
};

struct WaitingThresholds {
    double waiting_min = 3.0;    // escalate beyond this
    double canceling_min = 15.0; // decline at or beyond this
    int step_seconds = 30;
};

struct WaitingResult {
    std::vector<std::pair<std::int64_t, int>> assignments;  // trip -> taxi
    std::vector<std::int64_t> cancelled;
};

// One per-step pass over the list in FIFO order, before new requests.
// try_dispatch(trip_index, region) must commit the assignment (mark the
// taxi taken) when it returns a taxi id. Escalated entries search the
// origin region first, then its adjacent regions nearest-first.
WaitingResult process_waiting(std::deque<WaitingEntry>& list, Step now, const WaitingThresholds& thresholds,
                              const Partition& partition,
                              const std::function<std::optional<int>(std::int64_t, int)>& try_dispatch);

}  // namespace evtaxi
