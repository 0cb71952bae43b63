#include "evtaxi/dispatch.hpp"

#include <stdexcept>

namespace evtaxi {

StrategyWeights strategy_table(int index) {
    static constexpr int table[16][4] = {
        {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1},
        {1, 1, 0, 0}, {1, 0, 1, 0}, {1, 0, 0, 1}, {0, 1, 1, 0},
        {0, 1, 0, 1}, {0, 0, 1, 1}, {1, 1, 1, 0}, {1, 1, 0, 1},
        {1, 0, 1, 1}, {0, 1, 1, 1}, {1, 1, 1, 1}, {0, 0, 0, 0},
    };
    if (index < 1 || index > 16) throw std::invalid_argument("strategy index must be 1..16");
    StrategyWeights w;
    w.w1 = table[index - 1][0];
    w.w2 = table[index - 1][1];
    w.w3 = table[index - 1][2];
    w.w4 = table[index - 1][3];
    return w;
}

double score(const Candidate& c, bool dest_busy, const StrategyWeights& w) {
    double income_rate = c.operating_min > 0.0 ? c.income / c.operating_min : 0.0;
    double s = -w.w1 * w.q1 * c.pickup_km + w.w2 * w.q2 * c.empty_min - w.w3 * w.q3 * income_rate;
    double soc_term = w.w4 * w.q4 * c.soc_km;
    return dest_busy ? s + soc_term : s - soc_term;
}

std::optional<int> pick_best(const std::vector<Candidate>& candidates, bool dest_busy,
                             const StrategyWeights& w, Rng& tie_rng) {
    if (candidates.empty()) return std::nullopt;
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> best_ids;
    for (const auto& c : candidates) {
        double s = score(c, dest_busy, w);
        if (s > best) {
            best = s;
            best_ids.clear();
            best_ids.push_back(c.taxi_id);
        } else if (s == best) {
            best_ids.push_back(c.taxi_id);
        }
    }
    if (w.all_zero() && best_ids.size() > 1) return best_ids[tie_rng.below(best_ids.size())];
    int lowest = best_ids[0];
    for (int id : best_ids) lowest = std::min(lowest, id);
    return lowest;
}

std::optional<int> select_taxi(const TripView& trip, int region, const Partition& partition,
                               const std::vector<TaxiView>& fleet, const StrategyWeights& w,
                               double recharge_threshold_km, Rng& tie_rng) {
    std::vector<Candidate> candidates;
    for (const auto& t : fleet) {
        if (!t.available) continue;
        if (partition.locate(t.location) != region) continue;
        double pickup = manhattan(t.location, trip.origin);
        if (!reachable(t.soc_km, pickup, trip.trip_km, trip.dest_station_km, recharge_threshold_km)) continue;
        candidates.push_back({t.taxi_id, pickup, t.empty_min, t.income, t.operating_min, t.soc_km});
    }
    return pick_best(candidates, trip.dest_busy, w, tie_rng);
}

WaitingResult process_waiting(std::deque<WaitingEntry>& list, Step now, const WaitingThresholds& thresholds,
                              const Partition& partition,
                              const std::function<std::optional<int>(std::int64_t, int)>& try_dispatch) {
    WaitingResult result;
    std::deque<WaitingEntry> keep;
    for (auto& entry : list) {
        double waited_min = steps_to_minutes(now - entry.enqueue_step, thresholds.step_seconds);
        std::optional<int> taxi = try_dispatch(entry.trip_index, entry.origin_region);
        if (!taxi && waited_min > thresholds.waiting_min) {
            entry.escalated = true;
            for (int adj : partition.adjacency[entry.origin_region]) {
                taxi = try_dispatch(entry.trip_index, adj);
                if (taxi) break;
            }
        }
        if (taxi) {
            result.assignments.emplace_back(entry.trip_index, *taxi);
        } else if (waited_min >= thresholds.canceling_min) {
            result.cancelled.push_back(entry.trip_index);
        } else {
            keep.push_back(entry);
        }
    }
    list = std::move(keep);
    return result;
}

}  // namespace evtaxi
