#include "evtaxi/station.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include "evtaxi/csv.hpp"

namespace evtaxi {

StationYard::StationYard(const std::vector<StationSite>& sites) {
    capacities_.reserve(sites.size());
    next_free_.resize(sites.size());
    occupied_.assign(sites.size(), 0);
    for (const auto& s : sites) {
        capacities_.push_back(s.capacity);
        for (int c = 0; c < s.capacity; ++c) next_free_[s.station_id].push(0);
    }
}

ChargeSession StationYard::arrive(int station_id, int taxi_id, Step now, Step duration_steps) {
    if (duration_steps < 1) duration_steps = 1;
    auto& heap = next_free_[station_id];
    Step free_at = heap.top();
    heap.pop();
    ChargeSession s;
    s.taxi_id = taxi_id;
    s.station_id = station_id;
    s.arrival_step = now;
    s.start_step = std::max(now, free_at);
    s.finish_step = s.start_step + duration_steps;
    heap.push(s.finish_step);
    sessions_.push_back(s);
    released_.push_back(false);
    // A same-step release may not have been processed yet, so the live
    // counter can transiently read capacity here; audit() checks the
    // conservation bound over the full session log.
    if (s.start_step == now) ++occupied_[station_id];
    return s;
}

void StationYard::charge_started(const ChargeSession& s, Step now) {
    if (s.start_step != now) throw std::logic_error("station: charge_started at wrong step");
    ++occupied_[s.station_id];
}

void StationYard::release(const ChargeSession& s, Step now) {
    if (s.finish_step != now) throw std::logic_error("station: release at wrong step");
    // Identify the session by position in the log to catch double release.
    bool found = false;
    for (std::size_t i = sessions_.size(); i-- > 0;) {
        const auto& row = sessions_[i];
        if (row.taxi_id == s.taxi_id && row.start_step == s.start_step && row.station_id == s.station_id) {
            if (released_[i]) throw std::logic_error("station: session released twice");
            released_[i] = true;
            found = true;
            break;
        }
    }
    if (!found) throw std::logic_error("station: release of unknown session");
    --occupied_[s.station_id];
    if (occupied_[s.station_id] < 0) throw std::logic_error("station: negative occupancy");
}

double StationYard::utilization(int station_id) const {
    return static_cast<double>(occupied_[station_id]) / static_cast<double>(capacities_[station_id]);
}

std::vector<ChartRow> StationYard::chart() const {
    // Merge per-station occupancy deltas into vacancy change points.
    std::vector<std::map<Step, int>> deltas(capacities_.size());
    for (const auto& s : sessions_) {
        deltas[s.station_id][s.start_step] += 1;
        deltas[s.station_id][s.finish_step] -= 1;
    }
    std::vector<ChartRow> rows;
    for (std::size_t st = 0; st < capacities_.size(); ++st) {
        int occ = 0;
        rows.push_back({0, static_cast<int>(st), capacities_[st]});
        for (const auto& [step, d] : deltas[st]) {
            if (d == 0) continue;
            occ += d;
            if (step == 0) {
                rows.back().vacant = capacities_[st] - occ;
            } else {
                rows.push_back({step, static_cast<int>(st), capacities_[st] - occ});
            }
        }
    }
    std::sort(rows.begin(), rows.end(), [](const ChartRow& a, const ChartRow& b) {
        if (a.step != b.step) return a.step < b.step;
        return a.station_id < b.station_id;
    });
    return rows;
}

std::string StationYard::chart_to_csv() const {
    std::ostringstream out;
    out << "step,station_id,vacant\n";
    for (const auto& r : chart()) out << r.step << ',' << r.station_id << ',' << r.vacant << '\n';
    return out.str();
}

void StationYard::audit() const {
    // Charger conservation at every change point.
    for (const auto& r : chart()) {
        if (r.vacant < 0 || r.vacant > capacities_[r.station_id])
            throw std::logic_error("station audit: vacancy out of [0, capacity]");
    }
    // FIFO per station: start order must follow (arrival, taxi_id) order,
    // and every session must last its full duration.
    std::vector<std::vector<const ChargeSession*>> per_station(capacities_.size());
    for (const auto& s : sessions_) {
        if (s.finish_step <= s.start_step || s.start_step < s.arrival_step)
            throw std::logic_error("station audit: malformed session");
        per_station[s.station_id].push_back(&s);
    }
    for (auto& list : per_station) {
        std::stable_sort(list.begin(), list.end(), [](const ChargeSession* a, const ChargeSession* b) {
            if (a->arrival_step != b->arrival_step) return a->arrival_step < b->arrival_step;
            return a->taxi_id < b->taxi_id;
        });
        for (std::size_t i = 1; i < list.size(); ++i) {
            if (list[i]->start_step < list[i - 1]->start_step)
                throw std::logic_error("station audit: FIFO violated");
        }
    }
}

}  // namespace evtaxi
