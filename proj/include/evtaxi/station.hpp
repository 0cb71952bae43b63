#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "evtaxi/siting.hpp"
#include "evtaxi/sim_time.hpp"

namespace evtaxi {

struct ChargeSession {
    int taxi_id = -1;
    int station_id = -1;
    Step arrival_step = 0;
    Step start_step = 0;   // == arrival when a charger is free, else FIFO
    Step finish_step = 0;  // start + charge duration
};

struct ChartRow {
    Step step = 0;
    int station_id = 0;
    int vacant = 0;
};

// Charger bookkeeping for every station: seat assignment on arrival
// (FIFO per station), live occupancy for the busy test, and the sparse
// operations chart (vacant-charger change points).
class StationYard {
  public:
    explicit StationYard(const std::vector<StationSite>& sites);

    // Seats the taxi now if a charger is vacant, otherwise queues it
    // behind earlier arrivals. Same-step arrivals must be fed in taxi_id
    // order; the engine guarantees that.
    ChargeSession arrive(int station_id, int taxi_id, Step now, Step duration_steps);

    // The engine reports session transitions as its clock reaches them.
    void charge_started(const ChargeSession& s, Step now);
    void release(const ChargeSession& s, Step now);

    int capacity(int station_id) const { return capacities_[station_id]; }
    int occupied_now(int station_id) const { return occupied_[station_id]; }
    double utilization(int station_id) const;

    std::size_t session_count() const { return sessions_.size(); }
    const std::vector<ChargeSession>& sessions() const { return sessions_; }

    // Sparse chart: one row per (step, station) where vacancy changes,
    // plus the initial all-vacant row per station.
    std::vector<ChartRow> chart() const;
    std::string chart_to_csv() const;
    // One JSON object per station: {"station_id", "capacity", "series": [[step, vacant], ...]}.
    std::string chart_to_jsonl() const;

    // Replays the full session log; throws std::logic_error on charger
    // over-subscription or FIFO violations.
    void audit() const;

  private:
    std::vector<int> capacities_;
    // Per-charger next-free step, as a min-heap per station.
    std::vector<std::priority_queue<Step, std::vector<Step>, std::greater<Step>>> next_free_;
    std::vector<int> occupied_;
    std::vector<ChargeSession> sessions_;
    std::vector<bool> released_;
};

}  // namespace evtaxi
