#include "evtaxi/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "evtaxi/csv.hpp"

namespace evtaxi {

using nlohmann::json;

StrategyWeights ScenarioConfig::resolved_weights() const {
    StrategyWeights w = strategy_index >= 1 ? strategy_table(strategy_index) : weights;
    if (strategy_index >= 1) {
        // Table strategies still honor custom balance constants.
        w.q1 = weights.q1;
        w.q2 = weights.q2;
        w.q3 = weights.q3;
        w.q4 = weights.q4;
        w.busy_threshold = weights.busy_threshold;
    }
    if (w.q4 <= 0.0) w.q4 = 1.0 / battery_range_km;
    return w;
}

std::vector<std::string> ScenarioConfig::validate() const {
    std::vector<std::string> errors;
    auto require = [&](bool ok, const std::string& msg) {
        if (!ok) errors.push_back(msg);
    };
    require(step_seconds > 0, "step_seconds must be positive");
    require(window_days > 0, "window_days must be positive");
    require(fleet_size >= 0, "fleet_size must be non-negative");
    require(battery_range_km > 0, "battery_range_km must be positive");
    require(station_count >= 1, "station_count must be >= 1");
    require(station_capacity >= 1, "station_capacity must be >= 1");
    require(k_adjacent >= 0, "k_adjacent must be non-negative");
    require(strategy_index >= 0 && strategy_index <= 16, "strategy_index must be 0..16");
    require(empty_speed_kmh > 0, "empty_speed_kmh must be positive");
    require(waiting_threshold_min >= 0, "waiting_threshold_min must be non-negative");
    require(cancel_threshold_min > 0, "cancel_threshold_min must be positive");
    require(recharge_threshold_km >= 0, "recharge_threshold_km must be non-negative");
    require(recharge_threshold_km < battery_range_km, "recharge_threshold_km must be below battery_range_km");
    require(recharge_minutes > 0, "recharge_minutes must be positive");
    require(bin_minutes * 60.0 >= step_seconds, "bin_minutes must cover at least one step");
    require(weights.w1 >= 0 && weights.w2 >= 0 && weights.w3 >= 0 && weights.w4 >= 0,
            "weights must be non-negative");
    require(weights.q1 > 0 && weights.q2 > 0 && weights.q3 > 0, "q1,q2,q3 must be positive");
    require(weights.busy_threshold > 0 && weights.busy_threshold <= 1, "busy_threshold must be in (0,1]");
    require(density_factor > 0, "density_factor must be positive");
    require(region.lon_max > region.lon_min && region.lat_max > region.lat_min,
            "region bounds must be non-empty");
    require(region.width_km > 0 && region.height_km > 0, "region km extents must be positive");
    return errors;
}

std::vector<int> allocate_fleet(const std::vector<std::int64_t>& region_demand, int fleet_size) {
    const std::size_t n = region_demand.size();
    std::vector<int> out(n, 0);
    std::int64_t total = std::accumulate(region_demand.begin(), region_demand.end(), std::int64_t{0});
    if (fleet_size <= 0 || n == 0) return out;
    if (total <= 0) {
        for (int i = 0; i < fleet_size; ++i) out[i % n] += 1;
        return out;
    }
    std::vector<double> remainder(n);
    int assigned = 0;
    for (std::size_t r = 0; r < n; ++r) {
        double quota = static_cast<double>(fleet_size) * region_demand[r] / static_cast<double>(total);
        out[r] = static_cast<int>(quota);
        remainder[r] = quota - out[r];
        assigned += out[r];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
        return a < b;
    });
    for (int i = assigned; i < fleet_size; ++i) out[order[(i - assigned) % n]] += 1;
    return out;
}

Engine::Engine(const ScenarioConfig& cfg, std::vector<TripRequest> trips, std::vector<StationSite> sites)
    : cfg_(cfg),
      weights_(cfg.resolved_weights()),
      partition_(build_partition(std::move(sites), cfg.k_adjacent)),
      yard_(partition_.sites),
      tie_rng_(Rng::stream(cfg.seed, "dispatch.tie")) {
    auto errors = cfg_.validate();
    if (!errors.empty()) {
        std::string msg = "invalid scenario config:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }

    // Keep trips inside the window, in (time, id) order.
    const std::int64_t window_s = cfg_.window_seconds();
    std::vector<TripRequest> kept;
    kept.reserve(trips.size());
    for (const auto& t : trips) {
        if (t.request_time_s >= 0 && t.request_time_s < window_s) kept.push_back(t);
    }
    std::stable_sort(kept.begin(), kept.end(), [&](const TripRequest& a, const TripRequest& b) {
        if (a.request_time_s != b.request_time_s) return a.request_time_s < b.request_time_s;
        return a.trip_id < b.trip_id;
    });

    trips_.reserve(kept.size());
    for (const auto& t : kept) {
        TripRuntime tr;
        tr.trip_id = t.trip_id;
        tr.origin = cfg_.region.project(t.origin);
        tr.dest = cfg_.region.project(t.destination);
        tr.request_step = t.request_step(cfg_.step_seconds);
        tr.duration_steps = std::max<Step>(1, steps_for_minutes(t.duration_min, cfg_.step_seconds));
        tr.trip_km = t.distance_km;
        tr.fare = t.fare;
        tr.origin_region = partition_.locate(tr.origin);
        tr.dest_region = partition_.locate(tr.dest);
        tr.dest_station_km = manhattan(tr.dest, partition_.sites[tr.dest_region].location);
        trips_.push_back(tr);
    }

    buckets_.resize(partition_.sites.size());
    init_fleet(kept);
}

void Engine::init_fleet(const std::vector<TripRequest>& trips) {
    const std::size_t regions = partition_.sites.size();

    // Spatial allocation follows the demand of the window's first day.
    std::int64_t first_window_s = std::min<std::int64_t>(86400, cfg_.window_seconds());
    std::vector<std::int64_t> demand(regions, 0);
    struct BBox {
        double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
        bool any = false;
    };
    std::vector<BBox> boxes(regions);
    bool any_first = false;
    for (std::size_t i = 0; i < trips_.size(); ++i) {
        if (trips[i].request_time_s >= first_window_s) continue;
        any_first = true;
        const auto& tr = trips_[i];
        demand[tr.origin_region] += 1;
        BBox& b = boxes[tr.origin_region];
        if (!b.any) {
            b = {tr.origin.x, tr.origin.y, tr.origin.x, tr.origin.y, true};
        } else {
            b.min_x = std::min(b.min_x, tr.origin.x);
            b.min_y = std::min(b.min_y, tr.origin.y);
            b.max_x = std::max(b.max_x, tr.origin.x);
            b.max_y = std::max(b.max_y, tr.origin.y);
        }
    }
    if (!any_first) {
        // No first-day trips: fall back to the whole window.
        for (const auto& tr : trips_) {
            demand[tr.origin_region] += 1;
            BBox& b = boxes[tr.origin_region];
            if (!b.any) {
                b = {tr.origin.x, tr.origin.y, tr.origin.x, tr.origin.y, true};
            } else {
                b.min_x = std::min(b.min_x, tr.origin.x);
                b.min_y = std::min(b.min_y, tr.origin.y);
                b.max_x = std::max(b.max_x, tr.origin.x);
                b.max_y = std::max(b.max_y, tr.origin.y);
            }
        }
    }

    std::vector<int> alloc = allocate_fleet(demand, cfg_.fleet_size);
    Rng rng = Rng::stream(cfg_.seed, "engine.init");
    taxis_.reserve(cfg_.fleet_size);
    for (std::size_t r = 0; r < regions; ++r) {
        for (int i = 0; i < alloc[r]; ++i) {
            TaxiState t;
            t.taxi_id = static_cast<int>(taxis_.size());
            const BBox& b = boxes[r];
            if (b.any) {
                t.location = {rng.uniform(b.min_x, b.max_x), rng.uniform(b.min_y, b.max_y)};
            } else {
                t.location = partition_.sites[r].location;
            }
            t.region = partition_.locate(t.location);
            t.soc_km = cfg_.battery_range_km;
            t.activity = Activity::Available;
            t.available_since = 0;
            t.entered_at = 0;
            taxis_.push_back(t);
        }
    }
}

void Engine::fail(const std::string& what) const {
    std::ostringstream msg;
    msg << "engine invariant violated at step " << now_ << ": " << what;
    throw std::logic_error(msg.str());
}

void Engine::advance_motion(TaxiState& t) {
    Motion& m = t.motion;
    double frac = m.arrive > m.depart
                      ? std::min(1.0, static_cast<double>(now_ - m.depart) / static_cast<double>(m.arrive - m.depart))
                      : 1.0;
    double target = m.total_km * frac;
    double delta = target - m.covered_km;
    if (delta < 0.0) delta = 0.0;
    t.soc_km -= delta;
    t.km_driven += delta;
    m.covered_km = target;
    if (t.soc_km < -1e-9) fail("taxi " + std::to_string(t.taxi_id) + " SOC below zero");
    if (t.soc_km < 0.0) t.soc_km = 0.0;
    // Position along the x-then-y Manhattan path.
    double leg_x = std::abs(m.to.x - m.from.x);
    if (m.covered_km <= leg_x) {
        double dir = m.to.x >= m.from.x ? 1.0 : -1.0;
        t.location = {m.from.x + dir * m.covered_km, m.from.y};
    } else {
        double dir = m.to.y >= m.from.y ? 1.0 : -1.0;
        t.location = {m.to.x, m.from.y + dir * (m.covered_km - leg_x)};
    }
    if (now_ >= m.arrive) t.location = m.to;
}

void Engine::begin_motion(TaxiState& t, const PlanePoint& to, double km, double speed_kmh) {
    Step steps = steps_for_km(km, speed_kmh, cfg_.step_seconds);
    t.motion = Motion{now_, now_ + steps, t.location, to, km, 0.0};
    if (steps == 0) {
        // Zero-distance move: arrive in place immediately.
        t.location = to;
        handle_arrival(t);
    }
}

void Engine::make_available(TaxiState& t) {
    t.activity = Activity::Available;
    t.available_since = now_;
    t.assigned_trip = -1;
    t.region = partition_.locate(t.location);
}

Step Engine::charge_duration_steps(const TaxiState& t) const {
    double minutes = cfg_.recharge_minutes;
    if (cfg_.soc_proportional_charge) {
        minutes *= std::max(0.0, cfg_.battery_range_km - t.soc_km) / cfg_.battery_range_km;
    }
    return std::max<Step>(1, steps_for_minutes(minutes, cfg_.step_seconds));
}

void Engine::handle_dropoff(TaxiState& t) {
    TripRuntime& tr = trips_[static_cast<std::size_t>(t.assigned_trip)];
    t.location = tr.dest;
    t.income += tr.fare;
    t.trips_served += 1;
    tr.status = TripStatus::Served;
    tr.dropoff_step = now_;

    if (t.soc_km < cfg_.recharge_threshold_km) {
        int region = partition_.locate(t.location);
        const StationSite& site = partition_.sites[region];
        double d = manhattan(t.location, site.location);
        if (t.soc_km + 1e-9 < d)
            fail("taxi " + std::to_string(t.taxi_id) + " routed to station beyond its SOC");
        t.activity = Activity::ToStation;
        t.assigned_trip = -1;
        t.region = region;
        begin_motion(t, site.location, d, cfg_.empty_speed_kmh);
    } else {
        make_available(t);
    }
}

void Engine::handle_arrival(TaxiState& t) {
    switch (t.activity) {
        case Activity::ToPickup: {
            TripRuntime& tr = trips_[static_cast<std::size_t>(t.assigned_trip)];
            t.location = tr.origin;
            tr.pickup_step = now_;
            t.activity = Activity::Occupied;
            t.motion = Motion{now_, now_ + tr.duration_steps, tr.origin, tr.dest, tr.trip_km, 0.0};
            break;
        }
        case Activity::Occupied:
            handle_dropoff(t);
            break;
        case Activity::ToStation: {
            int station = partition_.locate(t.location);
            charge_steps_.push_back(now_);
            t.session = yard_.arrive(station, t.taxi_id, now_, charge_duration_steps(t));
            t.charge_count += 1;
            t.activity = t.session.start_step == now_ ? Activity::Charging : Activity::QueuedAtStation;
            break;
        }
        default:
            fail("arrival in non-moving activity");
    }
}

void Engine::rebuild_buckets() {
    for (auto& b : buckets_) b.clear();
    for (const auto& t : taxis_) {
        if (t.activity != Activity::Available) continue;
        buckets_[t.region].push_back(TaxiView{
            t.taxi_id, t.location, t.soc_km, t.income,
            steps_to_minutes(now_ - t.available_since, cfg_.step_seconds),
            steps_to_minutes(now_ - t.entered_at, cfg_.step_seconds), true});
    }
}

bool Engine::dest_busy(const TripRuntime& tr) const {
    return yard_.utilization(tr.dest_region) >= weights_.busy_threshold;
}

std::optional<int> Engine::try_dispatch(std::int64_t trip_index, int region) {
    const TripRuntime& tr = trips_[static_cast<std::size_t>(trip_index)];
    TripView view{tr.origin, tr.trip_km, tr.dest_station_km, dest_busy(tr)};
    auto picked = select_taxi(view, region, partition_, buckets_[region], weights_,
                              cfg_.recharge_threshold_km, tie_rng_);
    if (picked) commit_assignment(trip_index, *picked);
    return picked;
}

void Engine::commit_assignment(std::int64_t trip_index, int taxi_id) {
    TaxiState& t = taxis_[static_cast<std::size_t>(taxi_id)];
    if (t.activity != Activity::Available) fail("assignment to a non-available taxi");
    TripRuntime& tr = trips_[static_cast<std::size_t>(trip_index)];
    if (tr.taxi_id >= 0) fail("trip assigned twice");
    tr.taxi_id = taxi_id;
    t.assigned_trip = trip_index;
    t.activity = Activity::ToPickup;
    for (auto& v : buckets_[t.region]) {
        if (v.taxi_id == taxi_id) {
            v.available = false;
            break;
        }
    }
    begin_motion(t, tr.origin, manhattan(t.location, tr.origin), cfg_.empty_speed_kmh);
}

void Engine::step() {
    // Phase 1: advance in-motion taxis; collect events due this step.
    std::vector<int> charge_starts, arrivals, finishes;
    for (auto& t : taxis_) {
        switch (t.activity) {
            case Activity::ToPickup:
            case Activity::Occupied:
            case Activity::ToStation:
                advance_motion(t);
                if (t.motion.arrive == now_) arrivals.push_back(t.taxi_id);
                break;
            case Activity::QueuedAtStation:
                if (t.session.start_step == now_) charge_starts.push_back(t.taxi_id);
                break;
            case Activity::Charging:
                if (t.session.finish_step == now_) finishes.push_back(t.taxi_id);
                break;
            case Activity::Available:
                break;
        }
    }
    // Phase 2: queued taxis whose charger frees now start charging.
    for (int id : charge_starts) {
        TaxiState& t = taxis_[id];
        yard_.charge_started(t.session, now_);
        t.activity = Activity::Charging;
    }
    // Phase 3: movement arrivals (pickups, drop-offs, station arrivals).
    for (int id : arrivals) handle_arrival(taxis_[id]);
    // Phase 4: finished charge sessions release their charger.
    for (int id : finishes) {
        TaxiState& t = taxis_[id];
        yard_.release(t.session, now_);
        t.soc_km = cfg_.battery_range_km;
        make_available(t);
    }

    if (!draining_) {
        // Phase 5+6: waiting list first, FIFO, with escalation/cancellation.
        rebuild_buckets();
        WaitingThresholds th{cfg_.waiting_threshold_min, cfg_.cancel_threshold_min, cfg_.step_seconds};
        auto result = process_waiting(waiting_, now_, th, partition_,
                                      [this](std::int64_t ti, int region) { return try_dispatch(ti, region); });
        for (std::int64_t ti : result.cancelled) trips_[static_cast<std::size_t>(ti)].status = TripStatus::Cancelled;
        // Phase 7: new requests this step.
        while (next_trip_ < trips_.size() && trips_[next_trip_].request_step == now_) {
            std::int64_t ti = static_cast<std::int64_t>(next_trip_);
            request_steps_.push_back(now_);
            if (!try_dispatch(ti, trips_[next_trip_].origin_region)) {
                waiting_.push_back(WaitingEntry{ti, now_, false, trips_[next_trip_].origin_region});
            }
            ++next_trip_;
        }
        // Phase 8: sample the waiting list length.
        waiting_len_.push_back(static_cast<std::int32_t>(waiting_.size()));
    }
    ++now_;
}

RunOutput Engine::run() {
    const Step end = cfg_.window_steps();
    while (now_ < end) step();

    // Window end: whatever still waits is unsatisfied; in-flight trips finish.
    for (const auto& e : waiting_) trips_[static_cast<std::size_t>(e.trip_index)].status = TripStatus::Residual;
    waiting_.clear();
    draining_ = true;
    const Step drain_cap = end + cfg_.window_steps() + 1000000;
    while (true) {
        bool in_flight = false;
        for (const auto& t : taxis_) {
            if (t.activity == Activity::ToPickup || t.activity == Activity::Occupied) {
                in_flight = true;
                break;
            }
        }
        if (!in_flight) break;
        if (now_ > drain_cap) fail("drain did not terminate");
        step();
    }

    yard_.audit();

    RunOutput out;
    out.total_requests = trips_.size();
    std::vector<TripOutcome> outcomes;
    outcomes.reserve(trips_.size());
    for (const auto& tr : trips_) {
        TripResultRow row;
        row.trip_id = tr.trip_id;
        row.status = tr.status;
        row.taxi_id = tr.taxi_id;
        row.request_step = tr.request_step;
        row.pickup_step = tr.pickup_step;
        row.dropoff_step = tr.dropoff_step;
        switch (tr.status) {
            case TripStatus::Served:
                ++out.served;
                if (tr.pickup_step < tr.request_step) fail("pickup before request");
                row.wait_min = steps_to_minutes(tr.pickup_step - tr.request_step, cfg_.step_seconds);
                break;
            case TripStatus::Cancelled:
                ++out.cancelled;
                break;
            case TripStatus::Residual:
                ++out.residual;
                break;
        }
        outcomes.push_back({tr.status, row.wait_min});
        out.trips.push_back(row);
    }
    if (out.served + out.cancelled + out.residual != out.total_requests) fail("trip conservation broken");

    FillWait fw = fill_and_wait(outcomes);
    out.fill_rate = fw.fill_rate;
    out.unsatisfied_rate = 1.0 - fw.fill_rate;
    out.avg_wait_min = fw.avg_wait_min;

    std::vector<double> incomes;
    incomes.reserve(taxis_.size());
    for (const auto& t : taxis_) {
        if (t.soc_km < 0.0 || t.soc_km > cfg_.battery_range_km + 1e-9) fail("final SOC out of range");
        incomes.push_back(t.income);
        out.taxis.push_back({t.taxi_id, t.income, t.trips_served, t.km_driven, t.charge_count, t.soc_km});
    }
    out.gini = incomes.empty() ? 0.0 : gini(incomes);

    out.request_steps = request_steps_;
    out.charge_steps = charge_steps_;
    out.waiting_len = waiting_len_;
    out.charge_sessions = yard_.session_count();
    if (out.charge_sessions != charge_steps_.size()) fail("charge session count mismatch");
    out.curves = demand_curves(request_steps_, charge_steps_, cfg_.step_seconds, cfg_.bin_minutes);
    out.peak_lag_min = peak_lag(out.curves);
    out.chart = yard_.chart();
    return out;
}

RunOutput simulate_scenario(const ScenarioConfig& cfg, std::vector<TripRequest> trips,
                            std::vector<StationSite> sites) {
    Engine engine(cfg, std::move(trips), std::move(sites));
    return engine.run();
}

std::vector<StationSite> auto_site(const ScenarioConfig& cfg, const std::vector<TripRequest>& trips) {
    std::vector<PlanePoint> origins;
    origins.reserve(trips.size());
    for (const auto& t : trips) {
        if (cfg.region.contains(t.origin)) origins.push_back(cfg.region.project(t.origin));
    }
    return kmeans_sites(origins, cfg.station_count, cfg.seed, cfg.station_capacity, cfg.kmeans_sample_cap);
}

std::string RunOutput::summary_json(const std::string& config_hash, std::uint64_t seed) const {
    json j;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["requests"] = total_requests;
    j["served"] = served;
    j["cancelled"] = cancelled;
    j["residual"] = residual;
    j["fill_rate"] = fill_rate;
    j["unsatisfied_rate"] = unsatisfied_rate;
    j["avg_wait_min"] = avg_wait_min;
    j["gini"] = gini;
    j["charge_sessions"] = charge_sessions;
    if (peak_lag_min) {
        j["peak_lag_min"] = *peak_lag_min;
    } else {
        j["peak_lag_min"] = nullptr;
    }
    double income = 0.0, km = 0.0;
    for (const auto& t : taxis) {
        income += t.income;
        km += t.km_driven;
    }
    j["fleet_size"] = taxis.size();
    j["total_income"] = income;
    j["total_km_driven"] = km;
    return j.dump(2) + "\n";
}

std::string RunOutput::timeseries_csv(int step_seconds) const {
    std::ostringstream out;
    out << "bin_start_min,customer_count,charging_count,waiting_len\n";
    const double bin_min = curves.bin_minutes;
    for (std::size_t b = 0; b < curves.customer.size(); ++b) {
        // Waiting-list length sampled at the last in-window step of the bin.
        double end_min = (static_cast<double>(b) + 1.0) * bin_min;
        std::int64_t last_step = static_cast<std::int64_t>(end_min * 60.0 / step_seconds) - 1;
        std::int32_t waiting = 0;
        if (!waiting_len.empty()) {
            last_step = std::min<std::int64_t>(last_step, static_cast<std::int64_t>(waiting_len.size()) - 1);
            if (last_step >= 0) waiting = waiting_len[static_cast<std::size_t>(last_step)];
        }
        out << fmt_double(static_cast<double>(b) * bin_min, 1) << ',' << curves.customer[b] << ','
            << curves.charging[b] << ',' << waiting << '\n';
    }
    return out.str();
}

std::string RunOutput::taxi_ledger_csv() const {
    std::ostringstream out;
    out << "taxi_id,income,trips_served,km_driven,charge_sessions,final_soc_km\n";
    for (const auto& t : taxis) {
        out << t.taxi_id << ',' << fmt_double(t.income, 2) << ',' << t.trips_served << ','
            << fmt_double(t.km_driven, 3) << ',' << t.charge_count << ',' << fmt_double(t.final_soc_km, 3)
            << '\n';
    }
    return out.str();
}

std::string RunOutput::trip_outcomes_csv(int step_seconds) const {
    std::ostringstream out;
    out << "trip_id,status,taxi_id,request_step,pickup_step,dropoff_step,wait_min\n";
    for (const auto& t : trips) {
        const char* status = t.status == TripStatus::Served      ? "served"
                             : t.status == TripStatus::Cancelled ? "cancelled"
                                                                 : "residual";
        out << t.trip_id << ',' << status << ',' << t.taxi_id << ',' << t.request_step << ','
            << t.pickup_step << ',' << t.dropoff_step << ',';
        if (t.status == TripStatus::Served) {
            out << fmt_double(steps_to_minutes(t.pickup_step - t.request_step, step_seconds), 2);
        } else {
            out << fmt_double(0.0, 2);
        }
        out << '\n';
    }
    return out.str();
}

std::string RunOutput::chart_csv() const {
    std::ostringstream out;
    out << "step,station_id,vacant\n";
    for (const auto& r : chart) out << r.step << ',' << r.station_id << ',' << r.vacant << '\n';
    return out.str();
}

}  // namespace evtaxi
