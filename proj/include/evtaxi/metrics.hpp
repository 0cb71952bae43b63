#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evtaxi/sim_time.hpp"

namespace evtaxi {

enum class TripStatus { Served, Cancelled, Residual };

struct TripOutcome {
    TripStatus status = TripStatus::Residual;
    double wait_min = 0.0;  // meaningful for served trips only
};

struct FillWait {
    double fill_rate = 1.0;
    double avg_wait_min = 0.0;
};

// Aligned per-bin counts of new customer requests and new charging arrivals.
struct TimeSeries {
    double bin_minutes = 15.0;
    std::vector<std::int64_t> customer;
    std::vector<std::int64_t> charging;
};

// Income inequality in [0,1] via the mean-absolute-difference definition,
// computed from the sorted vector in O(n log n). All-zero input is 0 by
// convention; empty input is an error.
double gini(std::vector<double> values);

// O(n^2) pairwise definition, kept for oracle checks in tests.
double gini_pairwise(const std::vector<double>& values);

FillWait fill_and_wait(const std::vector<TripOutcome>& trips);

TimeSeries demand_curves(const std::vector<Step>& request_steps, const std::vector<Step>& charge_steps,
                         int step_seconds, double bin_minutes);

// Lag between the charging-demand peak and the customer-demand peak, in
// minutes, after centered moving-average smoothing. Absent when either
// curve is constant.
std::optional<double> peak_lag(const TimeSeries& ts, int smooth_window = 3);

// Smoothing helper shared with peak detection in analysis code.
std::vector<double> moving_average(const std::vector<std::int64_t>& values, int window);

}  // namespace evtaxi
