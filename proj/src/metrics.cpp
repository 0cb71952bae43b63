#include "evtaxi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evtaxi {

double gini(std::vector<double> values) {
    const std::size_t n = values.size();
    if (n == 0) throw std::invalid_argument("gini: empty input");
    double sum = 0.0;
    for (double v : values) {
        if (v < 0.0) throw std::invalid_argument("gini: negative value");
        sum += v;
    }
    if (sum <= 0.0) return 0.0;
    std::sort(values.begin(), values.end());
    // sum_{ij} |x_i - x_j| = 2 * sum_i (2i - n + 1) * x_(i), 0-indexed ascending
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += (2.0 * static_cast<double>(i) - static_cast<double>(n) + 1.0) * values[i];
    }
    return acc / (static_cast<double>(n) * sum);
}

double gini_pairwise(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n == 0) throw std::invalid_argument("gini: empty input");
    double sum = 0.0;
    for (double v : values) sum += v;
    if (sum <= 0.0) return 0.0;
    double mu = sum / static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) acc += std::abs(values[i] - values[j]);
    return acc / (2.0 * static_cast<double>(n) * static_cast<double>(n) * mu);
}

FillWait fill_and_wait(const std::vector<TripOutcome>& trips) {
    if (trips.empty()) return {1.0, 0.0};
    std::size_t served = 0;
    double wait_sum = 0.0;
    for (const auto& t : trips) {
        if (t.status == TripStatus::Served) {
            ++served;
            wait_sum += t.wait_min;
        }
    }
    FillWait out;
    out.fill_rate = static_cast<double>(served) / static_cast<double>(trips.size());
    out.avg_wait_min = served > 0 ? wait_sum / static_cast<double>(served) : 0.0;
    return out;
}

TimeSeries demand_curves(const std::vector<Step>& request_steps, const std::vector<Step>& charge_steps,
                         int step_seconds, double bin_minutes) {
    TimeSeries ts;
    ts.bin_minutes = bin_minutes;
    auto bin_of = [&](Step s) {
        double minutes = steps_to_minutes(s, step_seconds);
        return static_cast<std::size_t>(minutes / bin_minutes);
    };
    std::size_t bins = 0;
    for (Step s : request_steps) bins = std::max(bins, bin_of(s) + 1);
    for (Step s : charge_steps) bins = std::max(bins, bin_of(s) + 1);
    ts.customer.assign(bins, 0);
    ts.charging.assign(bins, 0);
    for (Step s : request_steps) ++ts.customer[bin_of(s)];
    for (Step s : charge_steps) ++ts.charging[bin_of(s)];
    return ts;
}

std::vector<double> moving_average(const std::vector<std::int64_t>& values, int window) {
    const int n = static_cast<int>(values.size());
    const int half = std::max(0, window / 2);
    std::vector<double> out(values.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        int lo = std::max(0, i - half);
        int hi = std::min(n - 1, i + half);
        double s = 0.0;
        for (int j = lo; j <= hi; ++j) s += static_cast<double>(values[j]);
        out[i] = s / static_cast<double>(hi - lo + 1);
    }
    return out;
}

namespace {
std::optional<std::size_t> argmax_nonconstant(const std::vector<double>& v) {
    if (v.empty()) return std::nullopt;
    auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    if (*mn == *mx) return std::nullopt;  // constant curve: peak undefined
    return static_cast<std::size_t>(mx - v.begin());
}
}  // namespace

std::optional<double> peak_lag(const TimeSeries& ts, int smooth_window) {
    auto cust = moving_average(ts.customer, smooth_window);
    auto chrg = moving_average(ts.charging, smooth_window);
    auto pc = argmax_nonconstant(cust);
    auto ph = argmax_nonconstant(chrg);
    if (!pc || !ph) return std::nullopt;
    return (static_cast<double>(*ph) - static_cast<double>(*pc)) * ts.bin_minutes;
}

}  // namespace evtaxi
