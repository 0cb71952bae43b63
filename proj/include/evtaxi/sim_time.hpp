#pragma once

#include <cmath>
#include <cstdint>

namespace evtaxi {

using Step = std::int64_t;

// Discrete simulation clock: wall time = step * step_seconds.
struct SimClock {
    Step step = 0;
    int step_seconds = 30;

    double seconds() const { return static_cast<double>(step) * step_seconds; }
    double minutes() const { return seconds() / 60.0; }
};

inline double steps_to_minutes(Step steps, int step_seconds) {
    return static_cast<double>(steps) * step_seconds / 60.0;
}

// Whole steps needed to cover `minutes`, rounded up so no event completes
// early. The 1e-9 slack keeps exact multiples from tipping over to an
// extra step through float noise.
inline Step steps_for_minutes(double minutes, int step_seconds) {
    if (minutes <= 0.0) return 0;
    double steps = minutes * 60.0 / step_seconds;
    return static_cast<Step>(std::ceil(steps - 1e-9));
}

inline Step steps_for_km(double km, double speed_kmh, int step_seconds) {
    if (km <= 0.0) return 0;
    return steps_for_minutes(km / speed_kmh * 60.0, step_seconds);
}

// Empty-taxi travel time in minutes at the given speed, on the step grid.
inline double travel_time_empty_min(double km, double speed_kmh, int step_seconds) {
    return steps_to_minutes(steps_for_km(km, speed_kmh, step_seconds), step_seconds);
}

}  // namespace evtaxi
