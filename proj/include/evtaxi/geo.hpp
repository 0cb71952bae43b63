#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace evtaxi {

struct GeoPoint {
    double lon = 0.0;  // degrees east
    double lat = 0.0;  // degrees north
};

struct PlanePoint {
    double x = 0.0;  // km east of the region's west edge
    double y = 0.0;  // km north of the region's south edge
};

struct OutOfRegion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rectangular simulation region. Lon/lat are mapped linearly onto a
// width_km x height_km plane, so distances are axis-scaled, not geodesic.
struct RegionBounds {
    double lon_min = 115.5;
    double lon_max = 117.37;
    double lat_min = 39.47;
    double lat_max = 40.68;
    double width_km = 165.0;
    double height_km = 138.0;

    bool contains(const GeoPoint& p) const {
        return p.lon >= lon_min && p.lon <= lon_max && p.lat >= lat_min && p.lat <= lat_max;
    }

    double km_per_deg_lon() const { return width_km / (lon_max - lon_min); }
    double km_per_deg_lat() const { return height_km / (lat_max - lat_min); }

    PlanePoint project(const GeoPoint& p) const {
        if (!contains(p))
            throw OutOfRegion("point (" + std::to_string(p.lon) + ", " + std::to_string(p.lat) +
                              ") outside region bounds");
        return {(p.lon - lon_min) * km_per_deg_lon(), (p.lat - lat_min) * km_per_deg_lat()};
    }

    GeoPoint unproject(const PlanePoint& p) const {
        return {lon_min + p.x / km_per_deg_lon(), lat_min + p.y / km_per_deg_lat()};
    }

    bool contains_plane(const PlanePoint& p) const {
        return p.x >= 0.0 && p.x <= width_km && p.y >= 0.0 && p.y <= height_km;
    }
};

inline double manhattan(const PlanePoint& a, const PlanePoint& b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

}  // namespace evtaxi
