#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "evtaxi/geo.hpp"

namespace evtaxi {

struct DegenerateInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StationSite {
    int station_id = 0;
    PlanePoint location;
    int capacity = 1;
};

// Nearest-station partition of the region plus, per sub-region, the
// ordered list of adjacent sub-regions. Assignment and adjacency both
// use Manhattan distance; clustering itself is squared-Euclidean.
struct Partition {
    std::vector<StationSite> sites;
    std::vector<std::vector<int>> adjacency;  // nearest-first, excludes self

    int locate(const PlanePoint& p) const {
        int best = 0;
        double best_d = manhattan(p, sites[0].location);
        for (std::size_t i = 1; i < sites.size(); ++i) {
            double d = manhattan(p, sites[i].location);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(i);
            }
        }
        return best;
    }
};

// Lloyd's algorithm with k-means++ seeding over trip origins. Stops when
// the largest centroid move falls below 1e-6 km or after 300 iterations.
// Empty clusters are reseeded to the point farthest from its centroid.
// Throws DegenerateInput when there are fewer distinct points than
// station_count. Inputs above sample_cap are subsampled (seeded).
std::vector<StationSite> kmeans_sites(const std::vector<PlanePoint>& origins, int station_count,
                                      std::uint64_t seed, int capacity = 1,
                                      std::size_t sample_cap = 200000);

Partition build_partition(std::vector<StationSite> sites, int k_adjacent);

// CSV columns: station_id,lon,lat,capacity (geographic coordinates).
std::string sites_to_csv(const std::vector<StationSite>& sites, const RegionBounds& region);
void save_sites(const std::string& path, const std::vector<StationSite>& sites, const RegionBounds& region);
std::vector<StationSite> load_sites(const std::string& path, const RegionBounds& region);

}  // namespace evtaxi
