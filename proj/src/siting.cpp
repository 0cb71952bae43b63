#include "evtaxi/siting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "evtaxi/csv.hpp"
#include "evtaxi/rng.hpp"

namespace evtaxi {

namespace {

double sqdist(const PlanePoint& a, const PlanePoint& b) {
    double dx = a.x - b.x;
    double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

std::vector<PlanePoint> subsample(const std::vector<PlanePoint>& pts, std::size_t cap, Rng& rng) {
    if (pts.size() <= cap) return pts;
    // Partial Fisher-Yates over an index array.
    std::vector<std::size_t> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < cap; ++i) {
        std::size_t j = i + rng.below(idx.size() - i);
        std::swap(idx[i], idx[j]);
    }
    std::vector<PlanePoint> out;
    out.reserve(cap);
    for (std::size_t i = 0; i < cap; ++i) out.push_back(pts[idx[i]]);
    return out;
}

std::vector<PlanePoint> kmeanspp_init(const std::vector<PlanePoint>& pts, int k, Rng& rng) {
    std::vector<PlanePoint> centroids;
    centroids.reserve(k);
    centroids.push_back(pts[rng.below(pts.size())]);
    std::vector<double> d2(pts.size());
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            double best = sqdist(pts[i], centroids[0]);
            for (std::size_t j = 1; j < centroids.size(); ++j) best = std::min(best, sqdist(pts[i], centroids[j]));
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            // All remaining mass sits on existing centroids; caller has
            // already verified enough distinct points, so pick any new one.
            for (const auto& p : pts) {
                bool used = false;
                for (const auto& ctr : centroids)
                    if (p.x == ctr.x && p.y == ctr.y) used = true;
                if (!used) {
                    centroids.push_back(p);
                    break;
                }
            }
            continue;
        }
        double target = rng.uniform01() * total;
        double acc = 0.0;
        std::size_t pick = pts.size() - 1;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            acc += d2[i];
            if (acc >= target) {
                pick = i;
                break;
            }
        }
        centroids.push_back(pts[pick]);
    }
    return centroids;
}

}  // namespace

std::vector<StationSite> kmeans_sites(const std::vector<PlanePoint>& origins, int station_count,
                                      std::uint64_t seed, int capacity, std::size_t sample_cap) {
    if (station_count < 1) throw std::invalid_argument("kmeans_sites: station_count must be >= 1");
    if (origins.size() < static_cast<std::size_t>(station_count))
        throw DegenerateInput("kmeans_sites: fewer origins than stations");

    Rng rng = Rng::stream(seed, "siting.kmeans");
    std::vector<PlanePoint> pts = subsample(origins, sample_cap, rng);

    std::set<std::pair<double, double>> distinct;
    for (const auto& p : pts) distinct.insert({p.x, p.y});
    if (distinct.size() < static_cast<std::size_t>(station_count))
        throw DegenerateInput("kmeans_sites: fewer distinct points than stations");

    const int k = station_count;
    std::vector<PlanePoint> centroids = kmeanspp_init(pts, k, rng);
    std::vector<int> assign(pts.size(), 0);

    double prev_wcss = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 300; ++iter) {
        // Assignment phase.
        double wcss = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            int best = 0;
            double best_d = sqdist(pts[i], centroids[0]);
            for (int j = 1; j < k; ++j) {
                double d = sqdist(pts[i], centroids[j]);
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            assign[i] = best;
            wcss += best_d;
        }
        if (wcss > prev_wcss * (1.0 + 1e-9) + 1e-9)
            throw std::logic_error("kmeans_sites: within-cluster sum of squares increased");
        prev_wcss = wcss;

        // Update phase.
        std::vector<double> sx(k, 0.0), sy(k, 0.0);
        std::vector<std::size_t> cnt(k, 0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            sx[assign[i]] += pts[i].x;
            sy[assign[i]] += pts[i].y;
            ++cnt[assign[i]];
        }
        double max_move = 0.0;
        for (int j = 0; j < k; ++j) {
            if (cnt[j] == 0) continue;
            PlanePoint next{sx[j] / cnt[j], sy[j] / cnt[j]};
            max_move = std::max(max_move, std::sqrt(sqdist(next, centroids[j])));
            centroids[j] = next;
        }
        // Reseed empty clusters to the point farthest from its centroid.
        for (int j = 0; j < k; ++j) {
            if (cnt[j] != 0) continue;
            double worst = -1.0;
            std::size_t worst_i = 0;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                double d = sqdist(pts[i], centroids[assign[i]]);
                if (d > worst) {
                    worst = d;
                    worst_i = i;
                }
            }
            centroids[j] = pts[worst_i];
            max_move = std::numeric_limits<double>::infinity();
        }
        if (max_move < 1e-6) break;
    }

    std::vector<StationSite> sites(k);
    for (int j = 0; j < k; ++j) sites[j] = StationSite{j, centroids[j], capacity};
    return sites;
}

Partition build_partition(std::vector<StationSite> sites, int k_adjacent) {
    if (sites.empty()) throw std::invalid_argument("build_partition: no sites");
    Partition part;
    const int n = static_cast<int>(sites.size());
    for (int i = 0; i < n; ++i) sites[i].station_id = i;
    part.sites = std::move(sites);
    int k = std::min(k_adjacent, n - 1);
    part.adjacency.resize(n);
    for (int i = 0; i < n; ++i) {
        std::vector<int> others;
        others.reserve(n - 1);
        for (int j = 0; j < n; ++j)
            if (j != i) others.push_back(j);
        std::stable_sort(others.begin(), others.end(), [&](int a, int b) {
            double da = manhattan(part.sites[i].location, part.sites[a].location);
            double db = manhattan(part.sites[i].location, part.sites[b].location);
            if (da != db) return da < db;
            return a < b;
        });
        others.resize(k);
        part.adjacency[i] = std::move(others);
    }
    return part;
}

std::string sites_to_csv(const std::vector<StationSite>& sites, const RegionBounds& region) {
    std::ostringstream out;
    out << "station_id,lon,lat,capacity\n";
    for (const auto& s : sites) {
        GeoPoint g = region.unproject(s.location);
        out << s.station_id << ',' << fmt_double(g.lon) << ',' << fmt_double(g.lat) << ',' << s.capacity << '\n';
    }
    return out.str();
}

void save_sites(const std::string& path, const std::vector<StationSite>& sites, const RegionBounds& region) {
    write_file(path, sites_to_csv(sites, region));
}

std::vector<StationSite> load_sites(const std::string& path, const RegionBounds& region) {
    CsvReader reader(path);
    std::size_t c_id = reader.column("station_id");
    std::size_t c_lon = reader.column("lon");
    std::size_t c_lat = reader.column("lat");
    std::size_t c_cap = reader.column("capacity");
    std::vector<StationSite> sites;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() <= std::max({c_id, c_lon, c_lat, c_cap}))
            throw std::runtime_error(path + ": short row in sites file");
        StationSite s;
        std::int64_t id = 0, cap = 0;
        GeoPoint g;
        if (!parse_int64(f[c_id], id) || !parse_double(f[c_lon], g.lon) || !parse_double(f[c_lat], g.lat) ||
            !parse_int64(f[c_cap], cap) || cap < 1)
            throw std::runtime_error(path + ": invalid sites row");
        s.station_id = static_cast<int>(id);
        s.location = region.project(g);
        s.capacity = static_cast<int>(cap);
        sites.push_back(s);
    }
    std::sort(sites.begin(), sites.end(),
              [](const StationSite& a, const StationSite& b) { return a.station_id < b.station_id; });
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (sites[i].station_id != static_cast<int>(i))
            throw std::runtime_error(path + ": station ids must be 0..S-1 without gaps");
    }
    if (sites.empty()) throw std::runtime_error(path + ": no stations");
    return sites;
}

}  // namespace evtaxi
