#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcity/model.hpp"
#include "qcity/time.hpp"

namespace qcity {

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;

    bool operator==(const LatLon&) const = default;
};

// Length of a time bucket in seconds. The presets 20 s and 300 s are the
// default store configuration.
class Granularity {
public:
    explicit Granularity(std::int64_t seconds);

    std::int64_t seconds() const { return m_seconds; }

    auto operator<=>(const Granularity&) const = default;

private:
    std::int64_t m_seconds;
};

inline const std::vector<Granularity>& default_granularities() {
    static const std::vector<Granularity> presets{Granularity(20), Granularity(300)};
    return presets;
}

struct GridSpec {
    double min_lat = 0.0;
    double min_lon = 0.0;
    double max_lat = 0.0;
    double max_lon = 0.0;
    double cell_size_deg = 0.005;

    bool operator==(const GridSpec&) const = default;
};

// Parses {"bbox": {"min_lat",...}, "cell_size_deg": x}.
GridSpec grid_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GridSpec& g);

struct Zone {
    std::string zone_id;
    std::string name;
    std::vector<LatLon> ring; // closed: front() == back()
    double min_lat, min_lon, max_lat, max_lon;
};

// Closed-polygon containment: true for interior and boundary points.
bool ring_contains(const std::vector<LatLon>& ring, LatLon p);
bool ring_boundary_contains(const std::vector<LatLon>& ring, LatLon p);

// The city's spatial units. Either a uniform grid (cells "g_<row>_<col>",
// row along latitude) or a set of named simple polygons. Immutable after
// construction.
class ZonePartition {
public:
    static ZonePartition from_grid(const GridSpec& spec);
    static ZonePartition from_geojson(const nlohmann::json& feature_collection);
    static ZonePartition from_geojson_file(const std::filesystem::path& path);

    // Round-trips through to_config_json(); used by the persisted store.
    static ZonePartition from_config_json(const nlohmann::json& j);
    nlohmann::json to_config_json() const;

    // Grid cells are half-open [min, max) except on the outer top/right edges.
    // A polygon boundary point goes to the smallest zone_id whose closed
    // boundary contains it.
    std::optional<std::string> locate(LatLon p) const;

    const std::vector<Zone>& zones() const { return m_zones; }
    bool has_zone(std::string_view zone_id) const;
    const Zone* find_zone(std::string_view zone_id) const;
    const std::optional<GridSpec>& grid() const { return m_grid; }

    // FeatureCollection with one Polygon per zone, properties {zone_id, name}.
    nlohmann::json to_geojson() const;

    // Hex FNV-1a digest of the canonical config JSON.
    const std::string& source_hash() const { return m_hash; }

    bool operator==(const ZonePartition& other) const { return m_hash == other.m_hash; }

private:
    ZonePartition() = default;
    void build_index();
    std::optional<std::string> locate_grid(LatLon p) const;
    std::optional<std::string> locate_polygons(LatLon p) const;

    std::optional<GridSpec> m_grid;
    std::int64_t m_rows = 0;
    std::int64_t m_cols = 0;

    std::vector<Zone> m_zones; // sorted by zone_id
    std::string m_hash;

    // Uniform bin index over the polygons' extent; each bin lists candidate
    // zone indices (ascending, hence in zone_id order).
    double m_min_lat = 0, m_min_lon = 0, m_max_lat = 0, m_max_lon = 0;
    std::int64_t m_bins_lat = 0, m_bins_lon = 0;
    std::vector<std::vector<std::size_t>> m_bins;
};

// floor(seconds since epoch / g). Throws Error(PreEpochTimestamp).
std::int64_t time_bucket(Timestamp ts, Granularity g);

// Start instant of bucket `index`.
Timestamp bucket_start(std::int64_t index, Granularity g);

// The blocking function: (locate(o), time_bucket(o.ts, g), g), or nullopt
// when the observation lies outside every zone.
std::optional<SpatioTemporalKey> st_key(const Observation& o, const ZonePartition& part, Granularity g);

} // namespace qcity
