#include "qcity/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "qcity/error.hpp"

namespace qcity {

using nlohmann::json;

Granularity::Granularity(std::int64_t seconds) : m_seconds(seconds) {
    if (seconds <= 0) {
        throw Error(ErrorCode::InvalidArgument, "granularity must be positive, got " + std::to_string(seconds));
    }
}

GridSpec grid_spec_from_json(const json& j) {
    try {
        const auto& bbox = j.at("bbox");
        GridSpec g;
        g.min_lat = bbox.at("min_lat").get<double>();
        g.min_lon = bbox.at("min_lon").get<double>();
        g.max_lat = bbox.at("max_lat").get<double>();
        g.max_lon = bbox.at("max_lon").get<double>();
        g.cell_size_deg = j.value("cell_size_deg", 0.005);
        return g;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad grid spec: ") + e.what());
    }
}

json to_json(const GridSpec& g) {
    return json{
        {"bbox", {{"min_lat", g.min_lat}, {"min_lon", g.min_lon}, {"max_lat", g.max_lat}, {"max_lon", g.max_lon}}},
        {"cell_size_deg", g.cell_size_deg},
    };
}

namespace {

// > 0 when p is left of the directed line a->b (x = lon, y = lat).
double is_left(LatLon a, LatLon b, LatLon p) {
    return (b.lon - a.lon) * (p.lat - a.lat) - (p.lon - a.lon) * (b.lat - a.lat);
}

bool on_segment(LatLon a, LatLon b, LatLon p) {
    if (is_left(a, b, p) != 0.0) {
        return false;
    }
    return p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat) &&
           p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon);
}

int sign(double x) { return (x > 0) - (x < 0); }

bool segments_intersect(LatLon p1, LatLon p2, LatLon q1, LatLon q2) {
    int d1 = sign(is_left(q1, q2, p1));
    int d2 = sign(is_left(q1, q2, p2));
    int d3 = sign(is_left(p1, p2, q1));
    int d4 = sign(is_left(p1, p2, q2));
    if (d1 * d2 < 0 && d3 * d4 < 0) {
        return true;
    }
    return (d1 == 0 && on_segment(q1, q2, p1)) || (d2 == 0 && on_segment(q1, q2, p2)) ||
           (d3 == 0 && on_segment(p1, p2, q1)) || (d4 == 0 && on_segment(p1, p2, q2));
}

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(std::string_view data) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(data)));
    return buf;
}

std::int64_t cell_count(double lo, double hi, double cell) {
    double n = (hi - lo) / cell;
    double r = std::round(n);
    if (std::fabs(n - r) < 1e-9) {
        return static_cast<std::int64_t>(r);
    }
    return static_cast<std::int64_t>(std::ceil(n));
}

// Index of the half-open cell [lo + i*cell, lo + (i+1)*cell) holding x,
// computed against the same edge expressions used for rendering.
std::int64_t cell_index(double x, double lo, double cell, std::int64_t n) {
    auto i = static_cast<std::int64_t>(std::floor((x - lo) / cell));
    i = std::clamp<std::int64_t>(i, 0, n - 1);
    while (i > 0 && x < lo + static_cast<double>(i) * cell) {
        --i;
    }
    while (i + 1 < n && x >= lo + static_cast<double>(i + 1) * cell) {
        ++i;
    }
    return i;
}

void finish_zone(Zone& z) {
    z.min_lat = z.max_lat = z.ring.front().lat;
    z.min_lon = z.max_lon = z.ring.front().lon;
    for (const auto& v : z.ring) {
        z.min_lat = std::min(z.min_lat, v.lat);
        z.max_lat = std::max(z.max_lat, v.lat);
        z.min_lon = std::min(z.min_lon, v.lon);
        z.max_lon = std::max(z.max_lon, v.lon);
    }
}

void check_simple(const Zone& z) {
    std::set<std::pair<double, double>> distinct;
    for (const auto& v : z.ring) {
        distinct.emplace(v.lat, v.lon);
    }
    if (distinct.size() < 3) {
        throw Error(ErrorCode::DegeneratePolygon, "zone '" + z.zone_id + "' has fewer than 3 distinct vertices");
    }
    // Edge list without zero-length edges.
    std::vector<std::pair<LatLon, LatLon>> edges;
    for (std::size_t i = 0; i + 1 < z.ring.size(); ++i) {
        if (!(z.ring[i] == z.ring[i + 1])) {
            edges.emplace_back(z.ring[i], z.ring[i + 1]);
        }
    }
    const std::size_t n = edges.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent) {
                continue;
            }
            if (segments_intersect(edges[i].first, edges[i].second, edges[j].first, edges[j].second)) {
                throw Error(ErrorCode::SelfIntersectingPolygon, "zone '" + z.zone_id + "' is not a simple ring");
            }
        }
    }
}

} // namespace

bool ring_boundary_contains(const std::vector<LatLon>& ring, LatLon p) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        if (on_segment(ring[i], ring[i + 1], p)) {
            return true;
        }
    }
    return false;
}

bool ring_contains(const std::vector<LatLon>& ring, LatLon p) {
    if (ring_boundary_contains(ring, p)) {
        return true;
    }
    int winding = 0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        const LatLon a = ring[i];
        const LatLon b = ring[i + 1];
        if (a.lat <= p.lat) {
            if (b.lat > p.lat && is_left(a, b, p) > 0) {
                ++winding;
            }
        } else if (b.lat <= p.lat && is_left(a, b, p) < 0) {
            --winding;
        }
    }
    return winding != 0;
}

ZonePartition ZonePartition::from_grid(const GridSpec& spec) {
    if (!(spec.cell_size_deg > 0) || !std::isfinite(spec.cell_size_deg)) {
        throw Error(ErrorCode::InvalidArgument, "cell_size_deg must be > 0");
    }
    if (!(spec.max_lat > spec.min_lat) || !(spec.max_lon > spec.min_lon)) {
        throw Error(ErrorCode::EmptyPartition, "grid bbox is empty");
    }
    if (spec.min_lat < -90 || spec.max_lat > 90 || spec.min_lon < -180 || spec.max_lon > 180) {
        throw Error(ErrorCode::BadCoordinate, "grid bbox outside WGS84 bounds");
    }
    ZonePartition part;
    part.m_grid = spec;
    part.m_rows = cell_count(spec.min_lat, spec.max_lat, spec.cell_size_deg);
    part.m_cols = cell_count(spec.min_lon, spec.max_lon, spec.cell_size_deg);
    if (part.m_rows < 1 || part.m_cols < 1) {
        throw Error(ErrorCode::EmptyPartition, "grid has no cells");
    }
    part.m_zones.reserve(static_cast<std::size_t>(part.m_rows * part.m_cols));
    const double c = spec.cell_size_deg;
    for (std::int64_t r = 0; r < part.m_rows; ++r) {
        double lat0 = spec.min_lat + static_cast<double>(r) * c;
        double lat1 = r + 1 == part.m_rows ? spec.max_lat : spec.min_lat + static_cast<double>(r + 1) * c;
        for (std::int64_t col = 0; col < part.m_cols; ++col) {
            double lon0 = spec.min_lon + static_cast<double>(col) * c;
            double lon1 = col + 1 == part.m_cols ? spec.max_lon : spec.min_lon + static_cast<double>(col + 1) * c;
            Zone z;
            z.zone_id = "g_" + std::to_string(r) + "_" + std::to_string(col);
            z.name = z.zone_id;
            z.ring = {{lat0, lon0}, {lat0, lon1}, {lat1, lon1}, {lat1, lon0}, {lat0, lon0}};
            finish_zone(z);
            part.m_zones.push_back(std::move(z));
        }
    }
    std::sort(part.m_zones.begin(), part.m_zones.end(),
        [](const Zone& a, const Zone& b) { return a.zone_id < b.zone_id; });
    part.m_hash = hash_hex(part.to_config_json().dump());
    return part;
}

ZonePartition ZonePartition::from_geojson(const json& fc) {
    if (!fc.is_object() || fc.value("type", "") != "FeatureCollection" || !fc.contains("features") ||
        !fc["features"].is_array()) {
        throw Error(ErrorCode::BadZoneFile, "expected a GeoJSON FeatureCollection");
    }
    ZonePartition part;
    std::set<std::string> seen;
    for (const auto& feature : fc["features"]) {
        Zone z;
        try {
            const auto& props = feature.at("properties");
            z.zone_id = props.at("zone_id").get<std::string>();
            z.name = props.contains("name") && props["name"].is_string() ? props["name"].get<std::string>()
                                                                          : z.zone_id;
            const auto& geom = feature.at("geometry");
            if (geom.at("type") != "Polygon") {
                throw Error(ErrorCode::BadZoneFile, "zone '" + z.zone_id + "' is not a Polygon");
            }
            const auto& rings = geom.at("coordinates");
            if (!rings.is_array() || rings.size() != 1) {
                throw Error(ErrorCode::BadZoneFile, "zone '" + z.zone_id + "' must have exactly one ring (no holes)");
            }
            for (const auto& pos : rings[0]) {
                z.ring.push_back(LatLon{pos.at(1).get<double>(), pos.at(0).get<double>()});
            }
        } catch (const json::exception& e) {
            throw Error(ErrorCode::BadZoneFile, std::string("malformed feature: ") + e.what());
        }
        if (z.zone_id.empty()) {
            throw Error(ErrorCode::BadZoneFile, "empty zone_id");
        }
        if (!seen.insert(z.zone_id).second) {
            throw Error(ErrorCode::DuplicateZoneId, "duplicate zone_id '" + z.zone_id + "'");
        }
        if (z.ring.empty()) {
            throw Error(ErrorCode::DegeneratePolygon, "zone '" + z.zone_id + "' has no vertices");
        }
        if (!(z.ring.front() == z.ring.back())) {
            z.ring.push_back(z.ring.front());
        }
        check_simple(z);
        finish_zone(z);
        part.m_zones.push_back(std::move(z));
    }
    if (part.m_zones.empty()) {
        throw Error(ErrorCode::EmptyPartition, "zone file has no features");
    }
    std::sort(part.m_zones.begin(), part.m_zones.end(),
        [](const Zone& a, const Zone& b) { return a.zone_id < b.zone_id; });
    part.build_index();
    part.m_hash = hash_hex(part.to_config_json().dump());
    return part;
}

ZonePartition ZonePartition::from_geojson_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::FileNotFound, path.string());
    }
    json fc = json::parse(in, nullptr, false);
    if (fc.is_discarded()) {
        throw Error(ErrorCode::BadZoneFile, "invalid JSON in " + path.string());
    }
    return from_geojson(fc);
}

ZonePartition ZonePartition::from_config_json(const json& j) {
    const std::string kind = j.value("kind", "");
    if (kind == "grid") {
        return from_grid(grid_spec_from_json(j.at("grid")));
    }
    if (kind == "polygons") {
        return from_geojson(j.at("geojson"));
    }
    throw Error(ErrorCode::BadZoneFile, "unknown partition kind '" + kind + "'");
}

json ZonePartition::to_config_json() const {
    if (m_grid) {
        return json{{"kind", "grid"}, {"grid", to_json(*m_grid)}};
    }
    return json{{"kind", "polygons"}, {"geojson", to_geojson()}};
}

json ZonePartition::to_geojson() const {
    json features = json::array();
    for (const auto& z : m_zones) {
        json ring = json::array();
        for (const auto& v : z.ring) {
            ring.push_back(json::array({v.lon, v.lat}));
        }
        features.push_back(json{
            {"type", "Feature"},
            {"properties", {{"zone_id", z.zone_id}, {"name", z.name}}},
            {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({std::move(ring)})}}},
        });
    }
    return json{{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

void ZonePartition::build_index() {
    m_min_lat = m_zones.front().min_lat;
    m_max_lat = m_zones.front().max_lat;
    m_min_lon = m_zones.front().min_lon;
    m_max_lon = m_zones.front().max_lon;
    for (const auto& z : m_zones) {
        m_min_lat = std::min(m_min_lat, z.min_lat);
        m_max_lat = std::max(m_max_lat, z.max_lat);
        m_min_lon = std::min(m_min_lon, z.min_lon);
        m_max_lon = std::max(m_max_lon, z.max_lon);
    }
    auto side = static_cast<std::int64_t>(std::ceil(2.0 * std::sqrt(static_cast<double>(m_zones.size()))));
    side = std::clamp<std::int64_t>(side, 1, 64);
    m_bins_lat = m_max_lat > m_min_lat ? side : 1;
    m_bins_lon = m_max_lon > m_min_lon ? side : 1;
    m_bins.assign(static_cast<std::size_t>(m_bins_lat * m_bins_lon), {});

    auto bin_of = [](double x, double lo, double hi, std::int64_t n) {
        if (n == 1) {
            return std::int64_t{0};
        }
        auto i = static_cast<std::int64_t>(std::floor((x - lo) / (hi - lo) * static_cast<double>(n)));
        return std::clamp<std::int64_t>(i, 0, n - 1);
    };
    for (std::size_t idx = 0; idx < m_zones.size(); ++idx) {
        const auto& z = m_zones[idx];
        auto r0 = bin_of(z.min_lat, m_min_lat, m_max_lat, m_bins_lat);
        auto r1 = bin_of(z.max_lat, m_min_lat, m_max_lat, m_bins_lat);
        auto c0 = bin_of(z.min_lon, m_min_lon, m_max_lon, m_bins_lon);
        auto c1 = bin_of(z.max_lon, m_min_lon, m_max_lon, m_bins_lon);
        for (auto r = r0; r <= r1; ++r) {
            for (auto c = c0; c <= c1; ++c) {
                m_bins[static_cast<std::size_t>(r * m_bins_lon + c)].push_back(idx);
            }
        }
    }
}

std::optional<std::string> ZonePartition::locate(LatLon p) const {
    return m_grid ? locate_grid(p) : locate_polygons(p);
}

std::optional<std::string> ZonePartition::locate_grid(LatLon p) const {
    const GridSpec& g = *m_grid;
    if (p.lat < g.min_lat || p.lat > g.max_lat || p.lon < g.min_lon || p.lon > g.max_lon) {
        return std::nullopt;
    }
    auto row = cell_index(p.lat, g.min_lat, g.cell_size_deg, m_rows);
    auto col = cell_index(p.lon, g.min_lon, g.cell_size_deg, m_cols);
    return "g_" + std::to_string(row) + "_" + std::to_string(col);
}

std::optional<std::string> ZonePartition::locate_polygons(LatLon p) const {
    if (p.lat < m_min_lat || p.lat > m_max_lat || p.lon < m_min_lon || p.lon > m_max_lon) {
        return std::nullopt;
    }
    auto bin_of = [](double x, double lo, double hi, std::int64_t n) {
        if (n == 1) {
            return std::int64_t{0};
        }
        auto i = static_cast<std::int64_t>(std::floor((x - lo) / (hi - lo) * static_cast<double>(n)));
        return std::clamp<std::int64_t>(i, 0, n - 1);
    };
    auto r = bin_of(p.lat, m_min_lat, m_max_lat, m_bins_lat);
    auto c = bin_of(p.lon, m_min_lon, m_max_lon, m_bins_lon);
    for (std::size_t idx : m_bins[static_cast<std::size_t>(r * m_bins_lon + c)]) {
        const Zone& z = m_zones[idx];
        if (p.lat < z.min_lat || p.lat > z.max_lat || p.lon < z.min_lon || p.lon > z.max_lon) {
            continue;
        }
        if (ring_contains(z.ring, p)) {
            return z.zone_id;
        }
    }
    return std::nullopt;
}

const Zone* ZonePartition::find_zone(std::string_view zone_id) const {
    auto it = std::lower_bound(m_zones.begin(), m_zones.end(), zone_id,
        [](const Zone& z, std::string_view id) { return z.zone_id < id; });
    if (it == m_zones.end() || it->zone_id != zone_id) {
        return nullptr;
    }
    return &*it;
}

bool ZonePartition::has_zone(std::string_view zone_id) const {
    return find_zone(zone_id) != nullptr;
}

std::int64_t time_bucket(Timestamp ts, Granularity g) {
    const std::int64_t micros = to_unix_micros(ts);
    if (micros < 0) {
        throw Error(ErrorCode::PreEpochTimestamp, format_rfc3339(ts));
    }
    return micros / (g.seconds() * 1'000'000);
}

Timestamp bucket_start(std::int64_t index, Granularity g) {
    return from_unix_seconds(index * g.seconds());
}

std::optional<SpatioTemporalKey> st_key(const Observation& o, const ZonePartition& part, Granularity g) {
    const std::int64_t bucket = time_bucket(o.ts, g);
    auto zone = part.locate(LatLon{o.lat, o.lon});
    if (!zone) {
        return std::nullopt;
    }
    return SpatioTemporalKey{std::move(*zone), bucket, g.seconds()};
}

} // namespace qcity
