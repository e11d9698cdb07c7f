#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcity/model.hpp"
#include "qcity/spatial.hpp"
#include "qcity/time.hpp"

namespace qtest {

namespace fs = std::filesystem;

class TempDir {
public:
    explicit TempDir(const std::string& tag = "qcity") {
        static std::uint64_t counter = 0;
        std::random_device rd;
        m_path = fs::temp_directory_path() /
            (tag + "_" + std::to_string(rd()) + "_" + std::to_string(++counter));
        fs::create_directories(m_path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(m_path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return m_path; }
    fs::path operator/(const std::string& name) const { return m_path / name; }

private:
    fs::path m_path;
};

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

// filename -> bytes for every regular file in a directory.
inline std::map<std::string, std::string> dir_bytes(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file()) {
            out[e.path().filename().string()] = read_file(e.path());
        }
    }
    return out;
}

// Small generator toolkit over a seeded engine.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : m_engine(seed) {}

    std::int64_t integer(std::int64_t lo, std::int64_t hi) { // inclusive
        std::uniform_int_distribution<std::int64_t> d(lo, hi);
        return d(m_engine);
    }
    double real(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(m_engine);
    }
    bool coin(double p = 0.5) { return real(0.0, 1.0) < p; }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(v.size()) - 1))];
    }
    template <class T>
    void shuffle(std::vector<T>& v) {
        std::shuffle(v.begin(), v.end(), m_engine);
    }
    std::mt19937_64& engine() { return m_engine; }

private:
    std::mt19937_64 m_engine;
};

inline qcity::Timestamp at_seconds(std::int64_t s) {
    return qcity::Timestamp(std::chrono::seconds(s));
}

inline qcity::Observation make_sensor(std::string id, std::int64_t ts_s, double lat, double lon, double value,
    std::string kind = "traffic_count") {
    qcity::Observation o;
    o.id = std::move(id);
    o.source = qcity::Source::sensor;
    o.kind = std::move(kind);
    o.ts = at_seconds(ts_s);
    o.lat = lat;
    o.lon = lon;
    o.payload = qcity::SensorPayload{value, "veh"};
    return o;
}

inline qcity::Observation make_post(std::string id, std::int64_t ts_s, double lat, double lon, std::string text) {
    qcity::Observation o;
    o.id = std::move(id);
    o.source = qcity::Source::social;
    o.kind = "post";
    o.ts = at_seconds(ts_s);
    o.lat = lat;
    o.lon = lon;
    o.payload = qcity::SocialPayload{std::move(text), "u", {}};
    return o;
}

inline std::string jsonl(const std::vector<qcity::Observation>& obs) {
    std::string out;
    for (const auto& o : obs) {
        out += qcity::to_json(o).dump() + "\n";
    }
    return out;
}

// ---- spatial oracle -------------------------------------------------------

struct OraclePolygon {
    std::string id;
    std::vector<std::pair<double, double>> ring; // (x=lon, y=lat), not closed
};

inline bool on_segment(double px, double py, double ax, double ay, double bx, double by) {
    double cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
    if (cross != 0.0) {
        return false;
    }
    return px >= std::min(ax, bx) && px <= std::max(ax, bx) && py >= std::min(ay, by) && py <= std::max(ay, by);
}

// Even-odd ray cast towards +x with the half-open crossing rule, plus an
// explicit boundary check; boundary points count as inside.
inline bool ray_cast_contains(const OraclePolygon& poly, double x, double y) {
    const auto& r = poly.ring;
    bool inside = false;
    for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
        auto [xi, yi] = r[i];
        auto [xj, yj] = r[j];
        if (on_segment(x, y, xi, yi, xj, yj)) {
            return true;
        }
        if ((yi > y) != (yj > y)) {
            double xcross = xj + (y - yj) * (xi - xj) / (yi - yj);
            if (x < xcross) {
                inside = !inside;
            }
        }
    }
    return inside;
}

inline std::optional<std::string> oracle_locate(std::vector<OraclePolygon> polys, double lat, double lon) {
    std::sort(polys.begin(), polys.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& p : polys) {
        if (ray_cast_contains(p, lon, lat)) {
            return p.id;
        }
    }
    return std::nullopt;
}

inline nlohmann::json to_geojson(const std::vector<OraclePolygon>& polys) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& p : polys) {
        nlohmann::json ring = nlohmann::json::array();
        for (auto [x, y] : p.ring) {
            ring.push_back({x, y});
        }
        ring.push_back({p.ring.front().first, p.ring.front().second});
        features.push_back({{"type", "Feature"}, {"properties", {{"zone_id", p.id}, {"name", "zone " + p.id}}},
            {"geometry", {{"type", "Polygon"}, {"coordinates", nlohmann::json::array({ring})}}}});
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

// Ten polygons in two rows (y in [0,1] and [1,2]) with slanted shared side
// edges and notched top edges on some upper cells. All vertices are dyadic
// so boundary points can be generated exactly. Ids are scrambled so the
// smallest-id tie-break is not tied to geometry.
inline std::vector<OraclePolygon> ten_polygons() {
    const std::vector<std::string> ids{"d", "h", "a", "j", "c", "f", "b", "i", "e", "g"};
    auto lower_x = [](int j, double y) { return j + 0.5 * y; };        // y in [0,1]
    auto upper_x = [](int j, double y) { return j + 0.5 - 0.25 * (y - 1.0); }; // y in [1,2]
    std::vector<OraclePolygon> out;
    for (int c = 0; c < 5; ++c) {
        out.push_back({ids[static_cast<std::size_t>(c)],
            {{lower_x(c, 0), 0.0}, {lower_x(c + 1, 0), 0.0}, {lower_x(c + 1, 1), 1.0}, {lower_x(c, 1), 1.0}}});
    }
    for (int c = 0; c < 5; ++c) {
        OraclePolygon p{ids[static_cast<std::size_t>(5 + c)], {}};
        p.ring = {{upper_x(c, 1), 1.0}, {upper_x(c + 1, 1), 1.0}, {upper_x(c + 1, 2), 2.0}};
        if (c % 2 == 0) {
            double mid = (upper_x(c, 2) + upper_x(c + 1, 2)) / 2;
            p.ring.push_back({mid, 1.75});
        }
        p.ring.push_back({upper_x(c, 2), 2.0});
        out.push_back(std::move(p));
    }
    return out;
}

// ---- burst oracle ---------------------------------------------------------

struct OracleSpan {
    std::size_t start, end;
    std::int64_t peak;
    bool operator==(const OracleSpan&) const = default;
};

// Evaluates the rule at every index with a two-pass deviation sum:
// c > mu + k*sigma  <=>  W*(W*c - S)^2 > k^2 * sum_i (W*c_i - S)^2 with W*c > S.
// Values stay exactly representable for counts <= 100, W <= 200 and k in
// dyadic steps.
inline bool oracle_bursting(const std::vector<std::int64_t>& s, std::size_t t, std::int64_t W, double k,
    std::int64_t min_count) {
    if (s[t] < min_count) {
        return false;
    }
    std::int64_t sum = 0;
    for (std::size_t i = t - static_cast<std::size_t>(W); i < t; ++i) {
        sum += s[i];
    }
    double dev2 = 0;
    for (std::size_t i = t - static_cast<std::size_t>(W); i < t; ++i) {
        double d = static_cast<double>(W * s[i] - sum);
        dev2 += d * d;
    }
    const double lead = static_cast<double>(W * s[t] - sum);
    if (dev2 == 0.0) {
        // flat window: mu = sum / W exactly
        return W * s[t] >= sum + min_count * W;
    }
    return lead > 0 && static_cast<double>(W) * lead * lead > k * k * dev2;
}

inline std::vector<OracleSpan> oracle_events(const std::vector<std::int64_t>& s, std::int64_t W, double k,
    std::int64_t min_count) {
    std::vector<OracleSpan> out;
    std::optional<OracleSpan> cur;
    for (std::size_t t = static_cast<std::size_t>(W); t < s.size(); ++t) {
        if (oracle_bursting(s, t, W, k, min_count)) {
            if (cur) {
                cur->end = t;
                cur->peak = std::max(cur->peak, s[t]);
            } else {
                cur = OracleSpan{t, t, s[t]};
            }
        } else if (cur) {
            out.push_back(*cur);
            cur.reset();
        }
    }
    if (cur) {
        out.push_back(*cur);
    }
    return out;
}

} // namespace qtest
