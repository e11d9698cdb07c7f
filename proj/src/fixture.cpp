#include "qcity/fixture.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>

#include "qcity/error.hpp"
#include "qcity/model.hpp"
#include "qcity/spatial.hpp"

namespace qcity {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Distribution helpers over a fixed engine; kept explicit so output does not
// depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : m_engine(seed) {}

    double uniform() { return static_cast<double>(m_engine() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::int64_t below(std::int64_t n) { return std::min<std::int64_t>(n - 1, static_cast<std::int64_t>(uniform() * static_cast<double>(n))); }
    bool chance(double p) { return uniform() < p; }

    template <class C>
    const auto& pick(const C& items) {
        return items[static_cast<std::size_t>(below(static_cast<std::int64_t>(std::size(items))))];
    }

private:
    std::mt19937_64 m_engine;
};

double round6(double x) {
    return std::round(x * 1e6) / 1e6;
}

struct Pending {
    Observation obs;
    std::string prefix; // id prefix; ids are assigned after sorting by time
};

void write_jsonl(const fs::path& path, std::vector<Pending>& items) {
    std::stable_sort(items.begin(), items.end(), [](const Pending& a, const Pending& b) { return a.obs.ts < b.obs.ts; });
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    std::size_t n = 0;
    for (auto& p : items) {
        char id[32];
        std::snprintf(id, sizeof id, "%s-%07zu", p.prefix.c_str(), ++n);
        p.obs.id = id;
        out << to_json(p.obs).dump() << '\n';
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    out << text;
}

Observation sensor_obs(std::string kind, Timestamp ts, double lat, double lon, double value, std::string unit) {
    Observation o;
    o.source = Source::sensor;
    o.kind = std::move(kind);
    o.ts = ts;
    o.lat = round6(lat);
    o.lon = round6(lon);
    o.payload = SensorPayload{value, std::move(unit)};
    return o;
}

Observation social_obs(Timestamp ts, double lat, double lon, std::string text, std::string user,
    std::vector<std::string> tags) {
    Observation o;
    o.source = Source::social;
    o.kind = "post";
    o.ts = ts;
    o.lat = round6(lat);
    o.lon = round6(lon);
    o.payload = SocialPayload{std::move(text), std::move(user), std::move(tags)};
    return o;
}

const std::array<const char*, 8> kPositive{"amazing", "great", "love", "brilliant", "happy", "fantastic", "enjoyed", "superb"};
const std::array<const char*, 8> kNegative{"jammed", "terrible", "awful", "slow", "angry", "chaos", "annoying", "delayed"};
const std::array<const char*, 18> kNeutral{"coffee", "morning", "heading", "to", "work", "metro", "weather", "today",
    "lunch", "with", "friends", "shopping", "evening", "walk", "family", "weekend", "meeting", "city"};
const std::array<const char*, 6> kMatchWords{"final", "match", "set", "crowd", "serve", "court"};
const std::array<const char*, 3> kPlaces{"corniche", "souq waqif", "west bay"};

std::string lexicon_tsv() {
    std::string out = "# fixture polarity lexicon\n";
    for (const char* w : kPositive) {
        out += std::string(w) + "\t+1\n";
    }
    for (const char* w : kNegative) {
        out += std::string(w) + "\t-1\n";
    }
    return out;
}

std::string gazetteer_tsv() {
    return "qatar exxonmobil open\tE_QATAR_EXXONMOBIL_OPEN\tevent\n"
           "exxonmobil open\tE_QATAR_EXXONMOBIL_OPEN\tevent\n"
           "qatar total open\tE_QATAR_TOTAL_OPEN\tevent\n"
           "total open\tE_QATAR_TOTAL_OPEN\tevent\n"
           "khalifa tennis complex\tE_KHALIFA_TENNIS_COMPLEX\tplace\n"
           "corniche\tE_CORNICHE\tplace\n"
           "souq waqif\tE_SOUQ_WAQIF\tplace\n"
           "west bay\tE_WEST_BAY\tplace\n";
}

// Appends one sentiment word; returns its polarity.
int add_sentiment(Rng& rng, std::vector<std::string>& words, double p_positive) {
    if (rng.chance(p_positive)) {
        words.emplace_back(rng.pick(kPositive));
        return 1;
    }
    words.emplace_back(rng.pick(kNegative));
    return -1;
}

struct BackgroundPost {
    std::string text;
    double score;
};

BackgroundPost background_text(Rng& rng) {
    std::vector<std::string> words;
    const auto n = 3 + rng.below(4);
    for (std::int64_t i = 0; i < n; ++i) {
        words.emplace_back(rng.pick(kNeutral));
    }
    if (rng.chance(0.1)) {
        words.emplace_back(rng.pick(kPlaces));
    }
    double score = 0.0;
    if (rng.chance(0.4)) {
        score = add_sentiment(rng, words, 0.5);
    }
    std::string text;
    for (const auto& w : words) {
        text += (text.empty() ? "" : " ") + w;
    }
    return {text, score};
}

struct Tournament {
    const char* entity_id;
    const char* name;
    const char* other_name;
    const char* start; // first burst bucket start
    double p_positive;
};

FixtureOutput write_tournament(const fs::path& dir, std::uint64_t seed) {
    Rng rng(seed);
    const Granularity g(300);
    const double lat0 = 25.25, lon0 = 51.45, step = 0.05;
    const std::array<const char*, 9> names{"al_wakra", "al_thumama", "nuaija", "al_rayyan", "tennis_complex",
        "msheireb", "al_gharrafa", "lusail", "west_bay"};
    const int venue = 4;

    json features = json::array();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            double la0 = lat0 + r * step, la1 = lat0 + (r + 1) * step;
            double lo0 = lon0 + c * step, lo1 = lon0 + (c + 1) * step;
            const char* name = names[static_cast<std::size_t>(r * 3 + c)];
            features.push_back(json{
                {"type", "Feature"},
                {"properties", {{"zone_id", std::string("z_") + name}, {"name", name}}},
                {"geometry",
                    {{"type", "Polygon"},
                        {"coordinates", json::array({json::array({json::array({lo0, la0}), json::array({lo1, la0}),
                                            json::array({lo1, la1}), json::array({lo0, la1}), json::array({lo0, la0})})})}}},
            });
        }
    }
    auto zone_point = [&](int z) {
        int r = z / 3, c = z % 3;
        return LatLon{lat0 + (r + rng.uniform(0.1, 0.9)) * step, lon0 + (c + rng.uniform(0.1, 0.9)) * step};
    };

    const Timestamp begin = parse_rfc3339("2016-01-01T00:00:00Z");
    const Timestamp end = parse_rfc3339("2016-01-31T00:00:00Z");
    const std::int64_t first_bucket = time_bucket(begin, g);
    const std::int64_t last_bucket = time_bucket(end, g) - 1;

    const std::array<Tournament, 2> tournaments{{
        {"E_QATAR_EXXONMOBIL_OPEN", "qatar exxonmobil open", "qatar total open", "2016-01-09T15:00:00Z", 0.75},
        {"E_QATAR_TOTAL_OPEN", "qatar total open", "qatar exxonmobil open", "2016-01-27T15:00:00Z", 0.35},
    }};
    const std::array<std::int64_t, 3> burst_posts{14, 32, 70};

    std::vector<std::int64_t> burst_start;
    for (const auto& t : tournaments) {
        burst_start.push_back(time_bucket(parse_rfc3339(t.start), g));
    }
    auto in_traffic_window = [&](std::int64_t b) {
        for (auto s : burst_start) {
            if (b >= s && b <= s + 5) {
                return true;
            }
        }
        return false;
    };

    std::vector<Pending> sensors;
    std::vector<Pending> social;
    // Planted per-post scores of venue posts inside each truth span.
    std::vector<std::pair<double, std::size_t>> planted(tournaments.size(), {0.0, 0});
    auto span_of = [&](std::int64_t b) -> int {
        for (std::size_t i = 0; i < burst_start.size(); ++i) {
            if (b >= burst_start[i] && b < burst_start[i] + static_cast<std::int64_t>(burst_posts.size())) {
                return static_cast<int>(i);
            }
        }
        return -1;
    };

    std::array<LatLon, 9> traffic_sites{};
    std::array<double, 9> traffic_base{};
    for (int z = 0; z < 9; ++z) {
        traffic_sites[static_cast<std::size_t>(z)] = zone_point(z);
        traffic_base[static_cast<std::size_t>(z)] = 30.0 + 5.0 * z;
    }
    const std::array<int, 3> air_zones{0, venue, 8};

    for (std::int64_t b = first_bucket; b <= last_bucket; ++b) {
        const Timestamp t0 = bucket_start(b, g);
        for (int z = 0; z < 9; ++z) {
            const auto zi = static_cast<std::size_t>(z);
            double value = std::round(traffic_base[zi] + rng.uniform(-4.0, 4.0));
            if (z == venue && in_traffic_window(b)) {
                value += 80.0;
            }
            sensors.push_back({sensor_obs("traffic_count", t0 + std::chrono::seconds(60), traffic_sites[zi].lat,
                                   traffic_sites[zi].lon, value, "veh"),
                "sen"});
            if (std::find(air_zones.begin(), air_zones.end(), z) != air_zones.end()) {
                double aqi = std::round(rng.uniform(40.0, 60.0));
                sensors.push_back({sensor_obs("air_quality", t0 + std::chrono::seconds(150), traffic_sites[zi].lat,
                                       traffic_sites[zi].lon + 0.001, aqi, "aqi"),
                    "sen"});
            }
            if (rng.chance(0.25)) {
                auto p = zone_point(z);
                auto post = background_text(rng);
                auto ts = t0 + std::chrono::seconds(rng.below(300));
                social.push_back({social_obs(ts, p.lat, p.lon, post.text, "u" + std::to_string(rng.below(5000)), {}), "soc"});
                if (z == venue) {
                    if (int s = span_of(b); s >= 0) {
                        planted[static_cast<std::size_t>(s)].first += post.score;
                        ++planted[static_cast<std::size_t>(s)].second;
                    }
                }
            }
        }
    }

    for (std::size_t ti = 0; ti < tournaments.size(); ++ti) {
        const auto& t = tournaments[ti];
        for (std::size_t k = 0; k < burst_posts.size(); ++k) {
            const std::int64_t b = burst_start[ti] + static_cast<std::int64_t>(k);
            const Timestamp t0 = bucket_start(b, g);
            for (std::int64_t i = 0; i < burst_posts[k]; ++i) {
                std::vector<std::string> words;
                words.emplace_back(rng.chance(0.5) ? "at" : "watching");
                if (rng.chance(0.85)) {
                    words.emplace_back("the tennis tournament");
                }
                if (rng.chance(0.65)) {
                    words.emplace_back(t.name);
                }
                if (rng.chance(0.05)) {
                    words.emplace_back(std::string("can't wait for ") + t.other_name);
                }
                if (rng.chance(0.3)) {
                    words.emplace_back("khalifa tennis complex");
                }
                words.emplace_back(rng.pick(kMatchWords));
                const int polarity = add_sentiment(rng, words, t.p_positive);
                words.emplace_back("#tennis");
                std::string text;
                for (const auto& w : words) {
                    text += (text.empty() ? "" : " ") + w;
                }
                text += rng.chance(0.3) ? "!!" : "";
                auto p = zone_point(venue);
                auto ts = t0 + std::chrono::seconds(rng.below(300));
                social.push_back({social_obs(ts, p.lat, p.lon, text, "fan" + std::to_string(rng.below(2000)), {"tennis"}),
                    "soc"});
                planted[ti].first += polarity;
                ++planted[ti].second;
            }
        }
    }

    fs::create_directories(dir);
    FixtureOutput out;
    out.zones = dir / "zones.geojson";
    write_text(out.zones, json{{"type", "FeatureCollection"}, {"features", features}}.dump(2) + "\n");
    out.inputs = {dir / "sensors.jsonl", dir / "social.jsonl"};
    write_jsonl(out.inputs[0], sensors);
    write_jsonl(out.inputs[1], social);
    out.observations = sensors.size() + social.size();
    out.lexicon = dir / "lexicon.tsv";
    write_text(out.lexicon, lexicon_tsv());
    out.gazetteer = dir / "gazetteer.tsv";
    write_text(out.gazetteer, gazetteer_tsv());

    json events = json::array();
    for (std::size_t ti = 0; ti < tournaments.size(); ++ti) {
        const std::int64_t s = burst_start[ti];
        const std::int64_t e = s + static_cast<std::int64_t>(burst_posts.size()) - 1;
        events.push_back(json{
            {"label", tournaments[ti].entity_id},
            {"zone_id", std::string("z_") + names[venue]},
            {"start_bucket", s},
            {"end_bucket", e},
            {"from", format_rfc3339(bucket_start(s, g))},
            {"to", format_rfc3339(bucket_start(e + 1, g))},
            {"posts", planted[ti].second},
            {"sentiment_mean", planted[ti].first / static_cast<double>(planted[ti].second)},
        });
    }
    out.ground_truth = dir / "ground_truth.json";
    write_text(out.ground_truth, json{
        {"scenario", "tournament"},
        {"seed", seed},
        {"granularity_s", g.seconds()},
        {"from", format_rfc3339(begin)},
        {"to", format_rfc3339(end)},
        {"events", events},
    }.dump(2) + "\n");
    return out;
}

FixtureOutput write_steady(const fs::path& dir, std::uint64_t seed) {
    Rng rng(seed);
    GridSpec grid{25.28, 51.50, 25.32, 51.54, 0.01};
    const Timestamp begin = parse_rfc3339("2016-01-04T08:00:00Z");
    const std::int64_t hour_s = 3600;

    std::vector<Pending> sensors;
    for (int s = 0; s < 8; ++s) {
        double lat = rng.uniform(grid.min_lat, grid.max_lat);
        double lon = rng.uniform(grid.min_lon, grid.max_lon);
        double base = rng.uniform(20.0, 60.0);
        for (std::int64_t t = 0; t < hour_s; t += 30) {
            sensors.push_back({sensor_obs("traffic_count", begin + std::chrono::seconds(t + s), lat, lon,
                                   std::round(base + rng.uniform(-5.0, 5.0)), "veh"),
                "sen"});
        }
    }
    std::vector<Pending> social;
    for (int i = 0; i < 600; ++i) {
        // About 5% land just outside the grid and are discarded on ingest.
        bool outside = rng.chance(0.05);
        double lat = outside ? grid.max_lat + rng.uniform(0.001, 0.01) : rng.uniform(grid.min_lat, grid.max_lat);
        double lon = rng.uniform(grid.min_lon, grid.max_lon);
        auto post = background_text(rng);
        auto ts = begin + std::chrono::milliseconds(rng.below(hour_s * 1000));
        social.push_back({social_obs(ts, lat, lon, post.text, "u" + std::to_string(rng.below(500)), {}), "soc"});
    }

    fs::create_directories(dir);
    FixtureOutput out;
    out.zones = dir / "grid.json";
    write_text(out.zones, to_json(grid).dump(2) + "\n");
    out.inputs = {dir / "sensors.jsonl", dir / "social.jsonl"};
    write_jsonl(out.inputs[0], sensors);
    write_jsonl(out.inputs[1], social);
    out.observations = sensors.size() + social.size();
    out.lexicon = dir / "lexicon.tsv";
    write_text(out.lexicon, lexicon_tsv());
    out.gazetteer = dir / "gazetteer.tsv";
    write_text(out.gazetteer, gazetteer_tsv());
    out.ground_truth = dir / "ground_truth.json";
    write_text(out.ground_truth, json{
        {"scenario", "steady"},
        {"seed", seed},
        {"from", format_rfc3339(begin)},
        {"to", format_rfc3339(begin + std::chrono::seconds(hour_s))},
        {"events", json::array()},
    }.dump(2) + "\n");
    return out;
}

} // namespace

FixtureOutput write_fixture(std::string_view scenario, const fs::path& out_dir, std::uint64_t seed) {
    if (scenario == "tournament") {
        return write_tournament(out_dir, seed);
    }
    if (scenario == "steady") {
        return write_steady(out_dir, seed);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown fixture scenario '" + std::string(scenario) + "'");
}

} // namespace qcity
