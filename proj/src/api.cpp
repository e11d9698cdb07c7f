#include "qcity/api.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "qcity/error.hpp"
#include "qcity/graph.hpp"

namespace qcity {

using nlohmann::json;

ApiResponse error_response(int status, std::string_view error, std::string_view detail) {
    return ApiResponse{status, json{{"error", error}, {"detail", detail}}.dump()};
}

namespace {

// Thrown inside handlers and turned into an error body by the router.
struct HttpError {
    int status;
    std::string error;
    std::string detail;
};

[[noreturn]] void bad_request(const std::string& detail) {
    throw HttpError{400, "bad_request", detail};
}

const std::string& require_param(const QueryParams& q, const std::string& name) {
    auto it = q.find(name);
    if (it == q.end() || it->second.empty()) {
        bad_request("missing query parameter '" + name + "'");
    }
    return it->second;
}

Timestamp parse_instant(const QueryParams& q, const std::string& name) {
    try {
        return parse_rfc3339(require_param(q, name));
    } catch (const Error& e) {
        bad_request(name + ": " + e.detail());
    }
}

Granularity parse_granularity(const QueryParams& q, const StoreState& s) {
    const std::string& text = require_param(q, "granularity");
    std::int64_t g = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), g);
    if (ec != std::errc() || ptr != text.data() + text.size() || g <= 0) {
        bad_request("granularity must be a positive integer number of seconds");
    }
    if (!s.has_granularity(g)) {
        bad_request("granularity " + text + " is not configured for this store");
    }
    return Granularity(g);
}

struct TimeFilter {
    Timestamp from;
    Timestamp to;
    Granularity g;
    // Buckets intersecting [from, to), clipped to the closed horizon. May be
    // empty (end < start).
    BucketRange buckets;
};

// What a handler sees: the state plus the store's lateness allowance.
struct ReadView {
    const StoreState& s;
    std::optional<std::int64_t> lateness;

    std::optional<std::int64_t> horizon(Granularity g) const { return s.closed_horizon(g, lateness); }
};

TimeFilter parse_time_filter(const QueryParams& q, const ReadView& v) {
    const StoreState& s = v.s;
    Timestamp from = parse_instant(q, "from");
    Timestamp to = parse_instant(q, "to");
    if (!(from < to)) {
        bad_request("from must be earlier than to");
    }
    if (to_unix_micros(from) < 0) {
        bad_request("from precedes the bucket timeline origin (Unix epoch)");
    }
    Granularity g = parse_granularity(q, s);
    BucketRange range{time_bucket(from, g), time_bucket(to - std::chrono::microseconds(1), g)};
    auto horizon = v.horizon(g);
    range.end = horizon ? std::min(range.end, *horizon) : range.start - 1;
    return TimeFilter{from, to, g, range};
}

void enforce_cap(std::size_t records, std::size_t cap) {
    if (records > cap) {
        throw HttpError{413, "too_large",
            "response would hold " + std::to_string(records) + " records; limit is " + std::to_string(cap)};
    }
}

json nullable(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

struct ZoneAggregate {
    std::int64_t count = 0;
    double sentiment_total = 0.0;
    std::int64_t posts = 0;

    std::optional<double> sentiment() const {
        if (posts == 0) {
            return std::nullopt;
        }
        return sentiment_total / static_cast<double>(posts);
    }
};

void accumulate(ZoneAggregate& agg, const Block& block, const StoreState& s, const Lexicon& lex) {
    agg.count += static_cast<std::int64_t>(block.size());
    for (const auto& text : block_social_texts(s, block)) {
        agg.sentiment_total += sentiment_score(text, lex);
        ++agg.posts;
    }
}

json event_summary(const Event& e) {
    Granularity g(e.granularity_s);
    return json{
        {"event_id", e.event_id},
        {"zone_id", e.zone_id},
        {"label", e.label ? json(*e.label) : json(nullptr)},
        {"granularity_s", e.granularity_s},
        {"start_bucket", e.bucket_range.start},
        {"end_bucket", e.bucket_range.end},
        {"from", format_rfc3339(bucket_start(e.bucket_range.start, g))},
        {"to", format_rfc3339(bucket_start(e.bucket_range.end + 1, g))},
        {"peak_count", e.peak_count},
    };
}

bool event_visible(const Event& e, const ReadView& v) {
    auto horizon = v.horizon(Granularity(e.granularity_s));
    return horizon && e.bucket_range.end <= *horizon;
}

} // namespace

QueryService::QueryService(ServiceConfig config) : m_config(std::move(config)) {}

void QueryService::attach(std::shared_ptr<const BlockStore> store) {
    std::lock_guard lock(m_mutex);
    m_store = std::move(store);
}

std::shared_ptr<const BlockStore> QueryService::store() const {
    std::lock_guard lock(m_mutex);
    return m_store;
}

namespace {

template <class F>
ApiResponse with_store(const std::shared_ptr<const BlockStore>& store, F&& f) {
    if (!store) {
        return error_response(503, "unavailable", "no store loaded");
    }
    try {
        const auto lateness = store->options().lateness_buckets;
        return store->read([&](const StoreState& s) { return ApiResponse{200, f(ReadView{s, lateness}).dump()}; });
    } catch (const HttpError& e) {
        return error_response(e.status, e.error, e.detail);
    } catch (const Error& e) {
        return error_response(400, to_string(e.code()), e.detail());
    }
}

} // namespace

ApiResponse QueryService::zones() const {
    return with_store(store(), [&](const ReadView& v) {
        const StoreState& s = v.s;
        enforce_cap(s.partition->zones().size(), m_config.record_cap);
        return s.partition->to_geojson();
    });
}

ApiResponse QueryService::density(const QueryParams& q) const {
    return with_store(store(), [&](const ReadView& v) {
        const StoreState& s = v.s;
        TimeFilter f = parse_time_filter(q, v);
        const auto& zones = s.partition->zones();
        enforce_cap(zones.size(), m_config.record_cap);
        const auto& level = s.blocks_at(f.g.seconds());
        json rows = json::array();
        std::int64_t total = 0;
        for (const auto& z : zones) {
            ZoneAggregate agg;
            if (f.buckets.end >= f.buckets.start) {
                auto it = level.lower_bound(SpatioTemporalKey{z.zone_id, f.buckets.start, f.g.seconds()});
                for (; it != level.end() && it->first.zone_id == z.zone_id && it->first.bucket_index <= f.buckets.end;
                     ++it) {
                    accumulate(agg, it->second, s, m_config.lexicon);
                }
            }
            total += agg.count;
            rows.push_back(json{{"zone_id", z.zone_id}, {"count", agg.count}, {"sentiment_mean", nullable(agg.sentiment())}});
        }
        return json{
            {"from", format_rfc3339(f.from)},
            {"to", format_rfc3339(f.to)},
            {"granularity_s", f.g.seconds()},
            {"total", total},
            {"zones", std::move(rows)},
        };
    });
}

ApiResponse QueryService::timeline(const QueryParams& q) const {
    return with_store(store(), [&](const ReadView& v) {
        const StoreState& s = v.s;
        TimeFilter f = parse_time_filter(q, v);
        const std::string& zone = require_param(q, "zone");
        if (!s.partition->has_zone(zone)) {
            throw HttpError{404, "not_found", "unknown zone '" + zone + "'"};
        }
        json series = json::array();
        if (f.buckets.end >= f.buckets.start) {
            enforce_cap(static_cast<std::size_t>(f.buckets.length()), m_config.record_cap);
            std::int64_t previous = 0;
            for (const auto& point : zone_count_series(zone, f.g, f.buckets, s)) {
                ZoneAggregate agg;
                if (const Block* b = s.find_block(SpatioTemporalKey{zone, point.bucket, f.g.seconds()})) {
                    accumulate(agg, *b, s, m_config.lexicon);
                }
                series.push_back(json{
                    {"bucket", point.bucket},
                    {"start", format_rfc3339(bucket_start(point.bucket, f.g))},
                    {"count", point.count},
                    {"delta", point.count - previous},
                    {"sentiment_mean", nullable(agg.sentiment())},
                });
                previous = point.count;
            }
        }
        return json{
            {"zone_id", zone},
            {"from", format_rfc3339(f.from)},
            {"to", format_rfc3339(f.to)},
            {"granularity_s", f.g.seconds()},
            {"series", std::move(series)},
        };
    });
}

ApiResponse QueryService::events(const QueryParams& q) const {
    return with_store(store(), [&](const ReadView& v) {
        const StoreState& s = v.s;
        Timestamp from = parse_instant(q, "from");
        Timestamp to = parse_instant(q, "to");
        if (!(from < to)) {
            bad_request("from must be earlier than to");
        }
        std::optional<std::string> zone;
        if (auto it = q.find("zone"); it != q.end() && !it->second.empty()) {
            zone = it->second;
            if (!s.partition->has_zone(*zone)) {
                throw HttpError{404, "not_found", "unknown zone '" + *zone + "'"};
            }
        }
        json list = json::array();
        for (const auto& e : s.events) {
            if (zone && e.zone_id != *zone) {
                continue;
            }
            if (!event_visible(e, v)) {
                continue;
            }
            Granularity g(e.granularity_s);
            Timestamp e_from = bucket_start(e.bucket_range.start, g);
            Timestamp e_to = bucket_start(e.bucket_range.end + 1, g);
            if (e_to <= from || e_from >= to) {
                continue;
            }
            list.push_back(event_summary(e));
        }
        enforce_cap(list.size(), m_config.record_cap);
        return json{{"from", format_rfc3339(from)}, {"to", format_rfc3339(to)}, {"events", std::move(list)}};
    });
}

ApiResponse QueryService::event_detail(std::string_view event_id) const {
    return with_store(store(), [&](const ReadView& v) {
        const StoreState& s = v.s;
        auto it = std::find_if(s.events.begin(), s.events.end(), [&](const Event& e) { return e.event_id == event_id; });
        if (it == s.events.end() || !event_visible(*it, v)) {
            throw HttpError{404, "not_found", "unknown event '" + std::string(event_id) + "'"};
        }
        const Event& e = *it;
        std::size_t records = 0;
        for (const auto& key : e.block_keys) {
            if (const Block* b = s.find_block(key)) {
                records += b->size();
            }
        }
        enforce_cap(records, m_config.record_cap);

        json blocks = json::array();
        std::vector<Document> target;
        std::map<std::string, std::pair<std::string, std::int64_t>> entity_counts;
        struct SensorAgg {
            std::int64_t count = 0;
            double sum = 0.0, min = 0.0, max = 0.0;
        };
        std::map<std::string, SensorAgg> sensors;
        std::int64_t sensor_total = 0;
        std::int64_t social_total = 0;
        for (const auto& key : e.block_keys) {
            const Block* b = s.find_block(key);
            if (!b) {
                continue;
            }
            CrossModalView view = cross_modal_view(key, s);
            json sensor_list = json::array();
            for (const auto& o : view.sensor) {
                sensor_list.push_back(to_json(o));
                auto& agg = sensors[o.kind];
                double v = o.sensor()->value;
                if (agg.count == 0) {
                    agg.min = agg.max = v;
                }
                ++agg.count;
                agg.sum += v;
                agg.min = std::min(agg.min, v);
                agg.max = std::max(agg.max, v);
            }
            json social_list = json::array();
            for (const auto& o : view.social) {
                social_list.push_back(to_json(o));
                for (auto& m : extract_entities(o.social()->text, m_config.gazetteer)) {
                    auto& slot = entity_counts[m.entity_id];
                    slot.first = m.type;
                    ++slot.second;
                }
            }
            sensor_total += static_cast<std::int64_t>(view.sensor.size());
            social_total += static_cast<std::int64_t>(view.social.size());
            target.push_back(block_document(s, *b));
            blocks.push_back(json{{"key", to_json(key)}, {"sensor", std::move(sensor_list)}, {"social", std::move(social_list)}});
        }

        json terms = json::array();
        std::vector<Document> corpus;
        // City-wide blocks up to the event's end: all closed, so the ranking
        // does not drift while newer data arrives.
        for (const auto& [key, block] : s.blocks_at(e.granularity_s)) {
            if (!block.social_obs.empty() && key.bucket_index <= e.bucket_range.end) {
                corpus.push_back(block_document(s, block));
            }
        }
        if (!corpus.empty()) {
            for (const auto& t : top_terms(target, corpus, m_config.top_terms)) {
                terms.push_back(json{{"term", t.term}, {"score", t.score}});
            }
        }

        std::vector<std::pair<std::string, std::pair<std::string, std::int64_t>>> ranked(
            entity_counts.begin(), entity_counts.end());
        std::stable_sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.second.second > b.second.second; });
        json entities = json::array();
        for (const auto& [id, tc] : ranked) {
            entities.push_back(json{{"entity_id", id}, {"type", tc.first}, {"count", tc.second}});
        }

        json sensor_aggregates = json::object();
        for (const auto& [kind, agg] : sensors) {
            sensor_aggregates[kind] = json{{"count", agg.count}, {"mean", agg.sum / static_cast<double>(agg.count)},
                {"min", agg.min}, {"max", agg.max}};
        }

        // Communities among the event's co-occurring entities and top terms.
        std::set<std::string> term_set;
        for (const auto& t : terms) {
            term_set.insert(t.at("term").get<std::string>());
        }
        std::vector<std::vector<std::string>> block_texts;
        for (const auto& key : e.block_keys) {
            if (const Block* b = s.find_block(key)) {
                block_texts.push_back(block_social_texts(s, *b));
            }
        }
        json communities = json::array();
        if (!block_texts.empty()) {
            for (auto& c : detect_communities(build_cooccurrence(block_texts, m_config.gazetteer, term_set))) {
                communities.push_back(std::move(c));
            }
        }

        json detail = event_summary(e);
        detail["top_terms"] = std::move(terms);
        detail["entities"] = std::move(entities);
        detail["communities"] = std::move(communities);
        detail["sentiment_mean"] = nullable(mean_sentiment(s, e.block_keys, m_config.lexicon));
        detail["sensor_aggregates"] = std::move(sensor_aggregates);
        detail["sensor_count"] = sensor_total;
        detail["social_count"] = social_total;
        detail["blocks"] = std::move(blocks);
        return detail;
    });
}

ApiResponse QueryService::traffic(const QueryParams& q) const {
    return with_store(store(), [&](const ReadView& v) {
        const StoreState& s = v.s;
        Timestamp at = parse_instant(q, "at");
        if (to_unix_micros(at) < 0) {
            bad_request("at precedes the bucket timeline origin (Unix epoch)");
        }
        Granularity g = parse_granularity(q, s);
        const std::int64_t bucket = time_bucket(at, g);
        auto horizon = v.horizon(g);
        const bool closed = horizon && bucket <= *horizon;
        enforce_cap(s.partition->zones().size(), m_config.record_cap);
        json rows = json::array();
        for (const auto& z : s.partition->zones()) {
            std::string status = "unknown";
            if (closed) {
                try {
                    status = std::string(to_string(traffic_status(z.zone_id, bucket, g, s, m_config.burst.window,
                        m_config.burst.min_count)));
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::InsufficientHistory) {
                        throw;
                    }
                }
            }
            rows.push_back(json{{"zone_id", z.zone_id}, {"status", status}});
        }
        return json{{"at", format_rfc3339(at)}, {"bucket", bucket}, {"granularity_s", g.seconds()}, {"zones", std::move(rows)}};
    });
}

ApiResponse QueryService::handle(std::string_view path, const QueryParams& q) const {
    if (path == "/zones") {
        return zones();
    }
    if (path == "/density") {
        return density(q);
    }
    if (path == "/timeline") {
        return timeline(q);
    }
    if (path == "/events") {
        return events(q);
    }
    if (path.rfind("/events/", 0) == 0 && path.size() > 8) {
        return event_detail(path.substr(8));
    }
    if (path == "/traffic") {
        return traffic(q);
    }
    return error_response(404, "not_found", "no route for " + std::string(path));
}

} // namespace qcity
