#include "qcity/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "qcity/error.hpp"

namespace qcity {

void BurstParams::validate() const {
    if (window < 2) {
        throw Error(ErrorCode::InvalidArgument, "burst window must be >= 2");
    }
    if (!(k >= 0.0) || !std::isfinite(k)) {
        throw Error(ErrorCode::InvalidArgument, "burst k must be >= 0");
    }
    if (min_count < 1) {
        throw Error(ErrorCode::InvalidArgument, "burst min_count must be >= 1");
    }
}

BurstParams parse_burst_params(std::string_view text) {
    std::string s(text);
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    long long window = 0;
    double k = 0;
    long long min_count = 0;
    std::string rest;
    if (!(in >> window >> k >> min_count) || (in >> rest) || window < 0) {
        throw Error(ErrorCode::InvalidArgument, "expected burst params 'W,k,min', got '" + std::string(text) + "'");
    }
    BurstParams p{static_cast<std::size_t>(window), k, min_count};
    p.validate();
    return p;
}

std::vector<BurstSpan> detect_events(std::span<const std::int64_t> series, const BurstParams& params) {
    params.validate();
    const std::size_t w = params.window;
    if (series.size() <= w) {
        throw Error(ErrorCode::SeriesTooShort,
            "series of length " + std::to_string(series.size()) + " needs more than " + std::to_string(w) + " buckets");
    }
    const auto wi = static_cast<std::int64_t>(w);
    const double k2 = params.k * params.k;

    // Integer window sums keep the comparison exact: with S = sum, Q = sum of
    // squares, W^2 * var = W*Q - S^2 and W * (c - mean) = W*c - S.
    std::int64_t sum = 0;
    std::int64_t sum_sq = 0;
    for (std::size_t i = 0; i < w; ++i) {
        sum += series[i];
        sum_sq += series[i] * series[i];
    }

    std::vector<BurstSpan> spans;
    std::optional<BurstSpan> open;
    for (std::size_t t = w; t < series.size(); ++t) {
        const std::int64_t c = series[t];
        bool burst = false;
        if (c >= params.min_count) {
            const std::int64_t var_scaled = wi * sum_sq - sum * sum;
            const std::int64_t dev_scaled = wi * c - sum;
            if (var_scaled == 0) {
                burst = dev_scaled >= params.min_count * wi;
            } else {
                burst = dev_scaled > 0 &&
                        static_cast<double>(dev_scaled) * static_cast<double>(dev_scaled) >
                            k2 * static_cast<double>(var_scaled);
            }
        }
        if (burst) {
            if (open) {
                open->end = t;
                open->peak_count = std::max(open->peak_count, c);
            } else {
                open = BurstSpan{t, t, c};
            }
        } else if (open) {
            spans.push_back(*open);
            open.reset();
        }
        sum += c - series[t - w];
        sum_sq += c * c - series[t - w] * series[t - w];
    }
    if (open) {
        spans.push_back(*open);
    }
    return spans;
}

std::vector<SeriesPoint> zone_count_series(std::string_view zone_id, Granularity g, BucketRange range,
    const StoreState& state) {
    if (!state.partition || !state.partition->has_zone(zone_id)) {
        throw Error(ErrorCode::UnknownZone, std::string(zone_id));
    }
    std::vector<SeriesPoint> out;
    if (range.end < range.start) {
        return out;
    }
    out.reserve(static_cast<std::size_t>(range.length()));
    for (std::int64_t b = range.start; b <= range.end; ++b) {
        out.push_back(SeriesPoint{b, 0});
    }
    const auto& level = state.blocks_at(g.seconds());
    const std::string zone(zone_id);
    auto it = level.lower_bound(SpatioTemporalKey{zone, range.start, g.seconds()});
    for (; it != level.end() && it->first.zone_id == zone && it->first.bucket_index <= range.end; ++it) {
        out[static_cast<std::size_t>(it->first.bucket_index - range.start)].count +=
            static_cast<std::int64_t>(it->second.size());
    }
    return out;
}

std::vector<Event> detect_zone_events(std::string_view zone_id, Granularity g, BucketRange range,
    const StoreState& state, const BurstParams& params) {
    auto series = zone_count_series(zone_id, g, range, state);
    std::vector<std::int64_t> counts;
    counts.reserve(series.size());
    for (const auto& p : series) {
        counts.push_back(p.count);
    }
    std::vector<Event> events;
    for (const auto& span : detect_events(counts, params)) {
        Event e;
        e.zone_id = std::string(zone_id);
        e.granularity_s = g.seconds();
        e.bucket_range = BucketRange{series[span.start].bucket, series[span.end].bucket};
        e.peak_count = span.peak_count;
        e.event_id = "ev_" + e.zone_id + "_" + std::to_string(g.seconds()) + "_" + std::to_string(e.bucket_range.start);
        for (std::int64_t b = e.bucket_range.start; b <= e.bucket_range.end; ++b) {
            SpatioTemporalKey key{e.zone_id, b, g.seconds()};
            if (state.find_block(key)) {
                e.block_keys.push_back(std::move(key));
            }
        }
        events.push_back(std::move(e));
    }
    return events;
}

std::vector<Event> detect_city_events(const StoreState& state, Granularity g, BucketRange range,
    const BurstParams& params, const Gazetteer& gaz) {
    std::vector<Event> out;
    for (const auto& zone : state.partition->zones()) {
        for (auto& e : detect_zone_events(zone.zone_id, g, range, state, params)) {
            out.push_back(label_event(std::move(e), state, gaz));
        }
    }
    std::sort(out.begin(), out.end(), [](const Event& a, const Event& b) { return a.event_id < b.event_id; });
    return out;
}

std::vector<Event> merge_events(std::vector<Event> existing, std::vector<Event> fresh, Granularity g,
    BucketRange range) {
    std::erase_if(existing, [&](const Event& e) {
        return e.granularity_s == g.seconds() && e.bucket_range.start <= range.end && e.bucket_range.end >= range.start;
    });
    for (auto& e : fresh) {
        existing.push_back(std::move(e));
    }
    std::sort(existing.begin(), existing.end(), [](const Event& a, const Event& b) { return a.event_id < b.event_id; });
    return existing;
}

std::vector<std::string> block_social_texts(const StoreState& state, const Block& block) {
    std::vector<std::string> texts;
    texts.reserve(block.social_obs.size());
    for (const auto& id : block.social_obs) {
        if (const Observation* o = state.find_observation(id)) {
            if (const auto* p = o->social()) {
                texts.push_back(p->text);
            }
        }
    }
    return texts;
}

Document block_document(const StoreState& state, const Block& block) {
    Document doc;
    for (const auto& text : block_social_texts(state, block)) {
        auto toks = tokenize(text);
        doc.insert(doc.end(), std::make_move_iterator(toks.begin()), std::make_move_iterator(toks.end()));
    }
    return doc;
}

Event label_event(Event e, const StoreState& state, const Gazetteer& gaz) {
    std::map<std::string, std::int64_t> counts;
    for (const auto& key : e.block_keys) {
        const Block* block = state.find_block(key);
        if (!block) {
            continue;
        }
        for (const auto& text : block_social_texts(state, *block)) {
            for (const auto& m : extract_entities(text, gaz)) {
                ++counts[m.entity_id];
            }
        }
    }
    e.label.reset();
    std::int64_t best = 0;
    for (const auto& [id, n] : counts) {
        if (n > best) { // ascending id order keeps the smallest on ties
            best = n;
            e.label = id;
        }
    }
    return e;
}

std::optional<double> mean_sentiment(const StoreState& state, std::span<const SpatioTemporalKey> keys,
    const Lexicon& lex) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& key : keys) {
        const Block* block = state.find_block(key);
        if (!block) {
            continue;
        }
        for (const auto& text : block_social_texts(state, *block)) {
            total += sentiment_score(text, lex);
            ++n;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return total / static_cast<double>(n);
}

std::string_view to_string(TrafficStatus s) {
    switch (s) {
    case TrafficStatus::green: return "green";
    case TrafficStatus::yellow: return "yellow";
    case TrafficStatus::red: return "red";
    }
    return "unknown";
}

namespace {

std::optional<double> mean_traffic_value(const StoreState& state, const Block& block) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& id : block.sensor_obs) {
        const Observation* o = state.find_observation(id);
        if (o && o->kind == kTrafficKind) {
            total += o->sensor()->value;
            ++n;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return total / static_cast<double>(n);
}

} // namespace

TrafficStatus traffic_status(std::string_view zone_id, std::int64_t bucket, Granularity g,
    const StoreState& state, std::size_t history, std::int64_t min_count) {
    if (!state.partition || !state.partition->has_zone(zone_id)) {
        throw Error(ErrorCode::UnknownZone, std::string(zone_id));
    }
    if (history == 0) {
        throw Error(ErrorCode::InvalidArgument, "traffic history must be >= 1");
    }
    const std::string zone(zone_id);
    const auto& level = state.blocks_at(g.seconds());
    auto current_it = level.find(SpatioTemporalKey{zone, bucket, g.seconds()});
    std::optional<double> current;
    if (current_it != level.end()) {
        current = mean_traffic_value(state, current_it->second);
    }
    if (!current) {
        throw Error(ErrorCode::InsufficientHistory, "no traffic reading in bucket " + std::to_string(bucket));
    }

    std::vector<double> past;
    auto it = level.lower_bound(SpatioTemporalKey{zone, bucket, g.seconds()});
    while (past.size() < history && it != level.begin()) {
        --it;
        if (it->first.zone_id != zone) {
            break;
        }
        if (auto v = mean_traffic_value(state, it->second)) {
            past.push_back(*v);
        }
    }
    if (past.size() < history) {
        throw Error(ErrorCode::InsufficientHistory,
            "zone " + zone + " has " + std::to_string(past.size()) + " of " + std::to_string(history) +
                " history buckets");
    }
    double mean = 0.0;
    for (double v : past) {
        mean += v;
    }
    mean /= static_cast<double>(past.size());
    double var = 0.0;
    for (double v : past) {
        var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(past.size());
    const double sd = std::sqrt(var);
    if (sd == 0.0) {
        return *current >= mean + static_cast<double>(min_count) ? TrafficStatus::red : TrafficStatus::green;
    }
    const double z = (*current - mean) / sd;
    if (z > 2.0) {
        return TrafficStatus::red;
    }
    if (z > 1.0) {
        return TrafficStatus::yellow;
    }
    return TrafficStatus::green;
}

} // namespace qcity
