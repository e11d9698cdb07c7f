#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcity/fusion.hpp"
#include "qcity/model.hpp"
#include "qcity/text.hpp"

namespace qcity {

// Burst rule: bucket t (t >= window) bursts iff count_t >= min_count and
// count_t > mean + k * stddev over the `window` preceding counts, with the
// population stddev. A flat window (stddev 0) needs count_t >= mean + min_count.
struct BurstParams {
    std::size_t window = 12;
    double k = 3.0;
    std::int64_t min_count = 5;

    // Throws Error(InvalidArgument) on window < 2, k < 0 or min_count < 1.
    void validate() const;
};

// Parses "W,k,min".
BurstParams parse_burst_params(std::string_view text);

struct BurstSpan {
    std::size_t start = 0; // series indices, inclusive
    std::size_t end = 0;
    std::int64_t peak_count = 0;

    bool operator==(const BurstSpan&) const = default;
};

// Maximal runs of bursting indices. Throws Error(SeriesTooShort) unless
// series.size() > window.
std::vector<BurstSpan> detect_events(std::span<const std::int64_t> series, const BurstParams& params);

struct SeriesPoint {
    std::int64_t bucket = 0;
    std::int64_t count = 0;

    bool operator==(const SeriesPoint&) const = default;
};

// |sensor| + |social| per bucket over `range`, zero-filled.
// Throws Error(UnknownZone).
std::vector<SeriesPoint> zone_count_series(std::string_view zone_id, Granularity g, BucketRange range,
    const StoreState& state);

// Runs detect_events over one zone's series and turns spans into Events
// (unlabelled; id "ev_<zone>_<g>_<start bucket>").
std::vector<Event> detect_zone_events(std::string_view zone_id, Granularity g, BucketRange range,
    const StoreState& state, const BurstParams& params);

// detect_zone_events for every zone, labelled with `gaz`, sorted by id.
std::vector<Event> detect_city_events(const StoreState& state, Granularity g, BucketRange range,
    const BurstParams& params, const Gazetteer& gaz);

// Replaces the events of `existing` at `g` that overlap `range` with `fresh`.
std::vector<Event> merge_events(std::vector<Event> existing, std::vector<Event> fresh, Granularity g,
    BucketRange range);

// Social texts of one block, in observation id order.
std::vector<std::string> block_social_texts(const StoreState& state, const Block& block);
Document block_document(const StoreState& state, const Block& block);

// Most frequent entity across the event's social texts; ties go to the
// smallest entity_id. No mentions leaves the label empty.
Event label_event(Event e, const StoreState& state, const Gazetteer& gaz);

// Mean per-post sentiment over the social observations of `keys`.
std::optional<double> mean_sentiment(const StoreState& state, std::span<const SpatioTemporalKey> keys,
    const Lexicon& lex);

enum class TrafficStatus { green, yellow, red };

std::string_view to_string(TrafficStatus s);

inline constexpr std::string_view kTrafficKind = "traffic_count";

// z-score of the bucket's mean traffic_count reading against the `history`
// most recent earlier buckets with readings. Throws
// Error(InsufficientHistory) when the bucket has no reading or fewer than
// `history` earlier buckets do.
TrafficStatus traffic_status(std::string_view zone_id, std::int64_t bucket, Granularity g,
    const StoreState& state, std::size_t history, std::int64_t min_count);

} // namespace qcity
