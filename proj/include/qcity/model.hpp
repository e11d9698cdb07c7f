#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcity/time.hpp"

namespace qcity {

enum class Source { sensor, social };

std::string_view to_string(Source s);

struct SensorPayload {
    double value = 0.0;
    std::string unit;

    bool operator==(const SensorPayload&) const = default;
};

struct SocialPayload {
    std::string text;
    std::string user;
    std::vector<std::string> tags;

    bool operator==(const SocialPayload&) const = default;
};

using Payload = std::variant<SensorPayload, SocialPayload>;

// One timestamped, geolocated record from either modality. Immutable once
// validated; the payload alternative always matches `source`.
struct Observation {
    std::string id;
    Source source = Source::sensor;
    std::string kind;
    Timestamp ts{};
    double lat = 0.0;
    double lon = 0.0;
    Payload payload;

    const SensorPayload* sensor() const { return std::get_if<SensorPayload>(&payload); }
    const SocialPayload* social() const { return std::get_if<SocialPayload>(&payload); }

    bool operator==(const Observation&) const = default;
};

// Builds an Observation from a raw field map. Unknown fields are ignored.
// Throws Error with MissingField, BadCoordinate, BadTimestamp or BadPayload.
Observation validate_observation(const nlohmann::json& raw);

nlohmann::json to_json(const Observation& o);

// The blocking key. Keys of different granularity never compare equal.
struct SpatioTemporalKey {
    std::string zone_id;
    std::int64_t bucket_index = 0;
    std::int64_t granularity_s = 0;

    auto operator<=>(const SpatioTemporalKey&) const = default;
    bool operator==(const SpatioTemporalKey&) const = default;
};

nlohmann::json to_json(const SpatioTemporalKey& k);
SpatioTemporalKey key_from_json(const nlohmann::json& j);

// All observations sharing one key, split by modality. Holds ids only;
// full records live once in the store.
struct Block {
    SpatioTemporalKey key;
    std::set<std::string> sensor_obs;
    std::set<std::string> social_obs;

    std::size_t size() const { return sensor_obs.size() + social_obs.size(); }
    bool operator==(const Block&) const = default;
};

nlohmann::json to_json(const Block& b);
Block block_from_json(const nlohmann::json& j);

// Inclusive bucket span [start, end].
struct BucketRange {
    std::int64_t start = 0;
    std::int64_t end = 0;

    std::int64_t length() const { return end - start + 1; }
    bool contains(std::int64_t b) const { return b >= start && b <= end; }
    bool operator==(const BucketRange&) const = default;
};

struct Event {
    std::string event_id;
    std::string zone_id;
    BucketRange bucket_range;
    std::int64_t granularity_s = 0;
    std::optional<std::string> label;
    std::int64_t peak_count = 0;
    std::vector<SpatioTemporalKey> block_keys;

    bool operator==(const Event&) const = default;
};

nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

} // namespace qcity
