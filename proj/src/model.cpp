#include "qcity/model.hpp"

#include <cmath>

#include "qcity/error.hpp"

namespace qcity {

using nlohmann::json;

std::string_view to_string(Source s) {
    return s == Source::sensor ? "sensor" : "social";
}

namespace {

const json& require(const json& raw, const char* field) {
    auto it = raw.find(field);
    if (it == raw.end() || it->is_null()) {
        throw Error(ErrorCode::MissingField, std::string("missing field '") + field + "'");
    }
    return *it;
}

std::string require_string(const json& raw, const char* field) {
    const json& v = require(raw, field);
    if (!v.is_string()) {
        throw Error(ErrorCode::MissingField, std::string("field '") + field + "' must be a string");
    }
    return v.get<std::string>();
}

double coordinate(const json& raw, const char* field, double bound) {
    const json& v = require(raw, field);
    if (!v.is_number()) {
        throw Error(ErrorCode::BadCoordinate, std::string(field) + " is not a number");
    }
    double x = v.get<double>();
    if (!std::isfinite(x) || x < -bound || x > bound) {
        throw Error(ErrorCode::BadCoordinate, std::string(field) + " out of bounds: " + v.dump());
    }
    return x;
}

std::string optional_string(const json& payload, const char* field) {
    auto it = payload.find(field);
    if (it == payload.end() || it->is_null()) {
        return {};
    }
    if (!it->is_string()) {
        throw Error(ErrorCode::BadPayload, std::string("payload.") + field + " must be a string");
    }
    return it->get<std::string>();
}

SensorPayload sensor_payload(const json& p) {
    auto it = p.find("value");
    if (it == p.end() || !it->is_number()) {
        throw Error(ErrorCode::BadPayload, "sensor payload requires numeric 'value'");
    }
    double value = it->get<double>();
    if (!std::isfinite(value)) {
        throw Error(ErrorCode::BadPayload, "sensor value is not finite");
    }
    return SensorPayload{value, optional_string(p, "unit")};
}

SocialPayload social_payload(const json& p) {
    auto it = p.find("text");
    if (it == p.end() || !it->is_string()) {
        throw Error(ErrorCode::BadPayload, "social payload requires string 'text'");
    }
    SocialPayload out{it->get<std::string>(), optional_string(p, "user"), {}};
    if (auto tags = p.find("tags"); tags != p.end() && !tags->is_null()) {
        if (!tags->is_array()) {
            throw Error(ErrorCode::BadPayload, "payload.tags must be a list");
        }
        for (const auto& t : *tags) {
            if (!t.is_string()) {
                throw Error(ErrorCode::BadPayload, "payload.tags entries must be strings");
            }
            out.tags.push_back(t.get<std::string>());
        }
    }
    return out;
}

} // namespace

Observation validate_observation(const json& raw) {
    if (!raw.is_object()) {
        throw Error(ErrorCode::MissingField, "record is not an object");
    }
    Observation o;
    o.id = require_string(raw, "id");
    if (o.id.empty()) {
        throw Error(ErrorCode::MissingField, "id is empty");
    }

    const json& src = require(raw, "source");
    if (src == "sensor") {
        o.source = Source::sensor;
    } else if (src == "social") {
        o.source = Source::social;
    } else {
        throw Error(ErrorCode::BadPayload, "unknown source " + src.dump());
    }
    o.kind = require_string(raw, "kind");

    const json& ts = require(raw, "ts");
    if (!ts.is_string()) {
        throw Error(ErrorCode::BadTimestamp, "ts must be an RFC 3339 string");
    }
    o.ts = parse_rfc3339(ts.get<std::string>());

    o.lat = coordinate(raw, "lat", 90.0);
    o.lon = coordinate(raw, "lon", 180.0);

    const json& payload = require(raw, "payload");
    if (!payload.is_object()) {
        throw Error(ErrorCode::BadPayload, "payload must be an object");
    }
    if (o.source == Source::sensor) {
        o.payload = sensor_payload(payload);
    } else {
        o.payload = social_payload(payload);
    }
    return o;
}

json to_json(const Observation& o) {
    json payload;
    if (const auto* s = o.sensor()) {
        payload = {{"value", s->value}, {"unit", s->unit}};
    } else if (const auto* p = o.social()) {
        payload = {{"text", p->text}, {"user", p->user}, {"tags", p->tags}};
    }
    return json{
        {"id", o.id},
        {"source", to_string(o.source)},
        {"kind", o.kind},
        {"ts", format_rfc3339(o.ts)},
        {"lat", o.lat},
        {"lon", o.lon},
        {"payload", std::move(payload)},
    };
}

json to_json(const SpatioTemporalKey& k) {
    return json{{"zone_id", k.zone_id}, {"bucket_index", k.bucket_index},
        {"granularity_s", k.granularity_s}};
}

SpatioTemporalKey key_from_json(const json& j) {
    return SpatioTemporalKey{j.at("zone_id").get<std::string>(),
        j.at("bucket_index").get<std::int64_t>(), j.at("granularity_s").get<std::int64_t>()};
}

json to_json(const Block& b) {
    return json{{"key", to_json(b.key)}, {"sensor_obs", b.sensor_obs}, {"social_obs", b.social_obs}};
}

Block block_from_json(const json& j) {
    Block b;
    b.key = key_from_json(j.at("key"));
    for (const auto& id : j.at("sensor_obs")) {
        b.sensor_obs.insert(id.get<std::string>());
    }
    for (const auto& id : j.at("social_obs")) {
        b.social_obs.insert(id.get<std::string>());
    }
    return b;
}

json to_json(const Event& e) {
    json keys = json::array();
    for (const auto& k : e.block_keys) {
        keys.push_back(to_json(k));
    }
    return json{
        {"event_id", e.event_id},
        {"zone_id", e.zone_id},
        {"bucket_range", {{"start", e.bucket_range.start}, {"end", e.bucket_range.end}}},
        {"granularity_s", e.granularity_s},
        {"label", e.label ? json(*e.label) : json(nullptr)},
        {"peak_count", e.peak_count},
        {"block_keys", std::move(keys)},
    };
}

Event event_from_json(const json& j) {
    Event e;
    e.event_id = j.at("event_id").get<std::string>();
    e.zone_id = j.at("zone_id").get<std::string>();
    e.bucket_range.start = j.at("bucket_range").at("start").get<std::int64_t>();
    e.bucket_range.end = j.at("bucket_range").at("end").get<std::int64_t>();
    e.granularity_s = j.at("granularity_s").get<std::int64_t>();
    if (const auto& l = j.at("label"); !l.is_null()) {
        e.label = l.get<std::string>();
    }
    e.peak_count = j.at("peak_count").get<std::int64_t>();
    for (const auto& k : j.at("block_keys")) {
        e.block_keys.push_back(key_from_json(k));
    }
    return e;
}

} // namespace qcity
