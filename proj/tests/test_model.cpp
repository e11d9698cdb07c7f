#include <gtest/gtest.h>

#include "qcity/error.hpp"
#include "qcity/model.hpp"
#include "support.hpp"

using namespace qcity;
using nlohmann::json;

namespace {

json minimal() {
    return json::parse(R"({"id":"a","source":"sensor","kind":"traffic_count","ts":"1970-01-01T00:00:00Z",
        "lat":0,"lon":0,"payload":{"value":3,"unit":"veh"}})");
}

ErrorCode code_of(const json& j) {
    try {
        validate_observation(j);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "accepted " << j.dump();
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST(Validate, MinimalRecord) {
    auto o = validate_observation(minimal());
    EXPECT_EQ(o.id, "a");
    EXPECT_EQ(o.source, Source::sensor);
    EXPECT_EQ(o.kind, "traffic_count");
    EXPECT_EQ(to_unix_micros(o.ts), 0);
    ASSERT_NE(o.sensor(), nullptr);
    EXPECT_EQ(o.sensor()->value, 3.0);
    EXPECT_EQ(o.sensor()->unit, "veh");
    EXPECT_EQ(o.social(), nullptr);
}

TEST(Validate, LatitudeOutOfBounds) {
    auto j = minimal();
    j["lat"] = 91;
    EXPECT_EQ(code_of(j), ErrorCode::BadCoordinate);
    j["lat"] = -90.0001;
    EXPECT_EQ(code_of(j), ErrorCode::BadCoordinate);
    j["lat"] = 0;
    j["lon"] = 180.5;
    EXPECT_EQ(code_of(j), ErrorCode::BadCoordinate);
    j["lon"] = "12";
    EXPECT_EQ(code_of(j), ErrorCode::BadCoordinate);
}

TEST(Validate, BoundsAreInclusive) {
    auto j = minimal();
    j["lat"] = 90;
    j["lon"] = -180;
    EXPECT_NO_THROW(validate_observation(j));
}

TEST(Validate, ModalityPayloadMismatch) {
    auto j = minimal();
    j["source"] = "social";
    EXPECT_EQ(code_of(j), ErrorCode::BadPayload);
    auto s = minimal();
    s["payload"] = json{{"text", 12}};
    s["source"] = "social";
    EXPECT_EQ(code_of(s), ErrorCode::BadPayload);
    auto v = minimal();
    v["payload"]["value"] = "three";
    EXPECT_EQ(code_of(v), ErrorCode::BadPayload);
    auto u = minimal();
    u["source"] = "satellite";
    EXPECT_EQ(code_of(u), ErrorCode::BadPayload);
}

TEST(Validate, MissingFields) {
    for (const char* field : {"id", "source", "kind", "ts", "lat", "lon", "payload"}) {
        auto j = minimal();
        j.erase(field);
        EXPECT_EQ(code_of(j), ErrorCode::MissingField) << field;
    }
    auto j = minimal();
    j["id"] = "";
    EXPECT_EQ(code_of(j), ErrorCode::MissingField);
}

TEST(Validate, BadTimestamp) {
    auto j = minimal();
    j["ts"] = "yesterday";
    EXPECT_EQ(code_of(j), ErrorCode::BadTimestamp);
    j["ts"] = 12;
    EXPECT_EQ(code_of(j), ErrorCode::BadTimestamp);
}

TEST(Validate, SocialRecord) {
    auto j = json::parse(R"({"id":"p1","source":"social","kind":"post","ts":"2016-01-09T15:00:00Z",
        "lat":25.3,"lon":51.5,"payload":{"text":"Great match","user":"u1","tags":["tennis"]}})");
    auto o = validate_observation(j);
    ASSERT_NE(o.social(), nullptr);
    EXPECT_EQ(o.social()->text, "Great match");
    EXPECT_EQ(o.social()->tags, std::vector<std::string>{"tennis"});
}

TEST(Validate, PureAndRoundTrips) {
    qtest::Gen gen(7);
    for (int i = 0; i < 200; ++i) {
        auto o = gen.coin() ? qtest::make_sensor("s" + std::to_string(i), gen.integer(0, 1'000'000),
                                  gen.real(-90, 90), gen.real(-180, 180), gen.real(-5, 500))
                            : qtest::make_post("p" + std::to_string(i), gen.integer(0, 1'000'000), gen.real(-90, 90),
                                  gen.real(-180, 180), "text " + std::to_string(i));
        auto j = to_json(o);
        EXPECT_EQ(validate_observation(j), o);
        EXPECT_EQ(validate_observation(j), validate_observation(j));
        EXPECT_EQ(validate_observation(json::parse(j.dump())), o);
    }
}

TEST(Model, KeyOrderingAndJson) {
    SpatioTemporalKey a{"z1", 3, 20}, b{"z1", 4, 20}, c{"z2", 0, 20};
    EXPECT_LT(a, b);
    EXPECT_LT(b, c);
    EXPECT_EQ(key_from_json(to_json(a)), a);
}

TEST(Model, EventJsonRoundTrip) {
    Event e;
    e.event_id = "ev_z_300_10";
    e.zone_id = "z";
    e.bucket_range = {10, 12};
    e.granularity_s = 300;
    e.label = "E1";
    e.peak_count = 70;
    e.block_keys = {{"z", 10, 300}, {"z", 11, 300}};
    EXPECT_EQ(event_from_json(to_json(e)), e);
    e.label.reset();
    EXPECT_EQ(event_from_json(to_json(e)), e);
}
