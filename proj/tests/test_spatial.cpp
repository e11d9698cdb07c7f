#include <gtest/gtest.h>

#include "qcity/error.hpp"
#include "qcity/spatial.hpp"
#include "support.hpp"

using namespace qcity;
using nlohmann::json;

namespace {

ZonePartition unit_grid() {
    return ZonePartition::from_grid(GridSpec{0, 0, 1, 1, 0.5});
}

json square(const std::string& id, double x0, double y0, double x1, double y1) {
    return {{"type", "Feature"}, {"properties", {{"zone_id", id}}},
        {"geometry", {{"type", "Polygon"},
                         {"coordinates", json::array({json::array({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}})})}}}};
}

json collection(std::vector<json> features) {
    return {{"type", "FeatureCollection"}, {"features", features}};
}

ErrorCode geojson_error(const json& fc) {
    try {
        ZonePartition::from_geojson(fc);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "accepted " << fc.dump();
    return ErrorCode::InvalidArgument;
}

Observation at(double lat, double lon, std::int64_t ts_s) {
    return qtest::make_sensor("x", ts_s, lat, lon, 1);
}

} // namespace

TEST(Grid, TwoByTwo) {
    auto p = unit_grid();
    ASSERT_EQ(p.zones().size(), 4u);
    std::vector<std::string> ids;
    for (const auto& z : p.zones()) {
        ids.push_back(z.zone_id);
    }
    EXPECT_EQ(ids, (std::vector<std::string>{"g_0_0", "g_0_1", "g_1_0", "g_1_1"}));
}

TEST(Grid, LocateHalfOpen) {
    auto p = unit_grid();
    EXPECT_EQ(p.locate({0.25, 0.25}), "g_0_0");
    EXPECT_EQ(p.locate({0.5, 0.25}), "g_1_0");
    EXPECT_EQ(p.locate({0.25, 0.5}), "g_0_1");
    EXPECT_EQ(p.locate({0.0, 0.0}), "g_0_0");
    // outer top and right edges are closed
    EXPECT_EQ(p.locate({1.0, 1.0}), "g_1_1");
    EXPECT_EQ(p.locate({1.0, 0.1}), "g_1_0");
    EXPECT_EQ(p.locate({1.0000001, 0.5}), std::nullopt);
    EXPECT_EQ(p.locate({-0.0000001, 0.5}), std::nullopt);
}

TEST(Grid, PartialLastCell) {
    auto p = ZonePartition::from_grid(GridSpec{0, 0, 1, 0.3, 0.25});
    EXPECT_EQ(p.zones().size(), 4u * 2u);
    EXPECT_EQ(p.locate({0.99, 0.29}), "g_3_1");
}

TEST(Grid, RejectsBadSpecs) {
    EXPECT_THROW(ZonePartition::from_grid(GridSpec{0, 0, 1, 1, 0}), Error);
    EXPECT_THROW(ZonePartition::from_grid(GridSpec{1, 0, 0, 1, 0.5}), Error);
}

TEST(Grid, GeoJsonIsRectangles) {
    auto gj = unit_grid().to_geojson();
    ASSERT_EQ(gj["features"].size(), 4u);
    for (const auto& f : gj["features"]) {
        EXPECT_EQ(f["geometry"]["type"], "Polygon");
        EXPECT_EQ(f["geometry"]["coordinates"][0].size(), 5u);
        EXPECT_TRUE(f["properties"].contains("zone_id"));
        EXPECT_TRUE(f["properties"].contains("name"));
    }
}

TEST(Grid, EveryRenderedCellLocatesToItself) {
    auto p = ZonePartition::from_grid(GridSpec{25.28, 51.50, 25.32, 51.54, 0.01});
    for (const auto& z : p.zones()) {
        double lat = (z.min_lat + z.max_lat) / 2, lon = (z.min_lon + z.max_lon) / 2;
        EXPECT_EQ(p.locate({lat, lon}), z.zone_id);
        EXPECT_EQ(p.locate({z.min_lat, z.min_lon}), z.zone_id);
    }
}

TEST(Polygons, SingleSquare) {
    auto p = ZonePartition::from_geojson(collection({square("Z1", 0, 0, 1, 1)}));
    ASSERT_EQ(p.zones().size(), 1u);
    EXPECT_EQ(p.locate({0.5, 0.5}), "Z1");
    EXPECT_EQ(p.locate({1.0, 1.0}), "Z1");
    EXPECT_EQ(p.locate({1.5, 0.5}), std::nullopt);
}

TEST(Polygons, SharedEdgeGoesToSmallestId) {
    auto p = ZonePartition::from_geojson(collection({square("b", 0, 0, 1, 1), square("a", 1, 0, 2, 1)}));
    EXPECT_EQ(p.locate({0.5, 1.0}), "a"); // lat 0.5, lon 1: on the shared edge
    EXPECT_EQ(p.locate({0.5, 0.5}), "b");
}

TEST(Polygons, Errors) {
    EXPECT_EQ(geojson_error(collection({square("Z", 0, 0, 1, 1), square("Z", 2, 0, 3, 1)})), ErrorCode::DuplicateZoneId);
    EXPECT_EQ(geojson_error(collection({})), ErrorCode::EmptyPartition);
    EXPECT_EQ(geojson_error(json::parse(R"({"type":"FeatureCollection","features":[{"type":"Feature",
        "properties":{"zone_id":"d"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,1],[0,0]]]}}]})")),
        ErrorCode::DegeneratePolygon);
    EXPECT_EQ(geojson_error(json::parse(R"({"type":"FeatureCollection","features":[{"type":"Feature",
        "properties":{"zone_id":"bow"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,1],[1,0],[0,1],[0,0]]]}}]})")),
        ErrorCode::SelfIntersectingPolygon);
    EXPECT_EQ(geojson_error(json::parse(R"({"type":"FeatureCollection","features":[{"type":"Feature",
        "properties":{"zone_id":"m"},"geometry":{"type":"MultiPolygon","coordinates":[]}}]})")),
        ErrorCode::BadZoneFile);
    EXPECT_EQ(geojson_error(json::parse(R"({"type":"FeatureCollection","features":[{"type":"Feature",
        "properties":{},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}]})")),
        ErrorCode::BadZoneFile);
}

TEST(Polygons, FileErrors) {
    qtest::TempDir dir;
    EXPECT_THROW(ZonePartition::from_geojson_file(dir / "missing.geojson"), Error);
    qtest::write_file(dir / "bad.geojson", "{not json");
    try {
        ZonePartition::from_geojson_file(dir / "bad.geojson");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BadZoneFile);
    }
}

TEST(Polygons, AgreesWithRayCastingOracle) {
    auto polys = qtest::ten_polygons();
    auto part = ZonePartition::from_geojson(qtest::to_geojson(polys));
    qtest::Gen gen(11);
    for (int i = 0; i < 300; ++i) {
        double lon = gen.integer(-64, 6 * 64) / 64.0, lat = gen.integer(-32, 2 * 64 + 32) / 64.0;
        EXPECT_EQ(part.locate({lat, lon}), qtest::oracle_locate(polys, lat, lon)) << lat << "," << lon;
    }
    for (const auto& p : polys) {
        for (auto [x, y] : p.ring) {
            EXPECT_EQ(part.locate({y, x}), qtest::oracle_locate(polys, y, x)) << "vertex " << y << "," << x;
        }
    }
}

TEST(Partition, ConfigRoundTrip) {
    auto grid = unit_grid();
    EXPECT_EQ(ZonePartition::from_config_json(grid.to_config_json()), grid);
    auto polys = ZonePartition::from_geojson(qtest::to_geojson(qtest::ten_polygons()));
    auto back = ZonePartition::from_config_json(polys.to_config_json());
    EXPECT_EQ(back, polys);
    EXPECT_EQ(back.locate({0.5, 0.5}), polys.locate({0.5, 0.5}));
    EXPECT_NE(grid.source_hash(), polys.source_hash());
}

TEST(TimeBucket, Examples) {
    EXPECT_EQ(time_bucket(parse_rfc3339("1970-01-01T00:04:59Z"), Granularity(300)), 0);
    EXPECT_EQ(time_bucket(parse_rfc3339("1970-01-01T00:05:00Z"), Granularity(300)), 1);
    EXPECT_EQ(time_bucket(parse_rfc3339("1970-01-01T00:05:00Z"), Granularity(20)), 15);
    EXPECT_EQ(time_bucket(parse_rfc3339("1970-01-01T00:04:59.999999Z"), Granularity(300)), 0);
    EXPECT_EQ(bucket_start(15, Granularity(20)), parse_rfc3339("1970-01-01T00:05:00Z"));
}

TEST(TimeBucket, PreEpochRejected) {
    try {
        time_bucket(parse_rfc3339("1969-12-31T23:59:59Z"), Granularity(20));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::PreEpochTimestamp);
    }
    EXPECT_THROW(Granularity(0), Error);
}

TEST(StKey, Examples) {
    auto p = unit_grid();
    auto k = st_key(at(0.25, 0.25, 10), p, Granularity(20));
    ASSERT_TRUE(k);
    EXPECT_EQ(*k, (SpatioTemporalKey{"g_0_0", 0, 20}));
    EXPECT_EQ(st_key(at(2.0, 0.25, 10), p, Granularity(20)), std::nullopt);
    EXPECT_EQ(st_key(at(0.25, 0.25, 10), p, Granularity(20)), st_key(at(0.3, 0.3, 15), p, Granularity(20)));
}

TEST(StKey, BucketContainsTimestamp) {
    auto p = unit_grid();
    qtest::Gen gen(3);
    for (int i = 0; i < 500; ++i) {
        Granularity g(gen.integer(1, 900));
        auto o = at(gen.real(0, 1), gen.real(0, 1), gen.integer(0, 2'000'000'000));
        auto k = st_key(o, p, g);
        ASSERT_TRUE(k);
        EXPECT_LE(bucket_start(k->bucket_index, g), o.ts);
        EXPECT_LT(o.ts, bucket_start(k->bucket_index + 1, g));
    }
}
