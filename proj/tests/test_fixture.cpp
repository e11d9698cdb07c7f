#include <gtest/gtest.h>

#include "qcity/error.hpp"
#include "qcity/fixture.hpp"
#include "qcity/model.hpp"
#include "qcity/spatial.hpp"
#include "support.hpp"

using namespace qcity;
using nlohmann::json;

TEST(Fixture, DefaultSeedIsByteIdentical) {
    qtest::TempDir a, b;
    write_fixture("tournament", a.path());
    write_fixture("tournament", b.path());
    EXPECT_EQ(qtest::dir_bytes(a.path()), qtest::dir_bytes(b.path()));
}

TEST(Fixture, SeedChangesContentNotSchema) {
    qtest::TempDir a, b;
    auto ra = write_fixture("tournament", a.path(), 1);
    auto rb = write_fixture("tournament", b.path(), 2);
    EXPECT_NE(qtest::read_file(ra.inputs[1]), qtest::read_file(rb.inputs[1]));
    auto ga = json::parse(qtest::read_file(ra.ground_truth));
    auto gb = json::parse(qtest::read_file(rb.ground_truth));
    ASSERT_EQ(ga["events"].size(), gb["events"].size());
    for (std::size_t i = 0; i < ga["events"].size(); ++i) {
        for (const auto& [k, v] : ga["events"][i].items()) {
            EXPECT_TRUE(gb["events"][i].contains(k)) << k;
        }
    }
}

TEST(Fixture, TournamentGroundTruth) {
    qtest::TempDir dir;
    auto out = write_fixture("tournament", dir.path());
    auto truth = json::parse(qtest::read_file(out.ground_truth));
    ASSERT_EQ(truth["events"].size(), 2u);
    EXPECT_EQ(truth["granularity_s"], 300);
    std::set<std::string> labels;
    for (const auto& e : truth["events"]) {
        labels.insert(e["label"].get<std::string>());
        EXPECT_EQ(e["zone_id"], truth["events"][0]["zone_id"]);
        EXPECT_LE(e["start_bucket"].get<std::int64_t>(), e["end_bucket"].get<std::int64_t>());
        double m = e["sentiment_mean"].get<double>();
        EXPECT_GE(m, -1.0);
        EXPECT_LE(m, 1.0);
    }
    EXPECT_EQ(labels.size(), 2u);
    // the two tournaments are in different weeks
    auto gap = truth["events"][1]["start_bucket"].get<std::int64_t>() - truth["events"][0]["start_bucket"].get<std::int64_t>();
    EXPECT_GT(gap * 300, 7 * 86400);
}

TEST(Fixture, TournamentRecordsAreValidAndCovered) {
    qtest::TempDir dir;
    auto out = write_fixture("tournament", dir.path());
    auto part = ZonePartition::from_geojson_file(out.zones);
    EXPECT_EQ(part.zones().size(), 9u);
    std::size_t n = 0;
    std::set<std::string> ids;
    for (const auto& path : out.inputs) {
        std::istringstream in(qtest::read_file(path));
        std::string line;
        Timestamp last{};
        while (std::getline(in, line)) {
            auto o = validate_observation(json::parse(line));
            EXPECT_TRUE(part.locate({o.lat, o.lon})) << line;
            EXPECT_LE(last, o.ts);
            last = o.ts;
            ids.insert(o.id);
            ++n;
        }
    }
    EXPECT_EQ(n, out.observations);
    EXPECT_EQ(ids.size(), n);
}

TEST(Fixture, SteadyHour) {
    qtest::TempDir dir;
    auto out = write_fixture("steady", dir.path());
    auto grid = grid_spec_from_json(json::parse(qtest::read_file(out.zones)));
    EXPECT_EQ(ZonePartition::from_grid(grid).zones().size(), 16u);
    auto truth = json::parse(qtest::read_file(out.ground_truth));
    EXPECT_TRUE(truth["events"].empty());
    auto span = parse_rfc3339(truth["to"].get<std::string>()) - parse_rfc3339(truth["from"].get<std::string>());
    EXPECT_EQ(span, std::chrono::hours(1));
    EXPECT_GT(out.observations, 1000u);
}

TEST(Fixture, UnknownScenario) {
    qtest::TempDir dir;
    try {
        write_fixture("marathon", dir.path());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
}
