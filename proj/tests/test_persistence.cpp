#include <gtest/gtest.h>

#include "qcity/error.hpp"
#include "qcity/persistence.hpp"
#include "stores.hpp"

using namespace qcity;
using nlohmann::json;

namespace {

std::shared_ptr<const ZonePartition> unit_grid() {
    return std::make_shared<const ZonePartition>(ZonePartition::from_grid(GridSpec{0, 0, 1, 1, 0.5}));
}

ErrorCode load_error(const std::filesystem::path& dir) {
    try {
        load_state(dir);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "load succeeded";
    return ErrorCode::InvalidArgument;
}

std::filesystem::path seeded_store(const qtest::TempDir& dir) {
    BlockStore store(unit_grid(), default_granularities());
    store.fuse(qtest::make_sensor("s1", 5, 0.1, 0.1, 3));
    store.fuse(qtest::make_post("p1", 25, 0.6, 0.6, "hi"));
    store.fuse(qtest::make_post("far", 25, 5, 5, "outside"));
    snapshot(store, dir.path());
    return dir.path();
}

} // namespace

TEST(Snapshot, EmptyStoreManifest) {
    qtest::TempDir dir;
    BlockStore store(unit_grid(), default_granularities());
    auto m = snapshot(store, dir.path());
    EXPECT_EQ(m.observations, 0u);
    EXPECT_EQ(m.discarded, 0u);
    EXPECT_EQ(m.late, 0u);
    EXPECT_EQ(m.events, 0u);
    for (const auto& [g, n] : m.blocks) {
        EXPECT_EQ(n, 0u);
    }
    EXPECT_EQ(m.granularities, (std::vector<std::int64_t>{20, 300}));
    EXPECT_EQ(read_manifest(dir.path()), m);
    EXPECT_EQ(load_state(dir.path()), store.state());
}

TEST(Snapshot, RoundTripAndByteIdentity) {
    qtest::TempDir a, b;
    auto path = seeded_store(a);
    auto loaded = load(path);
    EXPECT_EQ(loaded->state(), load_state(path));
    snapshot(*loaded, b.path());
    EXPECT_EQ(qtest::dir_bytes(a.path()), qtest::dir_bytes(b.path()));
    auto m = read_manifest(path);
    EXPECT_EQ(m.observations, 3u);
    EXPECT_EQ(m.discarded, 1u);
    EXPECT_EQ(m.blocks.at(20), 2u);
    EXPECT_EQ(m.blocks.at(300), 2u);
    EXPECT_EQ(loaded->state().discarded, std::set<std::string>{"far"});
}

TEST(Snapshot, RandomStoresRoundTrip) {
    qtest::Gen gen(61);
    for (int i = 0; i < 10; ++i) {
        auto store = qtest::random_store(gen);
        qtest::TempDir a, b;
        snapshot(*store, a.path());
        auto back = load_state(a.path());
        EXPECT_EQ(back, store->state());
        snapshot(back, b.path());
        EXPECT_EQ(qtest::dir_bytes(a.path()), qtest::dir_bytes(b.path()));
    }
}

TEST(Snapshot, OverwritesPreviousSnapshot) {
    qtest::TempDir dir;
    BlockStore store(unit_grid(), {Granularity(20)});
    store.fuse(qtest::make_sensor("s1", 5, 0.1, 0.1, 3));
    snapshot(store, dir.path());
    store.fuse(qtest::make_sensor("s2", 50, 0.1, 0.1, 3));
    snapshot(store, dir.path());
    EXPECT_EQ(load_state(dir.path()).observations.size(), 2u);
    for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
        EXPECT_EQ(e.path().filename().string().find(".tmp"), std::string::npos) << e.path();
    }
}

TEST(Load, VersionMismatch) {
    qtest::TempDir dir;
    auto path = seeded_store(dir);
    auto m = json::parse(qtest::read_file(path / "manifest.json"));
    m["version"] = 99;
    qtest::write_file(path / "manifest.json", m.dump());
    EXPECT_EQ(load_error(path), ErrorCode::VersionMismatch);
}

TEST(Load, MissingBlocksFile) {
    qtest::TempDir dir;
    auto path = seeded_store(dir);
    std::filesystem::remove(path / "blocks_300.jsonl");
    EXPECT_EQ(load_error(path), ErrorCode::CorruptRecord);
}

TEST(Load, CorruptRecordsDetected) {
    {
        qtest::TempDir dir;
        auto path = seeded_store(dir);
        qtest::write_file(path / "observations.jsonl", qtest::read_file(path / "observations.jsonl") + "{oops\n");
        EXPECT_EQ(load_error(path), ErrorCode::CorruptRecord);
    }
    {
        qtest::TempDir dir;
        auto path = seeded_store(dir);
        qtest::write_file(path / "blocks_20.jsonl", "");
        EXPECT_EQ(load_error(path), ErrorCode::CorruptRecord);
    }
    {
        qtest::TempDir dir;
        auto path = seeded_store(dir);
        auto m = json::parse(qtest::read_file(path / "manifest.json"));
        m["counts"]["observations"] = 7;
        qtest::write_file(path / "manifest.json", m.dump());
        EXPECT_EQ(load_error(path), ErrorCode::CorruptRecord);
    }
    {
        qtest::TempDir dir;
        auto path = seeded_store(dir);
        std::filesystem::remove(path / "manifest.json");
        EXPECT_EQ(load_error(path), ErrorCode::CorruptRecord);
    }
    {
        qtest::TempDir dir;
        auto path = seeded_store(dir);
        auto part = json::parse(qtest::read_file(path / "partition.json"));
        part["grid"]["cell_size_deg"] = 0.25;
        qtest::write_file(path / "partition.json", part.dump());
        EXPECT_EQ(load_error(path), ErrorCode::CorruptRecord);
    }
}

TEST(Load, MissingDirectory) {
    qtest::TempDir dir;
    EXPECT_THROW(load_state(dir / "nope"), Error);
}
