#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcity/fusion.hpp"

namespace qcity {

inline constexpr int kStoreVersion = 1;

struct StoreManifest {
    int version = kStoreVersion;
    std::string partition_hash;
    std::vector<std::int64_t> granularities;
    std::uint64_t observations = 0;
    std::uint64_t discarded = 0;
    std::uint64_t late = 0;
    std::uint64_t events = 0;
    std::map<std::int64_t, std::uint64_t> blocks; // per granularity
    std::optional<Timestamp> watermark;

    bool operator==(const StoreManifest&) const = default;
};

nlohmann::json to_json(const StoreManifest& m);
StoreManifest manifest_from_json(const nlohmann::json& j);

// Writes the canonical directory layout:
//   manifest.json, partition.json, observations.jsonl, blocks_<g>.jsonl,
//   events.jsonl, late.jsonl
// Records are sorted (observations by id, blocks by key, events by id), so
// equal stores produce byte-identical files. Each file is written to a
// temporary sibling and renamed into place; the manifest goes last.
// Throws Error(IoError) or Error(InconsistentStore).
StoreManifest snapshot(const StoreState& state, const std::filesystem::path& dir);
StoreManifest snapshot(const BlockStore& store, const std::filesystem::path& dir);

// Throws Error(VersionMismatch) or Error(CorruptRecord) naming file and line.
StoreState load_state(const std::filesystem::path& dir);
std::unique_ptr<BlockStore> load(const std::filesystem::path& dir, StoreOptions options = {});

StoreManifest read_manifest(const std::filesystem::path& dir);

} // namespace qcity
