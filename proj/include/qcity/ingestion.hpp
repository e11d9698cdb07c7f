#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "qcity/fusion.hpp"
#include "qcity/model.hpp"

namespace qcity {

struct SourceSpec {
    std::string source_id;
    std::filesystem::path path;
    // Fills `source` on records that omit it; a record naming the other
    // modality is rejected as BadPayload.
    std::optional<Source> modality_hint;
    // Wall-clock compression factor for replay; 0 releases immediately.
    double replay_speed = 0.0;
};

// accepted + rejected + duplicate == lines_read. `late` and `discarded`
// are subsets of `accepted`. Blank lines are not counted as read.
struct IngestReport {
    std::uint64_t lines_read = 0;
    std::uint64_t accepted = 0;
    std::map<std::string, std::uint64_t> rejected;
    std::uint64_t late = 0;
    std::uint64_t duplicate = 0;
    std::uint64_t discarded = 0;
    // Sources that could not be read at all (replay only).
    std::map<std::string, std::string> source_errors;

    std::uint64_t rejected_total() const;
    IngestReport& operator+=(const IngestReport& other);
    bool operator==(const IngestReport&) const = default;
};

nlohmann::json to_json(const IngestReport& r);

// Receives validated observations; must tolerate concurrent calls.
using ObservationSink = std::function<FuseOutcome(const Observation&)>;

inline ObservationSink sink_for(BlockStore& store) {
    return [&store](const Observation& o) { return store.fuse(o); };
}

// Reads one JSON Lines file in order. Throws Error(FileNotFound); every
// bad line is counted under its error class.
IngestReport ingest_file(const SourceSpec& spec, const ObservationSink& sink);

// Runs ingest_file for every spec on its own thread. A failing source is
// recorded in source_errors and never stops the others.
IngestReport ingest_files(std::span<const SourceSpec> specs, const ObservationSink& sink);

class ReplayClock {
public:
    using time_point = std::chrono::steady_clock::time_point;
    virtual ~ReplayClock() = default;
    virtual time_point now() = 0;
    virtual void sleep_until(time_point t) = 0;
};

class SystemReplayClock final : public ReplayClock {
public:
    time_point now() override { return std::chrono::steady_clock::now(); }
    void sleep_until(time_point t) override;
};

// Simulated live feed. One reader thread per source parses and validates;
// observations are released in event-time order across sources, each at
// start + (ts - t0) / replay_speed on `clock`.
IngestReport replay(std::span<const SourceSpec> specs, ReplayClock& clock, const ObservationSink& sink);

} // namespace qcity
