#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "qcity/model.hpp"
#include "qcity/spatial.hpp"

namespace qcity {

// Plain value holding everything the store knows. Analytics and the query
// layer operate on a const reference to one of these under a read lock.
struct StoreState {
    std::shared_ptr<const ZonePartition> partition;
    std::vector<Granularity> granularities; // ascending, unique

    // Every accepted observation, in coverage or not.
    std::map<std::string, Observation> observations;
    // granularity seconds -> key -> block
    std::map<std::int64_t, std::map<SpatioTemporalKey, Block>> blocks;
    // Accepted but outside every zone.
    std::set<std::string> discarded;
    // Arrived behind the lateness horizon; logged, never fused.
    std::map<std::string, Observation> late;
    // Sorted by event_id.
    std::vector<Event> events;
    std::optional<Timestamp> watermark;

    bool has_granularity(std::int64_t seconds) const;
    const std::map<SpatioTemporalKey, Block>& blocks_at(std::int64_t seconds) const;
    const Block* find_block(const SpatioTemporalKey& key) const;
    const Observation* find_observation(const std::string& id) const;

    // Highest bucket index reads may cover at `g`: bucket(watermark) - 1.
    // With a lateness allowance of L finest buckets the cut moves back to
    // the start of finest bucket(watermark) - L, so no reported bucket can
    // still receive data. nullopt when nothing is closed yet.
    std::optional<std::int64_t> closed_horizon(Granularity g,
        std::optional<std::int64_t> lateness_buckets = std::nullopt) const;

    bool operator==(const StoreState& other) const;
};

enum class FuseOutcome { fused, duplicate, discarded, late };

std::string_view to_string(FuseOutcome o);

struct StoreOptions {
    // When set, an observation whose finest-granularity bucket is older than
    // bucket(watermark) - lateness_buckets is logged as late and not fused.
    // Unset for batch ingestion so arrival order never matters.
    std::optional<std::int64_t> lateness_buckets;
};

inline constexpr std::int64_t kDefaultLatenessBuckets = 2;

struct CrossModalView {
    std::vector<Observation> sensor;
    std::vector<Observation> social;
};

// Thread-safe owner of a StoreState. Writers (fuse) are serialized; readers
// share a lock and always see whole observations.
class BlockStore {
public:
    BlockStore(std::shared_ptr<const ZonePartition> partition, std::vector<Granularity> granularities,
        StoreOptions options = {});
    explicit BlockStore(StoreState state, StoreOptions options = {});

    BlockStore(const BlockStore&) = delete;
    BlockStore& operator=(const BlockStore&) = delete;

    // Inserts `o` into exactly one block per configured granularity.
    // Throws Error(ConflictingDuplicate) when the id exists with different
    // content, and propagates PreEpochTimestamp.
    FuseOutcome fuse(const Observation& o);

    CrossModalView cross_modal_view(const SpatioTemporalKey& key) const;

    void set_events(std::vector<Event> events);

    template <class F>
    decltype(auto) read(F&& f) const {
        std::shared_lock lock(m_mutex);
        return std::forward<F>(f)(static_cast<const StoreState&>(m_state));
    }

    StoreState state() const;
    const ZonePartition& partition() const { return *m_state.partition; }
    const std::vector<Granularity>& granularities() const { return m_state.granularities; }
    const StoreOptions& options() const { return m_options; }

private:
    mutable std::shared_mutex m_mutex;
    StoreState m_state;
    StoreOptions m_options;
};

// The blocking entry point; identical to st_key.
std::optional<SpatioTemporalKey> assign(const Observation& o, const ZonePartition& part, Granularity g);

// True iff both observations are in coverage and share a blocking key.
bool related(const Observation& a, const Observation& b, const ZonePartition& part, Granularity g);

// Full records of a block, each list sorted by (ts, id).
CrossModalView cross_modal_view(const SpatioTemporalKey& key, const StoreState& state);

// Verifies block/observation cross references and recomputed keys.
// Throws Error(InconsistentStore).
void check_consistency(const StoreState& state);

} // namespace qcity
