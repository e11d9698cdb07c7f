#include "qcity/fusion.hpp"

#include <algorithm>

#include "qcity/error.hpp"

namespace qcity {

std::string_view to_string(FuseOutcome o) {
    switch (o) {
    case FuseOutcome::fused: return "fused";
    case FuseOutcome::duplicate: return "duplicate";
    case FuseOutcome::discarded: return "discarded";
    case FuseOutcome::late: return "late";
    }
    return "unknown";
}

bool StoreState::has_granularity(std::int64_t seconds) const {
    return std::any_of(granularities.begin(), granularities.end(),
        [&](Granularity g) { return g.seconds() == seconds; });
}

const std::map<SpatioTemporalKey, Block>& StoreState::blocks_at(std::int64_t seconds) const {
    static const std::map<SpatioTemporalKey, Block> empty;
    auto it = blocks.find(seconds);
    return it == blocks.end() ? empty : it->second;
}

const Block* StoreState::find_block(const SpatioTemporalKey& key) const {
    const auto& level = blocks_at(key.granularity_s);
    auto it = level.find(key);
    return it == level.end() ? nullptr : &it->second;
}

const Observation* StoreState::find_observation(const std::string& id) const {
    auto it = observations.find(id);
    return it == observations.end() ? nullptr : &it->second;
}

std::optional<std::int64_t> StoreState::closed_horizon(Granularity g,
    std::optional<std::int64_t> lateness_buckets) const {
    if (!watermark) {
        return std::nullopt;
    }
    Timestamp frozen = *watermark;
    if (lateness_buckets && !granularities.empty()) {
        const Granularity finest = granularities.front();
        const std::int64_t first_open = time_bucket(*watermark, finest) - *lateness_buckets;
        if (first_open < 0) {
            return std::nullopt;
        }
        frozen = bucket_start(first_open, finest);
    }
    const std::int64_t h = time_bucket(frozen, g) - 1;
    if (h < 0) {
        return std::nullopt;
    }
    return h;
}

bool StoreState::operator==(const StoreState& other) const {
    bool same_partition = (partition == nullptr) == (other.partition == nullptr) &&
                          (partition == nullptr || *partition == *other.partition);
    return same_partition && granularities == other.granularities && observations == other.observations &&
           blocks == other.blocks && discarded == other.discarded && late == other.late &&
           events == other.events && watermark == other.watermark;
}

BlockStore::BlockStore(std::shared_ptr<const ZonePartition> partition, std::vector<Granularity> granularities,
    StoreOptions options)
    : m_options(options) {
    if (!partition) {
        throw Error(ErrorCode::InvalidArgument, "store requires a partition");
    }
    std::sort(granularities.begin(), granularities.end());
    granularities.erase(std::unique(granularities.begin(), granularities.end()), granularities.end());
    if (granularities.empty()) {
        throw Error(ErrorCode::InvalidArgument, "store requires at least one granularity");
    }
    m_state.partition = std::move(partition);
    m_state.granularities = std::move(granularities);
    for (auto g : m_state.granularities) {
        m_state.blocks[g.seconds()];
    }
}

BlockStore::BlockStore(StoreState state, StoreOptions options) : m_state(std::move(state)), m_options(options) {
    if (!m_state.partition || m_state.granularities.empty()) {
        throw Error(ErrorCode::InvalidArgument, "store state lacks partition or granularities");
    }
    for (auto g : m_state.granularities) {
        m_state.blocks[g.seconds()];
    }
}

FuseOutcome BlockStore::fuse(const Observation& o) {
    // Keys depend only on the immutable partition; compute before locking.
    const Granularity finest = m_state.granularities.front();
    const std::int64_t finest_bucket = time_bucket(o.ts, finest);
    std::vector<SpatioTemporalKey> keys;
    keys.reserve(m_state.granularities.size());
    auto zone = m_state.partition->locate(LatLon{o.lat, o.lon});
    if (zone) {
        for (auto g : m_state.granularities) {
            keys.push_back(SpatioTemporalKey{*zone, time_bucket(o.ts, g), g.seconds()});
        }
    }

    std::unique_lock lock(m_mutex);
    auto check_duplicate = [&](const std::map<std::string, Observation>& index) -> bool {
        auto it = index.find(o.id);
        if (it == index.end()) {
            return false;
        }
        if (it->second == o) {
            return true;
        }
        throw Error(ErrorCode::ConflictingDuplicate, "observation '" + o.id + "' already stored with different content");
    };
    if (check_duplicate(m_state.observations) || check_duplicate(m_state.late)) {
        return FuseOutcome::duplicate;
    }

    if (m_options.lateness_buckets && m_state.watermark) {
        const std::int64_t horizon = time_bucket(*m_state.watermark, finest) - *m_options.lateness_buckets;
        if (finest_bucket < horizon) {
            m_state.late.emplace(o.id, o);
            return FuseOutcome::late;
        }
    }

    m_state.observations.emplace(o.id, o);
    if (!m_state.watermark || o.ts > *m_state.watermark) {
        m_state.watermark = o.ts;
    }
    if (keys.empty()) {
        m_state.discarded.insert(o.id);
        return FuseOutcome::discarded;
    }
    for (auto& key : keys) {
        auto& level = m_state.blocks[key.granularity_s];
        auto it = level.find(key);
        if (it == level.end()) {
            it = level.emplace(key, Block{key, {}, {}}).first;
        }
        auto& members = o.source == Source::sensor ? it->second.sensor_obs : it->second.social_obs;
        members.insert(o.id);
    }
    return FuseOutcome::fused;
}

CrossModalView BlockStore::cross_modal_view(const SpatioTemporalKey& key) const {
    std::shared_lock lock(m_mutex);
    return qcity::cross_modal_view(key, m_state);
}

void BlockStore::set_events(std::vector<Event> events) {
    std::sort(events.begin(), events.end(),
        [](const Event& a, const Event& b) { return a.event_id < b.event_id; });
    std::unique_lock lock(m_mutex);
    m_state.events = std::move(events);
}

StoreState BlockStore::state() const {
    std::shared_lock lock(m_mutex);
    return m_state;
}

std::optional<SpatioTemporalKey> assign(const Observation& o, const ZonePartition& part, Granularity g) {
    return st_key(o, part, g);
}

bool related(const Observation& a, const Observation& b, const ZonePartition& part, Granularity g) {
    auto ka = assign(a, part, g);
    if (!ka) {
        return false;
    }
    auto kb = assign(b, part, g);
    return kb && *ka == *kb;
}

CrossModalView cross_modal_view(const SpatioTemporalKey& key, const StoreState& state) {
    CrossModalView view;
    const Block* block = state.find_block(key);
    if (!block) {
        return view;
    }
    auto collect = [&](const std::set<std::string>& ids, std::vector<Observation>& out) {
        out.reserve(ids.size());
        for (const auto& id : ids) {
            if (const Observation* o = state.find_observation(id)) {
                out.push_back(*o);
            }
        }
        std::sort(out.begin(), out.end(), [](const Observation& a, const Observation& b) {
            return a.ts != b.ts ? a.ts < b.ts : a.id < b.id;
        });
    };
    collect(block->sensor_obs, view.sensor);
    collect(block->social_obs, view.social);
    return view;
}

void check_consistency(const StoreState& state) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InconsistentStore, what); };
    if (!state.partition) {
        fail("no partition");
    }
    for (auto g : state.granularities) {
        std::size_t members = 0;
        for (const auto& [key, block] : state.blocks_at(g.seconds())) {
            if (!(block.key == key) || key.granularity_s != g.seconds()) {
                fail("block key mismatch at " + key.zone_id);
            }
            auto check_member = [&](const std::string& id, Source expected) {
                const Observation* o = state.find_observation(id);
                if (!o) {
                    fail("block member '" + id + "' missing from observations");
                }
                if (o->source != expected) {
                    fail("block member '" + id + "' filed under the wrong modality");
                }
                auto k = st_key(*o, *state.partition, g);
                if (!k || !(*k == key)) {
                    fail("block member '" + id + "' does not hash to its block");
                }
            };
            for (const auto& id : block.sensor_obs) {
                check_member(id, Source::sensor);
            }
            for (const auto& id : block.social_obs) {
                check_member(id, Source::social);
            }
            members += block.size();
        }
        if (members + state.discarded.size() != state.observations.size()) {
            fail("blocks at " + std::to_string(g.seconds()) + "s do not partition the in-coverage observations");
        }
    }
    for (const auto& id : state.discarded) {
        if (!state.find_observation(id)) {
            fail("discarded id '" + id + "' missing from observations");
        }
    }
}

} // namespace qcity
