#pragma once

#include <memory>

#include "qcity/fusion.hpp"
#include "support.hpp"

namespace qtest {

// Random store: grid or polygon partition, random granularities, both
// modalities, some out-of-coverage records, late records when the store
// enforces lateness, and a few events.
inline std::unique_ptr<qcity::BlockStore> random_store(Gen& gen) {
    using namespace qcity;
    std::shared_ptr<const ZonePartition> part;
    if (gen.coin()) {
        auto cell = gen.pick(std::vector<double>{0.25, 0.5, 0.3});
        part = std::make_shared<const ZonePartition>(ZonePartition::from_grid(GridSpec{0, 0, 1, 1.5, cell}));
    } else {
        part = std::make_shared<const ZonePartition>(ZonePartition::from_geojson(to_geojson(ten_polygons())));
    }
    std::vector<Granularity> gs;
    for (auto g : {10, 20, 60, 300, 900}) {
        if (gen.coin(0.4)) {
            gs.emplace_back(g);
        }
    }
    if (gs.empty()) {
        gs.emplace_back(20);
    }
    StoreOptions opts;
    if (gen.coin(0.3)) {
        opts.lateness_buckets = gen.integer(1, 3);
    }
    auto store = std::make_unique<BlockStore>(part, gs, opts);
    const auto n = gen.integer(0, 300);
    for (std::int64_t i = 0; i < n; ++i) {
        const auto ts = gen.integer(0, 7200);
        const double lat = gen.real(-0.2, 2.2), lon = gen.real(-0.2, 5.5);
        std::string id = "o" + std::to_string(i);
        Observation o = gen.coin() ? make_sensor(id, ts, lat, lon, gen.real(0, 100), gen.coin() ? "traffic_count" : "noise")
                                   : make_post(id, ts, lat, lon, gen.coin() ? "great day" : "jammed \"again\"\n\tnow");
        // microsecond timestamps exercise the sub-second path
        o.ts += std::chrono::microseconds(gen.integer(0, 999'999));
        store->fuse(o);
    }
    std::vector<Event> events;
    for (auto e = gen.integer(0, 3); e > 0; --e) {
        const auto& zone = part->zones()[static_cast<std::size_t>(gen.integer(0, static_cast<std::int64_t>(part->zones().size()) - 1))];
        Event ev;
        ev.zone_id = zone.zone_id;
        ev.granularity_s = gs.back().seconds();
        ev.bucket_range.start = gen.integer(0, 20);
        ev.bucket_range.end = ev.bucket_range.start + gen.integer(0, 3);
        ev.peak_count = gen.integer(5, 80);
        ev.event_id = "ev_" + ev.zone_id + "_" + std::to_string(ev.granularity_s) + "_" + std::to_string(ev.bucket_range.start);
        if (gen.coin()) {
            ev.label = "E_" + std::to_string(gen.integer(0, 9));
        }
        for (auto b = ev.bucket_range.start; b <= ev.bucket_range.end; ++b) {
            SpatioTemporalKey k{ev.zone_id, b, ev.granularity_s};
            if (store->read([&](const StoreState& s) { return s.find_block(k) != nullptr; })) {
                ev.block_keys.push_back(k);
            }
        }
        if (std::none_of(events.begin(), events.end(), [&](const Event& x) { return x.event_id == ev.event_id; })) {
            events.push_back(std::move(ev));
        }
    }
    store->set_events(std::move(events));
    return store;
}

} // namespace qtest
