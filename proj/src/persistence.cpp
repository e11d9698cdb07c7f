#include "qcity/persistence.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "qcity/error.hpp"

namespace qcity {

namespace fs = std::filesystem;
using nlohmann::json;

json to_json(const StoreManifest& m) {
    json blocks = json::object();
    for (const auto& [g, n] : m.blocks) {
        blocks[std::to_string(g)] = n;
    }
    return json{
        {"version", m.version},
        {"partition_hash", m.partition_hash},
        {"granularities", m.granularities},
        {"counts",
            {{"observations", m.observations}, {"discarded", m.discarded}, {"late", m.late}, {"events", m.events},
                {"blocks", std::move(blocks)}}},
        {"watermark", m.watermark ? json(format_rfc3339(*m.watermark)) : json(nullptr)},
    };
}

StoreManifest manifest_from_json(const json& j) {
    StoreManifest m;
    m.version = j.at("version").get<int>();
    if (m.version != kStoreVersion) {
        throw Error(ErrorCode::VersionMismatch,
            "store version " + std::to_string(m.version) + ", reader expects " + std::to_string(kStoreVersion));
    }
    m.partition_hash = j.at("partition_hash").get<std::string>();
    m.granularities = j.at("granularities").get<std::vector<std::int64_t>>();
    const auto& c = j.at("counts");
    m.observations = c.at("observations").get<std::uint64_t>();
    m.discarded = c.at("discarded").get<std::uint64_t>();
    m.late = c.at("late").get<std::uint64_t>();
    m.events = c.at("events").get<std::uint64_t>();
    for (const auto& [g, n] : c.at("blocks").items()) {
        m.blocks[std::stoll(g)] = n.get<std::uint64_t>();
    }
    if (const auto& w = j.at("watermark"); !w.is_null()) {
        m.watermark = parse_rfc3339(w.get<std::string>());
    }
    return m;
}

namespace {

std::string blocks_file(std::int64_t g) {
    return "blocks_" + std::to_string(g) + ".jsonl";
}

// Writes `content` to dir/name via a temporary file and an atomic rename.
void write_atomic(const fs::path& dir, const std::string& name, const std::string& content) {
    const fs::path final_path = dir / name;
    const fs::path tmp_path = dir / ("." + name + ".tmp");
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::IoError, "cannot write " + tmp_path.string());
        }
        out << content;
        out.flush();
        if (!out) {
            throw Error(ErrorCode::IoError, "write failed for " + tmp_path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp_path, final_path, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, "rename to " + final_path.string() + " failed: " + ec.message());
    }
}

template <class Range, class ToJson>
std::string jsonl(const Range& records, ToJson&& to) {
    std::string out;
    for (const auto& r : records) {
        out += to(r).dump();
        out += '\n';
    }
    return out;
}

[[noreturn]] void corrupt(const std::string& file, std::size_t line, const std::string& what) {
    std::string where = line ? file + ":" + std::to_string(line) : file;
    throw Error(ErrorCode::CorruptRecord, where + ": " + what);
}

std::string read_text(const fs::path& dir, const std::string& name) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) {
        corrupt(name, 0, "missing file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Calls f(line_no, json) for each non-empty line.
template <class F>
void read_jsonl(const fs::path& dir, const std::string& name, F&& f) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) {
        corrupt(name, 0, "missing file");
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            corrupt(name, line_no, "invalid JSON");
        }
        try {
            f(line_no, j);
        } catch (const json::exception& e) {
            corrupt(name, line_no, e.what());
        } catch (const Error& e) {
            if (e.code() == ErrorCode::CorruptRecord) {
                throw;
            }
            corrupt(name, line_no, e.what());
        }
    }
}

} // namespace

StoreManifest snapshot(const StoreState& state, const fs::path& dir) {
    check_consistency(state);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    }

    StoreManifest m;
    m.partition_hash = state.partition->source_hash();
    for (auto g : state.granularities) {
        m.granularities.push_back(g.seconds());
    }
    m.observations = state.observations.size();
    m.discarded = state.discarded.size();
    m.late = state.late.size();
    m.events = state.events.size();
    m.watermark = state.watermark;

    write_atomic(dir, "partition.json", state.partition->to_config_json().dump() + "\n");
    write_atomic(dir, "observations.jsonl",
        jsonl(state.observations, [](const auto& kv) { return to_json(kv.second); }));
    for (auto g : state.granularities) {
        const auto& level = state.blocks_at(g.seconds());
        m.blocks[g.seconds()] = level.size();
        write_atomic(dir, blocks_file(g.seconds()), jsonl(level, [](const auto& kv) { return to_json(kv.second); }));
    }
    std::vector<Event> events = state.events;
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.event_id < b.event_id; });
    write_atomic(dir, "events.jsonl", jsonl(events, [](const Event& e) { return to_json(e); }));
    write_atomic(dir, "late.jsonl", jsonl(state.late, [](const auto& kv) { return to_json(kv.second); }));
    write_atomic(dir, "manifest.json", to_json(m).dump(2) + "\n");
    return m;
}

StoreManifest snapshot(const BlockStore& store, const fs::path& dir) {
    return store.read([&](const StoreState& s) { return snapshot(s, dir); });
}

StoreManifest read_manifest(const fs::path& dir) {
    json j = json::parse(read_text(dir, "manifest.json"), nullptr, false);
    if (j.is_discarded()) {
        corrupt("manifest.json", 0, "invalid JSON");
    }
    try {
        return manifest_from_json(j);
    } catch (const json::exception& e) {
        corrupt("manifest.json", 0, e.what());
    }
}

StoreState load_state(const fs::path& dir) {
    const StoreManifest m = read_manifest(dir);
    StoreState s;

    json pj = json::parse(read_text(dir, "partition.json"), nullptr, false);
    if (pj.is_discarded()) {
        corrupt("partition.json", 0, "invalid JSON");
    }
    try {
        s.partition = std::make_shared<const ZonePartition>(ZonePartition::from_config_json(pj));
    } catch (const std::exception& e) {
        corrupt("partition.json", 0, e.what());
    }
    if (s.partition->source_hash() != m.partition_hash) {
        corrupt("partition.json", 0, "hash does not match manifest");
    }
    for (auto g : m.granularities) {
        s.granularities.emplace_back(g);
    }
    if (s.granularities.empty()) {
        corrupt("manifest.json", 0, "no granularities");
    }

    read_jsonl(dir, "observations.jsonl", [&](std::size_t line, const json& j) {
        Observation o = validate_observation(j);
        std::string id = o.id;
        if (!s.observations.emplace(std::move(id), std::move(o)).second) {
            corrupt("observations.jsonl", line, "duplicate id");
        }
    });
    for (auto g : s.granularities) {
        auto& level = s.blocks[g.seconds()];
        const std::string name = blocks_file(g.seconds());
        read_jsonl(dir, name, [&](std::size_t line, const json& j) {
            Block b = block_from_json(j);
            if (b.key.granularity_s != g.seconds()) {
                corrupt(name, line, "block granularity does not match file");
            }
            auto key = b.key;
            if (!level.emplace(std::move(key), std::move(b)).second) {
                corrupt(name, line, "duplicate block key");
            }
        });
        auto expected = m.blocks.find(g.seconds());
        if (expected == m.blocks.end() || level.size() != expected->second) {
            corrupt(name, 0, "block count does not match manifest");
        }
    }
    read_jsonl(dir, "events.jsonl", [&](std::size_t, const json& j) { s.events.push_back(event_from_json(j)); });
    read_jsonl(dir, "late.jsonl", [&](std::size_t line, const json& j) {
        Observation o = validate_observation(j);
        std::string id = o.id;
        if (!s.late.emplace(std::move(id), std::move(o)).second) {
            corrupt("late.jsonl", line, "duplicate id");
        }
    });

    // An observation is discarded iff it sits in no block.
    std::set<std::string> in_blocks;
    for (const auto& [_, b] : s.blocks_at(s.granularities.front().seconds())) {
        in_blocks.insert(b.sensor_obs.begin(), b.sensor_obs.end());
        in_blocks.insert(b.social_obs.begin(), b.social_obs.end());
    }
    for (const auto& [id, _] : s.observations) {
        if (!in_blocks.count(id)) {
            s.discarded.insert(id);
        }
    }
    s.watermark = m.watermark;

    if (s.observations.size() != m.observations || s.discarded.size() != m.discarded || s.late.size() != m.late ||
        s.events.size() != m.events) {
        corrupt("manifest.json", 0, "record counts do not match manifest");
    }
    try {
        check_consistency(s);
    } catch (const Error& e) {
        corrupt("blocks", 0, e.detail());
    }
    return s;
}

std::unique_ptr<BlockStore> load(const fs::path& dir, StoreOptions options) {
    return std::make_unique<BlockStore>(load_state(dir), options);
}

} // namespace qcity
