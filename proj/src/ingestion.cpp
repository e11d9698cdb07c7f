#include "qcity/ingestion.hpp"

#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <thread>
#include <variant>

#include "qcity/error.hpp"

namespace qcity {

using nlohmann::json;

std::uint64_t IngestReport::rejected_total() const {
    std::uint64_t n = 0;
    for (const auto& [_, c] : rejected) {
        n += c;
    }
    return n;
}

IngestReport& IngestReport::operator+=(const IngestReport& other) {
    lines_read += other.lines_read;
    accepted += other.accepted;
    late += other.late;
    duplicate += other.duplicate;
    discarded += other.discarded;
    for (const auto& [k, v] : other.rejected) {
        rejected[k] += v;
    }
    for (const auto& [k, v] : other.source_errors) {
        source_errors[k] = v;
    }
    return *this;
}

json to_json(const IngestReport& r) {
    return json{
        {"lines_read", r.lines_read},
        {"accepted", r.accepted},
        {"rejected", r.rejected},
        {"rejected_total", r.rejected_total()},
        {"late", r.late},
        {"duplicate", r.duplicate},
        {"discarded", r.discarded},
        {"source_errors", r.source_errors},
    };
}

namespace {

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

// Either a validated observation or the name of the rejection class.
std::variant<Observation, std::string> parse_line(const std::string& line, const SourceSpec& spec) {
    json raw = json::parse(line, nullptr, false);
    if (raw.is_discarded() || !raw.is_object()) {
        return std::string(to_string(ErrorCode::UnreadableLine));
    }
    if (spec.modality_hint) {
        auto want = to_string(*spec.modality_hint);
        auto it = raw.find("source");
        if (it == raw.end() || it->is_null()) {
            raw["source"] = want;
        } else if (*it != want) {
            return std::string(to_string(ErrorCode::BadPayload));
        }
    }
    try {
        return validate_observation(raw);
    } catch (const Error& e) {
        return std::string(to_string(e.code()));
    }
}

void deliver(const Observation& o, const ObservationSink& sink, IngestReport& report) {
    try {
        switch (sink(o)) {
        case FuseOutcome::duplicate:
            ++report.duplicate;
            return;
        case FuseOutcome::late:
            ++report.late;
            break;
        case FuseOutcome::discarded:
            ++report.discarded;
            break;
        case FuseOutcome::fused:
            break;
        }
        ++report.accepted;
    } catch (const Error& e) {
        ++report.rejected[std::string(to_string(e.code()))];
    }
}

std::ifstream open_source(const SourceSpec& spec) {
    std::ifstream in(spec.path);
    if (!in) {
        throw Error(ErrorCode::FileNotFound, spec.path.string());
    }
    return in;
}

} // namespace

IngestReport ingest_file(const SourceSpec& spec, const ObservationSink& sink) {
    std::ifstream in = open_source(spec);
    IngestReport report;
    std::string line;
    while (std::getline(in, line)) {
        if (is_blank(line)) {
            continue;
        }
        ++report.lines_read;
        auto parsed = parse_line(line, spec);
        if (auto* code = std::get_if<std::string>(&parsed)) {
            ++report.rejected[*code];
            continue;
        }
        deliver(std::get<Observation>(parsed), sink, report);
    }
    if (in.bad()) {
        throw Error(ErrorCode::IoError, "read failure on " + spec.path.string());
    }
    return report;
}

IngestReport ingest_files(std::span<const SourceSpec> specs, const ObservationSink& sink) {
    std::vector<IngestReport> reports(specs.size());
    std::vector<std::thread> workers;
    workers.reserve(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        workers.emplace_back([&, i] {
            try {
                reports[i] = ingest_file(specs[i], sink);
            } catch (const Error& e) {
                reports[i].source_errors[specs[i].source_id] = e.what();
            }
        });
    }
    for (auto& t : workers) {
        t.join();
    }
    IngestReport total;
    for (const auto& r : reports) {
        total += r;
    }
    return total;
}

void SystemReplayClock::sleep_until(time_point t) {
    std::this_thread::sleep_until(t);
}

namespace {

// Bounded single-producer queue between a reader thread and the merger.
class Lane {
public:
    explicit Lane(std::size_t capacity) : m_capacity(capacity) {}

    void push(Observation o) {
        std::unique_lock lock(m_mutex);
        m_not_full.wait(lock, [&] { return m_items.size() < m_capacity; });
        m_items.push_back(std::move(o));
        m_not_empty.notify_one();
    }

    void close() {
        std::lock_guard lock(m_mutex);
        m_closed = true;
        m_not_empty.notify_one();
    }

    // nullopt once closed and drained.
    std::optional<Observation> pop() {
        std::unique_lock lock(m_mutex);
        m_not_empty.wait(lock, [&] { return !m_items.empty() || m_closed; });
        if (m_items.empty()) {
            return std::nullopt;
        }
        Observation o = std::move(m_items.front());
        m_items.pop_front();
        m_not_full.notify_one();
        return o;
    }

private:
    std::mutex m_mutex;
    std::condition_variable m_not_empty;
    std::condition_variable m_not_full;
    std::deque<Observation> m_items;
    std::size_t m_capacity;
    bool m_closed = false;
};

constexpr std::size_t kLaneCapacity = 4096;

} // namespace

IngestReport replay(std::span<const SourceSpec> specs, ReplayClock& clock, const ObservationSink& sink) {
    const std::size_t n = specs.size();
    for (const auto& s : specs) {
        if (!(s.replay_speed >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "replay_speed must be >= 0 for " + s.source_id);
        }
    }
    std::vector<std::unique_ptr<Lane>> lanes;
    for (std::size_t i = 0; i < n; ++i) {
        lanes.push_back(std::make_unique<Lane>(kLaneCapacity));
    }
    std::vector<IngestReport> reader_reports(n);
    std::vector<IngestReport> merge_reports(n);
    std::vector<std::thread> readers;
    readers.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        readers.emplace_back([&, i] {
            const SourceSpec& spec = specs[i];
            IngestReport& report = reader_reports[i];
            try {
                std::ifstream in = open_source(spec);
                std::string line;
                while (std::getline(in, line)) {
                    if (is_blank(line)) {
                        continue;
                    }
                    ++report.lines_read;
                    auto parsed = parse_line(line, spec);
                    if (auto* code = std::get_if<std::string>(&parsed)) {
                        ++report.rejected[*code];
                    } else {
                        lanes[i]->push(std::move(std::get<Observation>(parsed)));
                    }
                }
            } catch (const Error& e) {
                report.source_errors[spec.source_id] = e.what();
            }
            lanes[i]->close();
        });
    }

    std::vector<std::optional<Observation>> heads(n);
    std::vector<bool> exhausted(n, false);
    bool started = false;
    Timestamp origin{};
    ReplayClock::time_point wall_start{};
    for (;;) {
        std::optional<std::size_t> next;
        for (std::size_t i = 0; i < n; ++i) {
            if (!heads[i] && !exhausted[i]) {
                heads[i] = lanes[i]->pop();
                exhausted[i] = !heads[i].has_value();
            }
            if (heads[i] && (!next || heads[i]->ts < heads[*next]->ts)) {
                next = i;
            }
        }
        if (!next) {
            break;
        }
        const std::size_t i = *next;
        if (!started) {
            started = true;
            origin = heads[i]->ts;
            wall_start = clock.now();
        }
        const double speed = specs[i].replay_speed;
        if (speed > 0.0 && heads[i]->ts > origin) {
            auto event_offset = std::chrono::duration<double, std::micro>((heads[i]->ts - origin).count());
            auto release = wall_start +
                std::chrono::duration_cast<ReplayClock::time_point::duration>(event_offset / speed);
            if (release > clock.now()) {
                clock.sleep_until(release);
            }
        }
        deliver(*heads[i], sink, merge_reports[i]);
        heads[i].reset();
    }
    for (auto& t : readers) {
        t.join();
    }
    IngestReport total;
    for (std::size_t i = 0; i < n; ++i) {
        total += reader_reports[i];
        total += merge_reports[i];
    }
    return total;
}

} // namespace qcity
