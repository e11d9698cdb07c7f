#include "cli.hpp"

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "qcity/analytics.hpp"
#include "qcity/api.hpp"
#include "qcity/error.hpp"
#include "qcity/fixture.hpp"
#include "qcity/http_server.hpp"
#include "qcity/ingestion.hpp"
#include "qcity/persistence.hpp"
#include "qcity/spatial.hpp"

namespace qcity::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) {
    g_stop = true;
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        auto next = s.find(sep, pos);
        parts.emplace_back(s.substr(pos, next == std::string_view::npos ? next : next - pos));
        if (next == std::string_view::npos) {
            return parts;
        }
        pos = next + 1;
    }
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw UsageError("bad " + what + " '" + s + "'");
    }
}

std::vector<Granularity> parse_granularities(const std::string& text) {
    std::vector<Granularity> out;
    for (const auto& part : split(text, ',')) {
        double v = parse_double(part, "granularity");
        if (v <= 0 || v != static_cast<double>(static_cast<std::int64_t>(v))) {
            throw UsageError("granularity must be a positive whole number of seconds: '" + part + "'");
        }
        out.emplace_back(static_cast<std::int64_t>(v));
    }
    return out;
}

Granularity parse_granularity(const std::string& text) {
    auto gs = parse_granularities(text);
    if (gs.size() != 1) {
        throw UsageError("expected one granularity, got '" + text + "'");
    }
    return gs.front();
}

Timestamp parse_time_arg(const std::string& text, const char* what) {
    try {
        return parse_rfc3339(text);
    } catch (const Error&) {
        throw UsageError(std::string("bad --") + what + " timestamp '" + text + "'");
    }
}

std::shared_ptr<const ZonePartition> load_partition(const std::string& zones, const std::string& grid) {
    if (!zones.empty()) {
        return std::make_shared<const ZonePartition>(ZonePartition::from_geojson_file(zones));
    }
    if (fs::exists(grid)) {
        std::ifstream in(grid);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::BadZoneFile, grid + ": " + e.what());
        }
        return std::make_shared<const ZonePartition>(ZonePartition::from_grid(grid_spec_from_json(j)));
    }
    auto parts = split(grid, ',');
    if (parts.size() != 5) {
        throw UsageError("--grid expects a JSON file or min_lat,min_lon,max_lat,max_lon,cell_size_deg");
    }
    GridSpec spec{parse_double(parts[0], "grid"), parse_double(parts[1], "grid"), parse_double(parts[2], "grid"),
        parse_double(parts[3], "grid"), parse_double(parts[4], "grid")};
    return std::make_shared<const ZonePartition>(ZonePartition::from_grid(spec));
}

struct InputArgs {
    std::vector<std::string> any;
    std::vector<std::string> sensor;
    std::vector<std::string> social;
};

std::vector<SourceSpec> source_specs(const InputArgs& in, double speed) {
    std::vector<SourceSpec> specs;
    auto add = [&](const std::string& path, std::optional<Source> hint) {
        if (!fs::exists(path)) {
            throw Error(ErrorCode::FileNotFound, path);
        }
        specs.push_back(SourceSpec{fs::path(path).stem().string(), path, hint, speed});
    };
    for (const auto& p : in.any) {
        add(p, std::nullopt);
    }
    for (const auto& p : in.sensor) {
        add(p, Source::sensor);
    }
    for (const auto& p : in.social) {
        add(p, Source::social);
    }
    if (specs.empty()) {
        throw UsageError("at least one --input, --sensor or --social file is required");
    }
    return specs;
}

// Opens the store at `dir` when it already holds one, otherwise creates
// an empty store over the given partition.
std::shared_ptr<BlockStore> open_store(const fs::path& dir, const std::string& zones, const std::string& grid,
    const std::string& granularities, StoreOptions options) {
    if (fs::exists(dir / "manifest.json")) {
        auto store = std::shared_ptr<BlockStore>(load(dir, options));
        if (!zones.empty() || !grid.empty()) {
            auto part = load_partition(zones, grid);
            if (!(*part == store->partition())) {
                throw Error(ErrorCode::InvalidArgument, "store " + dir.string() + " was built with a different partition");
            }
        }
        if (!granularities.empty()) {
            auto want = parse_granularities(granularities);
            std::sort(want.begin(), want.end());
            if (want != store->granularities()) {
                throw Error(ErrorCode::InvalidArgument, "store " + dir.string() + " uses different granularities");
            }
        }
        return store;
    }
    if (zones.empty() == grid.empty()) {
        throw UsageError("a new store needs exactly one of --zones or --grid");
    }
    auto gs = granularities.empty() ? default_granularities() : parse_granularities(granularities);
    return std::make_shared<BlockStore>(load_partition(zones, grid), gs, options);
}

void copy_text_resources(const fs::path& store, const std::string& lexicon, const std::string& gazetteer) {
    if (!lexicon.empty()) {
        Lexicon::from_tsv_file(lexicon); // validate before copying
        fs::copy_file(lexicon, store / "lexicon.tsv", fs::copy_options::overwrite_existing);
    }
    if (!gazetteer.empty()) {
        Gazetteer::from_tsv_file(gazetteer);
        fs::copy_file(gazetteer, store / "gazetteer.tsv", fs::copy_options::overwrite_existing);
    }
}

Gazetteer resolve_gazetteer(const fs::path& store, const std::string& flag) {
    if (!flag.empty()) {
        return Gazetteer::from_tsv_file(flag);
    }
    if (fs::exists(store / "gazetteer.tsv")) {
        return Gazetteer::from_tsv_file(store / "gazetteer.tsv");
    }
    return {};
}

Lexicon resolve_lexicon(const fs::path& store, const std::string& flag) {
    if (!flag.empty()) {
        return Lexicon::from_tsv_file(flag);
    }
    if (fs::exists(store / "lexicon.tsv")) {
        return Lexicon::from_tsv_file(store / "lexicon.tsv");
    }
    return Lexicon::builtin();
}

void print_report(std::ostream& out, const IngestReport& r) {
    out << to_json(r).dump() << '\n';
}

void wait_for_signal() {
    while (!g_stop) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
}

void install_signals() {
    g_stop = false;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
}

std::string default_store() {
    const char* env = std::getenv("QCITY_STORE");
    return env ? env : "";
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"qcity: spatio-temporal fusion of city sensor and social data"};
    app.require_subcommand(1);

    std::string store_dir = default_store();
    std::string zones, grid, granularities, lexicon, gazetteer;
    InputArgs inputs;
    bool as_json = false;

    auto add_store = [&](CLI::App* sub) {
        auto* opt = sub->add_option("--store", store_dir, "store directory (default $QCITY_STORE)");
        if (store_dir.empty()) {
            opt->required();
        }
    };
    auto add_ingest_opts = [&](CLI::App* sub) {
        sub->add_option("--zones", zones, "GeoJSON FeatureCollection of zone polygons");
        sub->add_option("--grid", grid, "grid JSON file or min_lat,min_lon,max_lat,max_lon,cell_size_deg");
        sub->add_option("--input", inputs.any, "observation JSONL file (repeatable)");
        sub->add_option("--sensor", inputs.sensor, "sensor JSONL file (repeatable)");
        sub->add_option("--social", inputs.social, "social JSONL file (repeatable)");
        sub->add_option("--granularity", granularities, "comma separated bucket widths in seconds (default 20,300)");
        sub->add_option("--lexicon", lexicon, "polarity lexicon TSV to keep with the store");
        sub->add_option("--gazetteer", gazetteer, "gazetteer TSV to keep with the store");
        sub->add_flag("--json", as_json, "report is always JSON; accepted for symmetry");
        add_store(sub);
    };

    auto* ingest_cmd = app.add_subcommand("ingest", "batch ingest JSONL files into a store");
    add_ingest_opts(ingest_cmd);

    double speed = 0.0;
    int serve_port = -1;
    bool keep_serving = false;
    std::string origin;
    auto* replay_cmd = app.add_subcommand("replay", "replay JSONL files as a live feed");
    add_ingest_opts(replay_cmd);
    replay_cmd->add_option("--speed", speed, "event-time seconds per wall second; 0 = as fast as possible");
    replay_cmd->add_option("--serve", serve_port, "serve the API on this port while replaying");
    replay_cmd->add_flag("--keep-serving", keep_serving, "keep serving after the replay finishes");
    replay_cmd->add_option("--origin", origin, "allowed CORS origin");

    auto* analyze_cmd = app.add_subcommand("analyze", "run analytics over a store");
    analyze_cmd->require_subcommand(1);
    auto* events_cmd = analyze_cmd->add_subcommand("events", "detect and label burst events");
    std::string from_text, to_text, granularity_text = "300", params_text;
    events_cmd->add_option("--from", from_text, "range start, RFC 3339")->required();
    events_cmd->add_option("--to", to_text, "range end (exclusive), RFC 3339")->required();
    events_cmd->add_option("--granularity", granularity_text, "bucket width in seconds (default 300)");
    events_cmd->add_option("--params", params_text, "W,k,min_count (default 12,3,5)");
    events_cmd->add_option("--gazetteer", gazetteer, "gazetteer TSV (default: the store's copy)");
    events_cmd->add_flag("--json", as_json, "print events as JSON lines");
    add_store(events_cmd);

    int port = 8080;
    std::string host = "127.0.0.1";
    auto* serve_cmd = app.add_subcommand("serve", "serve the query API over a store");
    serve_cmd->add_option("--port", port, "TCP port (0 picks a free one)");
    serve_cmd->add_option("--host", host, "bind address");
    serve_cmd->add_option("--lexicon", lexicon, "polarity lexicon TSV (default: the store's copy)");
    serve_cmd->add_option("--gazetteer", gazetteer, "gazetteer TSV (default: the store's copy)");
    serve_cmd->add_option("--origin", origin, "allowed CORS origin");
    add_store(serve_cmd);

    std::string scenario = "tournament", fixture_out;
    std::uint64_t seed = kDefaultFixtureSeed;
    auto* fixture_cmd = app.add_subcommand("fixture", "write a synthetic dataset");
    fixture_cmd->add_option("--scenario", scenario, "tournament | steady")
        ->check(CLI::IsMember({"tournament", "steady"}));
    fixture_cmd->add_option("--out", fixture_out, "output directory")->required();
    fixture_cmd->add_option("--seed", seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        if (ingest_cmd->parsed()) {
            auto store = open_store(store_dir, zones, grid, granularities, {});
            auto specs = source_specs(inputs, 0.0);
            auto report = ingest_files(specs, sink_for(*store));
            fs::create_directories(store_dir);
            snapshot(*store, store_dir);
            copy_text_resources(store_dir, lexicon, gazetteer);
            print_report(out, report);
            return report.source_errors.empty() ? 0 : 1;
        }
        if (replay_cmd->parsed()) {
            if (!(speed >= 0.0)) {
                throw UsageError("--speed must be >= 0");
            }
            auto store = open_store(store_dir, zones, grid, granularities,
                StoreOptions{kDefaultLatenessBuckets});
            auto specs = source_specs(inputs, speed);
            fs::create_directories(store_dir);
            copy_text_resources(store_dir, lexicon, gazetteer);

            std::unique_ptr<QueryService> service;
            std::unique_ptr<ApiServer> server;
            if (serve_port >= 0) {
                ServiceConfig cfg;
                cfg.lexicon = resolve_lexicon(store_dir, lexicon);
                cfg.gazetteer = resolve_gazetteer(store_dir, gazetteer);
                cfg.allowed_origin = origin;
                service = std::make_unique<QueryService>(std::move(cfg));
                service->attach(store);
                server = std::make_unique<ApiServer>(*service);
                int bound = server->bind(host, serve_port);
                err << "serving on http://" << host << ":" << bound << '\n';
                server->start();
            }
            install_signals();
            SystemReplayClock clock;
            auto report = replay(specs, clock, sink_for(*store));
            snapshot(*store, store_dir);
            print_report(out, report);
            out.flush();
            if (server && keep_serving) {
                wait_for_signal();
            }
            return report.source_errors.empty() ? 0 : 1;
        }
        if (events_cmd->parsed()) {
            const Timestamp from = parse_time_arg(from_text, "from");
            const Timestamp to = parse_time_arg(to_text, "to");
            if (!(from < to)) {
                throw UsageError("--from must be before --to");
            }
            const Granularity g = parse_granularity(granularity_text);
            BurstParams params;
            if (!params_text.empty()) {
                try {
                    params = parse_burst_params(params_text);
                } catch (const Error& e) {
                    throw UsageError(e.what());
                }
            }
            auto store = load(store_dir);
            if (!store->read([&](const StoreState& s) { return s.has_granularity(g.seconds()); })) {
                throw Error(ErrorCode::InvalidArgument,
                    "store has no " + std::to_string(g.seconds()) + " s granularity");
            }
            const auto gaz = resolve_gazetteer(store_dir, gazetteer);
            BucketRange range{time_bucket(from, g), time_bucket(to - std::chrono::microseconds(1), g)};
            if (auto horizon = store->read([&](const StoreState& s) { return s.closed_horizon(g, store->options().lateness_buckets); })) {
                range.end = std::min(range.end, *horizon);
            } else {
                range.end = range.start - 1;
            }
            std::vector<Event> found;
            if (range.end >= range.start) {
                try {
                    found = store->read([&](const StoreState& s) { return detect_city_events(s, g, range, params, gaz); });
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::SeriesTooShort) {
                        throw;
                    }
                    err << "warning: " << e.what() << '\n';
                }
            }
            auto merged = merge_events(store->read([](const StoreState& s) { return s.events; }), found, g, range);
            store->set_events(std::move(merged));
            snapshot(*store, store_dir);
            for (const auto& e : found) {
                if (as_json) {
                    out << to_json(e).dump() << '\n';
                } else {
                    out << e.event_id << ' ' << e.zone_id << ' ' << format_rfc3339(bucket_start(e.bucket_range.start, g))
                        << ' ' << format_rfc3339(bucket_start(e.bucket_range.end + 1, g)) << " peak " << e.peak_count
                        << " label " << e.label.value_or("-") << '\n';
                }
            }
            if (!as_json) {
                out << found.size() << " event(s)\n";
            }
            return 0;
        }
        if (serve_cmd->parsed()) {
            std::shared_ptr<BlockStore> store = load(store_dir);
            ServiceConfig cfg;
            cfg.lexicon = resolve_lexicon(store_dir, lexicon);
            cfg.gazetteer = resolve_gazetteer(store_dir, gazetteer);
            cfg.allowed_origin = origin;
            QueryService service(std::move(cfg));
            service.attach(store);
            ApiServer server(service);
            int bound = server.bind(host, port);
            err << "serving on http://" << host << ":" << bound << '\n';
            install_signals();
            server.start();
            wait_for_signal();
            server.stop();
            return 0;
        }
        if (fixture_cmd->parsed()) {
            auto res = write_fixture(scenario, fixture_out, seed);
            out << "wrote " << res.observations << " observations to " << fs::path(fixture_out).string() << '\n';
            return 0;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

} // namespace qcity::cli
