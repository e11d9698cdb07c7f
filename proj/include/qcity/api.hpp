#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "qcity/analytics.hpp"
#include "qcity/fusion.hpp"
#include "qcity/text.hpp"

namespace qcity {

struct ServiceConfig {
    Lexicon lexicon = Lexicon::builtin();
    Gazetteer gazetteer;
    // History length and flat-history threshold for /traffic.
    BurstParams burst;
    // Empty disables CORS headers.
    std::string allowed_origin;
    std::size_t record_cap = 100000;
    std::size_t top_terms = 10;
};

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

using QueryParams = std::map<std::string, std::string>;

// Read-only query layer over a BlockStore. Each call renders a complete
// JSON body from one consistent read view. Bodies are deterministic for an
// unchanged store: keys are sorted and every list has a fixed order.
// Only buckets <= bucket(watermark) - 1 at the requested granularity are
// reported.
class QueryService {
public:
    explicit QueryService(ServiceConfig config);

    void attach(std::shared_ptr<const BlockStore> store);
    std::shared_ptr<const BlockStore> store() const;
    const ServiceConfig& config() const { return m_config; }

    ApiResponse zones() const;
    ApiResponse density(const QueryParams& q) const;
    ApiResponse timeline(const QueryParams& q) const;
    ApiResponse events(const QueryParams& q) const;
    ApiResponse event_detail(std::string_view event_id) const;
    ApiResponse traffic(const QueryParams& q) const;

    // Dispatches a GET path ("/zones", "/events/<id>", ...).
    ApiResponse handle(std::string_view path, const QueryParams& q) const;

private:
    ServiceConfig m_config;
    mutable std::mutex m_mutex;
    std::shared_ptr<const BlockStore> m_store;
};

ApiResponse error_response(int status, std::string_view error, std::string_view detail);

} // namespace qcity
