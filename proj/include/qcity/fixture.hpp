#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace qcity {

inline constexpr std::uint64_t kDefaultFixtureSeed = 2016;

struct FixtureOutput {
    std::filesystem::path zones;            // zones.geojson or grid.json
    std::vector<std::filesystem::path> inputs; // observation JSONL files
    std::filesystem::path lexicon;
    std::filesystem::path gazetteer;
    std::filesystem::path ground_truth;
    std::size_t observations = 0;
};

// Deterministic synthetic city data. Scenarios:
//   "tournament" - nine polygon districts over January 2016 with two tennis
//                  tournaments at the same venue, one in the first week and
//                  one in the last; ground_truth.json lists both bursts with
//                  their entity label and planted sentiment mean.
//   "steady"     - one hour of grid-partitioned sensor and social traffic
//                  without bursts, for replay comparisons.
// Throws Error(InvalidArgument) for an unknown scenario.
FixtureOutput write_fixture(std::string_view scenario, const std::filesystem::path& out_dir,
    std::uint64_t seed = kDefaultFixtureSeed);

} // namespace qcity
