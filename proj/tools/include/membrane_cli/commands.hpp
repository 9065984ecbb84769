#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace membrane::cli {

enum ExitCode : int { kOk = 0, kCriterionFailed = 1, kUsage = 2, kInternal = 3 };

// Runs the tool on argv-style arguments (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// flag > MEMBRANE_SEED > 42
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag);

// SOURCE_DATE_EPOCH when set, otherwise the current time; ISO 8601 UTC.
std::string manifest_timestamp();

nlohmann::json make_manifest(const std::string& command, const std::string& scene_path,
                             const nlohmann::json& parameters, std::uint64_t seed);

}  // namespace membrane::cli
