#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "ieaie/attack.hpp"
#include "ieaie/keystream.hpp"
#include "ieaie/metrics.hpp"
#include "ieaie/precision_lab.hpp"

namespace ieaie {

using Json = nlohmann::ordered_json;

/// Every report carries {"schema": kReportSchema, "kind": ...}.
inline constexpr std::string_view kReportSchema = "ieaie-report/1";

Json report_header(std::string_view kind);

Json to_json(Position p);
Json to_json(const Image& img);  ///< rows of pixel values
Json to_json(const GraphStats& stats);
Json to_json(const Correlation& c);
Json to_json(const MetricsReport& m);
Json to_json(const Keystream& ks);
Json to_json(const EquivalentKey& key);
Json to_json(const QueryRecord& q);
Json to_json(const VerificationReport& v);

/// Reverse of to_json(EquivalentKey); throws FormatError on malformed input.
EquivalentKey equivalent_key_from_json(const Json& j);

void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace ieaie
