#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace hexweb::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Deterministic text: keys in insertion order, two-space indent, finite
// doubles as %.17g, non-finite doubles as null.
std::string to_json_text(const Json& j);

// Throws IoError.
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace hexweb::io
