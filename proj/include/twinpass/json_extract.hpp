#pragma once

#include <string>

#include <json.hpp>

namespace twinpass {

// Recovers the first balanced top-level JSON object from raw model
// output. Strips markdown code fences and surrounding prose, and
// repairs trailing commas. Anything deeper is a hard ExtractionError
// carrying the original text.
nlohmann::json extract_json(const std::string& text);

}  // namespace twinpass
