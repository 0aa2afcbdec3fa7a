#pragma once

// JSON documents describing one project's parameter specifications.
// Schema: docs/spec-format.md

#include <filesystem>

#include "cfgval/constraints.hpp"
#include "json.hpp"

namespace cfgval {

SpecSet spec_set_from_json(const nlohmann::json& doc);
nlohmann::json spec_set_to_json(const SpecSet& specs);

/// Throws SpecError when the file is missing, unparsable or inconsistent.
SpecSet load_spec_set(const std::filesystem::path& path);

}  // namespace cfgval
