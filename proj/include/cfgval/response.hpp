#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace cfgval {

/// One structured answer from a model (or the ground truth for a shot).
struct ValidationResponse {
  bool has_error = false;
  std::vector<std::string> err_parameters;
  std::vector<std::string> reasons;

  friend bool operator==(const ValidationResponse&, const ValidationResponse&) = default;
};

/// `{"hasError": ..., "errParameter": [...], "reason": [...]}`
nlohmann::json to_json(const ValidationResponse& r);
std::string to_json_text(const ValidationResponse& r);

}  // namespace cfgval
