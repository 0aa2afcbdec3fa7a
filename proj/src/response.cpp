#include "cfgval/response.hpp"

namespace cfgval {

nlohmann::json to_json(const ValidationResponse& r) {
  return {{"hasError", r.has_error}, {"errParameter", r.err_parameters}, {"reason", r.reasons}};
}

std::string to_json_text(const ValidationResponse& r) { return to_json(r).dump(); }

}  // namespace cfgval
