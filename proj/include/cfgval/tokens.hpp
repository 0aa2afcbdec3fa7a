#pragma once

#include <cstddef>
#include <functional>
#include <string_view>

namespace cfgval {

/// Maps prompt text to a token count. Backends with a real tokenizer plug
/// in their own.
using TokenEstimator = std::function<std::size_t(std::string_view)>;

/// ceil(code points / 4).
std::size_t estimate_tokens(std::string_view text);

}  // namespace cfgval
