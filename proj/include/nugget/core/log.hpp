#pragma once

#include <string_view>

namespace nugget {

// Accepts spdlog level names ("trace", "debug", "info", "warn", "error",
// "critical", "off"). Returns false for an unknown name.
bool set_log_level(std::string_view level);

}  // namespace nugget
