#include "nugget/core/log.hpp"

#include <spdlog/spdlog.h>

#include <string>

namespace nugget {

bool set_log_level(std::string_view level) {
  static constexpr std::string_view kNames[] = {"trace", "debug", "info", "warn",
                                                "error", "critical", "off"};
  for (std::string_view name : kNames) {
    if (name == level) {
      spdlog::set_level(spdlog::level::from_str(std::string(level)));
      return true;
    }
  }
  return false;
}

}  // namespace nugget
