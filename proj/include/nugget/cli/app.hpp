#pragma once

#include <string>
#include <vector>

namespace nugget::cli {

// Exit statuses: 0 success, 1 a stage failed, 2 bad configuration, usage or
// a missing input file.
inline constexpr int kExitStageError = 1;
inline constexpr int kExitConfigError = 2;

// Entry point of the nuggetctl tool; `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace nugget::cli
