#include <string>
#include <vector>

#include "nugget/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nugget::cli::run(args);
}
