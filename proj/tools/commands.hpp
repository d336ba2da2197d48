#pragma once

#include <ostream>
#include <stdexcept>
#include <string>

namespace elastic::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitNotConverged = 2,
  kExitInputError = 3,
  kExitConfigError = 4,
};

// Invalid flags or experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Parses argv (argv[0] is the program name), runs the subcommand and returns its exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace elastic::cli
