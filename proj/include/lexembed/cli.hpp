#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace lexembed::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,    // bad flags, bad configuration
  kNumeric = 3,  // divergence, undefined metrics
  kIo = 4,       // unreadable files, malformed formats
};

int run(int argc, char** argv);

// `args` excludes the program name.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

int exit_code_for(const std::exception& e);

// Flat key=value lines; blank lines and lines starting with '#' are skipped.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

}  // namespace lexembed::cli
