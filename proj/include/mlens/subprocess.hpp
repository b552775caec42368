#pragma once

#include <optional>
#include <string>
#include <vector>

namespace mlens {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
  bool ok() const { return exit_code == 0; }
};

struct ProcessOptions {
  std::optional<std::string> stdin_data;
  std::optional<std::string> cwd;
  std::vector<std::pair<std::string, std::string>> env;  // overrides on top of the inherited env
};

// Run a command without a shell, capturing stdout and stderr.
// Throws IoFailure if the process cannot be spawned.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& opts = {});

}  // namespace mlens
