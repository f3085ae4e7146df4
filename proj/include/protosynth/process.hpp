#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace protosynth {

struct ProcessResult {
  int exit_code = -1;  // 127 when the program could not be started
  bool timed_out = false;
  bool not_found = false;  // the program is not on PATH
  std::string out;
  std::string err;
  double wall_seconds = 0;
};

struct ProcessOptions {
  std::optional<std::filesystem::path> cwd;
  std::optional<std::chrono::milliseconds> timeout;
  std::string stdin_data;
};

// Runs argv[0] (searched on PATH) and captures both streams. On timeout the
// process group is killed. Never throws for child failures.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options = {});

// True when `program` resolves to an executable on PATH (or is a path to one).
bool program_available(const std::string& program);

}  // namespace protosynth
