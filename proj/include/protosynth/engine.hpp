#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "protosynth/harness_emit.hpp"
#include "protosynth/json.hpp"

namespace protosynth {

struct EngineConfig {
  // "docker" or "podman" run the toolchain inside `image`; "local" uses the
  // host toolchain; "fixture:<dir>" replays checked-in test files instead.
  std::string runtime = "docker";
  std::string image = "klee/klee:3.0";
  std::string clang = "clang";
  std::string klee = "klee";
  // Directory containing klee/klee.h. Unset: the image's source tree in a
  // container, or the bundled declarations-only header locally.
  std::optional<std::string> klee_include;
  std::chrono::seconds timeout{300};
  std::vector<std::string> extra_flags;
  bool keep_invalid = false;

  bool is_container() const { return runtime == "docker" || runtime == "podman"; }
  std::optional<std::filesystem::path> fixture_dir() const;
  // Throws ValidationError for an unknown runtime.
  void validate() const;
};

// The fixed engine flag set, with the timeout spelled in seconds.
std::vector<std::string> engine_flags(std::chrono::seconds timeout);

struct CompileResult {
  bool ok = false;
  std::filesystem::path bitcode;
  std::string diagnostics;
  std::vector<std::string> command;
};

// Writes model.c into `workdir` (if absent) and builds model.bc. A compile
// error is returned as data; a missing toolchain or runtime throws
// EnvironmentError.
CompileResult compile_bitcode(const GeneratedModel& model, const std::filesystem::path& workdir,
                              const EngineConfig& cfg);

struct EngineRunReport {
  std::string model_id;
  bool compiled = true;
  std::string compile_diagnostics;
  std::size_t test_count = 0;
  int exit_status = 0;
  double wall_seconds = 0;
  bool timeout_hit = false;
  std::string stderr_text;
  std::vector<std::string> command;
  std::size_t reconstructed = 0;
  std::vector<std::string> discarded;  // "<file>: <reason>"

  Json to_json() const;
  static EngineRunReport from_json(const Json& j);
};

// Runs the engine on `bitcode`, collecting *.ktest files into `test_dir`.
// In fixture mode `bitcode` is ignored and the fixture files for `model_id`
// are copied instead.
EngineRunReport run_engine(const std::string& model_id, const std::filesystem::path& bitcode,
                           const std::filesystem::path& test_dir, const EngineConfig& cfg);

// Test files in `dir`, sorted by name.
std::vector<std::filesystem::path> list_ktests(const std::filesystem::path& dir);

}  // namespace protosynth
