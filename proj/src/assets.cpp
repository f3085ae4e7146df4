#include "protosynth/assets.hpp"

#include <cstdlib>
#include <mutex>

#include "protosynth/util.hpp"

namespace protosynth::assets {

namespace {

std::mutex& dir_mutex() {
  static std::mutex m;
  return m;
}

std::optional<std::filesystem::path>& dir_slot() {
  static std::optional<std::filesystem::path> dir = []() -> std::optional<std::filesystem::path> {
    if (const char* env = std::getenv("PROTOSYNTH_ASSET_DIR"); env != nullptr && *env != '\0') return env;
    return std::nullopt;
  }();
  return dir;
}

std::string lookup(const char* file, const char* fallback) {
  if (auto dir = override_dir()) {
    auto path = *dir / file;
    if (std::filesystem::is_regular_file(path)) return util::read_file(path);
  }
  return fallback;
}

}  // namespace

void set_override_dir(std::optional<std::filesystem::path> dir) {
  std::lock_guard lock(dir_mutex());
  dir_slot() = std::move(dir);
}

std::optional<std::filesystem::path> override_dir() {
  std::lock_guard lock(dir_mutex());
  return dir_slot();
}

std::string system_prompt() { return lookup("system_prompt.txt", embedded::system_prompt); }
std::string state_graph_prompt() { return lookup("state_graph_prompt.txt", embedded::state_graph_prompt); }
std::string regex_match() { return lookup("regex_match.c", embedded::regex_match); }
std::string harness_prelude() { return lookup("harness_prelude.c", embedded::harness_prelude); }
std::string klee_shim() { return lookup("klee_shim/klee/klee.h", embedded::klee_shim); }

}  // namespace protosynth::assets
