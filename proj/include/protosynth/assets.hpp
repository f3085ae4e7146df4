#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace protosynth::assets {

namespace embedded {
extern const char* const system_prompt;
extern const char* const state_graph_prompt;
extern const char* const regex_match;
extern const char* const harness_prelude;
extern const char* const klee_shim;
}  // namespace embedded

// Files in the override directory replace the embedded text of the same
// name. The directory defaults to $PROTOSYNTH_ASSET_DIR when set.
void set_override_dir(std::optional<std::filesystem::path> dir);
std::optional<std::filesystem::path> override_dir();

std::string system_prompt();       // system_prompt.txt
std::string state_graph_prompt();  // state_graph_prompt.txt, with {{MODEL_SOURCE}}
std::string regex_match();         // regex_match.c
std::string harness_prelude();     // harness_prelude.c
std::string klee_shim();           // klee_shim/klee/klee.h, declarations only

}  // namespace protosynth::assets
