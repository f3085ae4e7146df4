#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "protosynth/diff_harness.hpp"
#include "protosynth/engine.hpp"
#include "protosynth/harness_emit.hpp"
#include "protosynth/json.hpp"
#include "protosynth/llm_gateway.hpp"
#include "protosynth/model_graph.hpp"

namespace protosynth {

// Declarative model description mirroring the builder API:
//   {"name", "types": {name: type}, "modules": [...], "pipes": [{"source", "target"}],
//    "call_edges": [{"caller", "callees": [...]}], "main"?, "generation"?, "backend"?,
//    "engine"?, "protocol"?, "harness"?: {"printable"}}
// Modules: {"kind": "function", "name", "description", "args": [{"name", "type", "description"}]}
//          {"kind": "regex", "name"?, "pattern", "subject": arg}
//          {"kind": "native", "name", "prototype", "body" | "body_file", "description"?, "args"?}
// Relative paths resolve against `base_dir` (the manifest's directory by default).
struct Manifest {
  std::string name;
  std::filesystem::path base_dir;
  DependencyGraph graph;
  std::optional<std::string> main;
  GenerationConfig generation;
  BackendConfig backend;
  EngineConfig engine;
  ProtocolConfig protocol;
  HarnessOptions harness;
  Json raw;  // the source tree with "base_dir" filled in

  SynthesisPlan plan() const { return synthesize_plan(graph, main); }
};

// Throws ValidationError listing every violation, or CycleError.
Manifest parse_manifest(const Json& j, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);

GenerationConfig generation_from_json(const Json& j);
BackendConfig backend_from_json(const Json& j, const std::filesystem::path& base_dir);
EngineConfig engine_from_json(const Json& j, const std::filesystem::path& base_dir);

}  // namespace protosynth
