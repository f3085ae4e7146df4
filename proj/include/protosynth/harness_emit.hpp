#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "protosynth/error.hpp"
#include "protosynth/json.hpp"
#include "protosynth/llm_gateway.hpp"
#include "protosynth/model_graph.hpp"

namespace protosynth {

enum class SlotRole { input, output, validity };
std::string slot_role_name(SlotRole role);

struct SymbolEntry {
  BaseSlot slot;
  SlotRole role = SlotRole::input;
};

// How each symbolic object in a generated program maps back to the main
// module's arguments.
struct SymbolMap {
  std::string model_id;
  std::string plan_fingerprint;
  std::string main;
  std::vector<ArgSpec> inputs;
  std::optional<ArgSpec> output;
  std::vector<SymbolEntry> entries;

  const SymbolEntry* find(const std::string& var) const;
  const SymbolEntry* validity() const;
  Json to_json() const;
  static SymbolMap from_json(const Json& j);
};

struct HarnessOptions {
  bool printable = true;  // restrict text bytes to printable ASCII
};

struct Harness {
  std::string text;  // the `int main()` definition
  SymbolMap symbols;
};

// Depends only on the plan, so every sample of a model shares it.
Harness emit_harness(const SynthesisPlan& plan, const HarnessOptions& options = {});

// C definition of a regex gate built on the embedded matcher.
std::string emit_regex_function(const SynthesisPlan& plan, const std::string& module);

struct FunctionProvenance {
  std::string function;
  std::string origin;  // "runtime", "regex", "native", or "completion:<module>"
};

struct GeneratedModel {
  std::string id;
  int sample_index = 0;
  std::string program_text;
  SymbolMap symbol_map;
  std::map<std::string, std::string> completions;  // module -> sanitized completion
  std::vector<FunctionProvenance> provenance;
  std::vector<std::string> notes;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

std::string model_id_for(int sample_index);

// `completions` maps every function module to its sanitized text. Throws
// AssemblyError on duplicate or conflicting definitions.
GeneratedModel assemble_program(const SynthesisPlan& plan, const std::map<std::string, std::string>& completions,
                                int sample_index = 0, const HarnessOptions& options = {});

struct SkippedSample {
  int index = 0;
  std::string reason;
};

struct EmitResult {
  std::vector<GeneratedModel> models;
  std::vector<SkippedSample> skipped;
};

// Model i combines sample i of every function module. Indices with a failed
// or unusable completion are skipped; throws Error when none survive.
EmitResult emit_all(const SynthesisPlan& plan, const std::map<std::string, SampleSet>& samples, int k,
                    const HarnessOptions& options = {});

// Writes model.c, symbols.json and provenance.json into `dir`.
void write_model(const GeneratedModel& model, const std::filesystem::path& dir);

}  // namespace protosynth
