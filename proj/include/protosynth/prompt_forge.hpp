#pragma once

#include <string>
#include <vector>

#include "protosynth/error.hpp"
#include "protosynth/model_graph.hpp"
#include "protosynth/sem_types.hpp"

namespace protosynth {

struct PromptPair {
  std::string system;
  std::string user;
  std::string target_module;
};

// The six headers every prompt and generated program starts with.
const std::vector<std::string>& include_preamble();

// C-level view of a plan: one type table for the whole model plus
// signatures and doc comments per module.
class ModelRendering {
 public:
  explicit ModelRendering(const SynthesisPlan& plan);

  const CTypeTable& types() const { return table_; }
  // `bool record_applies(char* query, Record record)`; natives use their
  // declared prototype verbatim.
  std::string signature(const std::string& module) const;
  // `// description` ... `// Return Value:` block, one line per element.
  std::vector<std::string> doc_comment(const std::string& module) const;
  // Typedef lines needed by the module's own signature, in table order.
  std::vector<std::string> typedefs_for(const std::string& module) const;

 private:
  const SynthesisPlan* plan_;
  CTypeTable table_;
};

std::string render_user_prompt(const SynthesisPlan& plan, const std::string& module);
std::string render_system_prompt();
// Throws Error on empty source.
std::string render_state_graph_prompt(const std::string& model_source);
PromptPair make_prompt(const SynthesisPlan& plan, const std::string& module);

class SanitizeError : public Error {
 public:
  using Error::Error;
};

// Strips fences and surrounding prose, then checks that the module's exact
// signature and every typedef its prompt carried are present and unaltered.
// Throws SanitizeError.
std::string sanitize_completion(const std::string& raw, const SynthesisPlan& plan, const std::string& module);

}  // namespace protosynth
