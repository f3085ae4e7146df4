#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "protosynth/error.hpp"
#include "protosynth/json.hpp"
#include "protosynth/llm_gateway.hpp"

namespace protosynth {

struct Transition {
  std::string from;
  std::string input;
  std::string to;
  bool operator==(const Transition&) const = default;
};

struct StateGraph {
  std::vector<std::string> states;  // first mention order
  std::vector<Transition> transitions;  // declaration order, keys unique
  std::string initial;

  std::optional<std::string> next(const std::string& state, const std::string& input) const;
  bool has_state(const std::string& s) const;
  std::vector<std::string> validate() const;

  Json to_json() const;
  static StateGraph from_json(const Json& j);
  bool operator==(const StateGraph&) const = default;
};

class StateGraphError : public Error {
 public:
  StateGraphError(const std::string& what, std::string raw) : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

// Extracts the outermost brace literal (fenced or not, with or without an
// assignment in front) and reads its ("S", "in"): "T" pairs. A repeated key
// keeps its first position and takes the last value. The initial state is
// INITIAL when mentioned, else the first of `state_order`, else the first
// state mentioned. Throws ParseError.
StateGraph parse_transition_dict(std::string_view completion, const std::vector<std::string>& state_order = {});

// Python dictionary literal; parse_transition_dict(render(g)) == g.
std::string render_transition_dict(const StateGraph& g);

class UnreachableState : public Error {
 public:
  using Error::Error;
};

// Shortest input sequence from g.initial to `target`. Among equally short
// paths the first in transition declaration order wins. Throws
// UnreachableState, or Error for an unknown target.
std::vector<std::string> input_prefix(const StateGraph& g, const std::string& target);

// Replays `inputs` from the initial state; nullopt when a step has no
// transition.
std::optional<std::string> replay(const StateGraph& g, const std::vector<std::string>& inputs);

// Renders the extraction prompt for `model_source`, asks the backend once at
// temperature 0 (sample 0) and parses the reply. Throws StateGraphError with
// the raw reply when it cannot be parsed.
StateGraph extract_state_graph(const std::string& model_source, CompletionBackend& backend,
                               const GenerationConfig& cfg, const std::vector<std::string>& state_order = {});

}  // namespace protosynth
