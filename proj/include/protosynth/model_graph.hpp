#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "protosynth/sem_types.hpp"

namespace protosynth {

struct ArgSpec {
  std::string name;
  Type type;
  std::string description;
  bool operator==(const ArgSpec&) const = default;
};

// Implemented by the LLM. The final argument is the output; the rest are inputs.
struct FunctionModule {
  std::string name;
  std::string description;
  std::vector<ArgSpec> args;
  bool operator==(const FunctionModule&) const = default;
};

// Built-in validity predicate over one text argument.
struct RegexModule {
  std::string name;
  std::string pattern;
  ArgSpec subject;
  bool operator==(const RegexModule&) const = default;
};

// User-supplied C code included verbatim. `args` is optional; without it the
// module can only be a callee.
struct NativeModule {
  std::string name;
  std::string prototype;  // e.g. "uint32_t mask(uint32_t len)"
  std::string body;       // complete definition(s)
  std::string description;
  std::optional<std::vector<ArgSpec>> args;
  bool operator==(const NativeModule&) const = default;
};

class ProtocolModule {
 public:
  enum class Kind { function, regex, native };

  static ProtocolModule function(std::string name, std::string description, std::vector<ArgSpec> args);
  // An empty name defaults to "valid_<subject>".
  static ProtocolModule regex(std::string pattern, ArgSpec subject, std::string name = {});
  static ProtocolModule native(NativeModule m);

  const std::string& name() const;
  Kind kind() const;
  std::string kind_name() const;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&value_);
  }

  // Input arguments (everything but the output).
  std::vector<ArgSpec> inputs() const;
  // Output argument; regex modules report a synthetic boolean.
  std::optional<ArgSpec> output() const;
  // Whether the module has a typed signature (all but argument-less natives).
  bool has_signature() const;

  bool operator==(const ProtocolModule&) const = default;

 private:
  explicit ProtocolModule(std::variant<FunctionModule, RegexModule, NativeModule> v) : value_(std::move(v)) {}
  std::variant<FunctionModule, RegexModule, NativeModule> value_;
};

struct Pipe {
  std::string source;
  std::string target;
};

struct CallEdge {
  std::string caller;
  std::vector<std::string> callees;
};

// Source input i is bound to target argument target_args[i].
struct PipeBinding {
  std::string source;
  std::string target;
  std::vector<std::size_t> target_args;
  bool operator==(const PipeBinding&) const = default;
};

class DependencyGraph {
 public:
  const std::vector<ProtocolModule>& modules() const { return modules_; }
  const std::vector<Pipe>& pipes() const { return pipes_; }
  const std::vector<CallEdge>& call_edges() const { return call_edges_; }
  const std::vector<PipeBinding>& bindings() const { return bindings_; }

  const ProtocolModule* find(const std::string& name) const;
  const ProtocolModule& at(const std::string& name) const;

  // Direct callees of `name` in declaration order, duplicates removed.
  std::vector<std::string> callees_of(const std::string& name) const;
  bool is_callee(const std::string& name) const;

  // Every argument/subject type in module declaration order.
  std::vector<Type> all_types() const;

 private:
  friend DependencyGraph build_graph(std::vector<ProtocolModule>, std::vector<Pipe>, std::vector<CallEdge>);
  std::vector<ProtocolModule> modules_;
  std::vector<Pipe> pipes_;
  std::vector<CallEdge> call_edges_;
  std::vector<PipeBinding> bindings_;
};

// Validates everything and binds pipes eagerly. Throws ValidationError or
// CycleError.
DependencyGraph build_graph(std::vector<ProtocolModule> modules, std::vector<Pipe> pipes,
                            std::vector<CallEdge> call_edges);

// Fluent construction mirroring Pipe/CallEdge declarations; modules passed
// to pipe()/call_edge() are registered on first use.
class GraphBuilder {
 public:
  GraphBuilder& add(const ProtocolModule& m);
  GraphBuilder& pipe(const ProtocolModule& source, const ProtocolModule& target);
  GraphBuilder& call_edge(const ProtocolModule& caller, const std::vector<ProtocolModule>& callees);
  DependencyGraph build() const;

 private:
  std::vector<ProtocolModule> modules_;
  std::vector<Pipe> pipes_;
  std::vector<CallEdge> call_edges_;
};

// Callees and pipe sources precede their dependents; ties prefer regex
// modules, then lexicographic name order.
std::vector<std::string> topo_order(const DependencyGraph& g);

struct SynthesisPlan {
  DependencyGraph graph;
  std::string main;
  // Every module in final program order.
  std::vector<std::string> assembly_order;
  // Direct callees per module (their prototypes go into its prompt).
  std::map<std::string, std::vector<std::string>> prompt_context;
  // Pipes into main, in declaration order; all must pass for a valid input.
  std::vector<PipeBinding> gates;
  // All model types, in first-use order; drives typedef rendering.
  std::vector<Type> types;

  const ProtocolModule& main_module() const { return graph.at(main); }
  // LLM-implemented modules in assembly order.
  std::vector<std::string> function_modules() const;

  std::string serialize() const;  // canonical JSON text
  std::string fingerprint() const;
};

// Throws ValidationError: ambiguous default main, unknown main, or a pipe
// whose target is not main.
SynthesisPlan synthesize_plan(const DependencyGraph& g, const std::optional<std::string>& main = std::nullopt);

}  // namespace protosynth
