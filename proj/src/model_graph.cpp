#include "protosynth/model_graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

#include <json.hpp>

#include "protosynth/error.hpp"
#include "protosynth/regex.hpp"
#include "protosynth/util.hpp"

namespace protosynth {

ProtocolModule ProtocolModule::function(std::string name, std::string description, std::vector<ArgSpec> args) {
  return ProtocolModule(FunctionModule{std::move(name), std::move(description), std::move(args)});
}

ProtocolModule ProtocolModule::regex(std::string pattern, ArgSpec subject, std::string name) {
  if (name.empty()) name = "valid_" + subject.name;
  return ProtocolModule(RegexModule{std::move(name), std::move(pattern), std::move(subject)});
}

ProtocolModule ProtocolModule::native(NativeModule m) { return ProtocolModule(std::move(m)); }

const std::string& ProtocolModule::name() const {
  return std::visit([](const auto& m) -> const std::string& { return m.name; }, value_);
}

ProtocolModule::Kind ProtocolModule::kind() const { return static_cast<Kind>(value_.index()); }

std::string ProtocolModule::kind_name() const {
  switch (kind()) {
    case Kind::function:
      return "function";
    case Kind::regex:
      return "regex";
    case Kind::native:
      return "native";
  }
  return "?";
}

std::vector<ArgSpec> ProtocolModule::inputs() const {
  if (const auto* f = as<FunctionModule>()) {
    if (f->args.empty()) return {};
    return {f->args.begin(), f->args.end() - 1};
  }
  if (const auto* r = as<RegexModule>()) return {r->subject};
  const auto& n = std::get<NativeModule>(value_);
  if (!n.args || n.args->empty()) return {};
  return {n.args->begin(), n.args->end() - 1};
}

std::optional<ArgSpec> ProtocolModule::output() const {
  if (const auto* f = as<FunctionModule>()) {
    if (f->args.empty()) return std::nullopt;
    return f->args.back();
  }
  if (const auto* r = as<RegexModule>()) {
    return ArgSpec{"result", Type::boolean(), "Whether " + r->subject.name + " matches " + r->pattern + "."};
  }
  const auto& n = std::get<NativeModule>(value_);
  if (!n.args || n.args->empty()) return std::nullopt;
  return n.args->back();
}

bool ProtocolModule::has_signature() const {
  if (const auto* n = as<NativeModule>()) return n->args.has_value();
  return true;
}

// ---------------------------------------------------------------------------

const ProtocolModule* DependencyGraph::find(const std::string& name) const {
  for (const auto& m : modules_) {
    if (m.name() == name) return &m;
  }
  return nullptr;
}

const ProtocolModule& DependencyGraph::at(const std::string& name) const {
  const auto* m = find(name);
  if (m == nullptr) throw ValidationError({"unknown module '" + name + "'"});
  return *m;
}

std::vector<std::string> DependencyGraph::callees_of(const std::string& name) const {
  std::vector<std::string> out;
  for (const auto& e : call_edges_) {
    if (e.caller != name) continue;
    for (const auto& c : e.callees) {
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
  }
  return out;
}

bool DependencyGraph::is_callee(const std::string& name) const {
  for (const auto& e : call_edges_) {
    if (std::find(e.callees.begin(), e.callees.end(), name) != e.callees.end()) return true;
  }
  return false;
}

std::vector<Type> DependencyGraph::all_types() const {
  std::vector<Type> out;
  for (const auto& m : modules_) {
    if (!m.has_signature()) continue;
    for (const auto& a : m.inputs()) out.push_back(a.type);
    if (m.kind() != ProtocolModule::Kind::regex) out.push_back(m.output()->type);
  }
  return out;
}

namespace {

using Adjacency = std::map<std::string, std::vector<std::string>>;

// Returns a cycle as [a, b, ..., a], rotated to start at its smallest name.
std::optional<std::vector<std::string>> find_cycle(const std::vector<std::string>& nodes, const Adjacency& adj) {
  enum class Mark { white, grey, black };
  std::map<std::string, Mark> mark;
  for (const auto& n : nodes) mark[n] = Mark::white;
  std::vector<std::string> stack;
  std::optional<std::vector<std::string>> found;

  std::function<bool(const std::string&)> dfs = [&](const std::string& n) -> bool {
    mark[n] = Mark::grey;
    stack.push_back(n);
    if (auto it = adj.find(n); it != adj.end()) {
      for (const auto& next : it->second) {
        if (mark[next] == Mark::grey) {
          auto start = std::find(stack.begin(), stack.end(), next);
          std::vector<std::string> cycle(start, stack.end());
          auto smallest = std::min_element(cycle.begin(), cycle.end());
          std::rotate(cycle.begin(), smallest, cycle.end());
          cycle.push_back(cycle.front());
          found = cycle;
          return true;
        }
        if (mark[next] == Mark::white && dfs(next)) return true;
      }
    }
    stack.pop_back();
    mark[n] = Mark::black;
    return false;
  };
  std::vector<std::string> sorted = nodes;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& n : sorted) {
    if (mark[n] == Mark::white && dfs(n)) return found;
  }
  return std::nullopt;
}

void validate_module(const ProtocolModule& m, std::vector<std::string>& out) {
  const std::string where = m.kind_name() + " module '" + m.name() + "'";
  if (!util::is_identifier(m.name()) || util::is_c_reserved(m.name())) {
    out.push_back(where + ": name is not a usable C identifier");
  }
  auto check_args = [&](const std::vector<ArgSpec>& args) {
    std::set<std::string> seen;
    for (const auto& a : args) {
      if (!util::is_identifier(a.name) || util::is_c_reserved(a.name)) {
        out.push_back(where + ": argument name '" + a.name + "' is not a usable C identifier");
      }
      if (!seen.insert(a.name).second) out.push_back(where + ": duplicate argument name '" + a.name + "'");
      if (util::trim(a.description).empty()) out.push_back(where + ": argument '" + a.name + "' has no description");
      for (auto& v : validate_type(a.type)) out.push_back(where + ": " + v);
    }
  };
  if (const auto* f = m.as<FunctionModule>()) {
    if (util::trim(f->description).empty()) out.push_back(where + ": empty description");
    if (f->args.size() < 2) out.push_back(where + ": needs at least one input and one output argument");
    check_args(f->args);
    if (!f->args.empty()) {
      const Type& r = f->args.back().type.resolved();
      if (r.is<Type::ArrayOf>() || (r.is<Type::Text>() && !f->args.back().type.is<Type::Text>())) {
        out.push_back(where + ": output type " + f->args.back().type.describe() + " cannot be returned in C");
      }
    }
  } else if (const auto* r = m.as<RegexModule>()) {
    check_args({r->subject});
    if (!r->subject.type.resolved().is<Type::Text>()) {
      out.push_back(where + ": subject '" + r->subject.name + "' must be Text-typed");
    }
    try {
      regex::parse_pattern(r->pattern);
    } catch (const ParseError& e) {
      out.push_back(where + ": " + e.what());
    }
  } else if (const auto* n = m.as<NativeModule>()) {
    if (util::trim(n->prototype).empty()) out.push_back(where + ": empty prototype");
    if (util::trim(n->body).empty()) out.push_back(where + ": empty body");
    if (n->args) {
      if (n->args->empty()) out.push_back(where + ": declared args must include an output");
      check_args(*n->args);
    }
  }
}

}  // namespace

DependencyGraph build_graph(std::vector<ProtocolModule> modules, std::vector<Pipe> pipes,
                            std::vector<CallEdge> call_edges) {
  std::vector<std::string> errors;
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& m : modules) {
    if (!seen.insert(m.name()).second) {
      errors.push_back("duplicate module name '" + m.name() + "'");
      continue;
    }
    names.push_back(m.name());
    validate_module(m, errors);
  }
  auto lookup = [&](const std::string& n) -> const ProtocolModule* {
    for (const auto& m : modules) {
      if (m.name() == n) return &m;
    }
    return nullptr;
  };

  Adjacency calls, pipe_adj, depends;
  for (const auto& e : call_edges) {
    const auto* caller = lookup(e.caller);
    if (caller == nullptr) {
      errors.push_back("call edge from unknown module '" + e.caller + "'");
      continue;
    }
    if (caller->kind() == ProtocolModule::Kind::regex) {
      errors.push_back("regex module '" + e.caller + "' cannot be a caller");
    }
    if (e.callees.empty()) errors.push_back("call edge from '" + e.caller + "' has no callees");
    for (const auto& c : e.callees) {
      if (lookup(c) == nullptr) {
        errors.push_back("call edge to unknown module '" + c + "'");
        continue;
      }
      calls[e.caller].push_back(c);
      depends[e.caller].push_back(c);
    }
  }
  for (const auto& p : pipes) {
    const auto* src = lookup(p.source);
    const auto* dst = lookup(p.target);
    if (src == nullptr || dst == nullptr) {
      errors.push_back("pipe references unknown module '" + (src == nullptr ? p.source : p.target) + "'");
      continue;
    }
    if (!src->has_signature() || !dst->has_signature()) {
      errors.push_back("pipe " + p.source + " -> " + p.target + " needs modules with declared arguments");
      continue;
    }
    auto out = src->output();
    if (!out || !out->type.resolved().is<Type::Boolean>()) {
      errors.push_back("pipe source '" + p.source + "' must return a boolean");
    }
    pipe_adj[p.source].push_back(p.target);
    depends[p.target].push_back(p.source);
  }

  // Module-level type set: global name uniqueness across all arguments.
  {
    std::vector<Type> types;
    for (const auto& m : modules) {
      if (!m.has_signature()) continue;
      for (const auto& a : m.inputs()) types.push_back(a.type);
      if (auto o = m.output()) types.push_back(o->type);
    }
    for (auto& v : validate_type_set(types)) {
      if (std::find(errors.begin(), errors.end(), v) == errors.end()) errors.push_back(v);
    }
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));

  if (auto c = find_cycle(names, calls)) throw CycleError(*c);
  if (auto c = find_cycle(names, pipe_adj)) throw CycleError(*c);
  if (auto c = find_cycle(names, depends)) throw CycleError(*c);

  // Each pipe binds the source's inputs to the lowest still-unbound inputs
  // of its target, in the order pipes were added to that target.
  std::vector<PipeBinding> bindings;
  std::map<std::string, std::set<std::size_t>> bound;
  for (const auto& p : pipes) {
    const auto& src = *lookup(p.source);
    const auto& dst = *lookup(p.target);
    auto src_in = src.inputs();
    auto dst_in = dst.inputs();
    auto& used = bound[p.target];
    PipeBinding b{p.source, p.target, {}};
    std::size_t cursor = 0;
    for (const auto& arg : src_in) {
      while (cursor < dst_in.size() && used.contains(cursor)) ++cursor;
      if (cursor >= dst_in.size()) {
        errors.push_back("pipe " + p.source + " -> " + p.target + ": not enough unbound target inputs");
        break;
      }
      if (!(arg.type == dst_in[cursor].type)) {
        errors.push_back("type-mismatched pipe " + p.source + " -> " + p.target + ": source input '" + arg.name +
                         "' is " + arg.type.describe() + " but target input '" + dst_in[cursor].name + "' is " +
                         dst_in[cursor].type.describe());
        break;
      }
      b.target_args.push_back(cursor);
      used.insert(cursor);
      ++cursor;
    }
    bindings.push_back(std::move(b));
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));

  DependencyGraph g;
  g.modules_ = std::move(modules);
  g.pipes_ = std::move(pipes);
  g.call_edges_ = std::move(call_edges);
  g.bindings_ = std::move(bindings);
  return g;
}

// ---------------------------------------------------------------------------

GraphBuilder& GraphBuilder::add(const ProtocolModule& m) {
  // Exact re-adds are no-ops; a different module under the same name is kept
  // so build_graph reports the duplicate.
  for (const auto& existing : modules_) {
    if (existing == m) return *this;
  }
  modules_.push_back(m);
  return *this;
}

GraphBuilder& GraphBuilder::pipe(const ProtocolModule& source, const ProtocolModule& target) {
  add(source);
  add(target);
  pipes_.push_back(Pipe{source.name(), target.name()});
  return *this;
}

GraphBuilder& GraphBuilder::call_edge(const ProtocolModule& caller, const std::vector<ProtocolModule>& callees) {
  add(caller);
  CallEdge e{caller.name(), {}};
  for (const auto& c : callees) {
    add(c);
    e.callees.push_back(c.name());
  }
  call_edges_.push_back(std::move(e));
  return *this;
}

DependencyGraph GraphBuilder::build() const { return build_graph(modules_, pipes_, call_edges_); }

// ---------------------------------------------------------------------------

std::vector<std::string> topo_order(const DependencyGraph& g) {
  std::map<std::string, std::set<std::string>> succ;  // must-precede edges
  std::map<std::string, int> indegree;
  for (const auto& m : g.modules()) indegree[m.name()] = 0;
  auto edge = [&](const std::string& before, const std::string& after) {
    if (succ[before].insert(after).second) ++indegree[after];
  };
  for (const auto& e : g.call_edges()) {
    for (const auto& c : e.callees) edge(c, e.caller);
  }
  for (const auto& p : g.pipes()) edge(p.source, p.target);

  using Key = std::pair<int, std::string>;  // (tier, name)
  auto key = [&](const std::string& n) {
    return Key{g.at(n).kind() == ProtocolModule::Kind::regex ? 0 : 1, n};
  };
  std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
  for (const auto& [n, d] : indegree) {
    if (d == 0) ready.push(key(n));
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    auto [tier, n] = ready.top();
    ready.pop();
    order.push_back(n);
    for (const auto& next : succ[n]) {
      if (--indegree[next] == 0) ready.push(key(next));
    }
  }
  if (order.size() != g.modules().size()) {
    std::vector<std::string> rest;
    for (const auto& [n, d] : indegree) {
      if (d > 0) rest.push_back(n);
    }
    throw CycleError(rest);
  }
  return order;
}

std::vector<std::string> SynthesisPlan::function_modules() const {
  std::vector<std::string> out;
  for (const auto& n : assembly_order) {
    if (graph.at(n).kind() == ProtocolModule::Kind::function) out.push_back(n);
  }
  return out;
}

namespace {

nlohmann::json arg_json(const ArgSpec& a) {
  return {{"name", a.name}, {"type", a.type.describe()}, {"description", a.description}};
}

}  // namespace

std::string SynthesisPlan::serialize() const {
  nlohmann::json j;
  j["main"] = main;
  j["assembly_order"] = assembly_order;
  j["prompt_context"] = prompt_context;
  j["gates"] = nlohmann::json::array();
  for (const auto& b : gates) {
    j["gates"].push_back({{"source", b.source}, {"target", b.target}, {"target_args", b.target_args}});
  }
  j["modules"] = nlohmann::json::array();
  for (const auto& name : assembly_order) {
    const auto& m = graph.at(name);
    nlohmann::json mj{{"name", name}, {"kind", m.kind_name()}};
    if (m.has_signature()) {
      mj["inputs"] = nlohmann::json::array();
      for (const auto& a : m.inputs()) mj["inputs"].push_back(arg_json(a));
      mj["output"] = arg_json(*m.output());
    }
    if (const auto* f = m.as<FunctionModule>()) mj["description"] = f->description;
    if (const auto* r = m.as<RegexModule>()) mj["pattern"] = r->pattern;
    if (const auto* n = m.as<NativeModule>()) mj["prototype"] = n->prototype;
    j["modules"].push_back(std::move(mj));
  }
  return j.dump(2);
}

std::string SynthesisPlan::fingerprint() const { return util::sha256_hex(serialize()).substr(0, 16); }

SynthesisPlan synthesize_plan(const DependencyGraph& g, const std::optional<std::string>& main) {
  std::string chosen;
  if (main) {
    const auto* m = g.find(*main);
    if (m == nullptr) throw ValidationError({"main module '" + *main + "' is not in the graph"});
    if (!m->has_signature() || m->kind() == ProtocolModule::Kind::regex) {
      throw ValidationError({"main module '" + *main + "' must be a function module"});
    }
    chosen = *main;
  } else {
    std::set<std::string> pipe_sources;
    for (const auto& p : g.pipes()) pipe_sources.insert(p.source);
    std::vector<std::string> candidates;
    for (const auto& m : g.modules()) {
      if (m.kind() == ProtocolModule::Kind::regex || !m.has_signature()) continue;
      if (pipe_sources.contains(m.name()) || g.is_callee(m.name())) continue;
      candidates.push_back(m.name());
    }
    if (candidates.size() != 1) {
      throw ValidationError({"ambiguous main: " + std::to_string(candidates.size()) + " candidate(s) [" +
                             util::join(candidates, ", ") + "]; pass main explicitly"});
    }
    chosen = candidates.front();
  }

  for (const auto& p : g.pipes()) {
    if (p.target != chosen) {
      throw ValidationError({"pipe " + p.source + " -> " + p.target + ": pipes may only feed the main module '" +
                             chosen + "'"});
    }
  }

  SynthesisPlan plan;
  plan.graph = g;
  plan.main = chosen;
  plan.assembly_order = topo_order(g);
  for (const auto& n : plan.assembly_order) plan.prompt_context[n] = g.callees_of(n);
  plan.gates = g.bindings();

  // Types in program order so typedef emission follows the assembly.
  for (const auto& n : plan.assembly_order) {
    const auto& m = g.at(n);
    if (!m.has_signature()) continue;
    for (const auto& a : m.inputs()) plan.types.push_back(a.type);
    if (m.kind() != ProtocolModule::Kind::regex) plan.types.push_back(m.output()->type);
  }
  return plan;
}

}  // namespace protosynth
