#include "protosynth/prompt_forge.hpp"

#include <algorithm>
#include <set>

#include "protosynth/assets.hpp"
#include "protosynth/c_source.hpp"
#include "protosynth/util.hpp"

namespace protosynth {

namespace {

constexpr std::size_t kWrapColumns = 100;

std::vector<std::string> comment_lines(const std::string& text, const std::string& prefix) {
  auto lines = util::wrap_words(text, kWrapColumns, prefix);
  if (lines.empty()) lines.push_back(util::trim(prefix));
  return lines;
}

void append_params(std::vector<std::string>& out, const std::vector<ArgSpec>& inputs, const ArgSpec& output) {
  out.push_back("//");
  out.push_back("// Parameters:");
  for (const auto& a : inputs) {
    auto lines = comment_lines(a.name + ": " + a.description, "//     ");
    out.insert(out.end(), lines.begin(), lines.end());
  }
  out.push_back("// Return Value:");
  auto lines = comment_lines(output.description, "//     ");
  out.insert(out.end(), lines.begin(), lines.end());
}

}  // namespace

const std::vector<std::string>& include_preamble() {
  static const std::vector<std::string> kIncludes{"#include <stdint.h>", "#include <stdbool.h>",
                                                  "#include <string.h>", "#include <stdlib.h>",
                                                  "#include <klee/klee.h>", "#include <stdio.h>"};
  return kIncludes;
}

ModelRendering::ModelRendering(const SynthesisPlan& plan) : plan_(&plan), table_(plan.types) {}

std::string ModelRendering::signature(const std::string& module) const {
  const auto& m = plan_->graph.at(module);
  if (const auto* n = m.as<NativeModule>()) {
    std::string proto = util::trim(n->prototype);
    while (!proto.empty() && (proto.back() == ';' || proto.back() == '{')) proto = util::trim(proto.substr(0, proto.size() - 1));
    return proto;
  }
  std::vector<std::string> params;
  for (const auto& a : m.inputs()) params.push_back(table_.parameter(a.type, a.name));
  std::string ret = m.kind() == ProtocolModule::Kind::regex ? "bool" : table_.return_type(m.output()->type);
  return ret + " " + module + "(" + util::join(params, ", ") + ")";
}

std::vector<std::string> ModelRendering::doc_comment(const std::string& module) const {
  const auto& m = plan_->graph.at(module);
  std::vector<std::string> out;
  if (const auto* f = m.as<FunctionModule>()) {
    out = comment_lines(f->description, "// ");
    append_params(out, m.inputs(), *m.output());
  } else if (const auto* r = m.as<RegexModule>()) {
    out = comment_lines("Whether " + r->subject.name + " fully matches the regular expression " + r->pattern + ".",
                        "// ");
    append_params(out, m.inputs(), *m.output());
  } else if (const auto* n = m.as<NativeModule>()) {
    if (!util::trim(n->description).empty()) out = comment_lines(n->description, "// ");
    if (n->args && !n->args->empty()) {
      if (out.empty()) out.push_back("// " + module);
      append_params(out, m.inputs(), *m.output());
    }
  }
  return out;
}

std::vector<std::string> ModelRendering::typedefs_for(const std::string& module) const {
  const auto& m = plan_->graph.at(module);
  std::set<std::string> needed;
  if (m.has_signature()) {
    for (const auto& a : m.inputs()) {
      for (auto& t : table_.typedefs_for(a.type)) needed.insert(t);
    }
    if (m.kind() != ProtocolModule::Kind::regex) {
      for (auto& t : table_.typedefs_for(m.output()->type)) needed.insert(t);
    }
  }
  std::vector<std::string> out;
  for (const auto& t : table_.typedefs()) {
    if (needed.contains(t)) out.push_back(t);
  }
  return out;
}

std::string render_user_prompt(const SynthesisPlan& plan, const std::string& module) {
  ModelRendering r(plan);
  const auto& callees = plan.prompt_context.at(module);

  std::set<std::string> needed;
  for (auto& t : r.typedefs_for(module)) needed.insert(t);
  for (const auto& c : callees) {
    for (auto& t : r.typedefs_for(c)) needed.insert(t);
  }

  std::string out;
  for (const auto& inc : include_preamble()) out += inc + "\n";
  out += "\n";
  bool any = false;
  for (const auto& t : r.types().typedefs()) {
    if (!needed.contains(t)) continue;
    out += t + "\n";
    any = true;
  }
  if (any) out += "\n";
  for (const auto& c : callees) {
    for (const auto& line : r.doc_comment(c)) out += line + "\n";
    out += r.signature(c) + ";\n\n";
  }
  for (const auto& line : r.doc_comment(module)) out += line + "\n";
  out += r.signature(module) + " {\n";
  return out;
}

std::string render_system_prompt() { return assets::system_prompt(); }

std::string render_state_graph_prompt(const std::string& model_source) {
  if (util::trim(model_source).empty()) throw Error("state-graph prompt needs nonempty model source");
  std::string tpl = assets::state_graph_prompt();
  const std::string marker = "{{MODEL_SOURCE}}";
  auto pos = tpl.find(marker);
  if (pos == std::string::npos) throw Error("state-graph prompt template lacks " + marker);
  std::string src = model_source;
  while (!src.empty() && (src.back() == '\n' || src.back() == '\r')) src.pop_back();
  return tpl.replace(pos, marker.size(), src);
}

PromptPair make_prompt(const SynthesisPlan& plan, const std::string& module) {
  return PromptPair{render_system_prompt(), render_user_prompt(plan, module), module};
}

namespace {

std::string strip_fences(const std::string& raw) {
  auto lines = util::split_lines(raw);
  std::vector<std::size_t> fences;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (util::starts_with(util::trim(lines[i]), "```")) fences.push_back(i);
  }
  if (fences.empty()) return raw;
  std::size_t first = fences.front() + 1;
  std::size_t last = fences.size() > 1 ? fences.back() : lines.size();
  std::string out;
  for (std::size_t i = first; i < last; ++i) {
    if (util::starts_with(util::trim(lines[i]), "```")) continue;
    out += lines[i] + "\n";
  }
  return out;
}

bool is_code(const csrc::Item& item) {
  using K = csrc::Item::Kind;
  return item.kind == K::preprocessor || item.kind == K::typedef_decl || item.kind == K::function_definition ||
         item.kind == K::prototype;
}

}  // namespace

std::string sanitize_completion(const std::string& raw, const SynthesisPlan& plan, const std::string& module) {
  std::string text = strip_fences(raw);
  auto items = csrc::split_top_level(text);
  auto first = std::find_if(items.begin(), items.end(), is_code);
  auto last = std::find_if(items.rbegin(), items.rend(), is_code);
  if (first == items.end()) throw SanitizeError(module + ": completion contains no C code");
  std::string cleaned = text.substr(first->begin, last->end - first->begin);
  while (!cleaned.empty() && std::isspace(static_cast<unsigned char>(cleaned.back()))) cleaned.pop_back();
  cleaned += "\n";

  ModelRendering r(plan);
  std::string canon = csrc::canonical(cleaned);
  std::string sig = csrc::canonical(r.signature(module)) + "{";
  if (canon.find(sig) == std::string::npos) {
    throw SanitizeError(module + ": missing signature `" + r.signature(module) + " {`");
  }

  std::vector<std::string> problems;
  auto found = csrc::split_top_level(cleaned);
  std::set<std::string> required;
  for (auto& t : r.typedefs_for(module)) required.insert(t);
  for (const auto& c : plan.prompt_context.at(module)) {
    for (auto& t : r.typedefs_for(c)) required.insert(t);
  }
  for (const auto& expected : r.types().typedefs()) {
    if (!required.contains(expected)) continue;
    std::string name = csrc::split_top_level(expected).front().name;
    const csrc::Item* match = nullptr;
    for (const auto& item : found) {
      if (item.kind == csrc::Item::Kind::typedef_decl && item.name == name) match = &item;
    }
    if (match == nullptr) {
      problems.push_back("missing typedef " + name + " (expected `" + expected + "`)");
    } else if (csrc::canonical(match->text) != csrc::canonical(expected)) {
      problems.push_back("altered typedef " + name + ": expected `" + expected + "`, found `" +
                         util::normalize_space(match->text) + "`");
    }
  }
  if (!problems.empty()) throw SanitizeError(module + ": " + util::join(problems, "; "));
  return cleaned;
}

}  // namespace protosynth
