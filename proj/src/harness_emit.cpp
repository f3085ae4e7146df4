#include "protosynth/harness_emit.hpp"

#include <set>

#include "protosynth/assets.hpp"
#include "protosynth/c_source.hpp"
#include "protosynth/prompt_forge.hpp"
#include "protosynth/regex.hpp"
#include "protosynth/type_json.hpp"
#include "protosynth/util.hpp"

namespace protosynth {

std::string slot_role_name(SlotRole role) {
  switch (role) {
    case SlotRole::input:
      return "input";
    case SlotRole::output:
      return "output";
    case SlotRole::validity:
      return "validity";
  }
  return "?";
}

namespace {

SlotRole slot_role_from(const std::string& s) {
  if (s == "input") return SlotRole::input;
  if (s == "output") return SlotRole::output;
  if (s == "validity") return SlotRole::validity;
  throw ParseError("unknown slot role '" + s + "'");
}

BaseKind base_kind_from(const std::string& s) {
  for (auto k : {BaseKind::boolean, BaseKind::character, BaseKind::unsigned_integer, BaseKind::enumeration,
                 BaseKind::char_buffer}) {
    if (base_kind_name(k) == s) return k;
  }
  throw ParseError("unknown slot kind '" + s + "'");
}

Json arg_to_json(const ArgSpec& a) {
  return Json{{"name", a.name}, {"type", type_to_json(a.type)}, {"description", a.description}};
}

ArgSpec arg_from_json(const Json& j) {
  return ArgSpec{j.at("name").get<std::string>(), type_from_json(j.at("type")), j.value("description", "")};
}

}  // namespace

const SymbolEntry* SymbolMap::find(const std::string& var) const {
  for (const auto& e : entries) {
    if (e.slot.var_name == var) return &e;
  }
  return nullptr;
}

const SymbolEntry* SymbolMap::validity() const {
  for (const auto& e : entries) {
    if (e.role == SlotRole::validity) return &e;
  }
  return nullptr;
}

Json SymbolMap::to_json() const {
  Json j{{"model_id", model_id}, {"plan_fingerprint", plan_fingerprint}, {"main", main}};
  j["inputs"] = Json::array();
  for (const auto& a : inputs) j["inputs"].push_back(arg_to_json(a));
  j["output"] = output ? arg_to_json(*output) : Json(nullptr);
  j["entries"] = Json::array();
  for (const auto& e : entries) {
    Json x{{"var", e.slot.var_name},
           {"role", slot_role_name(e.role)},
           {"path", e.role == SlotRole::validity ? "validity" : e.slot.path.to_string()},
           {"kind", base_kind_name(e.slot.kind)},
           {"byte_width", e.slot.byte_width}};
    if (e.slot.kind == BaseKind::unsigned_integer) x["bits"] = e.slot.bits;
    if (e.slot.kind == BaseKind::char_buffer) x["length"] = e.slot.length;
    if (e.slot.kind == BaseKind::enumeration) {
      x["enum"] = e.slot.enum_name;
      x["variants"] = e.slot.variants;
    }
    j["entries"].push_back(std::move(x));
  }
  return j;
}

SymbolMap SymbolMap::from_json(const Json& j) {
  SymbolMap m;
  m.model_id = j.value("model_id", "");
  m.plan_fingerprint = j.value("plan_fingerprint", "");
  m.main = j.value("main", "");
  for (const auto& a : j.at("inputs")) m.inputs.push_back(arg_from_json(a));
  if (j.contains("output") && !j.at("output").is_null()) m.output = arg_from_json(j.at("output"));
  for (const auto& x : j.at("entries")) {
    SymbolEntry e;
    e.role = slot_role_from(x.at("role").get<std::string>());
    e.slot.var_name = x.at("var").get<std::string>();
    e.slot.kind = base_kind_from(x.at("kind").get<std::string>());
    e.slot.byte_width = x.at("byte_width").get<std::size_t>();
    e.slot.bits = x.value("bits", 0);
    e.slot.length = x.value("length", 0);
    e.slot.enum_name = x.value("enum", "");
    if (x.contains("variants")) e.slot.variants = x.at("variants").get<std::vector<std::string>>();
    auto path = x.at("path").get<std::string>();
    if (e.role == SlotRole::validity) {
      e.slot.path = SlotPath{m.inputs.size() + 1, {}};
    } else {
      e.slot.path = SlotPath::parse(path);
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

// ---------------------------------------------------------------------------

namespace {

std::string path_suffix(const SlotPath& p) {
  std::string out;
  for (const auto& s : p.steps) {
    if (const auto* f = std::get_if<std::string>(&s)) {
      out += "." + *f;
    } else {
      out += "[" + std::to_string(std::get<std::size_t>(s)) + "]";
    }
  }
  return out;
}

std::string slot_decl(const BaseSlot& s) {
  switch (s.kind) {
    case BaseKind::boolean:
      return "bool " + s.var_name + ";";
    case BaseKind::character:
      return "char " + s.var_name + ";";
    case BaseKind::unsigned_integer:
      return uint_c_type(s.bits) + " " + s.var_name + ";";
    case BaseKind::enumeration:
      return s.enum_name + " " + s.var_name + ";";
    case BaseKind::char_buffer:
      return "char " + s.var_name + "[" + std::to_string(s.length + 1) + "];";
  }
  return {};
}

std::string make_symbolic(const BaseSlot& s) {
  std::string addr = s.kind == BaseKind::char_buffer ? s.var_name : "&" + s.var_name;
  return "klee_make_symbolic(" + addr + ", sizeof(" + s.var_name + "), \"" + s.var_name + "\");";
}

std::optional<std::string> input_constraint(const BaseSlot& s, bool printable) {
  const std::string& v = s.var_name;
  switch (s.kind) {
    case BaseKind::boolean:
      return "ps_assume_bool(&" + v + ");";
    case BaseKind::character:
      if (!printable) return std::nullopt;
      return "klee_assume((" + v + " == '\\0') | ((" + v + " >= 0x20) & (" + v + " <= 0x7E)));";
    case BaseKind::unsigned_integer:
      if (s.bits == 8 || s.bits == 16 || s.bits == 32 || s.bits == 64) return std::nullopt;
      return "klee_assume(" + v + " < " + std::to_string(1ULL << s.bits) + (s.bits >= 32 ? "ull" : "u") + ");";
    case BaseKind::enumeration:
      return "klee_assume((unsigned)" + v + " < " + std::to_string(s.variants.size()) + "u);";
    case BaseKind::char_buffer:
      return "ps_assume_text(" + v + ", sizeof(" + v + "), " + (printable ? "1" : "0") + ");";
  }
  return std::nullopt;
}

}  // namespace

Harness emit_harness(const SynthesisPlan& plan, const HarnessOptions& options) {
  ModelRendering r(plan);
  const CTypeTable& table = r.types();
  const auto& main = plan.main_module();
  const auto inputs = main.inputs();
  const ArgSpec output = *main.output();

  Harness h;
  h.symbols.plan_fingerprint = plan.fingerprint();
  h.symbols.main = plan.main;
  h.symbols.inputs = inputs;
  h.symbols.output = output;

  std::vector<std::string> body;
  std::vector<std::string> arg_exprs;
  std::size_t next = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto slots = flatten(i, inputs[i].type, next);
    next += slots.size();
    for (const auto& s : slots) {
      body.push_back(slot_decl(s));
      body.push_back(make_symbolic(s));
      if (auto c = input_constraint(s, options.printable)) body.push_back(*c);
      h.symbols.entries.push_back({s, SlotRole::input});
    }
    if (slots.size() == 1 && slots[0].path.steps.empty()) {
      arg_exprs.push_back(slots[0].var_name);
      continue;
    }
    std::string arg = "arg" + std::to_string(i);
    body.push_back(table.declare(inputs[i].type, arg) + ";");
    for (const auto& s : slots) {
      std::string lv = arg + path_suffix(s.path);
      if (s.kind == BaseKind::char_buffer) {
        body.push_back("memcpy(" + lv + ", " + s.var_name + ", sizeof(" + lv + "));");
      } else {
        body.push_back(lv + " = " + s.var_name + ";");
      }
    }
    arg_exprs.push_back(arg);
  }

  const Type& out_t = output.type;
  std::string result_decl;
  if (out_t.is<Type::Text>()) {
    result_decl = "char* result_tmp;";
  } else {
    result_decl = table.declare(out_t, "result_tmp") + ";";
  }
  auto out_slots = flatten(inputs.size(), out_t, next);
  next += out_slots.size();
  if (out_slots.size() == 1 && out_slots[0].kind != BaseKind::char_buffer) {
    body.push_back(result_decl + " " + slot_decl(out_slots[0]));
  } else {
    body.push_back(result_decl);
    for (const auto& s : out_slots) body.push_back(slot_decl(s));
  }
  for (const auto& s : out_slots) {
    body.push_back(make_symbolic(s));
    h.symbols.entries.push_back({s, SlotRole::output});
  }

  const bool gated = !plan.gates.empty();
  BaseSlot flag;
  if (gated) {
    flag.var_name = "x" + std::to_string(next++);
    flag.path = SlotPath{inputs.size() + 1, {}};
    flag.kind = BaseKind::boolean;
    flag.byte_width = 1;
    body.push_back("bool bad_input; " + slot_decl(flag));
    body.push_back(make_symbolic(flag));
    h.symbols.entries.push_back({flag, SlotRole::validity});
  }

  std::string call = "result_tmp = " + plan.main + "(" + util::join(arg_exprs, ", ") + ");";
  std::string zero = out_t.resolved().is<Type::Boolean>() ? "result_tmp = false;"
                                                            : "memset(&result_tmp, 0, sizeof(result_tmp));";
  if (gated) {
    std::vector<std::string> conds;
    for (const auto& g : plan.gates) {
      std::vector<std::string> args;
      for (auto idx : g.target_args) args.push_back(arg_exprs[idx]);
      conds.push_back(g.source + "(" + util::join(args, ", ") + ")");
    }
    body.push_back("if (" + util::join(conds, " && ") + ") {");
    body.push_back("    bad_input = false;");
    body.push_back("    " + call);
    body.push_back("} else {");
    body.push_back("    bad_input = true;");
    body.push_back("    " + zero);
    body.push_back("}");
  } else {
    body.push_back(call);
  }

  for (const auto& s : out_slots) {
    std::string expr = "result_tmp" + path_suffix(s.path);
    if (s.kind == BaseKind::char_buffer) {
      body.push_back("ps_capture_text(" + expr + ", " + s.var_name + ", sizeof(" + s.var_name + "));");
    } else {
      body.push_back("klee_assume(" + expr + " == " + s.var_name + ");");
    }
  }
  if (gated) body.push_back("klee_assume(bad_input == " + flag.var_name + ");");
  body.push_back("return 0;");

  h.text = "int main() {\n";
  for (const auto& line : body) h.text += "    " + line + "\n";
  h.text += "}\n";
  return h;
}

std::string emit_regex_function(const SynthesisPlan& plan, const std::string& module) {
  ModelRendering r(plan);
  const auto* re = plan.graph.at(module).as<RegexModule>();
  if (re == nullptr) throw Error(module + " is not a regex module");
  auto emission = regex::emit_constructors(regex::parse_pattern(re->pattern), re->subject.name);
  std::string out = r.signature(module) + " {\n";
  for (const auto& line : util::split_lines(emission.statements)) out += "    " + line + "\n";
  out += "}\n";
  return out;
}

// ---------------------------------------------------------------------------
// Assembly

std::string model_id_for(int sample_index) {
  std::string n = std::to_string(sample_index);
  if (n.size() < 2) n.insert(0, 2 - n.size(), '0');
  return "sample-" + n;
}

namespace {

struct Site {
  std::string where;
  std::string canonical;
};

class Assembler {
 public:
  explicit Assembler(const SynthesisPlan& plan) {
    for (const auto& inc : include_preamble()) includes_.push_back(inc);
    for (const auto& n : plan.assembly_order) modules_.insert(n);
  }

  void add_typedef_line(const std::string& line, const std::string& where) {
    auto items = csrc::split_top_level(line);
    typedefs_[items.front().name] = Site{where, csrc::canonical(line)};
  }

  void runtime(const std::string& text, GeneratedModel& model) {
    for (const auto& item : csrc::split_top_level(text)) {
      if (item.kind == csrc::Item::Kind::function_definition || item.kind == csrc::Item::Kind::declaration) {
        symbols_[item.name] = Site{"runtime support", csrc::canonical(item.text)};
        if (item.kind == csrc::Item::Kind::function_definition) model.provenance.push_back({item.name, "runtime"});
      } else if (item.kind == csrc::Item::Kind::typedef_decl) {
        typedefs_[item.name] = Site{"runtime support", csrc::canonical(item.text)};
      }
    }
    sections_.push_back(util::trim(text) + "\n");
  }

  void define(const std::string& name, const std::string& where, const std::string& text) {
    auto canon = csrc::canonical(text);
    auto [it, inserted] = symbols_.emplace(name, Site{where, canon});
    if (!inserted) {
      throw AssemblyError("duplicate symbol '" + name + "': defined in " + it->second.where + " and in " + where);
    }
  }

  // Folds one source (completion or native body) into the program.
  void source(const std::string& text, const std::string& owner, const std::string& origin, GeneratedModel& model) {
    std::vector<std::string> kept;
    const std::string label = origin == "native" ? "native module " + owner : "completion of " + owner;
    for (const auto& item : csrc::split_top_level(text)) {
      std::string where = label + " (line " + std::to_string(item.line) + ")";
      switch (item.kind) {
        case csrc::Item::Kind::preprocessor: {
          std::string norm = util::normalize_space(item.text.substr(item.text.find('#')));
          if (util::starts_with(norm, "#include")) {
            if (std::find(includes_.begin(), includes_.end(), norm) == includes_.end()) includes_.push_back(norm);
          } else {
            kept.push_back(item.text);
          }
          break;
        }
        case csrc::Item::Kind::typedef_decl: {
          auto canon = csrc::canonical(item.text);
          auto it = typedefs_.find(item.name);
          if (it == typedefs_.end()) {
            typedefs_[item.name] = Site{where, canon};
            extra_typedefs_.push_back(util::trim(item.text));
          } else if (it->second.canonical != canon) {
            throw AssemblyError("conflicting typedef '" + item.name + "': " + it->second.where + " has `" +
                                it->second.canonical + "`, " + where + " has `" + canon + "`");
          }
          break;
        }
        case csrc::Item::Kind::prototype:
          if (modules_.contains(item.name) || symbols_.contains(item.name)) break;
          kept.push_back(item.text);
          break;
        case csrc::Item::Kind::function_definition:
          if (item.name == "main") {
            model.notes.push_back(label + ": dropped a main() definition");
            break;
          }
          define(item.name, where, item.text);
          model.provenance.push_back({item.name, origin == "native" ? "native" : "completion:" + owner});
          kept.push_back(item.text);
          break;
        case csrc::Item::Kind::declaration:
          if (!item.name.empty()) {
            auto canon = csrc::canonical(item.text);
            if (auto it = symbols_.find(item.name); it != symbols_.end() && it->second.canonical == canon) break;
            define(item.name, where, item.text);
          }
          kept.push_back(item.text);
          break;
        case csrc::Item::Kind::comment:
        case csrc::Item::Kind::other:
          kept.push_back(item.text);
          break;
      }
    }
    if (!kept.empty()) sections_.push_back(util::join(kept, "\n") + "\n");
  }

  void function(const std::string& name, const std::string& text, const std::string& origin, GeneratedModel& model) {
    define(name, origin + " module " + name, text);
    model.provenance.push_back({name, origin});
    sections_.push_back(text);
  }

  std::string program(const std::vector<std::string>& typedefs, const std::string& harness) const {
    std::string out;
    for (const auto& inc : includes_) out += inc + "\n";
    out += "\n";
    for (const auto& t : typedefs) out += t + "\n";
    for (const auto& t : extra_typedefs_) out += t + "\n";
    for (const auto& s : sections_) out += "\n" + s;
    out += "\n" + harness;
    return out;
  }

 private:
  std::set<std::string> modules_;
  std::vector<std::string> includes_;
  std::map<std::string, Site> typedefs_;
  std::vector<std::string> extra_typedefs_;
  std::map<std::string, Site> symbols_;
  std::vector<std::string> sections_;
};

}  // namespace

GeneratedModel assemble_program(const SynthesisPlan& plan, const std::map<std::string, std::string>& completions,
                                int sample_index, const HarnessOptions& options) {
  ModelRendering r(plan);
  GeneratedModel model;
  model.id = model_id_for(sample_index);
  model.sample_index = sample_index;

  Assembler a(plan);
  for (const auto& t : r.types().typedefs()) a.add_typedef_line(t, "the model type definitions");

  bool has_regex = false;
  for (const auto& n : plan.assembly_order) has_regex |= plan.graph.at(n).kind() == ProtocolModule::Kind::regex;
  if (has_regex) a.runtime(assets::regex_match(), model);
  a.runtime(assets::harness_prelude(), model);

  for (const auto& name : plan.assembly_order) {
    const auto& m = plan.graph.at(name);
    switch (m.kind()) {
      case ProtocolModule::Kind::regex:
        a.function(name, emit_regex_function(plan, name), "regex", model);
        break;
      case ProtocolModule::Kind::native:
        a.source(m.as<NativeModule>()->body, name, "native", model);
        break;
      case ProtocolModule::Kind::function: {
        auto it = completions.find(name);
        if (it == completions.end()) throw AssemblyError("no completion for module " + name);
        a.source(it->second, name, "completion", model);
        model.completions[name] = it->second;
        break;
      }
    }
  }

  Harness h = emit_harness(plan, options);
  h.symbols.model_id = model.id;
  model.symbol_map = h.symbols;
  model.program_text = a.program(r.types().typedefs(), h.text);
  return model;
}

EmitResult emit_all(const SynthesisPlan& plan, const std::map<std::string, SampleSet>& samples, int k,
                    const HarnessOptions& options) {
  EmitResult out;
  auto functions = plan.function_modules();
  for (int i = 0; i < k; ++i) {
    std::map<std::string, std::string> chosen;
    std::string reason;
    for (const auto& m : functions) {
      auto it = samples.find(m);
      if (it == samples.end()) {
        reason = m + ": no samples";
        break;
      }
      const Sample* s = nullptr;
      for (const auto& x : it->second.samples) {
        if (x.index == i) s = &x;
      }
      if (s == nullptr) {
        reason = m + ": generation failed";
        for (const auto& f : it->second.failures) {
          if (f.index == i) reason = m + ": " + f.message;
        }
        break;
      }
      try {
        chosen[m] = sanitize_completion(s->text, plan, m);
      } catch (const SanitizeError& e) {
        reason = e.what();
        break;
      }
    }
    if (reason.empty()) {
      try {
        out.models.push_back(assemble_program(plan, chosen, i, options));
        continue;
      } catch (const AssemblyError& e) {
        reason = e.what();
      }
    }
    out.skipped.push_back({i, reason});
  }
  if (out.models.empty()) {
    std::vector<std::string> reasons;
    for (const auto& s : out.skipped) reasons.push_back("sample " + std::to_string(s.index) + ": " + s.reason);
    throw Error("all " + std::to_string(k) + " samples failed: " + util::join(reasons, "; "));
  }
  return out;
}

void write_model(const GeneratedModel& model, const std::filesystem::path& dir) {
  util::write_file(dir / "model.c", model.program_text);
  util::write_file(dir / "symbols.json", model.symbol_map.to_json().dump(2) + "\n");
  Json prov{{"model_id", model.id}, {"sample_index", model.sample_index}};
  prov["functions"] = Json::array();
  for (const auto& p : model.provenance) prov["functions"].push_back(Json{{"function", p.function}, {"origin", p.origin}});
  prov["notes"] = model.notes;
  prov["completions"] = Json::object();
  for (const auto& [m, text] : model.completions) prov["completions"][m] = text;
  util::write_file(dir / "provenance.json", prov.dump(2) + "\n");
}

}  // namespace protosynth
