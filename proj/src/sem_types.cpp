#include "protosynth/sem_types.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "protosynth/error.hpp"
#include "protosynth/util.hpp"

namespace protosynth {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const std::string kEmpty;

}  // namespace

Type Type::boolean() { return Type(std::make_shared<TypeNode>(TypeNode{Boolean{}})); }
Type Type::character() { return Type(std::make_shared<TypeNode>(TypeNode{Character{}})); }
Type Type::uint(int bits) { return Type(std::make_shared<TypeNode>(TypeNode{UInt{bits}})); }
Type Type::text(int max_len) { return Type(std::make_shared<TypeNode>(TypeNode{Text{max_len}})); }

Type Type::enumeration(std::string name, std::vector<std::string> variants) {
  return Type(std::make_shared<TypeNode>(TypeNode{Enumeration{std::move(name), std::move(variants)}}));
}

Type Type::array(Type element, int length) {
  return Type(std::make_shared<TypeNode>(TypeNode{ArrayOf{std::move(element), length}}));
}

Type Type::composite(std::string name, std::vector<std::pair<std::string, Type>> fields) {
  Composite c{std::move(name), {}};
  for (auto& [n, t] : fields) c.fields.push_back(Field{std::move(n), std::move(t)});
  return Type(std::make_shared<TypeNode>(TypeNode{std::move(c)}));
}

Type Type::alias(std::string name, Type inner) {
  return Type(std::make_shared<TypeNode>(TypeNode{Alias{std::move(name), std::move(inner)}}));
}

const std::string& Type::name() const {
  return visit(overloaded{[](const Enumeration& e) -> const std::string& { return e.name; },
                          [](const Composite& c) -> const std::string& { return c.name; },
                          [](const Alias& a) -> const std::string& { return a.name; },
                          [](const auto&) -> const std::string& { return kEmpty; }});
}

const Type& Type::resolved() const {
  const Type* t = this;
  while (const auto* a = t->as<Alias>()) t = &a->inner;
  return *t;
}

std::string Type::describe() const {
  return visit(overloaded{[](const Boolean&) -> std::string { return "Boolean"; },
                          [](const Character&) -> std::string { return "Character"; },
                          [](const UInt& u) { return "UInt(" + std::to_string(u.bits) + ")"; },
                          [](const Text& t) { return "Text(" + std::to_string(t.max_len) + ")"; },
                          [](const Enumeration& e) { return e.name; },
                          [](const ArrayOf& a) {
                            return "Array(" + a.element.describe() + ", " + std::to_string(a.length) + ")";
                          },
                          [](const Composite& c) { return c.name; },
                          [](const Alias& a) { return a.name; }});
}

bool operator==(const Type& a, const Type& b) {
  if (a.node_ == b.node_) return true;
  return a.node_->value == b.node_->value;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void check_identifier(const std::string& what, const std::string& id, std::vector<std::string>& out) {
  if (!util::is_identifier(id)) {
    out.push_back(what + " '" + id + "' is not a valid identifier");
  } else if (util::is_c_reserved(id)) {
    out.push_back(what + " '" + id + "' is a reserved word");
  }
}

void validate_into(const Type& t, std::vector<std::string>& out, std::map<std::string, Type>& named) {
  if (t.is_named()) {
    auto [it, inserted] = named.emplace(t.name(), t);
    if (!inserted && !(it->second == t)) {
      out.push_back("conflicting definitions of type name '" + t.name() + "'");
      return;
    }
    if (!inserted) return;  // identical definition already checked
  }
  t.visit(overloaded{
      [](const Type::Boolean&) {},
      [](const Type::Character&) {},
      [&](const Type::UInt& u) {
        if (u.bits < 1 || u.bits > 64) out.push_back("UInt bits " + std::to_string(u.bits) + " outside 1..64");
      },
      [&](const Type::Text& x) {
        if (x.max_len < 1) out.push_back("Text max_len " + std::to_string(x.max_len) + " must be >= 1");
      },
      [&](const Type::Enumeration& e) {
        check_identifier("enumeration name", e.name, out);
        if (e.variants.empty()) out.push_back("Enumeration " + e.name + ": empty variant list");
        std::set<std::string> seen;
        for (const auto& v : e.variants) {
          check_identifier("enumeration variant", v, out);
          if (!seen.insert(v).second) out.push_back("Enumeration " + e.name + ": duplicate variant '" + v + "'");
        }
      },
      [&](const Type::ArrayOf& a) {
        if (a.length < 1) out.push_back("Array length " + std::to_string(a.length) + " must be >= 1");
        validate_into(a.element, out, named);
      },
      [&](const Type::Composite& c) {
        check_identifier("composite name", c.name, out);
        if (c.fields.empty()) out.push_back("Composite " + c.name + ": empty field list");
        std::set<std::string> seen;
        for (const auto& f : c.fields) {
          check_identifier("field name", f.name, out);
          if (!seen.insert(f.name).second) {
            out.push_back("Composite " + c.name + ": duplicate field name '" + f.name + "'");
          }
          validate_into(f.type, out, named);
        }
      },
      [&](const Type::Alias& a) {
        check_identifier("alias name", a.name, out);
        validate_into(a.inner, out, named);
      },
  });
}

void collect_enums(const Type& t, std::map<std::string, std::string>& constants, std::set<std::string>& visited,
                   std::vector<std::string>& out) {
  if (t.is_named() && !visited.insert(t.name()).second) return;
  t.visit(overloaded{
      [&](const Type::Enumeration& e) {
        for (const auto& v : e.variants) {
          auto [it, inserted] = constants.emplace(v, e.name);
          if (!inserted && it->second != e.name) {
            out.push_back("enumeration constant '" + v + "' declared by both " + it->second + " and " + e.name);
          }
        }
      },
      [&](const Type::ArrayOf& a) { collect_enums(a.element, constants, visited, out); },
      [&](const Type::Composite& c) {
        for (const auto& f : c.fields) collect_enums(f.type, constants, visited, out);
      },
      [&](const Type::Alias& a) { collect_enums(a.inner, constants, visited, out); },
      [](const auto&) {},
  });
}

}  // namespace

std::vector<std::string> validate_type(const Type& t) {
  std::vector<std::string> out;
  std::map<std::string, Type> named;
  validate_into(t, out, named);
  return out;
}

std::vector<std::string> validate_type_set(std::span<const Type> types) {
  std::vector<std::string> out;
  std::map<std::string, Type> named;
  for (const auto& t : types) validate_into(t, out, named);
  std::map<std::string, std::string> constants;
  std::set<std::string> visited;
  for (const auto& t : types) collect_enums(t, constants, visited, out);
  for (const auto& [constant, owner] : constants) {
    if (named.contains(constant)) out.push_back("enumeration constant '" + constant + "' collides with a type name");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Flattening

std::size_t uint_storage_bytes(int bits) {
  if (bits <= 8) return 1;
  if (bits <= 16) return 2;
  if (bits <= 32) return 4;
  return 8;
}

std::string uint_c_type(int bits) { return "uint" + std::to_string(uint_storage_bytes(bits) * 8) + "_t"; }

std::string base_kind_name(BaseKind kind) {
  switch (kind) {
    case BaseKind::boolean:
      return "boolean";
    case BaseKind::character:
      return "character";
    case BaseKind::unsigned_integer:
      return "unsigned-integer";
    case BaseKind::enumeration:
      return "enumeration";
    case BaseKind::char_buffer:
      return "character-buffer";
  }
  return "?";
}

std::string SlotPath::to_string() const {
  std::string out = std::to_string(arg);
  for (const auto& step : steps) {
    if (const auto* f = std::get_if<std::string>(&step)) {
      out += "." + *f;
    } else {
      out += "[" + std::to_string(std::get<std::size_t>(step)) + "]";
    }
  }
  return out;
}

SlotPath SlotPath::parse(const std::string& text) {
  SlotPath p;
  std::size_t i = 0;
  auto read_number = [&](std::size_t& value) {
    auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), value);
    if (ec != std::errc() || ptr == text.data() + i) throw ParseError("bad slot path: " + text);
    i = static_cast<std::size_t>(ptr - text.data());
  };
  read_number(p.arg);
  while (i < text.size()) {
    if (text[i] == '.') {
      std::size_t j = ++i;
      while (j < text.size() && text[j] != '.' && text[j] != '[') ++j;
      if (j == i) throw ParseError("bad slot path: " + text);
      p.steps.emplace_back(text.substr(i, j - i));
      i = j;
    } else if (text[i] == '[') {
      ++i;
      std::size_t idx = 0;
      read_number(idx);
      if (i >= text.size() || text[i] != ']') throw ParseError("bad slot path: " + text);
      ++i;
      p.steps.emplace_back(idx);
    } else {
      throw ParseError("bad slot path: " + text);
    }
  }
  return p;
}

namespace {

void flatten_into(const Type& t, SlotPath& path, std::vector<BaseSlot>& out, std::size_t& counter) {
  auto push = [&](BaseSlot slot) {
    slot.var_name = "x" + std::to_string(counter++);
    slot.path = path;
    out.push_back(std::move(slot));
  };
  t.visit(overloaded{
      [&](const Type::Boolean&) { push(BaseSlot{.kind = BaseKind::boolean, .byte_width = 1}); },
      [&](const Type::Character&) { push(BaseSlot{.kind = BaseKind::character, .byte_width = 1}); },
      [&](const Type::UInt& u) {
        push(BaseSlot{.kind = BaseKind::unsigned_integer, .bits = u.bits, .byte_width = uint_storage_bytes(u.bits)});
      },
      [&](const Type::Text& x) {
        push(BaseSlot{.kind = BaseKind::char_buffer,
                      .length = x.max_len,
                      .byte_width = static_cast<std::size_t>(x.max_len) + 1});
      },
      [&](const Type::Enumeration& e) {
        push(BaseSlot{.kind = BaseKind::enumeration, .enum_name = e.name, .variants = e.variants, .byte_width = 4});
      },
      [&](const Type::ArrayOf& a) {
        for (int i = 0; i < a.length; ++i) {
          path.steps.emplace_back(static_cast<std::size_t>(i));
          flatten_into(a.element, path, out, counter);
          path.steps.pop_back();
        }
      },
      [&](const Type::Composite& c) {
        for (const auto& f : c.fields) {
          path.steps.emplace_back(f.name);
          flatten_into(f.type, path, out, counter);
          path.steps.pop_back();
        }
      },
      [&](const Type::Alias& a) { flatten_into(a.inner, path, out, counter); },
  });
}

}  // namespace

std::vector<BaseSlot> flatten(std::size_t arg_index, const Type& t, std::size_t first_var) {
  std::vector<BaseSlot> out;
  SlotPath path{arg_index, {}};
  std::size_t counter = first_var;
  flatten_into(t, path, out, counter);
  return out;
}

// ---------------------------------------------------------------------------
// C rendering

CTypeTable::CTypeTable(std::span<const Type> types) {
  auto violations = validate_type_set(types);
  if (!violations.empty()) throw ValidationError(std::move(violations));

  for (const auto& t : types) collect(t, false);

  // Text aliases: `String` when only one size is needed, `String<N>` otherwise.
  const bool single = text_aliases_.size() == 1;
  for (auto& [len, name] : text_aliases_) {
    name = single ? "String" : "String" + std::to_string(len);
    for (const auto& named : named_order_) {
      if (named.name() == name) {
        throw ValidationError({"type name '" + name + "' collides with the generated text alias"});
      }
    }
    typedef_index_[name] = typedefs_.size();
    typedefs_.push_back("typedef char " + name + "[" + std::to_string(len + 1) + "];");
  }
  for (const auto& t : named_order_) emit_named(t);
}

void CTypeTable::collect(const Type& t, bool declaration_site) {
  t.visit(overloaded{
      [&](const Type::Text& x) {
        if (declaration_site) text_aliases_.emplace(x.max_len, std::string());
      },
      [&](const Type::ArrayOf& a) { collect(a.element, true); },
      [&](const Type::Composite& c) {
        for (const auto& f : c.fields) collect(f.type, true);
      },
      [&](const Type::Alias& a) {
        // An alias of bare text renders as its own char array.
        collect(a.inner, false);
      },
      [](const auto&) {},
  });
  if (t.is_named()) {
    bool known = std::any_of(named_order_.begin(), named_order_.end(),
                             [&](const Type& n) { return n.name() == t.name(); });
    if (!known) named_order_.push_back(t);
  }
}

void CTypeTable::emit_named(const Type& t) {
  if (t.is_named() && typedef_index_.contains(t.name())) return;
  t.visit(overloaded{
      [&](const Type::ArrayOf& a) { emit_named(a.element); },
      [&](const Type::Composite& c) {
        for (const auto& f : c.fields) emit_named(f.type);
      },
      [&](const Type::Alias& a) { emit_named(a.inner); },
      [](const auto&) {},
  });
  if (t.is_named()) {
    typedef_index_[t.name()] = typedefs_.size();
    typedefs_.push_back(typedef_line(t));
  }
}

std::string CTypeTable::typedef_line(const Type& t) const {
  return t.visit(overloaded{
      [&](const Type::Enumeration& e) { return "typedef enum { " + util::join(e.variants, ", ") + " } " + e.name + ";"; },
      [&](const Type::Composite& c) {
        std::string body;
        for (const auto& f : c.fields) body += declare(f.type, f.name) + "; ";
        return "typedef struct { " + body + "} " + c.name + ";";
      },
      [&](const Type::Alias& a) {
        if (const auto* x = a.inner.as<Type::Text>()) {
          return "typedef char " + a.name + "[" + std::to_string(x->max_len + 1) + "];";
        }
        return "typedef " + declare(a.inner, a.name) + ";";
      },
      [](const auto&) -> std::string { return {}; },
  });
}

std::string CTypeTable::text_alias(int max_len) const {
  auto it = text_aliases_.find(max_len);
  if (it == text_aliases_.end()) throw Error("no text alias for Text(" + std::to_string(max_len) + ")");
  return it->second;
}

std::string CTypeTable::spelling(const Type& t) const {
  return t.visit(overloaded{
      [](const Type::Boolean&) -> std::string { return "bool"; },
      [](const Type::Character&) -> std::string { return "char"; },
      [](const Type::UInt& u) { return uint_c_type(u.bits); },
      [&](const Type::Text& x) { return text_alias(x.max_len); },
      [](const Type::Enumeration& e) { return e.name; },
      [&](const Type::ArrayOf& a) { return spelling(a.element); },
      [](const Type::Composite& c) { return c.name; },
      [](const Type::Alias& a) { return a.name; },
  });
}

std::string CTypeTable::array_suffix(const Type& t) const {
  std::string suffix;
  const Type* cur = &t;
  while (const auto* a = cur->as<Type::ArrayOf>()) {
    suffix += "[" + std::to_string(a->length) + "]";
    cur = &a->element;
  }
  return suffix;
}

std::string CTypeTable::declare(const Type& t, const std::string& name) const {
  return spelling(t) + " " + name + array_suffix(t);
}

std::string CTypeTable::parameter(const Type& t, const std::string& name) const {
  if (t.is<Type::Text>()) return "char* " + name;
  return declare(t, name);
}

std::string CTypeTable::return_type(const Type& t) const {
  if (t.is<Type::Text>()) return "char*";
  const Type& r = t.resolved();
  if (r.is<Type::ArrayOf>() || (r.is<Type::Text>() && !t.is<Type::Text>())) {
    throw ValidationError({"type " + t.describe() + " cannot be a C return type"});
  }
  return spelling(t);
}

std::vector<std::string> CTypeTable::typedefs_for(const Type& t) const {
  std::set<std::string> needed;
  auto walk = [&](auto&& self, const Type& x, bool site) -> void {
    if (x.is_named() && !needed.insert(x.name()).second) return;
    x.visit(overloaded{
        [&](const Type::Text& tx) {
          if (site) needed.insert(text_alias(tx.max_len));
        },
        [&](const Type::ArrayOf& a) { self(self, a.element, true); },
        [&](const Type::Composite& c) {
          for (const auto& f : c.fields) self(self, f.type, true);
        },
        [&](const Type::Alias& a) { self(self, a.inner, false); },
        [](const auto&) {},
    });
  };
  walk(walk, t, false);
  std::vector<std::size_t> idx;
  for (const auto& n : needed) {
    if (auto it = typedef_index_.find(n); it != typedef_index_.end()) idx.push_back(it->second);
  }
  std::sort(idx.begin(), idx.end());
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(typedefs_[i]);
  return out;
}

RenderedDecl render_c_decl(const Type& t) {
  std::vector<Type> one{t};
  CTypeTable table(one);
  RenderedDecl out;
  out.typedefs = table.typedefs_for(t);
  if (t.is_named()) {
    out.text = out.typedefs.back();
  } else if (t.is<Type::Text>()) {
    out.text = "char*";
  } else {
    std::string d = table.declare(t, "");
    // "bool [3]" -> "bool[3]"
    if (auto pos = d.find(" ["); pos != std::string::npos) d.erase(pos, 1);
    out.text = util::trim(d);
  }
  return out;
}

}  // namespace protosynth
