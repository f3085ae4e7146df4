#include "protosynth/type_json.hpp"

#include <charconv>
#include <optional>

#include "protosynth/error.hpp"

namespace protosynth {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void bad(const Json& j, const std::string& why) {
  throw ValidationError({"bad type " + j.dump() + ": " + why});
}

int int_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) bad(j, std::string("missing integer '") + key + "'");
  return j.at(key).get<int>();
}

std::string string_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) bad(j, std::string("missing string '") + key + "'");
  return j.at(key).get<std::string>();
}

std::vector<std::pair<std::string, Type>> fields_from(const Json& list, const Json& whole,
                                                      const std::map<std::string, Type>& named) {
  if (!list.is_array()) bad(whole, "fields must be a list");
  std::vector<std::pair<std::string, Type>> out;
  for (const auto& f : list) {
    if (f.is_object()) {
      out.emplace_back(string_field(f, "name"), type_from_json(f.at("type"), named));
    } else if (f.is_array() && f.size() == 2 && f[0].is_string()) {
      out.emplace_back(f[0].get<std::string>(), type_from_json(f[1], named));
    } else {
      bad(whole, "each field is {\"name\", \"type\"} or [name, type]");
    }
  }
  return out;
}

std::optional<int> suffix_number(const std::string& s, const std::string& prefix) {
  if (s.size() <= prefix.size() || s.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data() + prefix.size(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

Json type_to_json(const Type& t) {
  return t.visit(overloaded{
      [](const Type::Boolean&) { return Json{{"kind", "bool"}}; },
      [](const Type::Character&) { return Json{{"kind", "char"}}; },
      [](const Type::UInt& u) { return Json{{"kind", "uint"}, {"bits", u.bits}}; },
      [](const Type::Text& x) { return Json{{"kind", "text"}, {"max_len", x.max_len}}; },
      [](const Type::Enumeration& e) { return Json{{"kind", "enum"}, {"name", e.name}, {"variants", e.variants}}; },
      [](const Type::ArrayOf& a) { return Json{{"kind", "array"}, {"of", type_to_json(a.element)}, {"length", a.length}}; },
      [](const Type::Composite& c) {
        Json fields = Json::array();
        for (const auto& f : c.fields) fields.push_back(Json{{"name", f.name}, {"type", type_to_json(f.type)}});
        return Json{{"kind", "struct"}, {"name", c.name}, {"fields", fields}};
      },
      [](const Type::Alias& a) { return Json{{"kind", "alias"}, {"name", a.name}, {"of", type_to_json(a.inner)}}; },
  });
}

Type type_from_json(const Json& j, const std::map<std::string, Type>& named) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "bool" || s == "boolean") return Type::boolean();
    if (s == "char" || s == "character") return Type::character();
    if (auto bits = suffix_number(s, "uint")) return Type::uint(*bits);
    if (auto len = suffix_number(s, "text")) return Type::text(*len);
    if (auto it = named.find(s); it != named.end()) return it->second;
    bad(j, "unknown type name");
  }
  if (!j.is_object()) bad(j, "expected a string or an object");
  if (j.contains("kind")) {
    auto kind = string_field(j, "kind");
    if (kind == "bool") return Type::boolean();
    if (kind == "char") return Type::character();
    if (kind == "uint") return Type::uint(int_field(j, "bits"));
    if (kind == "text") return Type::text(int_field(j, "max_len"));
    if (kind == "enum") return Type::enumeration(string_field(j, "name"), j.at("variants").get<std::vector<std::string>>());
    if (kind == "array") return Type::array(type_from_json(j.at("of"), named), int_field(j, "length"));
    if (kind == "struct") return Type::composite(string_field(j, "name"), fields_from(j.at("fields"), j, named));
    if (kind == "alias") return Type::alias(string_field(j, "name"), type_from_json(j.at("of"), named));
    bad(j, "unknown kind '" + kind + "'");
  }
  if (j.contains("uint")) return Type::uint(j.at("uint").get<int>());
  if (j.contains("text")) return Type::text(j.at("text").get<int>());
  if (j.contains("array")) return Type::array(type_from_json(j.at("array"), named), int_field(j, "length"));
  if (j.contains("enum")) {
    if (!j.at("enum").is_array()) bad(j, "enum variants must be a list");
    return Type::enumeration(string_field(j, "name"), j.at("enum").get<std::vector<std::string>>());
  }
  if (j.contains("struct")) return Type::composite(string_field(j, "name"), fields_from(j.at("struct"), j, named));
  if (j.contains("alias")) return Type::alias(string_field(j, "name"), type_from_json(j.at("alias"), named));
  bad(j, "unrecognised type form");
}

}  // namespace protosynth
