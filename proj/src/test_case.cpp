#include "protosynth/test_case.hpp"

#include <set>

#include "protosynth/type_json.hpp"

namespace protosynth {

namespace {

bool printable(std::uint8_t c) { return c >= 0x20 && c <= 0x7E; }

std::string to_hex(const std::string& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    out += digits[c >> 4];
    out += digits[c & 15];
  }
  return out;
}

std::string from_hex(const std::string& hex) {
  auto digit = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ReconstructError("bad hex digit in bytes_hex value");
  };
  if (hex.size() % 2 != 0) throw ReconstructError("odd-length bytes_hex value");
  std::string out;
  for (std::size_t i = 0; i < hex.size(); i += 2) out += static_cast<char>(digit(hex[i]) * 16 + digit(hex[i + 1]));
  return out;
}

Json text_json(const std::string& bytes) {
  for (unsigned char c : bytes) {
    if (!printable(c)) return Json{{"bytes_hex", to_hex(bytes)}};
  }
  return bytes;
}

std::uint64_t read_le(const std::vector<std::uint8_t>& b) {
  std::uint64_t v = 0;
  for (std::size_t i = b.size(); i-- > 0;) v = (v << 8) | b[i];
  return v;
}

std::vector<std::uint8_t> write_le(std::uint64_t v, std::size_t width) {
  std::vector<std::uint8_t> out(width);
  for (std::size_t i = 0; i < width; ++i) {
    out[i] = static_cast<std::uint8_t>(v & 0xFF);
    v >>= 8;
  }
  return out;
}

// Decoded JSON for one slot, or nullopt with `why` set when out of range.
std::optional<Json> decode_slot(const BaseSlot& s, const std::vector<std::uint8_t>& b, std::string& why) {
  switch (s.kind) {
    case BaseKind::boolean:
      if (b[0] > 1) {
        why = s.var_name + ": boolean byte " + std::to_string(b[0]);
        return std::nullopt;
      }
      return Json(b[0] == 1);
    case BaseKind::character:
      return text_json(std::string(1, static_cast<char>(b[0])));
    case BaseKind::unsigned_integer: {
      auto v = read_le(b);
      if (s.bits < 64 && v >> s.bits != 0) {
        why = s.var_name + ": " + std::to_string(v) + " exceeds " + std::to_string(s.bits) + " bits";
        return std::nullopt;
      }
      return Json(v);
    }
    case BaseKind::enumeration: {
      auto v = read_le(b);
      if (v >= s.variants.size()) {
        why = s.var_name + ": enum value " + std::to_string(v) + " outside " + s.enum_name + " (" +
              std::to_string(s.variants.size()) + " variants)";
        return std::nullopt;
      }
      return Json(s.variants[v]);
    }
    case BaseKind::char_buffer: {
      std::string text(b.begin(), b.end());
      auto nul = text.find('\0');
      if (nul != std::string::npos) text.resize(nul);
      if (static_cast<int>(text.size()) > s.length) {
        why = s.var_name + ": text longer than " + std::to_string(s.length);
        return std::nullopt;
      }
      return text_json(text);
    }
  }
  return std::nullopt;
}

std::vector<std::uint8_t> encode_slot(const BaseSlot& s, const Json& v) {
  switch (s.kind) {
    case BaseKind::boolean:
      return {static_cast<std::uint8_t>(v.get<bool>() ? 1 : 0)};
    case BaseKind::character: {
      auto t = text_bytes(v);
      if (t.size() != 1) throw ReconstructError(s.var_name + ": character value must be one byte");
      return {static_cast<std::uint8_t>(t[0])};
    }
    case BaseKind::unsigned_integer:
      return write_le(v.get<std::uint64_t>(), s.byte_width);
    case BaseKind::enumeration: {
      auto name = v.get<std::string>();
      for (std::size_t i = 0; i < s.variants.size(); ++i) {
        if (s.variants[i] == name) return write_le(i, s.byte_width);
      }
      throw ReconstructError(s.var_name + ": unknown variant " + name);
    }
    case BaseKind::char_buffer: {
      auto t = text_bytes(v);
      if (t.size() + 1 > s.byte_width) throw ReconstructError(s.var_name + ": text too long");
      std::vector<std::uint8_t> out(t.begin(), t.end());
      out.resize(s.byte_width, 0);
      return out;
    }
  }
  return {};
}

Json skeleton(const Type& t) {
  const Type& r = t.resolved();
  if (const auto* c = r.as<Type::Composite>()) {
    Json o = Json::object();
    for (const auto& f : c->fields) o[f.name] = skeleton(f.type);
    return o;
  }
  if (const auto* a = r.as<Type::ArrayOf>()) {
    Json arr = Json::array();
    for (int i = 0; i < a->length; ++i) arr.push_back(skeleton(a->element));
    return arr;
  }
  return nullptr;
}

Json& at_path(Json& root, const std::vector<PathStep>& steps) {
  Json* cur = &root;
  for (const auto& s : steps) {
    if (const auto* f = std::get_if<std::string>(&s)) {
      cur = &(*cur)[*f];
    } else {
      cur = &(*cur)[std::get<std::size_t>(s)];
    }
  }
  return *cur;
}

const Json& at_path(const Json& root, const std::vector<PathStep>& steps) {
  const Json* cur = &root;
  for (const auto& s : steps) {
    if (const auto* f = std::get_if<std::string>(&s)) {
      cur = &cur->at(*f);
    } else {
      cur = &cur->at(std::get<std::size_t>(s));
    }
  }
  return *cur;
}

Json typed_to_json(const TypedValue& v) {
  return Json{{"name", v.name}, {"type", type_to_json(v.type)}, {"value", v.value}};
}

TypedValue typed_from_json(const Json& j) {
  return TypedValue{j.at("name").get<std::string>(), type_from_json(j.at("type")), j.at("value")};
}

}  // namespace

std::string text_bytes(const Json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_object() && value.contains("bytes_hex")) return from_hex(value.at("bytes_hex").get<std::string>());
  throw ReconstructError("expected a text value, got " + value.dump());
}

Json TestCase::args_list() const {
  Json out = Json::array();
  for (const auto& v : inputs) out.push_back(v.value);
  if (output) out.push_back(output->value);
  return out;
}

Json TestCase::to_json() const {
  Json j{{"id", id}};
  j["inputs"] = Json::array();
  for (const auto& v : inputs) j["inputs"].push_back(typed_to_json(v));
  j["output"] = output ? typed_to_json(*output) : Json(nullptr);
  j["invalid"] = invalid;
  j["origin"] = Json{{"model_id", model_id}, {"test_file", test_file}};
  return j;
}

TestCase TestCase::from_json(const Json& j) {
  TestCase t;
  t.id = j.value("id", "");
  for (const auto& v : j.at("inputs")) t.inputs.push_back(typed_from_json(v));
  if (j.contains("output") && !j.at("output").is_null()) t.output = typed_from_json(j.at("output"));
  t.invalid = j.value("invalid", false);
  if (j.contains("origin")) {
    t.model_id = j.at("origin").value("model_id", "");
    t.test_file = j.at("origin").value("test_file", "");
  }
  return t;
}

Reconstructed reconstruct(const SymbolMap& map, const KTest& ktest, const std::string& test_file) {
  TestCase t;
  t.model_id = map.model_id;
  t.test_file = test_file;
  std::vector<Json> inputs;
  for (const auto& a : map.inputs) inputs.push_back(skeleton(a.type));
  Json output = map.output ? skeleton(map.output->type) : Json(nullptr);

  for (const auto& e : map.entries) {
    const auto* obj = ktest.find(e.slot.var_name);
    if (obj == nullptr) throw ReconstructError("missing object " + e.slot.var_name);
    if (obj->bytes.size() != e.slot.byte_width) {
      throw ReconstructError("object " + e.slot.var_name + " has " + std::to_string(obj->bytes.size()) +
                             " bytes, expected " + std::to_string(e.slot.byte_width));
    }
    std::string why;
    auto v = decode_slot(e.slot, obj->bytes, why);
    if (!v) return Reconstructed{std::nullopt, why};
    switch (e.role) {
      case SlotRole::input:
        at_path(inputs.at(e.slot.path.arg), e.slot.path.steps) = *v;
        break;
      case SlotRole::output:
        at_path(output, e.slot.path.steps) = *v;
        break;
      case SlotRole::validity:
        t.invalid = v->get<bool>();
        break;
    }
  }
  for (std::size_t i = 0; i < map.inputs.size(); ++i) {
    t.inputs.push_back(TypedValue{map.inputs[i].name, map.inputs[i].type, std::move(inputs[i])});
  }
  if (map.output) t.output = TypedValue{map.output->name, map.output->type, std::move(output)};
  return Reconstructed{std::move(t), {}};
}

std::map<std::string, std::vector<std::uint8_t>> encode(const SymbolMap& map, const TestCase& test) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : map.entries) {
    switch (e.role) {
      case SlotRole::input:
        out[e.slot.var_name] = encode_slot(e.slot, at_path(test.inputs.at(e.slot.path.arg).value, e.slot.path.steps));
        break;
      case SlotRole::output:
        if (!test.output) throw ReconstructError("test has no output for " + e.slot.var_name);
        out[e.slot.var_name] = encode_slot(e.slot, at_path(test.output->value, e.slot.path.steps));
        break;
      case SlotRole::validity:
        out[e.slot.var_name] = encode_slot(e.slot, Json(test.invalid));
        break;
    }
  }
  return out;
}

std::string dedup_key(const TestCase& t) {
  Json k = Json::array();
  for (const auto& v : t.inputs) k.push_back(v.value);
  return Json{{"inputs", k}, {"invalid", t.invalid}}.dump();
}

std::vector<TestCase> dedup_union(const std::vector<TestCase>& tests) {
  std::set<std::string> seen;
  std::vector<TestCase> out;
  for (const auto& t : tests) {
    if (seen.insert(dedup_key(t)).second) out.push_back(t);
  }
  return out;
}

std::vector<TestCase> export_suite(std::vector<TestCase> tests, bool keep_invalid) {
  std::vector<TestCase> out;
  for (auto& t : tests) {
    if (t.invalid && !keep_invalid) continue;
    out.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::string n = std::to_string(i + 1);
    out[i].id = "t" + std::string(n.size() < 4 ? 4 - n.size() : 0, '0') + n;
  }
  return out;
}

Json TestSuite::to_json() const {
  Json j{{"model", model}, {"plan_fingerprint", plan_fingerprint}};
  j["tests"] = Json::array();
  for (const auto& t : tests) j["tests"].push_back(t.to_json());
  return j;
}

TestSuite TestSuite::from_json(const Json& j) {
  TestSuite s;
  s.model = j.value("model", "");
  s.plan_fingerprint = j.value("plan_fingerprint", "");
  for (const auto& t : j.at("tests")) s.tests.push_back(TestCase::from_json(t));
  return s;
}

}  // namespace protosynth
