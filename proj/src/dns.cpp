#include "protosynth/dns.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>

#include "protosynth/util.hpp"

namespace protosynth::dns {

namespace {

bool plain_label_char(unsigned char c) { return std::isalnum(c) || c == '*' || c == '_' || c == '-'; }

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lower_text(std::string s) {
  for (auto& c : s) c = ascii_lower(c);
  return s;
}

const std::map<std::string, std::uint16_t, std::less<>>& type_table() {
  static const std::map<std::string, std::uint16_t, std::less<>> t{
      {"A", 1},   {"NS", 2},     {"CNAME", 5}, {"SOA", 6},    {"PTR", 12},
      {"MX", 15}, {"TXT", 16},   {"AAAA", 28}, {"DNAME", 39}, {"ANY", 255}};
  return t;
}

const char* kRcodes[] = {"NOERROR", "FORMERR", "SERVFAIL", "NXDOMAIN", "NOTIMP", "REFUSED",
                         "YXDOMAIN", "YXRRSET", "NXRRSET", "NOTAUTH", "NOTZONE"};

bool name_bearing(const std::string& type) { return type == "NS" || type == "CNAME" || type == "DNAME" || type == "PTR"; }

// Whitespace-separated tokens; quoted strings and escapes stay inside one token.
std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '\\' && i + 1 < line.size()) {
      cur += c;
      cur += line[++i];
      any = true;
    } else if (c == '"') {
      quoted = !quoted;
      cur += c;
      any = true;
    } else if (!quoted && std::isspace(static_cast<unsigned char>(c))) {
      if (any) out.push_back(cur);
      cur.clear();
      any = false;
    } else {
      cur += c;
      any = true;
    }
  }
  if (any) out.push_back(cur);
  return out;
}

std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\') {
      ++i;
    } else if (line[i] == '"') {
      quoted = !quoted;
    } else if (line[i] == ';' && !quoted) {
      return std::string(line.substr(0, i));
    }
  }
  return std::string(line);
}

std::string quote_txt(const std::string& raw) {
  std::string out = "\"";
  for (unsigned char c : raw) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += static_cast<char>(c);
    } else if (c < 0x20 || c > 0x7E) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\%03u", c);
      out += buf;
    } else {
      out += static_cast<char>(c);
    }
  }
  return out + "\"";
}

// Decodes one character-string token, quoted or bare.
std::string unquote_txt(std::string_view tok) {
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') tok = tok.substr(1, tok.size() - 2);
  std::string out;
  for (std::size_t i = 0; i < tok.size(); ++i) {
    if (tok[i] != '\\' || i + 1 >= tok.size()) {
      out += tok[i];
      continue;
    }
    if (i + 3 < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i + 1])) &&
        std::isdigit(static_cast<unsigned char>(tok[i + 2])) && std::isdigit(static_cast<unsigned char>(tok[i + 3]))) {
      out += static_cast<char>(std::stoi(std::string(tok.substr(i + 1, 3))));
      i += 3;
    } else {
      out += tok[++i];
    }
  }
  return out;
}

std::uint32_t fnv1a(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

}  // namespace

std::string name_to_text(const Name& n) {
  if (n.empty()) return ".";
  std::string out;
  for (const auto& label : n) {
    for (unsigned char c : label) {
      if (plain_label_char(c)) {
        out += static_cast<char>(c);
      } else {
        char buf[8];
        std::snprintf(buf, sizeof buf, "\\%03u", c);
        out += buf;
      }
    }
    out += '.';
  }
  return out;
}

std::size_t wire_length(const Name& n) {
  std::size_t len = 1;
  for (const auto& l : n) len += l.size() + 1;
  return len;
}

Name parse_name(std::string_view text, const Name& origin) {
  if (text == "@") return origin;
  if (text == ".") return {};
  if (text.empty()) throw ParseError("empty domain name");
  Name out;
  std::string label;
  bool absolute = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\\') {
      if (i + 3 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])) &&
          std::isdigit(static_cast<unsigned char>(text[i + 2])) && std::isdigit(static_cast<unsigned char>(text[i + 3]))) {
        int v = std::stoi(std::string(text.substr(i + 1, 3)));
        if (v > 255) throw ParseError("bad escape in name '" + std::string(text) + "'");
        label += static_cast<char>(v);
        i += 3;
      } else if (i + 1 < text.size()) {
        label += text[++i];
      } else {
        throw ParseError("trailing backslash in name '" + std::string(text) + "'");
      }
    } else if (c == '.') {
      if (label.empty()) throw ParseError("empty label in name '" + std::string(text) + "'");
      out.push_back(label);
      label.clear();
      if (i + 1 == text.size()) absolute = true;
    } else {
      label += c;
    }
  }
  if (!label.empty()) out.push_back(label);
  if (!absolute) out.insert(out.end(), origin.begin(), origin.end());
  for (const auto& l : out) {
    if (l.size() > kMaxLabel) throw ParseError("label longer than 63 octets in '" + std::string(text) + "'");
  }
  if (wire_length(out) > kMaxName) throw ParseError("name longer than 255 octets: '" + std::string(text) + "'");
  return out;
}

Name lower(const Name& n) {
  Name out;
  for (const auto& l : n) out.push_back(lower_text(l));
  return out;
}

bool is_subdomain(const Name& n, const Name& ancestor) {
  if (ancestor.size() > n.size()) return false;
  auto off = n.size() - ancestor.size();
  for (std::size_t i = 0; i < ancestor.size(); ++i) {
    if (lower_text(n[off + i]) != lower_text(ancestor[i])) return false;
  }
  return true;
}

std::uint16_t type_code(std::string_view mnemonic) {
  if (auto it = type_table().find(mnemonic); it != type_table().end()) return it->second;
  if (util::starts_with(mnemonic, "TYPE")) return static_cast<std::uint16_t>(std::stoul(std::string(mnemonic.substr(4))));
  throw ParseError("unknown record type '" + std::string(mnemonic) + "'");
}

std::string type_name(std::uint16_t code) {
  for (const auto& [name, c] : type_table()) {
    if (c == code) return name;
  }
  return "TYPE" + std::to_string(code);
}

std::string rcode_name(int rcode) {
  if (rcode >= 0 && rcode < static_cast<int>(std::size(kRcodes))) return kRcodes[rcode];
  return "RCODE" + std::to_string(rcode);
}

int rcode_value(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kRcodes); ++i) {
    if (name == kRcodes[i]) return static_cast<int>(i);
  }
  throw ParseError("unknown rcode '" + std::string(name) + "'");
}

// Zones -----------------------------------------------------------------------

std::string Zone::to_text() const {
  std::string out = "$ORIGIN " + name_to_text(origin) + "\n";
  std::uint32_t ttl = records.empty() ? 300 : records.front().ttl;
  out += "$TTL " + std::to_string(ttl) + "\n";
  for (const auto& r : records) {
    out += name_to_text(r.owner) + " ";
    if (r.ttl != ttl) out += std::to_string(r.ttl) + " ";
    out += r.type + " " + r.rdata + "\n";
  }
  return out;
}

namespace {

std::string absolute_rdata(const std::string& type, const std::vector<std::string>& toks, const Name& origin) {
  auto abs = [&](const std::string& t) { return name_to_text(parse_name(t, origin)); };
  if (name_bearing(type)) {
    if (toks.size() != 1) throw ParseError(type + " needs one name");
    return abs(toks[0]);
  }
  if (type == "MX") {
    if (toks.size() != 2) throw ParseError("MX needs a preference and a name");
    return toks[0] + " " + abs(toks[1]);
  }
  if (type == "SOA") {
    if (toks.size() != 7) throw ParseError("SOA needs 7 fields");
    std::string out = abs(toks[0]) + " " + abs(toks[1]);
    for (std::size_t i = 2; i < 7; ++i) out += " " + toks[i];
    return out;
  }
  return util::join(toks, " ");
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

Zone parse_zone(std::string_view text) {
  Zone z;
  std::uint32_t default_ttl = 300;
  std::optional<Name> last_owner;
  int lineno = 0;
  for (const auto& raw : util::split_lines(text)) {
    ++lineno;
    std::string line = strip_comment(raw);
    auto toks = tokenize(line);
    toks.erase(std::remove_if(toks.begin(), toks.end(), [](const std::string& t) { return t == "(" || t == ")"; }),
               toks.end());
    if (toks.empty()) continue;
    try {
      if (toks[0] == "$ORIGIN") {
        if (toks.size() != 2) throw ParseError("$ORIGIN needs one name");
        z.origin = parse_name(toks[1], z.origin);
        continue;
      }
      if (toks[0] == "$TTL") {
        if (toks.size() != 2 || !all_digits(toks[1])) throw ParseError("$TTL needs a number");
        default_ttl = static_cast<std::uint32_t>(std::stoul(toks[1]));
        continue;
      }
      std::size_t i = 0;
      Name owner;
      if (std::isspace(static_cast<unsigned char>(line[0]))) {
        if (!last_owner) throw ParseError("record without an owner");
        owner = *last_owner;
      } else {
        owner = parse_name(toks[i++], z.origin);
      }
      std::uint32_t ttl = default_ttl;
      while (i < toks.size() && (all_digits(toks[i]) || toks[i] == "IN")) {
        if (toks[i] != "IN") ttl = static_cast<std::uint32_t>(std::stoul(toks[i]));
        ++i;
      }
      if (i >= toks.size()) throw ParseError("missing record type");
      std::string type = toks[i++];
      type_code(type);
      std::vector<std::string> rd(toks.begin() + static_cast<std::ptrdiff_t>(i), toks.end());
      z.records.push_back(Record{owner, type, absolute_rdata(type, rd, z.origin), ttl});
      last_owner = owner;
    } catch (const ParseError& e) {
      throw ParseError("zone line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return z;
}

Json Scenario::to_json() const {
  return Json{{"zone", zone.to_text()},
              {"origin", name_to_text(zone.origin)},
              {"query", Json{{"name", name_to_text(query.name)}, {"type", query.type}}}};
}

Scenario Scenario::from_json(const Json& j) {
  Scenario s;
  s.zone = parse_zone(j.at("zone").get<std::string>());
  s.query.name = parse_name(j.at("query").at("name").get<std::string>());
  s.query.type = j.at("query").at("type").get<std::string>();
  return s;
}

// Postprocessing ----------------------------------------------------------------

namespace {

const Json* field_any(const Json& obj, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (obj.is_object() && obj.contains(n)) return &obj.at(n);
  }
  return nullptr;
}

bool record_like(const Json& v) {
  return v.is_object() && field_any(v, {"record_type", "rtyp", "type"}) && field_any(v, {"name"}) &&
         field_any(v, {"rdata", "rdat", "data"});
}

Name root_name(const std::string& raw, const Name& suffix) {
  Name out;
  if (!raw.empty()) {
    std::size_t start = 0;
    while (true) {
      auto dot = raw.find('.', start);
      std::string label = raw.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (label.empty()) throw Error("cannot root name '" + raw + "': empty label");
      if (label.size() > kMaxLabel) throw Error("cannot root name '" + raw + "': label longer than 63 octets");
      out.push_back(label);
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
  }
  out.insert(out.end(), suffix.begin(), suffix.end());
  if (wire_length(out) > kMaxName) throw Error("cannot root name '" + raw + "': longer than 255 octets after suffixing");
  return out;
}

std::string test_rdata(const std::string& type, const std::string& raw, const Name& suffix,
                       const PostprocessOptions& o) {
  if (name_bearing(type)) return name_to_text(root_name(raw, suffix));
  if (type == "A") return "192.0.2." + std::to_string(1 + fnv1a(raw) % 254);
  if (type == "AAAA") {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%x", 1 + fnv1a(raw) % 0xfffe);
    return std::string("2001:db8::") + buf;
  }
  if (type == "TXT") return quote_txt(raw);
  if (type == "SOA") return o.nameserver + " hostmaster." + name_to_text(suffix) + " 1 3600 600 86400 300";
  if (type == "MX") return "10 " + name_to_text(root_name(raw, suffix));
  throw Error("no zone rendering for record type '" + type + "'");
}

}  // namespace

Scenario postprocess_dns(const TestCase& test, const PostprocessOptions& options) {
  Name suffix = parse_name(options.suffix);
  Scenario s;
  s.zone.origin = suffix;
  s.zone.records.push_back(Record{suffix, "SOA",
                                  test_rdata("SOA", "", suffix, options), 300});
  s.zone.records.push_back(Record{suffix, "NS", name_to_text(parse_name(options.nameserver)), 300});

  const TypedValue* query = nullptr;
  std::string qtype = options.query_type;
  std::vector<const Json*> records;
  for (const auto& in : test.inputs) {
    const Type& t = in.type.resolved();
    if (!options.query_arg.empty() ? in.name == options.query_arg : (query == nullptr && t.is<Type::Text>())) {
      query = &in;
      continue;
    }
    if ((in.name == "qtype" || in.name == "query_type") && in.value.is_string()) {
      qtype = in.value.get<std::string>();
      continue;
    }
    if (record_like(in.value)) records.push_back(&in.value);
    if (in.value.is_array()) {
      for (const auto& e : in.value) {
        if (record_like(e)) records.push_back(&e);
      }
    }
  }
  if (query == nullptr) throw Error("test " + test.id + " has no query name input");
  s.query.name = root_name(text_bytes(query->value), suffix);
  s.query.type = qtype;
  type_code(qtype);

  for (const Json* r : records) {
    std::string type = field_any(*r, {"record_type", "rtyp", "type"})->get<std::string>();
    Name owner = root_name(text_bytes(*field_any(*r, {"name"})), suffix);
    std::string rdata = test_rdata(type, text_bytes(*field_any(*r, {"rdata", "rdat", "data"})), suffix, options);
    bool dup = std::any_of(s.zone.records.begin(), s.zone.records.end(), [&](const Record& x) {
      return lower(x.owner) == lower(owner) && x.type == type && x.rdata == rdata;
    });
    if (!dup) s.zone.records.push_back(Record{owner, type, rdata, 300});
  }
  return s;
}

// Wire format -------------------------------------------------------------------

namespace {

void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}

void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  put16(b, static_cast<std::uint16_t>(v >> 16));
  put16(b, static_cast<std::uint16_t>(v));
}

void put_name(std::vector<std::uint8_t>& b, const Name& n) {
  for (const auto& l : n) {
    b.push_back(static_cast<std::uint8_t>(l.size()));
    b.insert(b.end(), l.begin(), l.end());
  }
  b.push_back(0);
}

std::vector<std::uint8_t> encode_rdata(std::uint16_t type, const std::string& rdata) {
  std::vector<std::uint8_t> out;
  auto toks = tokenize(rdata);
  std::string t = type_name(type);
  if (!toks.empty() && toks[0] == "\\#") {
    for (std::size_t i = 2; i < toks.size(); ++i) {
      for (std::size_t j = 0; j + 1 < toks[i].size(); j += 2) {
        out.push_back(static_cast<std::uint8_t>(std::stoul(toks[i].substr(j, 2), nullptr, 16)));
      }
    }
    return out;
  }
  if (t == "A") {
    std::uint8_t a[4];
    if (toks.size() != 1 || ::inet_pton(AF_INET, toks[0].c_str(), a) != 1) throw ParseError("bad A rdata " + rdata);
    out.assign(a, a + 4);
  } else if (t == "AAAA") {
    std::uint8_t a[16];
    if (toks.size() != 1 || ::inet_pton(AF_INET6, toks[0].c_str(), a) != 1) throw ParseError("bad AAAA rdata " + rdata);
    out.assign(a, a + 16);
  } else if (name_bearing(t)) {
    put_name(out, parse_name(toks.at(0)));
  } else if (t == "MX") {
    put16(out, static_cast<std::uint16_t>(std::stoul(toks.at(0))));
    put_name(out, parse_name(toks.at(1)));
  } else if (t == "SOA") {
    if (toks.size() != 7) throw ParseError("bad SOA rdata " + rdata);
    put_name(out, parse_name(toks[0]));
    put_name(out, parse_name(toks[1]));
    for (std::size_t i = 2; i < 7; ++i) put32(out, static_cast<std::uint32_t>(std::stoul(toks[i])));
  } else if (t == "TXT") {
    for (const auto& tok : toks) {
      auto s = unquote_txt(tok);
      if (s.size() > 255) throw ParseError("TXT string longer than 255 octets");
      out.push_back(static_cast<std::uint8_t>(s.size()));
      out.insert(out.end(), s.begin(), s.end());
    }
  } else {
    throw ParseError("cannot encode rdata of type " + t);
  }
  return out;
}

class WireReader {
 public:
  explicit WireReader(std::span<const std::uint8_t> b) : b_(b) {}

  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    auto v = static_cast<std::uint16_t>((b_[pos_] << 8) | b_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t hi = u16();
    return (hi << 16) | u16();
  }

  Name name() {
    Name out;
    std::size_t pos = pos_;
    bool jumped = false;
    int hops = 0;
    while (true) {
      if (pos >= b_.size()) throw ParseError("truncated name");
      std::uint8_t len = b_[pos];
      if ((len & 0xC0) == 0xC0) {
        if (pos + 1 >= b_.size()) throw ParseError("truncated compression pointer");
        std::size_t target = static_cast<std::size_t>((len & 0x3F) << 8 | b_[pos + 1]);
        if (!jumped) pos_ = pos + 2;
        jumped = true;
        if (++hops > 64) throw ParseError("compression loop");
        pos = target;
        continue;
      }
      if (len & 0xC0) throw ParseError("bad label type");
      ++pos;
      if (len == 0) break;
      if (pos + len > b_.size()) throw ParseError("truncated label");
      out.emplace_back(reinterpret_cast<const char*>(b_.data() + pos), len);
      pos += len;
    }
    if (!jumped) pos_ = pos;
    if (wire_length(out) > kMaxName) throw ParseError("name too long");
    return out;
  }

  std::string rdata(std::uint16_t type, std::size_t len) {
    need(len);
    std::size_t end = pos_ + len;
    std::string t = type_name(type);
    std::string out;
    if (t == "A" && len == 4) {
      char buf[INET_ADDRSTRLEN];
      ::inet_ntop(AF_INET, b_.data() + pos_, buf, sizeof buf);
      out = buf;
    } else if (t == "AAAA" && len == 16) {
      char buf[INET6_ADDRSTRLEN];
      ::inet_ntop(AF_INET6, b_.data() + pos_, buf, sizeof buf);
      out = buf;
    } else if (name_bearing(t)) {
      out = name_to_text(name());
    } else if (t == "MX") {
      auto pref = u16();
      out = std::to_string(pref) + " " + name_to_text(name());
    } else if (t == "SOA") {
      std::string mname = name_to_text(name());
      out = mname + " " + name_to_text(name());
      for (int i = 0; i < 5; ++i) out += " " + std::to_string(u32());
    } else if (t == "TXT") {
      while (pos_ < end) {
        std::size_t n = u8();
        need(n);
        if (!out.empty()) out += ' ';
        out += quote_txt(std::string(reinterpret_cast<const char*>(b_.data() + pos_), n));
        pos_ += n;
      }
    } else {
      out = "\\# " + std::to_string(len);
      if (len) out += ' ';
      for (std::size_t i = 0; i < len; ++i) {
        char buf[4];
        std::snprintf(buf, sizeof buf, "%02x", b_[pos_ + i]);
        out += buf;
      }
    }
    if (pos_ > end && out.rfind("\\#", 0) != 0) throw ParseError("rdata overruns its length");
    pos_ = end;
    return out;
  }

  WireRecord record() {
    WireRecord r;
    r.owner = name();
    r.type = u16();
    r.klass = u16();
    r.ttl = u32();
    auto len = u16();
    r.rdata = rdata(r.type, len);
    return r;
  }

  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw ParseError("truncated DNS message");
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_message(const Message& m) {
  std::vector<std::uint8_t> b;
  put16(b, m.id);
  std::uint16_t flags = static_cast<std::uint16_t>((m.qr ? 0x8000 : 0) | ((m.opcode & 0xF) << 11) | (m.aa ? 0x0400 : 0) |
                                                   (m.tc ? 0x0200 : 0) | (m.rd ? 0x0100 : 0) | (m.ra ? 0x0080 : 0) |
                                                   (m.rcode & 0xF));
  put16(b, flags);
  put16(b, 1);
  put16(b, static_cast<std::uint16_t>(m.answer.size()));
  put16(b, static_cast<std::uint16_t>(m.authority.size()));
  put16(b, static_cast<std::uint16_t>(m.additional.size()));
  put_name(b, m.qname);
  put16(b, m.qtype);
  put16(b, 1);
  for (const auto* sec : {&m.answer, &m.authority, &m.additional}) {
    for (const auto& r : *sec) {
      put_name(b, r.owner);
      put16(b, r.type);
      put16(b, r.klass);
      put32(b, r.ttl);
      auto rd = encode_rdata(r.type, r.rdata);
      put16(b, static_cast<std::uint16_t>(rd.size()));
      b.insert(b.end(), rd.begin(), rd.end());
    }
  }
  return b;
}

Message decode_message(std::span<const std::uint8_t> bytes) {
  WireReader r(bytes);
  Message m;
  m.id = r.u16();
  auto flags = r.u16();
  m.qr = flags & 0x8000;
  m.opcode = (flags >> 11) & 0xF;
  m.aa = flags & 0x0400;
  m.tc = flags & 0x0200;
  m.rd = flags & 0x0100;
  m.ra = flags & 0x0080;
  m.rcode = flags & 0xF;
  auto qd = r.u16(), an = r.u16(), ns = r.u16(), ar = r.u16();
  for (int i = 0; i < qd; ++i) {
    auto n = r.name();
    auto t = r.u16();
    r.u16();
    if (i == 0) {
      m.qname = n;
      m.qtype = t;
    }
  }
  for (int i = 0; i < an; ++i) m.answer.push_back(r.record());
  for (int i = 0; i < ns; ++i) m.authority.push_back(r.record());
  for (int i = 0; i < ar; ++i) m.additional.push_back(r.record());
  return m;
}

namespace {

std::string canonical_record(const WireRecord& r) {
  std::string t = type_name(r.type);
  std::string rd = (t == "TXT" || util::starts_with(r.rdata, "\\#")) ? r.rdata : lower_text(r.rdata);
  return name_to_text(lower(r.owner)) + " " + t + " " + rd;
}

Json sorted_strings(const Json& a) {
  auto v = a.get<std::vector<std::string>>();
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

Json normalize(const Message& m) {
  Json answer = Json::array(), authority = Json::array(), additional = Json::array();
  for (const auto& r : m.answer) answer.push_back(canonical_record(r));
  for (const auto& r : m.authority) authority.push_back(canonical_record(r));
  for (const auto& r : m.additional) {
    if (r.type == 41) continue;  // OPT pseudo-record
    additional.push_back(canonical_record(r));
  }
  Json flags = Json::array();
  if (m.qr) flags.push_back("qr");
  if (m.aa) flags.push_back("aa");
  if (m.tc) flags.push_back("tc");
  if (m.rd) flags.push_back("rd");
  if (m.ra) flags.push_back("ra");
  return normalize_fields(Json{{"rcode", rcode_name(m.rcode)},
                               {"flags", flags},
                               {"answer", answer},
                               {"authority", authority},
                               {"additional", additional}});
}

Json normalize_fields(const Json& fields) {
  Json out = Json::object();
  for (const char* k : {"rcode", "flags", "answer", "authority", "additional"}) {
    if (!fields.contains(k)) continue;
    const Json& v = fields.at(k);
    out[k] = v.is_array() ? sorted_strings(v) : v;
  }
  for (auto it = fields.begin(); it != fields.end(); ++it) {
    if (!out.contains(it.key())) out[it.key()] = it.value();
  }
  return out;
}

}  // namespace protosynth::dns
