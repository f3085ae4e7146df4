#include "protosynth/ktest.hpp"

#include <cstring>

#include "protosynth/error.hpp"
#include "protosynth/util.hpp"

namespace protosynth {

const KTestObject* KTest::find(const std::string& name) const {
  for (const auto& o : objects) {
    if (o.name == name) return &o;
  }
  return nullptr;
}

namespace {

constexpr std::string_view kMagic = "KTEST";
constexpr std::string_view kOldMagic = "BOUT\n";

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = (std::uint32_t{b_[pos_]} << 24) | (std::uint32_t{b_[pos_ + 1]} << 16) |
                      (std::uint32_t{b_[pos_ + 2]} << 8) | std::uint32_t{b_[pos_ + 3]};
    pos_ += 4;
    return v;
  }

  std::vector<std::uint8_t> bytes(std::size_t n, const char* what) {
    need(n, what);
    std::vector<std::uint8_t> out(b_.begin() + pos_, b_.begin() + pos_ + n);
    pos_ += n;
    return out;
  }

  std::string str(const char* what) {
    auto n = u32(what);
    auto v = bytes(n, what);
    return std::string(v.begin(), v.end());
  }

  bool done() const { return pos_ == b_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (b_.size() - pos_ < n) {
      throw ParseError("truncated test file: " + std::string(what) + " at offset " + std::to_string(pos_));
    }
  }

  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_bytes(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> b) {
  put_u32(out, static_cast<std::uint32_t>(b.size()));
  out.insert(out.end(), b.begin(), b.end());
}

bool has_magic(std::span<const std::uint8_t> b, std::string_view magic) {
  return b.size() >= magic.size() && std::memcmp(b.data(), magic.data(), magic.size()) == 0;
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::vector<std::uint8_t> parse_hex(std::string_view s) {
  if (util::starts_with(s, "0x")) s.remove_prefix(2);
  if (s.size() % 2 != 0) throw ParseError("odd-length hex in test dump");
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < s.size(); i += 2) {
    int hi = hex_digit(s[i]), lo = hex_digit(s[i + 1]);
    if (hi < 0 || lo < 0) throw ParseError("bad hex in test dump");
    out.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
  }
  return out;
}

// Python bytes literal as printed by the dump tool, e.g. b'a.*\x00'.
std::vector<std::uint8_t> parse_bytes_literal(std::string_view s) {
  if (s.size() < 3 || s[0] != 'b' || (s[1] != '\'' && s[1] != '"') || s.back() != s[1]) {
    throw ParseError("bad data literal in test dump");
  }
  s = s.substr(2, s.size() - 3);
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out.push_back(static_cast<std::uint8_t>(s[i]));
      continue;
    }
    if (++i >= s.size()) throw ParseError("bad escape in test dump");
    switch (s[i]) {
      case 'x': {
        if (i + 2 >= s.size()) throw ParseError("bad escape in test dump");
        auto v = parse_hex(s.substr(i + 1, 2));
        out.push_back(v[0]);
        i += 2;
        break;
      }
      case 'n':
        out.push_back('\n');
        break;
      case 't':
        out.push_back('\t');
        break;
      case 'r':
        out.push_back('\r');
        break;
      default:
        out.push_back(static_cast<std::uint8_t>(s[i]));
    }
  }
  return out;
}

std::string unquote(std::string_view s) {
  s = util::trim(s);
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
    return std::string(s.substr(1, s.size() - 2));
  }
  return std::string(s);
}

}  // namespace

KTest parse_ktest(std::span<const std::uint8_t> bytes) {
  if (!has_magic(bytes, kMagic) && !has_magic(bytes, kOldMagic)) throw ParseError("not a test file: bad magic");
  Reader r(bytes.subspan(kMagic.size()));
  KTest t;
  t.version = r.u32("version");
  if (t.version < 1 || t.version > 3) throw ParseError("unsupported test file version " + std::to_string(t.version));
  auto nargs = r.u32("argument count");
  for (std::uint32_t i = 0; i < nargs; ++i) t.args.push_back(r.str("argument"));
  if (t.version >= 2) {
    t.sym_argvs = r.u32("symbolic argv count");
    t.sym_argv_len = r.u32("symbolic argv length");
  }
  auto nobj = r.u32("object count");
  for (std::uint32_t i = 0; i < nobj; ++i) {
    KTestObject o;
    o.name = r.str("object name");
    auto n = r.u32("object size");
    o.bytes = r.bytes(n, "object data");
    t.objects.push_back(std::move(o));
  }
  if (!r.done()) throw ParseError("trailing bytes after test file objects");
  return t;
}

std::vector<std::uint8_t> serialize_ktest(const KTest& t) {
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  put_u32(out, t.version);
  put_u32(out, static_cast<std::uint32_t>(t.args.size()));
  for (const auto& a : t.args) put_bytes(out, std::span(reinterpret_cast<const std::uint8_t*>(a.data()), a.size()));
  if (t.version >= 2) {
    put_u32(out, t.sym_argvs);
    put_u32(out, t.sym_argv_len);
  }
  put_u32(out, static_cast<std::uint32_t>(t.objects.size()));
  for (const auto& o : t.objects) {
    put_bytes(out, std::span(reinterpret_cast<const std::uint8_t*>(o.name.data()), o.name.size()));
    put_bytes(out, o.bytes);
  }
  return out;
}

KTest parse_ktest_dump(std::string_view text) {
  KTest t;
  std::vector<KTestObject> objects;
  std::vector<bool> have_hex;
  auto object = [&](std::size_t idx) -> KTestObject& {
    if (idx >= objects.size()) {
      objects.resize(idx + 1);
      have_hex.resize(idx + 1, false);
    }
    return objects[idx];
  };
  bool saw_header = false;
  for (const auto& raw : util::split_lines(text)) {
    std::string_view line = raw;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    std::string key = util::trim(line.substr(0, colon));
    std::string_view rest = line.substr(colon + 1);
    if (key == "ktest file") {
      saw_header = true;
    } else if (key == "args") {
      std::string list = util::trim(rest);
      if (list.size() >= 2 && list.front() == '[') {
        list = list.substr(1, list.size() - 2);
        std::size_t start = 0;
        while (start <= list.size()) {
          auto comma = list.find(',', start);
          if (comma == std::string::npos) comma = list.size();
          auto part = std::string_view(list).substr(start, comma - start);
          if (!util::trim(part).empty()) t.args.push_back(unquote(part));
          start = comma + 1;
        }
      }
    } else if (util::starts_with(key, "object ")) {
      std::size_t idx = std::stoul(key.substr(7));
      auto c2 = rest.find(':');
      if (c2 == std::string_view::npos) continue;
      std::string field = util::trim(rest.substr(0, c2));
      std::string value = util::trim(rest.substr(c2 + 1));
      auto& o = object(idx);
      if (field == "name") {
        o.name = unquote(value);
      } else if (field == "hex") {
        o.bytes = parse_hex(value);
        have_hex[idx] = true;
      } else if (field == "data" && !have_hex[idx]) {
        o.bytes = parse_bytes_literal(value);
      }
    }
  }
  if (!saw_header) throw ParseError("not a test dump: missing 'ktest file' header");
  t.objects = std::move(objects);
  return t;
}

KTest read_ktest(const std::filesystem::path& path) {
  auto bytes = util::read_binary(path);
  try {
    if (has_magic(bytes, kMagic) || has_magic(bytes, kOldMagic)) return parse_ktest(bytes);
    return parse_ktest_dump(std::string(bytes.begin(), bytes.end()));
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.what());
  }
}

}  // namespace protosynth
