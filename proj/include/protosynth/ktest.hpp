#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace protosynth {

struct KTestObject {
  std::string name;
  std::vector<std::uint8_t> bytes;
  bool operator==(const KTestObject&) const = default;
};

// The engine's binary test file. Header integers are big-endian.
struct KTest {
  std::uint32_t version = 3;
  std::vector<std::string> args;
  std::uint32_t sym_argvs = 0;     // version >= 2
  std::uint32_t sym_argv_len = 0;  // version >= 2
  std::vector<KTestObject> objects;

  const KTestObject* find(const std::string& name) const;
  bool operator==(const KTest&) const = default;
};

// Throws ParseError on bad magic, truncation, trailing bytes or a version
// outside 1..3.
KTest parse_ktest(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_ktest(const KTest& t);

// Parses the textual dump printed by the engine's ktest-tool. Objects are
// read from their `hex` lines, falling back to the `data` literal.
KTest parse_ktest_dump(std::string_view text);

// Reads a binary file, or a dump when the file does not start with the magic.
KTest read_ktest(const std::filesystem::path& path);

}  // namespace protosynth
