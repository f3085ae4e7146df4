#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace protosynth::csrc {

// One top-level construct of a C translation unit. Comments directly above
// a construct belong to it.
struct Item {
  enum class Kind { preprocessor, typedef_decl, function_definition, prototype, declaration, comment, other };
  Kind kind = Kind::other;
  std::string text;
  std::string name;       // declared identifier when there is one
  std::size_t line = 1;   // first line of the construct proper (after comments)
  std::size_t begin = 0;  // byte range of `text` in the source
  std::size_t end = 0;
};

// Lexical split; does not understand macros that expand to braces.
std::vector<Item> split_top_level(std::string_view source);

// Comments removed and whitespace kept only where it separates two
// identifier characters, so `char *x` and `char* x` compare equal.
std::string canonical(std::string_view code);

std::string kind_name(Item::Kind kind);

}  // namespace protosynth::csrc
