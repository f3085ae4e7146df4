#include "protosynth/c_source.hpp"

#include <cctype>

#include "protosynth/util.hpp"

namespace protosynth::csrc {

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Skips a comment or literal starting at `i`; returns true when it did.
bool skip_opaque(std::string_view s, std::size_t& i) {
  if (s.compare(i, 2, "//") == 0) {
    auto nl = s.find('\n', i);
    i = nl == std::string_view::npos ? s.size() : nl;
    return true;
  }
  if (s.compare(i, 2, "/*") == 0) {
    auto end = s.find("*/", i + 2);
    i = end == std::string_view::npos ? s.size() : end + 2;
    return true;
  }
  if (s[i] == '"' || s[i] == '\'') {
    char q = s[i++];
    while (i < s.size() && s[i] != q) {
      if (s[i] == '\\') ++i;
      ++i;
    }
    if (i < s.size()) ++i;
    return true;
  }
  return false;
}

// Identifiers at paren/bracket/brace depth 0, with what follows each.
struct Surface {
  std::vector<std::string> idents;
  std::vector<char> next;  // first non-space char after the identifier
  bool has_paren = false;
  bool equals_before_paren = false;
  std::string first_before_paren;
};

Surface surface(std::string_view code) {
  Surface out;
  int depth = 0;
  bool seen_paren = false;
  bool seen_equals = false;
  std::size_t i = 0;
  while (i < code.size()) {
    if (skip_opaque(code, i)) continue;
    char c = code[i];
    if (c == '(' || c == '[' || c == '{') {
      if (c == '(' && depth == 0 && !seen_paren) {
        seen_paren = true;
        out.has_paren = true;
        out.equals_before_paren = seen_equals;
        if (!out.idents.empty()) out.first_before_paren = out.idents.back();
      }
      ++depth;
      ++i;
      continue;
    }
    if (c == ')' || c == ']' || c == '}') {
      --depth;
      ++i;
      continue;
    }
    if (depth == 0 && c == '=') seen_equals = true;
    if (depth == 0 && (std::isalpha(static_cast<unsigned char>(c)) || c == '_')) {
      std::size_t j = i;
      while (j < code.size() && ident_char(code[j])) ++j;
      out.idents.emplace_back(code.substr(i, j - i));
      std::size_t k = j;
      while (k < code.size() && std::isspace(static_cast<unsigned char>(code[k]))) ++k;
      out.next.push_back(k < code.size() ? code[k] : '\0');
      i = j;
      continue;
    }
    if (ident_char(c)) {  // numbers and the like
      while (i < code.size() && ident_char(code[i])) ++i;
      continue;
    }
    ++i;
  }
  return out;
}

void classify(Item& item, std::string_view body, bool braced_function) {
  Surface s = surface(body);
  bool is_typedef = !s.idents.empty() && s.idents.front() == "typedef";
  if (braced_function) {
    item.kind = Item::Kind::function_definition;
    item.name = s.first_before_paren;
    return;
  }
  if (is_typedef) {
    item.kind = Item::Kind::typedef_decl;
    // The declared name is the last surface identifier not followed by '('.
    for (std::size_t k = s.idents.size(); k-- > 0;) {
      if (s.next[k] != '(') {
        item.name = s.idents[k];
        break;
      }
    }
    return;
  }
  if (s.has_paren && !s.equals_before_paren) {
    item.kind = Item::Kind::prototype;
    item.name = s.first_before_paren;
    return;
  }
  item.kind = Item::Kind::declaration;
  for (std::size_t k = 0; k < s.idents.size(); ++k) {
    if (s.next[k] == '=' || s.next[k] == ';' || s.next[k] == '[' || s.next[k] == ',') {
      item.name = s.idents[k];
      break;
    }
  }
  if (item.name.empty() && s.idents.size() >= 2 &&
      (s.idents[0] == "struct" || s.idents[0] == "enum" || s.idents[0] == "union")) {
    item.name = s.idents[0] + " " + s.idents[1];
  }
}

}  // namespace

std::vector<Item> split_top_level(std::string_view src) {
  std::vector<Item> items;
  std::string pending_comments;
  std::size_t pending_begin = 0;
  std::size_t i = 0;
  std::size_t line = 1;
  auto advance_to = [&](std::size_t to) {
    for (std::size_t k = i; k < to && k < src.size(); ++k) {
      if (src[k] == '\n') ++line;
    }
    i = to;
  };

  while (true) {
    // Leading whitespace and comments.
    while (i < src.size()) {
      if (std::isspace(static_cast<unsigned char>(src[i]))) {
        advance_to(i + 1);
        continue;
      }
      if (src.compare(i, 2, "//") == 0 || src.compare(i, 2, "/*") == 0) {
        std::size_t j = i;
        skip_opaque(src, j);
        if (pending_comments.empty()) pending_begin = i;
        pending_comments += std::string(src.substr(i, j - i)) + "\n";
        advance_to(j);
        continue;
      }
      break;
    }
    if (i >= src.size()) break;

    Item item;
    item.line = line;
    std::size_t start = i;
    item.begin = pending_comments.empty() ? start : pending_begin;
    if (src[i] == '#') {
      std::size_t j = i;
      while (j < src.size()) {
        auto nl = src.find('\n', j);
        if (nl == std::string_view::npos) {
          j = src.size();
          break;
        }
        std::size_t k = nl;
        while (k > j && (src[k - 1] == ' ' || src[k - 1] == '\t' || src[k - 1] == '\r')) --k;
        if (k > j && src[k - 1] == '\\') {
          j = nl + 1;
          continue;
        }
        j = nl;
        break;
      }
      item.kind = Item::Kind::preprocessor;
      item.text = pending_comments + std::string(src.substr(start, j - start));
      if (auto inc = src.substr(start, j - start); inc.find("include") != std::string_view::npos) {
        item.name = util::normalize_space(inc);
      }
      pending_comments.clear();
      item.end = j;
      advance_to(j);
      items.push_back(std::move(item));
      continue;
    }

    int depth = 0;
    bool done = false;
    bool braced_function = false;
    std::size_t j = i;
    while (j < src.size() && !done) {
      if (skip_opaque(src, j)) continue;
      char c = src[j];
      if (c == '{') {
        if (depth == 0) {
          std::string header = canonical(src.substr(start, j - start));
          if (!header.empty() && header.back() == ')' && header.find('=') == std::string::npos) {
            braced_function = true;
          }
        }
        ++depth;
      } else if (c == '}') {
        --depth;
        if (depth == 0 && braced_function) {
          ++j;
          done = true;
          continue;
        }
      } else if (c == ';' && depth == 0) {
        ++j;
        done = true;
        continue;
      } else if (c == '#' && depth == 0 && (j == 0 || src[j - 1] == '\n')) {
        break;  // stray directive ends an unterminated construct
      }
      ++j;
    }
    std::string_view body = src.substr(start, j - start);
    item.text = pending_comments + std::string(body);
    pending_comments.clear();
    if (!done) {
      item.kind = Item::Kind::other;
    } else {
      classify(item, canonical(body), braced_function);
    }
    item.end = j;
    advance_to(j);
    items.push_back(std::move(item));
  }
  if (!pending_comments.empty()) {
    Item c;
    c.kind = Item::Kind::comment;
    c.text = pending_comments;
    c.line = line;
    c.begin = pending_begin;
    c.end = src.size();
    items.push_back(std::move(c));
  }
  return items;
}

std::string canonical(std::string_view code) {
  std::string out;
  bool pending_space = false;
  std::size_t i = 0;
  while (i < code.size()) {
    char c = code[i];
    if (code.compare(i, 2, "//") == 0 || code.compare(i, 2, "/*") == 0) {
      skip_opaque(code, i);
      pending_space = true;
      continue;
    }
    if (c == '"' || c == '\'') {
      std::size_t j = i;
      skip_opaque(code, j);
      if (pending_space && !out.empty() && ident_char(out.back())) out.push_back(' ');
      pending_space = false;
      out.append(code.substr(i, j - i));
      i = j;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = true;
      ++i;
      continue;
    }
    if (pending_space && !out.empty() && ident_char(out.back()) && ident_char(c)) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
    ++i;
  }
  return out;
}

std::string kind_name(Item::Kind kind) {
  switch (kind) {
    case Item::Kind::preprocessor:
      return "preprocessor";
    case Item::Kind::typedef_decl:
      return "typedef";
    case Item::Kind::function_definition:
      return "function";
    case Item::Kind::prototype:
      return "prototype";
    case Item::Kind::declaration:
      return "declaration";
    case Item::Kind::comment:
      return "comment";
    case Item::Kind::other:
      return "other";
  }
  return "?";
}

}  // namespace protosynth::csrc
