#include "protosynth/regex.hpp"

#include <cstdio>
#include <vector>

#include "protosynth/error.hpp"

namespace protosynth::regex {

NodePtr range(char lo, char hi) { return std::make_shared<Node>(Node{Range{lo, hi}}); }
NodePtr seq(NodePtr left, NodePtr right) { return std::make_shared<Node>(Node{Seq{std::move(left), std::move(right)}}); }
NodePtr alt(NodePtr left, NodePtr right) { return std::make_shared<Node>(Node{Or{std::move(left), std::move(right)}}); }
NodePtr star(NodePtr inner) { return std::make_shared<Node>(Node{Star{std::move(inner)}}); }

namespace {

bool is_meta(char c) {
  switch (c) {
    case '(':
    case ')':
    case '[':
    case ']':
    case '|':
    case '*':
    case '\\':
      return true;
    default:
      return false;
  }
}

class Parser {
 public:
  explicit Parser(std::string_view p) : p_(p) {}

  NodePtr run() {
    if (p_.empty()) fail("empty pattern");
    NodePtr n = alternation();
    if (pos_ < p_.size()) {
      if (p_[pos_] == ')') fail("unbalanced ')'");
      fail("unexpected character");
    }
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError("regex '" + std::string(p_) + "' at offset " + std::to_string(pos_) + ": " + why);
  }

  bool at_end() const { return pos_ >= p_.size(); }
  char peek() const { return p_[pos_]; }

  NodePtr alternation() {
    NodePtr left = concatenation();
    while (!at_end() && peek() == '|') {
      ++pos_;
      left = alt(left, concatenation());
    }
    return left;
  }

  NodePtr concatenation() {
    std::vector<NodePtr> items;
    while (!at_end() && peek() != '|' && peek() != ')') items.push_back(postfix());
    if (items.empty()) fail("empty alternative");
    NodePtr n = items.back();
    for (auto it = items.rbegin() + 1; it != items.rend(); ++it) n = seq(*it, n);
    return n;
  }

  NodePtr postfix() {
    if (peek() == '*') fail("dangling '*'");
    NodePtr n = atom();
    while (!at_end() && peek() == '*') {
      if (nullable(n)) fail("'*' applied to a sub-pattern that matches the empty string");
      ++pos_;
      n = star(n);
    }
    return n;
  }

  char escaped() {
    ++pos_;  // backslash
    if (at_end()) fail("trailing escape");
    return p_[pos_++];
  }

  NodePtr atom() {
    char c = peek();
    if (c == '(') {
      ++pos_;
      if (!at_end() && peek() == ')') fail("empty group");
      NodePtr n = alternation();
      if (at_end() || peek() != ')') fail("unbalanced '('");
      ++pos_;
      return n;
    }
    if (c == '[') return char_class();
    if (c == ']') fail("unbalanced ']'");
    if (c == '\\') {
      char e = escaped();
      return range(e, e);
    }
    if (is_meta(c)) fail(std::string("unexpected '") + c + "'");
    ++pos_;
    return range(c, c);
  }

  NodePtr char_class() {
    ++pos_;  // '['
    std::vector<NodePtr> members;
    while (true) {
      if (at_end()) fail("unbalanced '['");
      char c = peek();
      if (c == ']') break;
      char lo;
      if (c == '\\') {
        lo = escaped();
      } else {
        lo = c;
        ++pos_;
      }
      if (pos_ + 1 < p_.size() && peek() == '-' && p_[pos_ + 1] != ']') {
        ++pos_;  // '-'
        char hi = peek() == '\\' ? escaped() : p_[pos_++];
        if (static_cast<unsigned char>(hi) < static_cast<unsigned char>(lo)) {
          fail(std::string("bad range ") + lo + "-" + hi);
        }
        members.push_back(range(lo, hi));
      } else {
        members.push_back(range(lo, lo));
      }
    }
    ++pos_;  // ']'
    if (members.empty()) fail("empty class");
    NodePtr n = members.front();
    for (std::size_t i = 1; i < members.size(); ++i) n = alt(n, members[i]);
    return n;
  }

  std::string_view p_;
  std::size_t pos_ = 0;
};

// The continuation is a stack-allocated linked list, as in the C runtime.
struct Cont {
  const Node* regex;
  const Cont* next;
};

bool match_cont(const Node* regex, const Cont* cont, const char* text) {
  if (regex == nullptr) return *text == '\0';
  if (const auto* o = std::get_if<Or>(&regex->op)) {
    return match_cont(o->left.get(), cont, text) || match_cont(o->right.get(), cont, text);
  }
  if (const auto* s = std::get_if<Seq>(&regex->op)) {
    Cont c{s->right.get(), cont};
    return match_cont(s->left.get(), &c, text);
  }
  if (const auto* st = std::get_if<Star>(&regex->op)) {
    // Unrolling Star(e) is Seq(e, Star(e)) with the same continuation.
    Cont again{regex, cont};
    return match_cont(cont->regex, cont->next, text) ||
           (*text != '\0' && match_cont(st->inner.get(), &again, text));
  }
  const auto& r = std::get<Range>(regex->op);
  char c = *text++;
  return c != '\0' && c >= r.lo && c <= r.hi && match_cont(cont->regex, cont->next, text);
}

}  // namespace

NodePtr parse_pattern(std::string_view pattern) { return Parser(pattern).run(); }

bool matches(const NodePtr& ast, std::string_view subject) {
  // The runtime works on NUL-terminated text; anything after a NUL is unseen.
  std::string text(subject.substr(0, subject.find('\0')));
  Cont empty{nullptr, nullptr};
  return match_cont(ast.get(), &empty, text.c_str());
}

bool nullable(const NodePtr& ast) {
  const Node& n = *ast;
  if (std::holds_alternative<Range>(n.op)) return false;
  if (std::holds_alternative<Star>(n.op)) return true;
  if (const auto* s = std::get_if<Seq>(&n.op)) return nullable(s->left) && nullable(s->right);
  const auto& o = std::get<Or>(n.op);
  return nullable(o.left) || nullable(o.right);
}

std::size_t node_count(const NodePtr& ast) {
  const Node& n = *ast;
  if (std::holds_alternative<Range>(n.op)) return 1;
  if (const auto* st = std::get_if<Star>(&n.op)) return 1 + node_count(st->inner);
  if (const auto* s = std::get_if<Seq>(&n.op)) return 1 + node_count(s->left) + node_count(s->right);
  const auto& o = std::get<Or>(n.op);
  return 1 + node_count(o.left) + node_count(o.right);
}

std::string to_string(const NodePtr& ast) {
  const Node& n = *ast;
  if (const auto* r = std::get_if<Range>(&n.op)) return std::string("Range(") + r->lo + "," + r->hi + ")";
  if (const auto* st = std::get_if<Star>(&n.op)) return "Star(" + to_string(st->inner) + ")";
  if (const auto* s = std::get_if<Seq>(&n.op)) return "Seq(" + to_string(s->left) + "," + to_string(s->right) + ")";
  const auto& o = std::get<Or>(n.op);
  return "Or(" + to_string(o.left) + "," + to_string(o.right) + ")";
}

std::string c_char_literal(char c) {
  auto u = static_cast<unsigned char>(c);
  if (c == '\'') return "'\\''";
  if (c == '\\') return "'\\\\'";
  if (u >= 0x20 && u < 0x7F) return std::string("'") + c + "'";
  char buf[8];
  std::snprintf(buf, sizeof buf, "'\\x%02x'", u);
  return buf;
}

namespace {

std::string emit_node(const NodePtr& ast, const std::string& prefix, std::size_t& counter, std::string& out) {
  const Node& n = *ast;
  std::string left, right;
  if (const auto* st = std::get_if<Star>(&n.op)) {
    left = emit_node(st->inner, prefix, counter, out);
  } else if (const auto* s = std::get_if<Seq>(&n.op)) {
    left = emit_node(s->left, prefix, counter, out);
    right = emit_node(s->right, prefix, counter, out);
  } else if (const auto* o = std::get_if<Or>(&n.op)) {
    left = emit_node(o->left, prefix, counter, out);
    right = emit_node(o->right, prefix, counter, out);
  }
  std::string v = prefix + std::to_string(++counter);
  out += "Regex " + v + "; ";
  if (const auto* r = std::get_if<Range>(&n.op)) {
    out += v + ".op = RANGE; " + v + ".clo = " + c_char_literal(r->lo) + "; " + v + ".chi = " + c_char_literal(r->hi) +
           ";";
  } else if (std::holds_alternative<Star>(n.op)) {
    out += v + ".op = STAR; " + v + ".left = &" + left + ";";
  } else {
    const char* op = std::holds_alternative<Seq>(n.op) ? "SEQ" : "OR";
    out += v + ".op = " + op + "; " + v + ".left = &" + left + "; " + v + ".right = &" + right + ";";
  }
  out += "\n";
  return v;
}

}  // namespace

Emission emit_constructors(const NodePtr& ast, const std::string& subject_var, const std::string& var_prefix) {
  Emission e;
  std::size_t counter = 0;
  e.root = emit_node(ast, var_prefix, counter, e.statements);
  e.statements += "return match(&" + e.root + ", " + subject_var + ");\n";
  return e;
}

}  // namespace protosynth::regex
