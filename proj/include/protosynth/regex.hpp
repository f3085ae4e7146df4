#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>

namespace protosynth::regex {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Range {
  char lo;
  char hi;
};
struct Seq {
  NodePtr left;
  NodePtr right;
};
struct Or {
  NodePtr left;
  NodePtr right;
};
struct Star {
  NodePtr inner;
};

struct Node {
  std::variant<Range, Seq, Or, Star> op;
};

NodePtr range(char lo, char hi);
NodePtr seq(NodePtr left, NodePtr right);
NodePtr alt(NodePtr left, NodePtr right);
NodePtr star(NodePtr inner);

// Grammar (lowest to highest precedence):
//   alternation  := concat ('|' concat)*
//   concat       := postfix+
//   postfix      := atom '*'*
//   atom         := literal | '\' any | '[' member+ ']' | '(' alternation ')'
//   member       := char | char '-' char | '\' any
// Outside classes the metacharacters ( ) [ ] | * \ must be escaped; '.' is an
// ordinary literal. A star over a sub-pattern that accepts the empty string
// is rejected because the continuation matcher cannot terminate on it.
// Throws ParseError.
NodePtr parse_pattern(std::string_view pattern);

// Full-string match with continuation semantics: Star tries the continuation
// first, then one more iteration that must start on a non-empty subject.
bool matches(const NodePtr& ast, std::string_view subject);

// True when `ast` accepts the empty string.
bool nullable(const NodePtr& ast);

std::size_t node_count(const NodePtr& ast);

// Canonical textual form, e.g. `Seq(Range(a,z),Star(Range(.,.)))`.
std::string to_string(const NodePtr& ast);

struct Emission {
  std::string statements;  // one line per node, then the matcher call
  std::string root;        // variable holding the root node
};

// C statements building the pattern as `Regex` locals r1, r2, ... in
// post-order, followed by `return match(&<root>, <subject_var>);`.
Emission emit_constructors(const NodePtr& ast, const std::string& subject_var, const std::string& var_prefix = "r");

// C character literal for `c`, escaping quotes, backslashes and
// non-printable bytes.
std::string c_char_literal(char c);

}  // namespace protosynth::regex
