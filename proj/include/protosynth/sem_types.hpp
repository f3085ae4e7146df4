#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace protosynth {

struct TypeNode;

// Immutable, structurally compared semantic type. Cheap to copy.
class Type {
 public:
  struct Boolean {
    bool operator==(const Boolean&) const = default;
  };
  struct Character {
    bool operator==(const Character&) const = default;
  };
  struct UInt {
    int bits = 32;
    bool operator==(const UInt&) const = default;
  };
  // Holds up to `max_len` characters; storage adds one terminator byte.
  struct Text {
    int max_len = 1;
    bool operator==(const Text&) const = default;
  };
  struct Enumeration {
    std::string name;
    std::vector<std::string> variants;
    bool operator==(const Enumeration&) const = default;
  };
  struct ArrayOf;
  struct Composite;
  struct Alias;

  static Type boolean();
  static Type character();
  static Type uint(int bits);
  static Type text(int max_len);
  static Type enumeration(std::string name, std::vector<std::string> variants);
  static Type array(Type element, int length);
  static Type composite(std::string name, std::vector<std::pair<std::string, Type>> fields);
  static Type alias(std::string name, Type inner);

  template <typename T>
  const T* as() const;
  template <typename T>
  bool is() const {
    return as<T>() != nullptr;
  }
  template <typename F>
  decltype(auto) visit(F&& f) const;

  // Name of an enumeration, composite or alias; empty otherwise.
  const std::string& name() const;
  bool is_named() const { return !name().empty(); }

  // Follows aliases down to the first non-alias type.
  const Type& resolved() const;

  // Short human-readable form, e.g. `Text(5)` or `Record`.
  std::string describe() const;

  friend bool operator==(const Type& a, const Type& b);

 private:
  explicit Type(std::shared_ptr<const TypeNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const TypeNode> node_;
};

struct Type::ArrayOf {
  Type element;
  int length = 1;
  bool operator==(const ArrayOf&) const = default;
};

struct Field {
  std::string name;
  Type type;
  bool operator==(const Field&) const = default;
};

struct Type::Composite {
  std::string name;
  std::vector<Field> fields;
  bool operator==(const Composite&) const = default;
};

struct Type::Alias {
  std::string name;
  Type inner;
  bool operator==(const Alias&) const = default;
};

struct TypeNode {
  std::variant<Type::Boolean, Type::Character, Type::UInt, Type::Text, Type::Enumeration, Type::ArrayOf,
               Type::Composite, Type::Alias>
      value;
};

template <typename T>
const T* Type::as() const {
  return std::get_if<T>(&node_->value);
}

template <typename F>
decltype(auto) Type::visit(F&& f) const {
  return std::visit(std::forward<F>(f), node_->value);
}

// Every invariant violation of `t`, empty when valid.
std::vector<std::string> validate_type(const Type& t);

// Checks a whole model's type set: each type individually, plus globally
// unique names for named types and enumeration constants.
std::vector<std::string> validate_type_set(std::span<const Type> types);

// ---------------------------------------------------------------------------
// Flattening into base symbolic slots.

enum class BaseKind { boolean, character, unsigned_integer, enumeration, char_buffer };

// One step of a slot path below the argument: a field name or array index.
using PathStep = std::variant<std::string, std::size_t>;

struct SlotPath {
  std::size_t arg = 0;
  std::vector<PathStep> steps;

  // "1.record_type", "0[2].name"
  std::string to_string() const;
  static SlotPath parse(const std::string& text);
  bool operator==(const SlotPath&) const = default;
};

struct BaseSlot {
  std::string var_name;
  SlotPath path;
  BaseKind kind = BaseKind::boolean;
  int bits = 0;            // unsigned_integer only
  int length = 0;          // char_buffer: max characters (storage is length + 1)
  std::string enum_name;   // enumeration only
  std::vector<std::string> variants;  // enumeration only
  std::size_t byte_width = 0;
};

std::size_t uint_storage_bytes(int bits);
std::string uint_c_type(int bits);
std::string base_kind_name(BaseKind kind);

// Flattens argument `arg_index` of type `t`. Variable names continue from
// `first_var` so that several arguments can share one x0, x1, ... sequence.
std::vector<BaseSlot> flatten(std::size_t arg_index, const Type& t, std::size_t first_var = 0);

// ---------------------------------------------------------------------------
// C rendering.

// Renders the C declarations for a model's full type set: typedefs in
// dependency order and spellings for fields, parameters and return values.
class CTypeTable {
 public:
  // Throws ValidationError when the set is invalid.
  explicit CTypeTable(std::span<const Type> types);

  // Typedef lines, dependencies first; each line is one complete typedef.
  const std::vector<std::string>& typedefs() const { return typedefs_; }

  // `T name` / `T name[n]` as used inside structs and local declarations.
  std::string declare(const Type& t, const std::string& name) const;
  // Parameter form; bare text becomes `char* name`.
  std::string parameter(const Type& t, const std::string& name) const;
  // Return type spelling; throws for arrays.
  std::string return_type(const Type& t) const;
  // Name of the character-array alias for Text(max_len) at declaration sites.
  std::string text_alias(int max_len) const;

  // Typedef lines needed by `t` alone (a subset of typedefs(), same order).
  std::vector<std::string> typedefs_for(const Type& t) const;

 private:
  std::string spelling(const Type& t) const;  // base spelling, array suffix excluded
  std::string array_suffix(const Type& t) const;
  void collect(const Type& t, bool declaration_site);
  void emit_named(const Type& t);
  std::string typedef_line(const Type& t) const;

  std::map<int, std::string> text_aliases_;
  std::vector<std::string> typedefs_;
  std::map<std::string, std::size_t> typedef_index_;  // type name -> index into typedefs_
  std::vector<Type> named_order_;
};

struct RenderedDecl {
  std::string text;                   // the declaration of `t` itself
  std::vector<std::string> typedefs;  // everything `t` needs, dependencies first
};

// Renders one type on its own: named types render as their typedef,
// anonymous types as their declaration spelling (bare text as `char*`).
RenderedDecl render_c_decl(const Type& t);

}  // namespace protosynth
