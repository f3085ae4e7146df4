#pragma once

#include <map>
#include <string>

#include "protosynth/json.hpp"
#include "protosynth/sem_types.hpp"

namespace protosynth {

// Self-contained form: named types are written out in full at every use.
//   {"kind": "bool"} | {"kind": "char"} | {"kind": "uint", "bits": 8}
//   {"kind": "text", "max_len": 5}
//   {"kind": "enum", "name": "E", "variants": [...]}
//   {"kind": "array", "of": T, "length": 3}
//   {"kind": "struct", "name": "S", "fields": [{"name": "f", "type": T}, ...]}
//   {"kind": "alias", "name": "A", "of": T}
Json type_to_json(const Type& t);

// Accepts the form above plus manifest shorthand: "bool", "char", "uint8",
// "uint32", "text5", a bare name from `named`, or {"uint": 8},
// {"text": 5}, {"array": T, "length": n}, {"enum": [...]} / {"struct": [...]}
// with a "name". Throws ValidationError.
Type type_from_json(const Json& j, const std::map<std::string, Type>& named = {});

}  // namespace protosynth
