#pragma once

#include <json.hpp>

namespace protosynth {

// Insertion-ordered JSON keeps emitted files in a stable, readable order.
using Json = nlohmann::ordered_json;

}  // namespace protosynth
