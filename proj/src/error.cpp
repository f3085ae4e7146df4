#include "protosynth/error.hpp"

#include "protosynth/util.hpp"

namespace protosynth {

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error("validation failed: " + util::join(violations, "; ")), violations_(std::move(violations)) {}

CycleError::CycleError(std::vector<std::string> cycle)
    : Error("dependency cycle: " + util::join(cycle, " -> ")), cycle_(std::move(cycle)) {}

}  // namespace protosynth
