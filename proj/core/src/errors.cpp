#include "greedynet/errors.hpp"

namespace greedynet {

void throw_shape(const std::string& what, long expected, long got) {
  throw ShapeMismatch(what + ": expected " + std::to_string(expected) + ", got " +
                      std::to_string(got));
}

} // namespace greedynet
