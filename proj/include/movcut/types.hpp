#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace movcut {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// All recoverable failures in the library are reported with this type. The
// message names the violated condition ("no patch", "geometry under-resolved",
// "coupling diverged", ...) so callers can log it verbatim.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace movcut
