#pragma once

#include "movcut/types.hpp"

#include <array>
#include <vector>

namespace movcut {

struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

struct LineRule {
  std::vector<double> points;  // on [0, 1]
  std::vector<double> weights;
};

// Gauss-Legendre rule on [0,1], exact for polynomials of degree <= order.
const LineRule& line_rule(int order);

// Rule on the reference triangle (0,0),(1,0),(0,1), exact for polynomials of
// total degree <= order. Collapsed tensor Gauss rule; weights sum to 1/2.
const QuadratureRule& reference_triangle_rule(int order);

// Reference rule pushed forward to the physical triangle (a, b, c).
QuadratureRule map_triangle_rule(const QuadratureRule& ref, const Vec2& a, const Vec2& b, const Vec2& c);

}  // namespace movcut
