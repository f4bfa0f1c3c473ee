#pragma once

#include "movcut/geometry.hpp"
#include "movcut/quadrature.hpp"

#include <array>
#include <vector>

namespace movcut {

// Quadrature on the fluid part {phi_lin < 0} of one triangle and on the
// straight interface segment {phi_lin = 0}, with phi_lin the P1 interpolant of
// the vertex values. Points are physical coordinates.
struct CutRule {
  QuadratureRule volume;
  QuadratureRule interface;
  Vec2 normal{0.0, 0.0};  // -grad(phi_lin)/|grad(phi_lin)|, zero if phi_lin is constant
  double inside_fraction = 0.0;

  double volume_measure() const;
  double interface_measure() const;
};

// Rules exact for polynomials of degree <= order on the sub-domains.
// Throws Error for degenerate triangles, order < 1 or phi identically zero.
CutRule cut_triangle(const std::array<Vec2, 3>& coords, std::array<double, 3> phi, int order);

// -grad(phi_lin)/|grad(phi_lin)|. Throws if phi does not change sign.
Vec2 interface_normal(const std::array<Vec2, 3>& coords, const std::array<double, 3>& phi);

// Gradient of the P1 interpolant.
Vec2 linear_gradient(const std::array<Vec2, 3>& coords, const std::array<double, 3>& phi);

// Cut rules of one time step, stored for the interface elements only; fully
// inside elements use the plain mapped rule.
class CutRuleSet {
public:
  CutRuleSet() = default;
  CutRuleSet(const TriangleMesh& mesh, const ActiveDecomposition& decomp, int order);

  int order() const { return order_; }
  bool has(int t) const { return t >= 0 && t < static_cast<int>(slot_.size()) && slot_[t] >= 0; }
  // Throws Error("missing cut rule") if t has no rule.
  const CutRule& rule(int t) const;

private:
  int order_ = 0;
  std::vector<int> slot_;
  std::vector<CutRule> rules_;
};

}  // namespace movcut
