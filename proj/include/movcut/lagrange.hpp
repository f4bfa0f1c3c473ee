#pragma once

#include "movcut/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace movcut {

// Nodal P^k basis on the reference triangle (0,0),(1,0),(0,1).
//
// Node order: the three vertices, then k-1 nodes on each local edge
// (0->1, 1->2, 2->0) walking from the first to the second vertex, then the
// interior nodes row by row. The basis is represented by its monomial
// coefficients, so it can be evaluated anywhere in the plane; this is what
// gives the canonical polynomial extension used by the ghost penalty.
class LagrangeBasis {
public:
  explicit LagrangeBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Vec2>& nodes() const { return nodes_; }

  Eigen::VectorXd values(const Vec2& ref) const;
  // Row i holds d(phi_i)/d(xi), d(phi_i)/d(eta).
  Eigen::Matrix<double, Eigen::Dynamic, 2> gradients(const Vec2& ref) const;

  // Shared immutable instance per degree (0 <= degree <= 6).
  static const LagrangeBasis& get(int degree);

private:
  int degree_;
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 2>> exponents_;
  Eigen::MatrixXd coeffs_;  // column i = monomial coefficients of phi_i
};

// Affine map of a physical triangle to the reference triangle.
struct AffineMap {
  Vec2 origin;
  Mat2 jacobian;      // x = origin + jacobian * ref
  Mat2 inverse;
  double det = 0.0;

  explicit AffineMap(const std::array<Vec2, 3>& corners);
  Vec2 to_reference(const Vec2& x) const { return inverse * (x - origin); }
  Vec2 to_physical(const Vec2& ref) const { return origin + jacobian * ref; }
  // Converts reference gradients (rows) to physical gradients (rows).
  Eigen::Matrix<double, Eigen::Dynamic, 2> physical_gradients(
      const Eigen::Matrix<double, Eigen::Dynamic, 2>& ref_grads) const {
    return ref_grads * inverse;
  }
};

}  // namespace movcut
