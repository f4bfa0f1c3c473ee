#pragma once

#include "movcut/geometry.hpp"
#include "movcut/lagrange.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace movcut {

// Global ("background") numbering of the continuous P^k space on the whole
// mesh: vertices first, then k-1 nodes per facet ordered from the lower to the
// higher vertex index, then the interior nodes of each triangle. The numbering
// never depends on the time step.
int background_dof_count(const TriangleMesh& mesh, int degree);
std::vector<int> element_background_dofs(const TriangleMesh& mesh, int t, int degree);
Vec2 background_dof_location(const TriangleMesh& mesh, int dof, int degree);

// Continuous Lagrange space restricted to a set of elements. Scalar; the
// vector-valued fields carry two components per scalar DOF.
class DofMap {
public:
  DofMap(const TriangleMesh& mesh, std::vector<int> elements, int degree, bool dirichlet_on_box);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(active_to_background_.size()); }
  int dofs_per_element() const { return per_element_; }
  const std::vector<int>& elements() const { return elements_; }
  bool contains_element(int t) const { return t >= 0 && t < static_cast<int>(slot_.size()) && slot_[t] >= 0; }

  // Active DOF indices of element t (must be in the set).
  const int* element_dofs(int t) const { return &local_to_active_[static_cast<std::size_t>(slot_[t]) * per_element_]; }
  int active_of_background(int b) const { return background_to_active_[b]; }
  int background_of_active(int a) const { return active_to_background_[a]; }
  bool is_dirichlet(int a) const { return dirichlet_[a] != 0; }
  int num_dirichlet() const;

private:
  int degree_;
  int per_element_;
  std::vector<int> elements_;
  std::vector<int> slot_;
  std::vector<int> local_to_active_;
  std::vector<int> background_to_active_;
  std::vector<int> active_to_background_;
  std::vector<char> dirichlet_;
};

// Velocity space V_h: P^k on the active elements, zero on the box boundary.
std::shared_ptr<const DofMap> build_velocity_space(const TriangleMesh& mesh, const ActiveDecomposition& decomp, int k);
// Multiplier space: P^degree on the interface elements (degree >= 1).
std::shared_ptr<const DofMap> build_multiplier_space(const TriangleMesh& mesh, const ActiveDecomposition& decomp,
                                                     int degree);

// Row-major N x 2 storage: the two components of each scalar DOF are adjacent.
using VectorCoefficients = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

struct FEFunction {
  std::shared_ptr<const DofMap> map;
  VectorCoefficients coeffs;

  FEFunction() = default;
  explicit FEFunction(std::shared_ptr<const DofMap> m) : map(std::move(m)), coeffs(VectorCoefficients::Zero(map->size(), 2)) {}

  // Value of the element polynomial of t at x (x may lie outside t, in which
  // case this is the canonical extension).
  Vec2 evaluate(const TriangleMesh& mesh, int t, const Vec2& x) const;
  Mat2 gradient(const TriangleMesh& mesh, int t, const Vec2& x) const;  // row = component
};

// Nodal interpolation of f onto the map.
FEFunction interpolate(const TriangleMesh& mesh, std::shared_ptr<const DofMap> map,
                       const std::function<Vec2(const Vec2&)>& f);

// Copies coefficients by background index onto new_map; DOFs that were not
// active before start at zero. Every DOF of a cut element of `decomp` must
// have been active in prev, otherwise Error("extension strip too thin ...").
VectorCoefficients transfer(const FEFunction& prev, const DofMap& new_map, const TriangleMesh& mesh,
                            const ActiveDecomposition& decomp);

}  // namespace movcut
