#pragma once

#include "movcut/stepper.hpp"

namespace movcut {

// Body-fitted mesh of the unit square minus the initial disk. A uniform grid
// of spacing 0.4/m covers the square except the block [Cx-0.2, Cx+0.2] x
// [Cy-0.2, Cy+0.2], which is filled by an O-grid between the block boundary
// and the inscribed circle polygon (4m segments). Quadrilaterals are split
// into two triangles.
struct FittedMesh {
  TriangleMesh mesh;
  std::vector<char> on_circle;  // per vertex
  std::vector<char> on_box;     // per vertex
  int n_circle = 0;
  double spacing = 0.0;
};

// n_circle must be a positive multiple of 16. Only the default initial state
// (centre (0.5, 0.8), radius 0.1) is supported.
FittedMesh build_fitted_mesh(int n_circle, const RigidState& initial = {});

// Smooth blending chi(x) = f(x) g(y): 1 on the bounding box of the initial
// disk, 0 on the outer boundary, quintic (C^2) in between.
struct AleBlending {
  Vec2 center{0.5, 0.8};
  double radius = 0.1;

  double value(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;
};

// Element matrices of the heat equation pulled back by X(x) = x + d chi(x):
//   mass        int J u v
//   stiffness   int J (F^{-T} grad u).(F^{-T} grad v)
//   convection  int J (w chi).(F^{-T} grad u) v
// with F = I + d (x) grad chi and J = det F.
struct AleMatrices {
  SparseMatrix mass, stiffness, convection;
  double min_jacobian = 1.0;
};

class AleDiscretization {
public:
  // Full P^degree space on `mesh`; DOFs on the unit-square boundary are
  // flagged Dirichlet in the map.
  AleDiscretization(const TriangleMesh& mesh, int degree, AleBlending blending);

  const TriangleMesh& mesh() const { return mesh_; }
  const std::shared_ptr<const DofMap>& space() const { return space_; }
  int degree() const { return degree_; }

  // Throws Error("mesh tangling ...") when min J < 0.1.
  AleMatrices assemble(const Vec2& d, const Vec2& w) const;

private:
  const TriangleMesh& mesh_;
  int degree_;
  AleBlending blending_;
  std::shared_ptr<const DofMap> space_;
  QuadratureRule ref_rule_;
  Eigen::MatrixXd ref_values_;                             // nq x nb
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, 2>> ref_grads_;  // per point
};

struct AleConfig {
  int degree = 4;
  int n_circle = 128;
  double dt = 1.0 / 3200.0;
  double t_end = 1.0;
  TimeScheme scheme = TimeScheme::kBDF2;
  Vec2 gravity{0.0, -1.0};
  double aitken_tol = 1e-8;
  int aitken_max_iters = 25;
  RigidState initial;

  void validate() const;
  int num_steps() const;
};

struct AleRecord {
  int step = 0;
  double t = 0.0;
  RigidState state;
  VectorCoefficients u;  // on the reference mesh
  Vec2 force{0.0, 0.0};
  int iterations = 0;
  double energy_residual = 0.0;
  double min_jacobian = 1.0;

  TrajectoryRow row() const;
};

// Fitted-mesh ALE solver of the coupled problem: Dirichlet u = xi on the
// circle and 0 on the box, force from the consistent residual, same partitioned
// Aitken coupling and BDF schemes as the Eulerian stepper.
class AleSolver {
public:
  explicit AleSolver(AleConfig config);

  const AleConfig& config() const { return config_; }
  const FittedMesh& fitted() const { return fitted_; }
  const AleDiscretization& discretization() const { return *disc_; }

  AleRecord initial_record() const;
  AleRecord step(const AleRecord& prev, const AleRecord* prev2) const;
  Trajectory run(const std::function<void(const AleRecord&)>& on_step = {}) const;

private:
  AleConfig config_;
  FittedMesh fitted_;
  std::unique_ptr<AleDiscretization> disc_;
  std::vector<char> circle_dof_, box_dof_;
};

}  // namespace movcut
