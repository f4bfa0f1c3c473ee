#pragma once

#include "movcut/cutquad.hpp"
#include "movcut/spaces.hpp"

#include <Eigen/SparseCore>

namespace movcut {

using SparseMatrix = Eigen::SparseMatrix<double>;

// All forms act componentwise on the vector-valued fields, so they are
// assembled once as scalar matrices over the active DOFs of the given map(s);
// the vector form is the Kronecker product with the 2x2 identity.

struct StabilizationParams {
  double gamma_s = 0.1;       // ghost penalty base value
  double gamma_lambda = 0.01;  // multiplier stabilisation
  double nitsche_penalty_coefficient = 40.0;  // penalty = coefficient * k^2 / h
  int K = 1;

  double gamma_gp() const { return gamma_s * K; }
};

// (u, v) over the fluid part of the active elements.
SparseMatrix assemble_mass(const TriangleMesh& mesh, const DofMap& space, const ActiveDecomposition& decomp,
                           const CutRuleSet& rules);

// (grad u, grad v) over the fluid part of the active elements.
SparseMatrix assemble_stiffness(const TriangleMesh& mesh, const DofMap& space, const ActiveDecomposition& decomp,
                                const CutRuleSet& rules);

// (grad u, grad v) over the listed whole elements (e.g. the active domain).
SparseMatrix assemble_element_stiffness(const TriangleMesh& mesh, const DofMap& space, const std::vector<int>& elements);

// B(i, j) = int_Gamma psi_i phi_j with psi from the multiplier space (rows)
// and phi from the velocity space (columns).
SparseMatrix assemble_coupling_b(const TriangleMesh& mesh, const DofMap& velocity, const DofMap& multiplier,
                                 const ActiveDecomposition& decomp, const CutRuleSet& rules);

// Direct ghost penalty: 1/h^2 sum over strip facets of the patch integral of
// the difference of the two element polynomials, both extended to the patch.
SparseMatrix assemble_ghost_penalty(const TriangleMesh& mesh, const DofMap& space, const ActiveDecomposition& decomp);

// h^2 int over whole interface elements of (n.grad lambda)(n.grad mu), with n
// the element normal of the P1 level set.
SparseMatrix assemble_multiplier_stab(const TriangleMesh& mesh, const DofMap& multiplier,
                                      const ActiveDecomposition& decomp);

// Integral of the difference of the (extended) polynomials c1 on t1 and c2 on
// t2 squared over t1 u t2. Coefficients are nodal values of P^degree.
double patch_jump_integral(const TriangleMesh& mesh, int t1, int t2, int degree, const Eigen::VectorXd& c1,
                           const Eigen::VectorXd& c2);

// Symmetric Nitsche terms with n the outward normal of the fluid:
//   -(dn u, v) - (dn v, u) + sigma/h (u, v)   on Gamma,   sigma = coeff * k^2
// `unit_rhs` is the right-hand side for boundary datum 1 in one component:
//   -(dn v, 1) + sigma/h (1, v).
struct NitscheTerms {
  SparseMatrix matrix;
  Eigen::VectorXd unit_rhs;
  double penalty = 0.0;  // sigma/h
};
NitscheTerms assemble_nitsche(const TriangleMesh& mesh, const DofMap& velocity, const ActiveDecomposition& decomp,
                              const CutRuleSet& rules, const StabilizationParams& params);
// Right-hand side of the Nitsche terms for datum xi, both components.
VectorCoefficients nitsche_rhs(const NitscheTerms& terms, const Vec2& xi);

// int_Gamma psi_i for each DOF of `space`.
Eigen::VectorXd interface_moments(const TriangleMesh& mesh, const DofMap& space, const ActiveDecomposition& decomp,
                                  const CutRuleSet& rules);

// Linear functional l(u) = int_Gamma -dn u (n outward from the fluid) as a
// coefficient vector over `velocity`.
Eigen::VectorXd interface_flux_functional(const TriangleMesh& mesh, const DofMap& velocity,
                                          const ActiveDecomposition& decomp, const CutRuleSet& rules);

// Squared contributions to the mesh-dependent norms.
struct TripleNorm {
  double grad_active = 0.0;       // |grad u|^2 over the active domain
  double trace_u = 0.0;           // |h^{-1/2} u|^2 on Gamma
  double trace_lambda = 0.0;      // |h^{1/2} lambda|^2 on Gamma
  double normal_grad_lambda = 0.0;  // |h n.grad lambda|^2 over interface elements
};
TripleNorm compute_triple_norm(const TriangleMesh& mesh, const FEFunction& u, const FEFunction* lambda,
                               const ActiveDecomposition& decomp, const CutRuleSet& rules);

// x^T A x summed over both components.
double quadratic_form(const SparseMatrix& a, const VectorCoefficients& x);
double bilinear_form(const SparseMatrix& a, const VectorCoefficients& x, const VectorCoefficients& y);

}  // namespace movcut
