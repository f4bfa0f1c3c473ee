#include "movcut/forms.hpp"

#include <cmath>

namespace movcut {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;
using Gradients = Eigen::Matrix<double, Eigen::Dynamic, 2>;

// Basis values and physical gradients of one element at a set of points.
struct Tabulation {
  Eigen::MatrixXd values;          // nq x nb
  std::vector<Gradients> grads;    // nq entries of nb x 2
};

Tabulation tabulate(const LagrangeBasis& basis, const AffineMap& map, const std::vector<Vec2>& points,
                    bool with_gradients) {
  Tabulation tab;
  const int nq = static_cast<int>(points.size());
  tab.values.resize(nq, basis.size());
  if (with_gradients) tab.grads.resize(nq);
  for (int q = 0; q < nq; ++q) {
    const Vec2 ref = map.to_reference(points[q]);
    tab.values.row(q) = basis.values(ref).transpose();
    if (with_gradients) tab.grads[q] = map.physical_gradients(basis.gradients(ref));
  }
  return tab;
}

// Mass and stiffness of the reference element for the given basis; the
// physical element matrices follow from the affine map.
struct ReferenceTables {
  Eigen::MatrixXd mass;                        // int phi_i phi_j on the reference triangle
  std::array<Eigen::MatrixXd, 4> grad_grad;    // int d_a phi_i d_b phi_j, index 2a+b

  explicit ReferenceTables(const LagrangeBasis& basis) {
    const int nb = basis.size();
    const QuadratureRule& rule = reference_triangle_rule(2 * basis.degree());
    mass = Eigen::MatrixXd::Zero(nb, nb);
    for (auto& m : grad_grad) m = Eigen::MatrixXd::Zero(nb, nb);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd v = basis.values(rule.points[q]);
      const Gradients g = basis.gradients(rule.points[q]);
      mass += rule.weights[q] * v * v.transpose();
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) grad_grad[2 * a + b] += rule.weights[q] * g.col(a) * g.col(b).transpose();
    }
  }

  Eigen::MatrixXd stiffness(const AffineMap& map) const {
    // grad phi = G_ref * inverse, so K = |det| sum_ab (inv inv^T)_{ab} GG_ab.
    const Mat2 c = map.inverse * map.inverse.transpose();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(mass.rows(), mass.cols());
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) k += c(a, b) * grad_grad[2 * a + b];
    return std::abs(map.det) * k;
  }
};

void scatter(Triplets& trip, const int* rows, const int* cols, const Eigen::MatrixXd& local) {
  for (int i = 0; i < local.rows(); ++i)
    for (int j = 0; j < local.cols(); ++j)
      if (local(i, j) != 0.0) trip.emplace_back(rows[i], cols[j], local(i, j));
}

SparseMatrix build(int rows, int cols, const Triplets& trip) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

enum class VolumeForm { kMass, kStiffness };

SparseMatrix assemble_volume(const TriangleMesh& mesh, const DofMap& space, const ActiveDecomposition& decomp,
                             const CutRuleSet& rules, VolumeForm form) {
  const LagrangeBasis& basis = LagrangeBasis::get(space.degree());
  const ReferenceTables ref(basis);
  const int nb = basis.size();
  Triplets trip;
  trip.reserve(space.elements().size() * nb * nb);
  Eigen::MatrixXd local(nb, nb);
  for (int t : space.elements()) {
    if (decomp.fully_outside(mesh, t)) continue;
    const AffineMap map(mesh.corners(t));
    if (decomp.fully_inside(mesh, t)) {
      local = form == VolumeForm::kMass ? Eigen::MatrixXd(std::abs(map.det) * ref.mass) : ref.stiffness(map);
    } else {
      const QuadratureRule& vol = rules.rule(t).volume;
      const Tabulation tab = tabulate(basis, map, vol.points, form == VolumeForm::kStiffness);
      local.setZero();
      for (std::size_t q = 0; q < vol.size(); ++q) {
        if (form == VolumeForm::kMass)
          local += vol.weights[q] * tab.values.row(q).transpose() * tab.values.row(q);
        else
          local += vol.weights[q] * tab.grads[q] * tab.grads[q].transpose();
      }
    }
    const int* dofs = space.element_dofs(t);
    scatter(trip, dofs, dofs, local);
  }
  return build(space.size(), space.size(), trip);
}

}  // namespace

SparseMatrix assemble_mass(const TriangleMesh& mesh, const DofMap& space, const ActiveDecomposition& decomp,
                           const CutRuleSet& rules) {
  return assemble_volume(mesh, space, decomp, rules, VolumeForm::kMass);
}

SparseMatrix assemble_stiffness(const TriangleMesh& mesh, const DofMap& space, const ActiveDecomposition& decomp,
                                const CutRuleSet& rules) {
  return assemble_volume(mesh, space, decomp, rules, VolumeForm::kStiffness);
}

SparseMatrix assemble_element_stiffness(const TriangleMesh& mesh, const DofMap& space, const std::vector<int>& elements) {
  const LagrangeBasis& basis = LagrangeBasis::get(space.degree());
  const ReferenceTables ref(basis);
  Triplets trip;
  for (int t : elements) {
    const int* dofs = space.element_dofs(t);
    scatter(trip, dofs, dofs, ref.stiffness(AffineMap(mesh.corners(t))));
  }
  return build(space.size(), space.size(), trip);
}

SparseMatrix assemble_coupling_b(const TriangleMesh& mesh, const DofMap& velocity, const DofMap& multiplier,
                                 const ActiveDecomposition& decomp, const CutRuleSet& rules) {
  const LagrangeBasis& vb = LagrangeBasis::get(velocity.degree());
  const LagrangeBasis& mb = LagrangeBasis::get(multiplier.degree());
  Triplets trip;
  for (int t : decomp.interface_elements) {
    const QuadratureRule& gamma = rules.rule(t).interface;
    const AffineMap map(mesh.corners(t));
    const Tabulation tv = tabulate(vb, map, gamma.points, false);
    const Tabulation tm = tabulate(mb, map, gamma.points, false);
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(mb.size(), vb.size());
    for (std::size_t q = 0; q < gamma.size(); ++q)
      local += gamma.weights[q] * tm.values.row(q).transpose() * tv.values.row(q);
    scatter(trip, multiplier.element_dofs(t), velocity.element_dofs(t), local);
  }
  return build(multiplier.size(), velocity.size(), trip);
}

namespace {

// Local patch matrix of int_{T1 u T2} (p1 - p2)^2 in the stacked coefficient
// vector (c1, c2).
Eigen::MatrixXd patch_matrix(const TriangleMesh& mesh, int t1, int t2, const LagrangeBasis& basis) {
  const int nb = basis.size();
  const QuadratureRule& ref = reference_triangle_rule(2 * basis.degree());
  const AffineMap m1(mesh.corners(t1));
  const AffineMap m2(mesh.corners(t2));
  Eigen::MatrixXd local = Eigen::MatrixXd::Zero(2 * nb, 2 * nb);
  Eigen::VectorXd jump(2 * nb);
  for (const AffineMap* host : {&m1, &m2}) {
    const double scale = std::abs(host->det);
    for (std::size_t q = 0; q < ref.size(); ++q) {
      const Vec2 x = host->to_physical(ref.points[q]);
      jump.head(nb) = basis.values(m1.to_reference(x));
      jump.tail(nb) = -basis.values(m2.to_reference(x));
      local += scale * ref.weights[q] * jump * jump.transpose();
    }
  }
  return local;
}

}  // namespace

double patch_jump_integral(const TriangleMesh& mesh, int t1, int t2, int degree, const Eigen::VectorXd& c1,
                           const Eigen::VectorXd& c2) {
  const LagrangeBasis& basis = LagrangeBasis::get(degree);
  if (c1.size() != basis.size() || c2.size() != basis.size())
    throw Error("patch_jump_integral: coefficient size does not match the degree");
  Eigen::VectorXd c(2 * basis.size());
  c << c1, c2;
  return c.dot(patch_matrix(mesh, t1, t2, basis) * c);
}

SparseMatrix assemble_ghost_penalty(const TriangleMesh& mesh, const DofMap& space, const ActiveDecomposition& decomp) {
  const LagrangeBasis& basis = LagrangeBasis::get(space.degree());
  const int nb = basis.size();
  const double scale = 1.0 / (decomp.h * decomp.h);
  Triplets trip;
  trip.reserve(decomp.strip_facets.size() * 4 * nb * nb);
  std::vector<int> dofs(2 * nb);
  for (int f : decomp.strip_facets) {
    const auto [t1, t2] = facet_patch(mesh, f);
    const int* d1 = space.element_dofs(t1);
    const int* d2 = space.element_dofs(t2);
    std::copy(d1, d1 + nb, dofs.begin());
    std::copy(d2, d2 + nb, dofs.begin() + nb);
    scatter(trip, dofs.data(), dofs.data(), scale * patch_matrix(mesh, t1, t2, basis));
  }
  return build(space.size(), space.size(), trip);
}

SparseMatrix assemble_multiplier_stab(const TriangleMesh& mesh, const DofMap& multiplier,
                                      const ActiveDecomposition& decomp) {
  const LagrangeBasis& basis = LagrangeBasis::get(multiplier.degree());
  const QuadratureRule& ref = reference_triangle_rule(2 * basis.degree());
  const double h2 = decomp.h * decomp.h;
  Triplets trip;
  for (int t : decomp.interface_elements) {
    const auto corners = mesh.corners(t);
    const Vec2 n = interface_normal(corners, decomp.element_phi(mesh, t));
    const AffineMap map(corners);
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(basis.size(), basis.size());
    for (std::size_t q = 0; q < ref.size(); ++q) {
      const Eigen::VectorXd dn = map.physical_gradients(basis.gradients(ref.points[q])) * n;
      local += ref.weights[q] * dn * dn.transpose();
    }
    const int* dofs = multiplier.element_dofs(t);
    scatter(trip, dofs, dofs, h2 * std::abs(map.det) * local);
  }
  return build(multiplier.size(), multiplier.size(), trip);
}

NitscheTerms assemble_nitsche(const TriangleMesh& mesh, const DofMap& velocity, const ActiveDecomposition& decomp,
                              const CutRuleSet& rules, const StabilizationParams& params) {
  const LagrangeBasis& basis = LagrangeBasis::get(velocity.degree());
  const int k = velocity.degree();
  NitscheTerms terms;
  terms.penalty = params.nitsche_penalty_coefficient * k * k / decomp.h;
  terms.unit_rhs = Eigen::VectorXd::Zero(velocity.size());
  Triplets trip;
  for (int t : decomp.interface_elements) {
    const CutRule& rule = rules.rule(t);
    const Vec2 n = -rule.normal;  // outward from the fluid
    const AffineMap map(mesh.corners(t));
    const Tabulation tab = tabulate(basis, map, rule.interface.points, true);
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(basis.size(), basis.size());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.size());
    for (std::size_t q = 0; q < rule.interface.size(); ++q) {
      const double w = rule.interface.weights[q];
      const Eigen::VectorXd v = tab.values.row(q).transpose();
      const Eigen::VectorXd dn = tab.grads[q] * n;
      local += w * (-dn * v.transpose() - v * dn.transpose() + terms.penalty * v * v.transpose());
      rhs += w * (-dn + terms.penalty * v);
    }
    const int* dofs = velocity.element_dofs(t);
    scatter(trip, dofs, dofs, local);
    for (int i = 0; i < basis.size(); ++i) terms.unit_rhs[dofs[i]] += rhs[i];
  }
  terms.matrix = build(velocity.size(), velocity.size(), trip);
  return terms;
}

VectorCoefficients nitsche_rhs(const NitscheTerms& terms, const Vec2& xi) {
  VectorCoefficients r(terms.unit_rhs.size(), 2);
  r.col(0) = xi.x() * terms.unit_rhs;
  r.col(1) = xi.y() * terms.unit_rhs;
  return r;
}

Eigen::VectorXd interface_moments(const TriangleMesh& mesh, const DofMap& space, const ActiveDecomposition& decomp,
                                  const CutRuleSet& rules) {
  const LagrangeBasis& basis = LagrangeBasis::get(space.degree());
  Eigen::VectorXd m = Eigen::VectorXd::Zero(space.size());
  for (int t : decomp.interface_elements) {
    const QuadratureRule& gamma = rules.rule(t).interface;
    const Tabulation tab = tabulate(basis, AffineMap(mesh.corners(t)), gamma.points, false);
    const int* dofs = space.element_dofs(t);
    for (std::size_t q = 0; q < gamma.size(); ++q)
      for (int i = 0; i < basis.size(); ++i) m[dofs[i]] += gamma.weights[q] * tab.values(q, i);
  }
  return m;
}

Eigen::VectorXd interface_flux_functional(const TriangleMesh& mesh, const DofMap& velocity,
                                          const ActiveDecomposition& decomp, const CutRuleSet& rules) {
  const LagrangeBasis& basis = LagrangeBasis::get(velocity.degree());
  Eigen::VectorXd l = Eigen::VectorXd::Zero(velocity.size());
  for (int t : decomp.interface_elements) {
    const CutRule& rule = rules.rule(t);
    const Vec2 n = -rule.normal;
    const Tabulation tab = tabulate(basis, AffineMap(mesh.corners(t)), rule.interface.points, true);
    const int* dofs = velocity.element_dofs(t);
    for (std::size_t q = 0; q < rule.interface.size(); ++q) {
      const Eigen::VectorXd dn = tab.grads[q] * n;
      for (int i = 0; i < basis.size(); ++i) l[dofs[i]] -= rule.interface.weights[q] * dn[i];
    }
  }
  return l;
}

TripleNorm compute_triple_norm(const TriangleMesh& mesh, const FEFunction& u, const FEFunction* lambda,
                               const ActiveDecomposition& decomp, const CutRuleSet& rules) {
  TripleNorm norm;
  const double h = decomp.h;
  const SparseMatrix k = assemble_element_stiffness(mesh, *u.map, u.map->elements());
  norm.grad_active = quadratic_form(k, u.coeffs);
  for (int t : decomp.interface_elements) {
    const QuadratureRule& gamma = rules.rule(t).interface;
    for (std::size_t q = 0; q < gamma.size(); ++q) {
      norm.trace_u += gamma.weights[q] * u.evaluate(mesh, t, gamma.points[q]).squaredNorm() / h;
      if (lambda) norm.trace_lambda += gamma.weights[q] * lambda->evaluate(mesh, t, gamma.points[q]).squaredNorm() * h;
    }
  }
  if (lambda) norm.normal_grad_lambda = quadratic_form(assemble_multiplier_stab(mesh, *lambda->map, decomp), lambda->coeffs);
  return norm;
}

double quadratic_form(const SparseMatrix& a, const VectorCoefficients& x) { return bilinear_form(a, x, x); }

double bilinear_form(const SparseMatrix& a, const VectorCoefficients& x, const VectorCoefficients& y) {
  double s = 0.0;
  for (int c = 0; c < 2; ++c) {
    const Eigen::VectorXd xc = x.col(c);
    const Eigen::VectorXd yc = y.col(c);
    s += xc.dot(a * yc);
  }
  return s;
}

}  // namespace movcut
