#include "movcut/spaces.hpp"

#include <cmath>

namespace movcut {

namespace {

int interior_per_element(int degree) { return degree >= 3 ? (degree - 1) * (degree - 2) / 2 : 0; }

bool on_box_boundary(const Vec2& x) {
  constexpr double tol = 1e-12;
  return x.x() < tol || x.x() > 1.0 - tol || x.y() < tol || x.y() > 1.0 - tol;
}

}  // namespace

int background_dof_count(const TriangleMesh& mesh, int degree) {
  if (degree == 0) return mesh.num_triangles();
  return mesh.num_vertices() + mesh.num_facets() * (degree - 1) + mesh.num_triangles() * interior_per_element(degree);
}

std::vector<int> element_background_dofs(const TriangleMesh& mesh, int t, int degree) {
  if (degree == 0) return {t};
  const int k = degree;
  const auto& tri = mesh.triangle(t);
  std::vector<int> dofs(tri.begin(), tri.end());
  dofs.reserve((k + 1) * (k + 2) / 2);
  const int edge_base = mesh.num_vertices();
  for (int e = 0; e < 3; ++e) {
    const int f = mesh.triangle_facets()[t][e];
    const bool forward = mesh.facet(f).vertices[0] == tri[e];
    for (int i = 0; i < k - 1; ++i) dofs.push_back(edge_base + f * (k - 1) + (forward ? i : k - 2 - i));
  }
  const int nint = interior_per_element(k);
  const int int_base = edge_base + mesh.num_facets() * (k - 1);
  for (int j = 0; j < nint; ++j) dofs.push_back(int_base + t * nint + j);
  return dofs;
}

Vec2 background_dof_location(const TriangleMesh& mesh, int dof, int degree) {
  if (degree == 0) {
    const auto c = mesh.corners(dof);
    return (c[0] + c[1] + c[2]) / 3.0;
  }
  const int k = degree;
  const int nv = mesh.num_vertices();
  if (dof < nv) return mesh.vertex(dof);
  const int edge_nodes = mesh.num_facets() * (k - 1);
  if (dof < nv + edge_nodes) {
    const int f = (dof - nv) / (k - 1);
    const int i = (dof - nv) % (k - 1);
    const auto& fv = mesh.facet(f).vertices;
    const Vec2& a = mesh.vertex(fv[0]);
    const Vec2& b = mesh.vertex(fv[1]);
    return a + (b - a) * (static_cast<double>(i + 1) / k);
  }
  const int nint = interior_per_element(k);
  const int rest = dof - nv - edge_nodes;
  const int t = rest / nint;
  const int j = rest % nint;
  const auto& basis = LagrangeBasis::get(k);
  return AffineMap(mesh.corners(t)).to_physical(basis.nodes()[3 + 3 * (k - 1) + j]);
}

DofMap::DofMap(const TriangleMesh& mesh, std::vector<int> elements, int degree, bool dirichlet_on_box)
    : degree_(degree), per_element_(LagrangeBasis::get(degree).size()), elements_(std::move(elements)) {
  slot_.assign(mesh.num_triangles(), -1);
  background_to_active_.assign(background_dof_count(mesh, degree), -1);
  local_to_active_.reserve(elements_.size() * per_element_);
  for (std::size_t s = 0; s < elements_.size(); ++s) {
    const int t = elements_[s];
    slot_[t] = static_cast<int>(s);
    for (int b : element_background_dofs(mesh, t, degree)) {
      int& a = background_to_active_[b];
      if (a < 0) {
        a = static_cast<int>(active_to_background_.size());
        active_to_background_.push_back(b);
      }
      local_to_active_.push_back(a);
    }
  }
  dirichlet_.assign(active_to_background_.size(), 0);
  if (dirichlet_on_box) {
    for (std::size_t a = 0; a < active_to_background_.size(); ++a)
      dirichlet_[a] = on_box_boundary(background_dof_location(mesh, active_to_background_[a], degree));
  }
}

int DofMap::num_dirichlet() const {
  int n = 0;
  for (char c : dirichlet_) n += c != 0;
  return n;
}

std::shared_ptr<const DofMap> build_velocity_space(const TriangleMesh& mesh, const ActiveDecomposition& decomp, int k) {
  if (k < 1) throw Error("build_velocity_space: degree must be >= 1");
  if (decomp.active_elements.empty()) throw Error("build_velocity_space: empty active set");
  return std::make_shared<DofMap>(mesh, decomp.active_elements, k, true);
}

std::shared_ptr<const DofMap> build_multiplier_space(const TriangleMesh& mesh, const ActiveDecomposition& decomp,
                                                     int degree) {
  if (degree < 1) throw Error("build_multiplier_space: multiplier degree must be >= 1");
  if (decomp.interface_elements.empty()) throw Error("build_multiplier_space: empty interface set (no body in domain)");
  return std::make_shared<DofMap>(mesh, decomp.interface_elements, degree, false);
}

Vec2 FEFunction::evaluate(const TriangleMesh& mesh, int t, const Vec2& x) const {
  const AffineMap map_t(mesh.corners(t));
  const Eigen::VectorXd phi = LagrangeBasis::get(map->degree()).values(map_t.to_reference(x));
  const int* dofs = map->element_dofs(t);
  Vec2 v = Vec2::Zero();
  for (int i = 0; i < phi.size(); ++i) v += phi[i] * coeffs.row(dofs[i]).transpose();
  return v;
}

Mat2 FEFunction::gradient(const TriangleMesh& mesh, int t, const Vec2& x) const {
  const AffineMap map_t(mesh.corners(t));
  const auto grads = map_t.physical_gradients(LagrangeBasis::get(map->degree()).gradients(map_t.to_reference(x)));
  const int* dofs = map->element_dofs(t);
  Mat2 g = Mat2::Zero();
  for (int i = 0; i < grads.rows(); ++i) g += coeffs.row(dofs[i]).transpose() * grads.row(i);
  return g;
}

FEFunction interpolate(const TriangleMesh& mesh, std::shared_ptr<const DofMap> map,
                       const std::function<Vec2(const Vec2&)>& f) {
  FEFunction u(map);
  for (int a = 0; a < map->size(); ++a)
    u.coeffs.row(a) = f(background_dof_location(mesh, map->background_of_active(a), map->degree())).transpose();
  return u;
}

VectorCoefficients transfer(const FEFunction& prev, const DofMap& new_map, const TriangleMesh& mesh,
                            const ActiveDecomposition& decomp) {
  if (prev.map->degree() != new_map.degree()) throw Error("transfer: degree mismatch");
  VectorCoefficients out = VectorCoefficients::Zero(new_map.size(), 2);
  for (int a = 0; a < new_map.size(); ++a) {
    const int b = new_map.background_of_active(a);
    const int old = prev.map->active_of_background(b);
    if (old >= 0) out.row(a) = prev.coeffs.row(old);
  }
  for (int t : decomp.cut_elements) {
    for (int b : element_background_dofs(mesh, t, new_map.degree())) {
      if (prev.map->active_of_background(b) < 0)
        throw Error("extension strip too thin: DOF " + std::to_string(b) + " of cut element " + std::to_string(t) +
                    " was inactive at the previous step (domain inclusion violated)");
    }
  }
  return out;
}

}  // namespace movcut
