#include "movcut/cutquad.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>

namespace movcut {

namespace {

void append(QuadratureRule& into, const QuadratureRule& from) {
  into.points.insert(into.points.end(), from.points.begin(), from.points.end());
  into.weights.insert(into.weights.end(), from.weights.begin(), from.weights.end());
}

void add_triangle(QuadratureRule& into, const QuadratureRule& ref, const Vec2& a, const Vec2& b, const Vec2& c) {
  append(into, map_triangle_rule(ref, a, b, c));
}

void add_segment(QuadratureRule& into, const LineRule& ref, const Vec2& a, const Vec2& b) {
  const double len = (b - a).norm();
  for (std::size_t q = 0; q < ref.points.size(); ++q) {
    into.points.push_back(a + ref.points[q] * (b - a));
    into.weights.push_back(ref.weights[q] * len);
  }
}

Vec2 zero_crossing(const Vec2& a, const Vec2& b, double pa, double pb) {
  const double s = pa / (pa - pb);
  return a + s * (b - a);
}

}  // namespace

double CutRule::volume_measure() const {
  return std::accumulate(volume.weights.begin(), volume.weights.end(), 0.0);
}

double CutRule::interface_measure() const {
  return std::accumulate(interface.weights.begin(), interface.weights.end(), 0.0);
}

Vec2 linear_gradient(const std::array<Vec2, 3>& c, const std::array<double, 3>& phi) {
  Mat2 jac;
  jac.col(0) = c[1] - c[0];
  jac.col(1) = c[2] - c[0];
  const double det = jac.determinant();
  if (std::abs(det) < 1e-300) throw Error("degenerate triangle (zero area)");
  const Vec2 ref_grad(phi[1] - phi[0], phi[2] - phi[0]);
  return jac.transpose().inverse() * ref_grad;
}

Vec2 interface_normal(const std::array<Vec2, 3>& coords, const std::array<double, 3>& phi) {
  const bool neg = phi[0] < 0 || phi[1] < 0 || phi[2] < 0;
  const bool pos = phi[0] > 0 || phi[1] > 0 || phi[2] > 0;
  if (!(neg && pos)) throw Error("interface_normal: level set does not change sign on the element");
  const Vec2 g = linear_gradient(coords, phi);
  return -g / g.norm();
}

CutRule cut_triangle(const std::array<Vec2, 3>& coords, std::array<double, 3> phi, int order) {
  if (order < 1) throw Error("cut_triangle: order must be >= 1");
  if (phi[0] == 0.0 && phi[1] == 0.0 && phi[2] == 0.0) throw Error("cut_triangle: level set vanishes identically");
  const double area = signed_area(coords[0], coords[1], coords[2]);
  if (std::abs(area) < 1e-300) throw Error("degenerate triangle (zero area)");
  for (double& p : phi)
    if (p == 0.0) p = -1e-14;

  CutRule rule;
  const Vec2 g = linear_gradient(coords, phi);
  if (g.norm() > 0.0) rule.normal = -g / g.norm();

  const QuadratureRule& tri = reference_triangle_rule(order);
  const LineRule& line = line_rule(order);

  int n_neg = 0;
  for (double p : phi) n_neg += p < 0.0;

  if (n_neg == 3) {
    add_triangle(rule.volume, tri, coords[0], coords[1], coords[2]);
  } else if (n_neg == 1 || n_neg == 2) {
    // The vertex on its own side of the interface.
    const bool lone_negative = n_neg == 1;
    int i = 0;
    while ((phi[i] < 0.0) != lone_negative) ++i;
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const Vec2 pij = zero_crossing(coords[i], coords[j], phi[i], phi[j]);
    const Vec2 pik = zero_crossing(coords[i], coords[k], phi[i], phi[k]);
    if (lone_negative) {
      add_triangle(rule.volume, tri, coords[i], pij, pik);
    } else {
      // quadrilateral pij, vj, vk, pik
      add_triangle(rule.volume, tri, pij, coords[j], coords[k]);
      add_triangle(rule.volume, tri, pij, coords[k], pik);
    }
    add_segment(rule.interface, line, pij, pik);
  }
  rule.inside_fraction = rule.volume_measure() / std::abs(area);
  return rule;
}

CutRuleSet::CutRuleSet(const TriangleMesh& mesh, const ActiveDecomposition& decomp, int order) : order_(order) {
  slot_.assign(mesh.num_triangles(), -1);
  for (int t : decomp.interface_elements) {
    slot_[t] = static_cast<int>(rules_.size());
    rules_.push_back(cut_triangle(mesh.corners(t), decomp.element_phi(mesh, t), order));
  }
}

const CutRule& CutRuleSet::rule(int t) const {
  if (!has(t)) throw Error("missing cut rule for element " + std::to_string(t));
  return rules_[slot_[t]];
}

}  // namespace movcut
