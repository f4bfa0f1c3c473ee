#pragma once

#include "movcut/mesh.hpp"

#include <cstdint>
#include <vector>

namespace movcut {

// Translating rigid disk. The fluid domain is the part of the unit square
// outside the disk.
struct RigidState {
  Vec2 center{0.5, 0.8};
  double radius = 0.1;
  Vec2 xi{0.0, 0.0};  // interface (body) velocity
};

// Signed distance r - |x - C|: negative in the fluid, positive inside the disk.
double level_set_value(const RigidState& state, const Vec2& x);

// Unit vector -grad(phi)/|grad(phi)| of the analytic level set, i.e.
// (x - C)/|x - C|. It points out of the disk into the fluid.
Vec2 level_set_normal(const RigidState& state, const Vec2& x);

// Membership bits of ActiveDecomposition::flags.
enum ElementSet : std::uint8_t {
  kActive = 1u << 0,     // within delta_h of the fluid domain
  kCut = 1u << 1,        // intersects the fluid domain
  kInterface = 1u << 2,  // crossed by the discrete interface
  kStripPM = 1u << 3,    // within delta_h of the interface, either side
  kStripPlus = 1u << 4,  // strip part inside the disk
};

// Per-step element and facet classification.
struct ActiveDecomposition {
  RigidState state;
  double delta_h = 0.0;
  double h = 0.0;  // global mesh size (h_max of the background mesh)

  std::vector<std::uint8_t> flags;  // per triangle, ElementSet bits
  std::vector<int> active_elements;
  std::vector<int> cut_elements;
  std::vector<int> interface_elements;
  std::vector<int> strip_elements_pm;
  std::vector<int> strip_elements_plus;
  std::vector<int> strip_facets;

  // Analytic level set at the mesh vertices; exact zeros are moved to -1e-14
  // so every vertex is strictly inside or outside the fluid.
  std::vector<double> vertex_phi;

  bool has(int t, ElementSet s) const { return (flags[t] & s) != 0; }
  bool is_active(int t) const { return has(t, kActive); }
  // Sign pattern of the P1 level-set interpolant on t.
  bool fully_inside(const TriangleMesh& mesh, int t) const;   // all vertex phi < 0
  bool fully_outside(const TriangleMesh& mesh, int t) const;  // all vertex phi > 0
  std::array<double, 3> element_phi(const TriangleMesh& mesh, int t) const;
};

// Classifies all background elements for the given disk state and strip width.
// Throws Error("geometry under-resolved") when an edge is crossed twice by the
// circle with a cap deeper than min(h, r)/2 (a near-tangent double crossing is only an
// O(h^2) geometry error and is accepted) or the circle fits inside one
// element, and Error when the disk touches the outer boundary.
ActiveDecomposition classify(const TriangleMesh& mesh, const RigidState& state, double delta_h);

// K = ceil(1 + delta_h/h). Also checks, by breadth-first search over the strip
// facets, that every strip element inside the disk reaches an uncut fluid
// element within 4*K facet crossings; throws Error("extension strip
// disconnected") otherwise.
int strip_crossing_bound(const ActiveDecomposition& decomp, const TriangleMesh& mesh);

// The bare formula, without the connectivity check.
int strip_crossing_constant(double delta_h, double h);

// Euclidean distance from a point to a (closed) triangle.
double point_triangle_distance(const Vec2& p, const std::array<Vec2, 3>& tri);

// Number of intersection points of the circle with the open segment (a, b).
int segment_circle_crossings(const Vec2& a, const Vec2& b, const Vec2& center, double radius);

}  // namespace movcut
