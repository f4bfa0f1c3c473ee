#include "movcut/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace movcut {

double level_set_value(const RigidState& state, const Vec2& x) {
  return state.radius - (x - state.center).norm();
}

Vec2 level_set_normal(const RigidState& state, const Vec2& x) {
  const Vec2 d = x - state.center;
  const double n = d.norm();
  if (n == 0.0) throw Error("level_set_normal: undefined at the disk centre");
  return d / n;
}

bool ActiveDecomposition::fully_inside(const TriangleMesh& mesh, int t) const {
  for (int v : mesh.triangle(t))
    if (vertex_phi[v] >= 0.0) return false;
  return true;
}

bool ActiveDecomposition::fully_outside(const TriangleMesh& mesh, int t) const {
  for (int v : mesh.triangle(t))
    if (vertex_phi[v] <= 0.0) return false;
  return true;
}

std::array<double, 3> ActiveDecomposition::element_phi(const TriangleMesh& mesh, int t) const {
  const auto& tri = mesh.triangle(t);
  return {vertex_phi[tri[0]], vertex_phi[tri[1]], vertex_phi[tri[2]]};
}

double point_triangle_distance(const Vec2& p, const std::array<Vec2, 3>& tri) {
  const double area = signed_area(tri[0], tri[1], tri[2]);
  const double sgn = area >= 0.0 ? 1.0 : -1.0;
  bool inside = true;
  for (int e = 0; e < 3; ++e)
    if (sgn * signed_area(tri[e], tri[(e + 1) % 3], p) < 0.0) inside = false;
  if (inside) return 0.0;

  double best = std::numeric_limits<double>::infinity();
  for (int e = 0; e < 3; ++e) {
    const Vec2& a = tri[e];
    const Vec2 d = tri[(e + 1) % 3] - a;
    const double s = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (a + s * d - p).norm());
  }
  return best;
}

int segment_circle_crossings(const Vec2& a, const Vec2& b, const Vec2& center, double radius) {
  const Vec2 d = b - a;
  const Vec2 f = a - center;
  const double qa = d.squaredNorm();
  const double qb = 2.0 * d.dot(f);
  const double qc = f.squaredNorm() - radius * radius;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc <= 0.0) return 0;
  const double sq = std::sqrt(disc);
  // Roots at the end points belong to the vertices, not the open edge.
  constexpr double eps = 1e-10;
  int count = 0;
  for (double s : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)})
    if (s > eps && s < 1.0 - eps) ++count;
  return count;
}

ActiveDecomposition classify(const TriangleMesh& mesh, const RigidState& state, double delta_h) {
  if (!(delta_h >= 0.0)) throw Error("classify: delta_h must be non-negative");
  const Vec2& c = state.center;
  const double r = state.radius;
  const double clearance = std::min({c.x() - r, 1.0 - c.x() - r, c.y() - r, 1.0 - c.y() - r});
  if (!(clearance > 0.0)) throw Error("classify: disk touches the outer boundary (clearance " +
                                      std::to_string(clearance) + ")");

  ActiveDecomposition d;
  d.state = state;
  d.delta_h = delta_h;
  d.h = mesh.h_max();

  const int nv = mesh.num_vertices();
  d.vertex_phi.resize(nv);
  for (int v = 0; v < nv; ++v) {
    const double phi = level_set_value(state, mesh.vertex(v));
    d.vertex_phi[v] = phi == 0.0 ? -1e-14 : phi;
  }

  const int nt = mesh.num_triangles();
  d.flags.assign(nt, 0);
  for (int t = 0; t < nt; ++t) {
    const auto corners = mesh.corners(t);
    const auto phi = d.element_phi(mesh, t);
    const double phi_min = std::min({phi[0], phi[1], phi[2]});
    const double phi_max = std::max({phi[0], phi[1], phi[2]});

    // dist(x, fluid) <= delta  <=>  phi(x) <= delta, and phi attains its
    // minimum over a triangle at a vertex (|x - C| is convex).
    if (phi_min > delta_h) continue;
    std::uint8_t f = kActive;
    if (phi_min < 0.0) f |= kCut;
    if (phi_min < 0.0 && phi_max > 0.0) f |= kInterface;

    const double dmin = point_triangle_distance(c, corners);
    double dmax = 0.0;
    for (const auto& x : corners) dmax = std::max(dmax, (x - c).norm());

    const bool touches_circle = dmin <= r && r <= dmax;
    if (touches_circle) {
      int crossings = 0;
      bool on_circle = false;
      for (int e = 0; e < 3; ++e) {
        const int n = segment_circle_crossings(corners[e], corners[(e + 1) % 3], c, r);
        if (n > 1) {
          // A near-tangent edge cut twice only hides a thin cap from the P1
          // geometry; reject when the cap is a sizeable part of an element or
          // of the disk.
          const Vec2 a = corners[e], b = corners[(e + 1) % 3];
          const Vec2 dir = (b - a).normalized();
          const double line_dist = std::abs(dir.x() * (c - a).y() - dir.y() * (c - a).x());
          if (r - line_dist > 0.5 * std::min(d.h, r))
            throw Error("geometry under-resolved: an edge of element " + std::to_string(t) +
                        " is crossed twice by the interface");
        }
        crossings += n;
        if (std::abs(level_set_value(state, corners[e])) < 1e-12) on_circle = true;
      }
      // Zero crossings also occur for tangent edges and for vertices within
      // round-off of the circle; only a disk enclosed by the element is fatal.
      if (crossings == 0 && !on_circle && dmin == 0.0 && phi_max < 0.0)
        throw Error("geometry under-resolved: the interface lies inside element " + std::to_string(t));
    }

    // Distance to the interface is | r - |x - C| |; over T the radius |x - C|
    // sweeps [dmin, dmax].
    const double dist_gamma = touches_circle ? 0.0 : std::min(std::abs(r - dmin), std::abs(r - dmax));
    if (dist_gamma <= delta_h || (f & kInterface)) f |= kStripPM;
    // Inside-disk part of the strip: the annulus r - delta <= |x - C| <= r.
    if ((dmin <= r && dmax >= r - delta_h) || (f & kInterface)) f |= kStripPlus;
    d.flags[t] = f;
  }

  for (int t = 0; t < nt; ++t) {
    const auto f = d.flags[t];
    if (f & kActive) d.active_elements.push_back(t);
    if (f & kCut) d.cut_elements.push_back(t);
    if (f & kInterface) d.interface_elements.push_back(t);
    if (f & kStripPM) d.strip_elements_pm.push_back(t);
    if (f & kStripPlus) d.strip_elements_plus.push_back(t);
  }

  for (int fi = 0; fi < mesh.num_facets(); ++fi) {
    const Facet& fa = mesh.facet(fi);
    if (fa.is_boundary()) continue;
    const auto a = d.flags[fa.triangles[0]], b = d.flags[fa.triangles[1]];
    if ((a & kActive) && (b & kActive) && ((a & kStripPM) || (b & kStripPM))) d.strip_facets.push_back(fi);
  }
  return d;
}

int strip_crossing_constant(double delta_h, double h) {
  return static_cast<int>(std::ceil(1.0 + delta_h / h - 1e-12));
}

int strip_crossing_bound(const ActiveDecomposition& decomp, const TriangleMesh& mesh) {
  const int K = strip_crossing_constant(decomp.delta_h, decomp.h);
  constexpr int slack = 4;

  const int nt = mesh.num_triangles();
  std::vector<std::vector<int>> adj(nt);
  for (int fi : decomp.strip_facets) {
    const auto& f = mesh.facet(fi);
    adj[f.triangles[0]].push_back(f.triangles[1]);
    adj[f.triangles[1]].push_back(f.triangles[0]);
  }

  std::vector<int> dist(nt, -1);
  std::queue<int> queue;
  for (int t : decomp.cut_elements) {
    if (!decomp.has(t, kStripPlus)) {
      dist[t] = 0;
      queue.push(t);
    }
  }
  while (!queue.empty()) {
    const int t = queue.front();
    queue.pop();
    for (int n : adj[t]) {
      if (dist[n] < 0) {
        dist[n] = dist[t] + 1;
        queue.push(n);
      }
    }
  }
  for (int t : decomp.strip_elements_plus) {
    if (dist[t] < 0 || dist[t] > slack * K)
      throw Error("extension strip disconnected: element " + std::to_string(t) + " needs " +
                  (dist[t] < 0 ? std::string("an unreachable number of") : std::to_string(dist[t])) +
                  " facet crossings (bound " + std::to_string(slack * K) + ")");
  }
  return K;
}

}  // namespace movcut
