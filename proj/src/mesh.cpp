#include "movcut/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

namespace movcut {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

TriangleMesh::TriangleMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int nt = num_triangles();
  const int nv = num_vertices();

  struct HalfEdge {
    int a, b, t, e;
  };
  std::vector<HalfEdge> half;
  half.reserve(3 * nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    for (int v : tri) {
      if (v < 0 || v >= nv) throw Error("mesh: triangle references invalid vertex");
    }
    if (signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]) <= 0.0)
      throw Error("mesh: triangle " + std::to_string(t) + " is not positively oriented");
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      half.push_back({a, b, t, e});
    }
  }
  std::sort(half.begin(), half.end(), [](const HalfEdge& x, const HalfEdge& y) {
    return std::tie(x.a, x.b, x.t) < std::tie(y.a, y.b, y.t);
  });

  triangle_facets_.assign(nt, {-1, -1, -1});
  for (std::size_t i = 0; i < half.size();) {
    std::size_t j = i + 1;
    while (j < half.size() && half[j].a == half[i].a && half[j].b == half[i].b) ++j;
    if (j - i > 2) throw Error("mesh: non-manifold edge");
    Facet f;
    f.vertices = {half[i].a, half[i].b};
    const int idx = static_cast<int>(facets_.size());
    for (std::size_t k = i; k < j; ++k) {
      f.triangles[k - i] = half[k].t;
      triangle_facets_[half[k].t][half[k].e] = idx;
    }
    facets_.push_back(f);
    i = j;
  }

  h_max_ = 0.0;
  h_min_ = nt > 0 ? diameter(0) : 0.0;
  for (int t = 0; t < nt; ++t) {
    const double d = diameter(t);
    h_max_ = std::max(h_max_, d);
    h_min_ = std::min(h_min_, d);
  }
}

std::array<Vec2, 3> TriangleMesh::corners(int t) const {
  const auto& tri = triangles_[t];
  return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

double TriangleMesh::area(int t) const {
  const auto c = corners(t);
  return signed_area(c[0], c[1], c[2]);
}

double TriangleMesh::diameter(int t) const {
  const auto c = corners(t);
  return std::max({(c[1] - c[0]).norm(), (c[2] - c[1]).norm(), (c[0] - c[2]).norm()});
}

int TriangleMesh::neighbor(int t, int e) const {
  const Facet& f = facets_[triangle_facets_[t][e]];
  if (f.is_boundary()) return -1;
  return f.triangles[0] == t ? f.triangles[1] : f.triangles[0];
}

BackgroundMesh build_structured_mesh(double h_target) {
  if (!(h_target > 0.0)) throw Error("build_structured_mesh: h_target must be positive");
  // Guard against 1/h landing a rounding error above an integer.
  const int n = std::max(1, static_cast<int>(std::ceil(1.0 / h_target - 1e-9)));
  const double dx = 1.0 / n;

  std::vector<Vec2> verts;
  verts.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) verts.emplace_back(i == n ? 1.0 : i * dx, j == n ? 1.0 : j * dx);

  std::vector<std::array<int, 3>> tris;
  tris.reserve(2 * n * n);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        tris.push_back({v00, v10, v11});
        tris.push_back({v00, v11, v01});
      } else {
        tris.push_back({v00, v10, v01});
        tris.push_back({v10, v11, v01});
      }
    }
  }
  return BackgroundMesh(TriangleMesh(std::move(verts), std::move(tris)), h_target, n);
}

std::array<int, 2> facet_patch(const TriangleMesh& mesh, int facet_index) {
  if (facet_index < 0 || facet_index >= mesh.num_facets())
    throw Error("facet_patch: facet index out of range");
  const Facet& f = mesh.facet(facet_index);
  if (f.is_boundary()) throw Error("no patch: facet " + std::to_string(facet_index) + " is on the boundary");
  return {std::min(f.triangles[0], f.triangles[1]), std::max(f.triangles[0], f.triangles[1])};
}

double shape_ratio(const TriangleMesh& mesh, int t) {
  const auto c = mesh.corners(t);
  const double a = (c[1] - c[2]).norm(), b = (c[2] - c[0]).norm(), d = (c[0] - c[1]).norm();
  const double area = std::abs(signed_area(c[0], c[1], c[2]));
  const double circum = a * b * d / (4.0 * area);
  const double in = 2.0 * area / (a + b + d);
  return circum / in;
}

void write_mesh(std::ostream& os, const TriangleMesh& mesh) {
  os << "MESH2D " << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
  os << std::setprecision(17);
  for (const auto& v : mesh.vertices()) os << v.x() << ' ' << v.y() << '\n';
  for (const auto& t : mesh.triangles()) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

TriangleMesh read_mesh(std::istream& is) {
  std::string tag;
  int nv = -1, nt = -1;
  if (!(is >> tag >> nv >> nt) || tag != "MESH2D" || nv < 0 || nt < 0)
    throw Error("read_mesh: expected header 'MESH2D <nv> <nt>'");
  std::vector<Vec2> verts(nv);
  for (auto& v : verts)
    if (!(is >> v.x() >> v.y())) throw Error("read_mesh: truncated vertex block");
  std::vector<std::array<int, 3>> tris(nt);
  for (auto& t : tris)
    if (!(is >> t[0] >> t[1] >> t[2])) throw Error("read_mesh: truncated triangle block");
  return TriangleMesh(std::move(verts), std::move(tris));
}

}  // namespace movcut
