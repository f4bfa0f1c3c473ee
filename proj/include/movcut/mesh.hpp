#pragma once

#include "movcut/types.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace movcut {

// An edge of the triangulation. `triangles[1]` is -1 on the outer boundary.
struct Facet {
  std::array<int, 2> vertices{};  // sorted ascending
  std::array<int, 2> triangles{-1, -1};

  bool is_boundary() const { return triangles[1] < 0; }
};

// Conforming triangle mesh with facet adjacency. Immutable after construction.
//
// Local edge e of triangle t joins local vertices e and (e+1)%3;
// `triangle_facets[t][e]` is the global index of that edge. Facets are numbered
// in lexicographic order of their sorted vertex pair, so the numbering only
// depends on the vertex and triangle lists.
class TriangleMesh {
public:
  TriangleMesh() = default;
  TriangleMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_facets() const { return static_cast<int>(facets_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Facet>& facets() const { return facets_; }
  const std::vector<std::array<int, 3>>& triangle_facets() const { return triangle_facets_; }

  const Vec2& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }
  const Facet& facet(int f) const { return facets_[f]; }
  std::array<Vec2, 3> corners(int t) const;

  double area(int t) const;
  double diameter(int t) const;
  double h_max() const { return h_max_; }
  double h_min() const { return h_min_; }

  // Neighbour of t across its local edge e, or -1.
  int neighbor(int t, int e) const;

private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Facet> facets_;
  std::vector<std::array<int, 3>> triangle_facets_;
  double h_max_ = 0.0;
  double h_min_ = 0.0;
};

// Structured background mesh of the unit square.
class BackgroundMesh : public TriangleMesh {
public:
  BackgroundMesh() = default;
  BackgroundMesh(TriangleMesh mesh, double h_target, int cells_per_side)
      : TriangleMesh(std::move(mesh)), h_target_(h_target), cells_(cells_per_side) {}

  double h_target() const { return h_target_; }
  int cells_per_side() const { return cells_; }

private:
  double h_target_ = 0.0;
  int cells_ = 0;
};

// n x n grid with n = ceil(1/h_target); cell (i,j) is split along one diagonal,
// the diagonal direction alternating with the parity of i+j. Vertices are
// numbered row-major from the origin.
BackgroundMesh build_structured_mesh(double h_target);

// The two triangles sharing an interior facet, in ascending order.
// Throws Error("no patch") on boundary facets.
std::array<int, 2> facet_patch(const TriangleMesh& mesh, int facet_index);

// Signed area (positive for counter-clockwise vertex order).
double signed_area(const Vec2& a, const Vec2& b, const Vec2& c);

// Ratio of circumradius to inradius.
double shape_ratio(const TriangleMesh& mesh, int t);

// Plain-text exchange format:
//   MESH2D <nv> <nt>
//   x y          (nv lines)
//   i j k        (nt lines, 0-based)
void write_mesh(std::ostream& os, const TriangleMesh& mesh);
TriangleMesh read_mesh(std::istream& is);

}  // namespace movcut
