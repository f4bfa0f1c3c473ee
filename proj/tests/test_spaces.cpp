#include "movcut/spaces.hpp"
#include "movcut/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using namespace movcut;

namespace {

std::vector<int> all_elements(const TriangleMesh& m) {
  std::vector<int> e(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) e[t] = t;
  return e;
}

ActiveDecomposition everything_active(const TriangleMesh& m) {
  ActiveDecomposition d;
  d.flags.assign(m.num_triangles(), kActive);
  d.active_elements = all_elements(m);
  return d;
}

RigidState at(double x, double y) {
  RigidState s;
  s.center = {x, y};
  return s;
}

}  // namespace

TEST(VelocitySpace, TwoTriangleCounts) {
  const BackgroundMesh m = build_structured_mesh(1.0);
  const auto p1 = build_velocity_space(m, everything_active(m), 1);
  EXPECT_EQ(p1->size(), 4);
  EXPECT_EQ(p1->num_dirichlet(), 4);
  const auto p2 = build_velocity_space(m, everything_active(m), 2);
  EXPECT_EQ(p2->size(), 9);
}

TEST(VelocitySpace, EulerCount) {
  const BackgroundMesh m = build_structured_mesh(0.5);
  const auto p2 = build_velocity_space(m, everything_active(m), 2);
  EXPECT_EQ(p2->size(), m.num_vertices() + m.num_facets());
  EXPECT_EQ(p2->size(), 9 + 16);
  const auto p3 = build_velocity_space(m, everything_active(m), 3);
  EXPECT_EQ(p3->size(), 9 + 2 * 16 + 8);
  EXPECT_EQ(background_dof_count(m, 3), p3->size());
}

TEST(VelocitySpace, DirichletFlagsOnBox) {
  const BackgroundMesh m = build_structured_mesh(0.25);
  const auto v = build_velocity_space(m, everything_active(m), 3);
  for (int a = 0; a < v->size(); ++a) {
    const Vec2 x = background_dof_location(m, v->background_of_active(a), 3);
    const bool box = x.x() < 1e-12 || x.y() < 1e-12 || x.x() > 1 - 1e-12 || x.y() > 1 - 1e-12;
    EXPECT_EQ(v->is_dirichlet(a), box);
  }
}

TEST(VelocitySpace, Errors) {
  const BackgroundMesh m = build_structured_mesh(0.5);
  ActiveDecomposition empty;
  empty.flags.assign(m.num_triangles(), 0);
  EXPECT_THROW(build_velocity_space(m, empty, 2), Error);
  EXPECT_THROW(build_velocity_space(m, everything_active(m), 0), Error);
}

TEST(VelocitySpace, SharedFacetDofsIdentified) {
  const BackgroundMesh m = build_structured_mesh(0.5);
  const auto v = build_velocity_space(m, everything_active(m), 2);
  for (int f = 0; f < m.num_facets(); ++f) {
    const auto& fa = m.facet(f);
    if (fa.is_boundary()) continue;
    std::set<int> d0(v->element_dofs(fa.triangles[0]), v->element_dofs(fa.triangles[0]) + 6);
    std::set<int> d1(v->element_dofs(fa.triangles[1]), v->element_dofs(fa.triangles[1]) + 6);
    int shared = 0;
    for (int a : d0) shared += d1.count(a);
    EXPECT_EQ(shared, 3);  // two vertices and the edge midpoint
  }
}

TEST(MultiplierSpace, BandVertices) {
  const BackgroundMesh m = build_structured_mesh(0.1);
  const ActiveDecomposition d = classify(m, RigidState{}, 0.0);
  const auto q = build_multiplier_space(m, d, 1);
  std::set<int> verts;
  for (int t : d.interface_elements)
    for (int v : m.triangle(t)) verts.insert(v);
  EXPECT_EQ(q->size(), static_cast<int>(verts.size()));
  EXPECT_EQ(q->num_dirichlet(), 0);
  EXPECT_EQ(q->elements(), d.interface_elements);
}

TEST(MultiplierSpace, SingleElementBand) {
  const BackgroundMesh m = build_structured_mesh(0.1);
  ActiveDecomposition d = classify(m, RigidState{}, 0.0);
  d.interface_elements.resize(1);
  const auto q = build_multiplier_space(m, d, 1);
  EXPECT_EQ(q->size(), 3);
}

TEST(MultiplierSpace, Errors) {
  const BackgroundMesh m = build_structured_mesh(0.1);
  const ActiveDecomposition d = classify(m, RigidState{}, 0.0);
  EXPECT_THROW(build_multiplier_space(m, d, 0), Error);
  ActiveDecomposition none = d;
  none.interface_elements.clear();
  EXPECT_THROW(build_multiplier_space(m, none, 1), Error);
}

TEST(FEFunction, ReproducesPolynomials) {
  const BackgroundMesh m = build_structured_mesh(0.2);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 1; k <= 4; ++k) {
    const auto map = build_velocity_space(m, everything_active(m), k);
    auto poly = [k](const Vec2& x) {
      return Vec2(std::pow(x.x(), k) - 2.0 * x.x() * std::pow(x.y(), k - 1) + 0.3,
                  std::pow(x.y(), k) + (k >= 2 ? x.x() * x.y() : x.x()));
    };
    const FEFunction f = interpolate(m, map, poly);
    for (int i = 0; i < 50; ++i) {
      const int t = static_cast<int>(u(rng) * m.num_triangles());
      const auto c = m.corners(t);
      double a = u(rng), b = u(rng);
      if (a + b > 1) {
        a = 1 - a;
        b = 1 - b;
      }
      const Vec2 x = c[0] + a * (c[1] - c[0]) + b * (c[2] - c[0]);
      EXPECT_NEAR((f.evaluate(m, t, x) - poly(x)).norm(), 0.0, 1e-12) << "k=" << k;
      // The canonical extension reproduces the same polynomial off the element.
      const Vec2 y = x + Vec2(0.13, -0.07);
      EXPECT_NEAR((f.evaluate(m, t, y) - poly(y)).norm(), 0.0, 1e-11);
    }
  }
}

TEST(FEFunction, GradientOfLinear) {
  const BackgroundMesh m = build_structured_mesh(0.25);
  const auto map = build_velocity_space(m, everything_active(m), 2);
  const FEFunction f = interpolate(m, map, [](const Vec2& x) { return Vec2(2 * x.x() - x.y(), 3 * x.y()); });
  const Mat2 g = f.gradient(m, 5, Vec2(0.3, 0.4));
  EXPECT_NEAR(g(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(g(0, 1), -1.0, 1e-12);
  EXPECT_NEAR(g(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(g(1, 1), 3.0, 1e-12);
}

TEST(Transfer, IdentityOnSameSet) {
  const BackgroundMesh m = build_structured_mesh(0.1);
  const ActiveDecomposition d = classify(m, at(0.5, 0.6), 0.02);
  const auto map = build_velocity_space(m, d, 2);
  const FEFunction f = interpolate(m, map, [](const Vec2& x) { return Vec2(std::sin(x.x()), x.y()); });
  const VectorCoefficients c = transfer(f, *map, m, d);
  EXPECT_EQ((c - f.coeffs).norm(), 0.0);
}

TEST(Transfer, GrownStripZeroOnNewDofs) {
  // The strip grows into the disk.
  const BackgroundMesh m = build_structured_mesh(0.025);
  const ActiveDecomposition small = classify(m, at(0.5, 0.6), 0.0);
  const ActiveDecomposition large = classify(m, at(0.5, 0.6), 0.03);
  const auto m0 = build_velocity_space(m, small, 2);
  const auto m1 = build_velocity_space(m, large, 2);
  ASSERT_GT(m1->size(), m0->size());
  FEFunction f(m0);
  f.coeffs.col(0).setConstant(2.5);
  f.coeffs.col(1).setConstant(-1.0);
  const VectorCoefficients c = transfer(f, *m1, m, large);
  for (int a = 0; a < m1->size(); ++a) {
    const bool old = m0->active_of_background(m1->background_of_active(a)) >= 0;
    EXPECT_EQ(c(a, 0), old ? 2.5 : 0.0);
    EXPECT_EQ(c(a, 1), old ? -1.0 : 0.0);
  }
}

TEST(Transfer, PreservesValuesOnTheNewFluidDomain) {
  const BackgroundMesh m = build_structured_mesh(0.05);
  const ActiveDecomposition d0 = classify(m, at(0.5, 0.6), 0.04);
  const ActiveDecomposition d1 = classify(m, at(0.5, 0.58), 0.04);
  const auto m0 = build_velocity_space(m, d0, 2);
  const auto m1 = build_velocity_space(m, d1, 2);
  const FEFunction f = interpolate(m, m0, [](const Vec2& x) { return Vec2(std::cos(3 * x.x()), x.x() * x.y()); });
  FEFunction g(m1);
  g.coeffs = transfer(f, *m1, m, d1);
  for (int t : d1.cut_elements) {
    const auto c = m.corners(t);
    const Vec2 x = (c[0] + c[1] + c[2]) / 3.0;
    EXPECT_EQ((g.evaluate(m, t, x) - f.evaluate(m, t, x)).norm(), 0.0);
  }
}

TEST(Transfer, ZeroStripWithMotionFails) {
  const BackgroundMesh m = build_structured_mesh(0.05);
  const ActiveDecomposition d0 = classify(m, at(0.5, 0.6), 0.0);
  const ActiveDecomposition d1 = classify(m, at(0.5, 0.56), 0.0);
  const auto m0 = build_velocity_space(m, d0, 2);
  const auto m1 = build_velocity_space(m, d1, 2);
  const FEFunction f(m0);
  try {
    transfer(f, *m1, m, d1);
    ADD_FAILURE() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("extension strip too thin"), std::string::npos);
  }
}
