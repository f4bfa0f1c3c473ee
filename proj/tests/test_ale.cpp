#include "movcut/ale.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace movcut;

namespace {

double polygon_area(int n, double r) { return 0.5 * n * r * r * std::sin(2.0 * M_PI / n); }

double total(const SparseMatrix& m) { return Eigen::VectorXd::Ones(m.rows()).dot(m * Eigen::VectorXd::Ones(m.cols())); }

AleConfig small_config(double t_end) {
  AleConfig c;
  c.degree = 2;
  c.n_circle = 16;
  c.dt = 0.02;
  c.t_end = t_end;
  c.scheme = TimeScheme::kBDF1;
  return c;
}

}  // namespace

TEST(FittedMesh, CircleAndBox) {
  const FittedMesh f = build_fitted_mesh(32);
  const TriangleMesh& m = f.mesh;
  int n_circle = 0;
  for (int v = 0; v < m.num_vertices(); ++v) {
    const Vec2 x = m.vertex(v);
    if (f.on_circle[v]) {
      ++n_circle;
      EXPECT_NEAR((x - Vec2(0.5, 0.8)).norm(), 0.1, 1e-14);
    }
    const bool box = x.x() < 1e-12 || x.y() < 1e-12 || x.x() > 1 - 1e-12 || x.y() > 1 - 1e-12;
    EXPECT_EQ(static_cast<bool>(f.on_box[v]), box);
  }
  EXPECT_EQ(n_circle, 32);
  double perimeter = 0.0, area = 0.0;
  for (const Facet& fa : m.facets())
    if (fa.is_boundary() && f.on_circle[fa.vertices[0]] && f.on_circle[fa.vertices[1]])
      perimeter += (m.vertex(fa.vertices[0]) - m.vertex(fa.vertices[1])).norm();
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto c = m.corners(t);
    EXPECT_GT(signed_area(c[0], c[1], c[2]), 0.0);
    area += m.area(t);
  }
  EXPECT_LE(std::abs(perimeter - 0.2 * M_PI) / (0.2 * M_PI), 0.005);
  EXPECT_NEAR(area, 1.0 - polygon_area(32, 0.1), 1e-13);
}

TEST(FittedMesh, AreaConvergesQuadratically) {
  std::vector<double> err;
  for (int n : {16, 32, 64}) {
    const FittedMesh f = build_fitted_mesh(n);
    double area = 0.0;
    for (int t = 0; t < f.mesh.num_triangles(); ++t) area += f.mesh.area(t);
    err.push_back(std::abs(area - (1.0 - M_PI * 0.01)));
  }
  EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.1);
  EXPECT_NEAR(std::log2(err[1] / err[2]), 2.0, 0.1);
}

TEST(FittedMesh, Errors) {
  EXPECT_THROW(build_fitted_mesh(8), Error);
  EXPECT_THROW(build_fitted_mesh(24), Error);
  RigidState s;
  s.center = {0.5, 0.5};
  EXPECT_THROW(build_fitted_mesh(16, s), Error);
}

TEST(Blending, Properties) {
  const AleBlending b;
  EXPECT_EQ(b.value({0.5, 0.8}), 1.0);
  EXPECT_NEAR(b.value({0.4, 0.7}), 1.0, 1e-12);
  EXPECT_NEAR(b.value({0.6, 0.9}), 1.0, 1e-12);
  for (double s : {0.0, 0.3, 0.77, 1.0}) {
    EXPECT_EQ(b.value({s, 0.0}), 0.0);
    EXPECT_EQ(b.value({s, 1.0}), 0.0);
    EXPECT_EQ(b.value({0.0, s}), 0.0);
    EXPECT_EQ(b.value({1.0, s}), 0.0);
  }
  const double eps = 1e-6;
  for (const Vec2& x : {Vec2(0.2, 0.5), Vec2(0.75, 0.95), Vec2(0.45, 0.3), Vec2(0.05, 0.65)}) {
    const double v = b.value(x);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    const Vec2 fd((b.value(x + Vec2(eps, 0)) - b.value(x - Vec2(eps, 0))) / (2 * eps),
                  (b.value(x + Vec2(0, eps)) - b.value(x - Vec2(0, eps))) / (2 * eps));
    EXPECT_NEAR((b.gradient(x) - fd).norm(), 0.0, 1e-7);
  }
}

TEST(AleDiscretization, FixedMeshMatchesP1) {
  const FittedMesh f = build_fitted_mesh(16);
  const AleDiscretization disc(f.mesh, 1, AleBlending{});
  const AleMatrices a = disc.assemble(Vec2::Zero(), Vec2::Zero());
  std::vector<int> all(f.mesh.num_triangles());
  for (int t = 0; t < f.mesh.num_triangles(); ++t) all[t] = t;
  const DofMap map(f.mesh, all, 1, true);
  ASSERT_EQ(map.size(), disc.space()->size());
  const SparseMatrix k = assemble_element_stiffness(f.mesh, map, all);
  EXPECT_LE(Eigen::MatrixXd(a.stiffness - k).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(a.convection.norm(), 0.0);
  EXPECT_DOUBLE_EQ(a.min_jacobian, 1.0);
  EXPECT_NEAR(total(a.mass), 1.0 - polygon_area(16, 0.1), 1e-13);
}

TEST(AleDiscretization, DeformedAreaIsPreserved) {
  // The map translates the polygon rigidly and fixes the box, so the area of
  // the deformed domain equals the reference area. chi is only piecewise
  // polynomial, so the quadrature is not exact.
  const FittedMesh f = build_fitted_mesh(16);
  const AleDiscretization disc(f.mesh, 4, AleBlending{});
  const AleMatrices a = disc.assemble(Vec2(0.03, -0.15), Vec2(0.1, -0.5));
  EXPECT_NEAR(total(a.mass), 1.0 - polygon_area(16, 0.1), 1e-4);
  EXPECT_LT(a.min_jacobian, 1.0);
  EXPECT_GT(a.min_jacobian, 0.1);
  EXPECT_LE((a.stiffness * Eigen::VectorXd::Ones(a.stiffness.cols())).norm(), 1e-11);
  EXPECT_LE((a.convection * Eigen::VectorXd::Ones(a.convection.cols())).norm(), 1e-12);
}

TEST(AleDiscretization, TanglingIsReported) {
  const FittedMesh f = build_fitted_mesh(16);
  const AleDiscretization disc(f.mesh, 1, AleBlending{});
  try {
    disc.assemble(Vec2(0.0, -0.6), Vec2::Zero());
    ADD_FAILURE() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("mesh tangling"), std::string::npos);
  }
}

TEST(AleDiscretization, ManufacturedPoissonConverges) {
  // -lap u = 2 pi^2 u, u = sin(pi x) sin(pi y), on the structured square with d = 0.
  auto exact = [](const Vec2& x) { return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); };
  for (int k : {2, 3}) {
    std::vector<double> err;
    for (double h : {0.25, 0.125, 0.0625}) {
      const BackgroundMesh mesh = build_structured_mesh(h);
      const AleDiscretization disc(mesh, k, AleBlending{});
      const AleMatrices a = disc.assemble(Vec2::Zero(), Vec2::Zero());
      const auto& space = disc.space();
      const FEFunction f = interpolate(mesh, space, [&](const Vec2& x) { return Vec2(2 * M_PI * M_PI * exact(x), 0.0); });
      Eigen::VectorXd rhs = a.mass * Eigen::VectorXd(f.coeffs.col(0));
      std::vector<char> fixed(space->size());
      for (int i = 0; i < space->size(); ++i) {
        fixed[i] = space->is_dirichlet(i);
        if (fixed[i]) rhs[i] = 0.0;
      }
      SparseMatrix s = a.stiffness;
      apply_dirichlet(s, fixed);
      FEFunction u(space);
      u.coeffs.col(0) = FactoredSystem(s).solve(rhs);
      double e2 = 0.0;
      for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto c = mesh.corners(t);
        const QuadratureRule q = map_triangle_rule(reference_triangle_rule(12), c[0], c[1], c[2]);
        for (std::size_t i = 0; i < q.size(); ++i) {
          const double d = u.evaluate(mesh, t, q.points[i]).x() - exact(q.points[i]);
          e2 += q.weights[i] * d * d;
        }
      }
      err.push_back(std::sqrt(e2));
    }
    EXPECT_GE(std::log2(err[1] / err[2]), k + 0.5) << "k=" << k;
  }
}

TEST(AleSolver, ZeroGravityStaysAtRest) {
  AleConfig c = small_config(0.04);
  c.gravity = Vec2::Zero();
  const AleSolver s(c);
  const Trajectory t = s.run();
  ASSERT_EQ(t.rows.size(), 3u);
  for (const auto& r : t.rows) {
    EXPECT_EQ(r.xi, Vec2::Zero());
    EXPECT_EQ(r.center, Vec2(0.5, 0.8));
  }
}

TEST(AleSolver, FallsWithEnergyIdentity) {
  const AleSolver s(small_config(0.2));
  int steps = 0;
  s.run([&](const AleRecord& r) {
    if (r.step == 0) return;
    ++steps;
    EXPECT_LT(r.state.xi.y(), 0.0);
    EXPECT_GT(r.state.xi.y(), -r.t);
    EXPECT_NEAR(r.state.xi.x(), 0.0, 1e-10);
    EXPECT_LE(r.energy_residual, 1e-9) << "step " << r.step;
    EXPECT_LE(r.iterations, 10);
    EXPECT_GT(r.min_jacobian, 0.5);
  });
  EXPECT_EQ(steps, 10);
}

TEST(AleSolver, AgreesWithEulerianSolver) {
  AleConfig a = small_config(0.2);
  a.n_circle = 32;
  const Trajectory ta = AleSolver(a).run();
  const BackgroundMesh mesh = build_structured_mesh(0.05);
  SchemeConfig e;
  e.t_end = 0.2;
  const Trajectory te = Stepper(mesh, e).run();
  ASSERT_EQ(ta.rows.size(), te.rows.size());
  const Vec2 xa = ta.rows.back().xi, xe = te.rows.back().xi;
  EXPECT_LE((xa - xe).norm(), 0.05 * xe.norm()) << xa.transpose() << " vs " << xe.transpose();
}

TEST(AleSolver, Bdf2HasNoEnergyResidual) {
  AleConfig c = small_config(0.06);
  c.scheme = TimeScheme::kBDF2;
  const Trajectory t = AleSolver(c).run();
  EXPECT_FALSE(std::isnan(t.rows[1].energy_residual));
  EXPECT_TRUE(std::isnan(t.rows[2].energy_residual));
}

TEST(AleConfig, Validation) {
  AleConfig c;
  EXPECT_EQ(c.num_steps(), 3200);
  c.degree = 0;
  EXPECT_THROW(c.validate(), Error);
  c = AleConfig{};
  c.dt = 0.3;
  EXPECT_THROW(c.num_steps(), Error);
}
