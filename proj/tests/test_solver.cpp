#include "movcut/solver.hpp"
#include "movcut/stepper.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <random>

using namespace movcut;

namespace {

SparseMatrix sparse(const Eigen::MatrixXd& d) {
  SparseMatrix s = d.sparseView();
  s.makeCompressed();
  return s;
}

double dense_condition(const Eigen::MatrixXd& a) {
  auto norm1 = [](const Eigen::MatrixXd& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); };
  return norm1(a) * norm1(a.inverse());
}

// Step system of the first step at h = 0.1 with a moving interface.
StepSystem moving_system(BoundaryMethod bc, const Vec2& center = {0.5, 0.8}) {
  static const BackgroundMesh mesh = build_structured_mesh(0.1);
  SchemeConfig c;
  c.bc = bc;
  c.initial.center = center;
  const Stepper stepper(mesh, c);
  StepRecord prev = stepper.initial_record();
  prev.state.xi = Vec2(0.1, -0.5);
  return assemble_step_system(mesh, c, TimeScheme::kBDF1, prev, nullptr, Vec2(0.1, -0.52));
}

}  // namespace

TEST(FactoredSystem, Identity) {
  const FactoredSystem lu(sparse(Eigen::MatrixXd::Identity(5, 5)));
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
  EXPECT_EQ((lu.solve(b) - b).norm(), 0.0);
  EXPECT_NEAR(lu.condition_estimate(), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(lu.pivot_ratio(), 1.0);
}

TEST(FactoredSystem, Permutation) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(4, 4);
  p(0, 2) = p(1, 0) = p(2, 3) = p(3, 1) = 1.0;
  const FactoredSystem lu(sparse(p));
  const Eigen::VectorXd b(Eigen::Vector4d(1, 2, 3, 4));
  EXPECT_LE((p * lu.solve(b) - b).norm(), 1e-15);
  EXPECT_LE((p.transpose() * lu.solve_transpose(b) - b).norm(), 1e-15);
}

TEST(FactoredSystem, IllConditionedDiagonal) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Identity(2, 2);
  d(1, 1) = 1e-6;
  const FactoredSystem lu(sparse(d));
  EXPECT_GE(lu.condition_estimate(), 1e6 / 10.0);
  EXPECT_LE(lu.condition_estimate(), 1e6 * 10.0);
}

TEST(FactoredSystem, SingularThrows) {
  Eigen::MatrixXd a(3, 3);
  a << 1, 2, 3, 2, 4, 6, 0, 1, 1;
  try {
    FactoredSystem lu(sparse(a));
    ADD_FAILURE() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("saddle system singular"), std::string::npos);
  }
  EXPECT_THROW(FactoredSystem(SparseMatrix(2, 3)), Error);
}

TEST(FactoredSystem, RandomSparseResidual) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 200;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = 4.0 + u(rng);
    for (int k = 0; k < 4; ++k) a(i, static_cast<int>((u(rng) + 1.0) / 2.0 * (n - 1))) += u(rng);
  }
  const FactoredSystem lu(sparse(a));
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = u(rng);
  EXPECT_LE((a * lu.solve(b) - b).norm() / b.norm(), 1e-13);
  const double est = lu.condition_estimate(), exact = dense_condition(a);
  EXPECT_LE(est, exact * (1 + 1e-10));
  EXPECT_GE(est, exact / 10.0);
}

TEST(ApplyDirichlet, UnitRowsAndColumns) {
  Eigen::MatrixXd d(3, 3);
  d << 4, 1, 2, 1, 5, 3, 2, 3, 6;
  SparseMatrix a = sparse(d);
  apply_dirichlet(a, {0, 1, 0});
  Eigen::MatrixXd expected(3, 3);
  expected << 4, 0, 2, 0, 1, 0, 2, 0, 6;
  EXPECT_EQ((Eigen::MatrixXd(a) - expected).norm(), 0.0);
  EXPECT_THROW(apply_dirichlet(a, {0, 1}), Error);
}

TEST(StepSystem, MatchesDenseBlockAssembly) {
  const StepSystem s = moving_system(BoundaryMethod::kLagrange);
  const int nv = s.num_velocity(), nq = s.multiplier->size();
  ASSERT_EQ(s.size(), nv + nq);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nv + nq, nv + nq);
  a.topLeftCorner(nv, nv) = s.time_coefficient * Eigen::MatrixXd(s.mass) + Eigen::MatrixXd(s.stiffness) +
                            s.gamma_gp * Eigen::MatrixXd(s.ghost);
  a.topRightCorner(nv, nq) = Eigen::MatrixXd(s.coupling).transpose();
  a.bottomLeftCorner(nq, nv) = Eigen::MatrixXd(s.coupling);
  a.bottomRightCorner(nq, nq) = -s.gamma_lambda * Eigen::MatrixXd(s.mult_stab);
  for (int i = 0; i < nv; ++i)
    if (s.velocity->is_dirichlet(i)) {
      a.row(i).setZero();
      a.col(i).setZero();
      a(i, i) = 1.0;
    }
  EXPECT_LE((Eigen::MatrixXd(s.matrix) - a).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(s.time_coefficient, 1.0 / 0.02);
  EXPECT_EQ(s.K, 2);
  EXPECT_DOUBLE_EQ(s.gamma_gp, 0.2);
}

TEST(StepSystem, BlocksAgreeWithIndependentAssembly) {
  static const BackgroundMesh mesh = build_structured_mesh(0.1);
  const StepSystem s = moving_system(BoundaryMethod::kLagrange);
  const SparseMatrix m = assemble_mass(mesh, *s.velocity, s.decomp, CutRuleSet(mesh, s.decomp, 6));
  const SparseMatrix k = assemble_stiffness(mesh, *s.velocity, s.decomp, CutRuleSet(mesh, s.decomp, 6));
  EXPECT_LE(Eigen::MatrixXd(m - s.mass).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE(Eigen::MatrixXd(k - s.stiffness).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StepSystem, MultiplierBlockNegativeSemidefinite) {
  const StepSystem s = moving_system(BoundaryMethod::kLagrange);
  const int nv = s.num_velocity();
  const Eigen::MatrixXd c = Eigen::MatrixXd(s.matrix).bottomRightCorner(s.size() - nv, s.size() - nv);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
  EXPECT_LE(eig.eigenvalues().maxCoeff(), 1e-14);
}

TEST(StepSystem, RandomRhsResidual) {
  for (BoundaryMethod bc : {BoundaryMethod::kLagrange, BoundaryMethod::kNitsche}) {
    const StepSystem s = moving_system(bc);
    const FactoredSystem lu(s.matrix);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd b(s.size());
    for (int i = 0; i < b.size(); ++i) b[i] = u(rng);
    EXPECT_LE((s.matrix * lu.solve(b) - b).norm() / b.norm(), 1e-10);
  }
}

TEST(StepSystem, ConditionEstimateAgainstDense) {
  const StepSystem s = moving_system(BoundaryMethod::kLagrange, {0.5123, 0.7871});
  const FactoredSystem lu(s.matrix);
  const double exact = dense_condition(Eigen::MatrixXd(s.matrix));
  EXPECT_LE(lu.condition_estimate(), exact * (1 + 1e-8));
  EXPECT_GE(lu.condition_estimate(), exact / 10.0);
}

TEST(StepSystem, SolveIsDeterministic) {
  const StepSystem s = moving_system(BoundaryMethod::kLagrange);
  const FluidSolution a = solve_step_system(s), b = solve_step_system(s);
  EXPECT_EQ(a.u1, b.u1);
  EXPECT_EQ(a.lambda1, b.lambda1);
  EXPECT_EQ(a.force_gain, b.force_gain);
  EXPECT_LE(a.residual, 1e-10);
}

TEST(StepSystem, CachedFactorsReused) {
  const StepSystem s = moving_system(BoundaryMethod::kLagrange);
  SolveCache cache;
  const FluidSolution a = solve_step_system(s, &cache);
  const FluidSolution b = solve_step_system(s, &cache);
  EXPECT_EQ(cache.factorizations, 1);
  EXPECT_LE((a.u1 - b.u1).norm(), 1e-12 * a.u1.norm());
}
