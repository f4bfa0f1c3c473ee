#pragma once

#include "movcut/solver.hpp"
#include "movcut/trajectory.hpp"

#include <functional>
#include <optional>

namespace movcut {

enum class TimeScheme { kBDF1, kBDF2 };
enum class BoundaryMethod { kLagrange, kNitsche };

std::string to_string(TimeScheme s);
std::string to_string(BoundaryMethod b);
TimeScheme parse_time_scheme(const std::string& s);
BoundaryMethod parse_boundary_method(const std::string& s);

struct SchemeConfig {
  int k = 2;
  double dt = 1.0 / 50.0;
  double t_end = 1.0;
  TimeScheme scheme = TimeScheme::kBDF1;
  BoundaryMethod bc = BoundaryMethod::kLagrange;
  Vec2 gravity{0.0, -1.0};
  double c_delta_h = 2.0;
  double gamma_s = 0.1;
  double gamma_lambda = 0.01;
  double nitsche_penalty_coefficient = 40.0;
  double aitken_tol = 1e-8;
  int aitken_max_iters = 25;
  RigidState initial;  // C(0) = (0.5, 0.8), r = 0.1, xi = 0

  // Throws Error on inconsistent values.
  void validate() const;
  // Number of steps to t_end; t_end must be a multiple of dt.
  int num_steps() const;
  // c_delta_h = 2 for BDF1, 4 for BDF2.
  static double default_c_delta(TimeScheme s) { return s == TimeScheme::kBDF2 ? 4.0 : 2.0; }
};

struct StepRecord {
  int step = 0;
  double t = 0.0;
  RigidState state;
  FEFunction u;
  FEFunction lambda;  // empty map in Nitsche mode
  Vec2 force{0.0, 0.0};
  int iterations = 0;
  double energy_residual = 0.0;
  double solve_residual = 0.0;
  double delta_h = 0.0;
  int n_active = 0;
  int K = 0;

  TrajectoryRow row() const;
};

// delta_h = c_delta_h * |xi| * dt, at least 1e-12 unless xi = 0.
double strip_width(const SchemeConfig& config, const Vec2& xi);
double gamma_gp(const SchemeConfig& config, int K);

// omega_next = -omega_prev <r_prev, r_curr - r_prev> / |r_curr - r_prev|^2,
// clamped to [0.05, 2]; omega_prev is kept when |r_curr - r_prev| < 1e-30.
double aitken_update(const Vec2& r_prev, const Vec2& r_curr, double omega_prev);

// BDF1: C^{n-1} + dt xi; BDF2: (4 C^{n-1} - C^{n-2} + 2 dt xi)/3.
// `prev2` is ignored for BDF1. Throws if the disk leaves the unit square.
RigidState advance_geometry(const SchemeConfig& config, TimeScheme scheme, const RigidState& prev,
                            const RigidState* prev2, const Vec2& xi_new);
// BDF1: xi^{n-1} + dt (g + F); BDF2: (4 xi^{n-1} - xi^{n-2} + 2 dt (g + F))/3.
Vec2 ode_update(const SchemeConfig& config, TimeScheme scheme, const Vec2& force, const Vec2& xi_prev,
                const Vec2& xi_prev2);

// int_Gamma lambda, componentwise.
Vec2 compute_force(const TriangleMesh& mesh, const FEFunction& lambda, const ActiveDecomposition& decomp,
                   const CutRuleSet& rules);

// Fully assembled linear system of one step for a fixed geometry. Unknowns are
// ordered (u, lambda) per velocity component (Lagrange) or u (Nitsche); the
// two components share the matrix. The right-hand side for interface velocity
// xi is rhs_history + xi_c * rhs_unit in component c.
struct StepSystem {
  TimeScheme scheme = TimeScheme::kBDF1;
  double dt = 0.0;
  double time_coefficient = 0.0;  // 1/dt or 3/(2 dt)
  ActiveDecomposition decomp;
  CutRuleSet rules;
  int K = 1;
  double gamma_gp = 0.0;
  double gamma_lambda = 0.0;
  std::shared_ptr<const DofMap> velocity;
  std::shared_ptr<const DofMap> multiplier;  // null in Nitsche mode

  SparseMatrix mass, stiffness, ghost, coupling, mult_stab;
  Eigen::VectorXd multiplier_moments;  // int_Gamma psi_i
  NitscheTerms nitsche;
  Eigen::VectorXd flux;                // int_Gamma -dn phi_j
  Eigen::VectorXd velocity_moments;    // int_Gamma phi_j
  double interface_length = 0.0;

  VectorCoefficients u_prev, u_prev2;  // transferred onto `velocity`
  SparseMatrix matrix;                 // with unit rows for box DOFs
  Eigen::MatrixXd rhs_history;         // n x 2
  Eigen::VectorXd rhs_unit;            // n

  bool lagrange() const { return multiplier != nullptr; }
  int num_velocity() const { return velocity->size(); }
  int size() const { return static_cast<int>(matrix.rows()); }
};

// Builds the system of step n for the geometry reached with xi_guess. `prev2`
// is required for BDF2. The strip width uses the previous accepted velocity.
StepSystem assemble_step_system(const BackgroundMesh& mesh, const SchemeConfig& config, TimeScheme scheme,
                                const StepRecord& prev, const StepRecord* prev2, const Vec2& xi_guess);

// Solution of a StepSystem, affine in the interface velocity:
// u = u0 + xi (x) u1, lambda = lambda0 + xi (x) lambda1, F = F0 + G xi.
struct FluidSolution {
  VectorCoefficients u0, lambda0;
  Eigen::VectorXd u1, lambda1;
  Vec2 force0{0.0, 0.0};
  double force_gain = 0.0;  // G
  double residual = 0.0;    // max relative residual of the solves

  VectorCoefficients u(const Vec2& xi) const;
  VectorCoefficients lambda(const Vec2& xi) const;
  Vec2 force(const Vec2& xi) const { return force0 + force_gain * xi; }
};

// Factorisation kept between the coupling iterations of one step. When the
// next system has the same DOF layout, its solves reuse the old factors inside
// an iterative refinement loop and only refactor if that fails to converge.
struct SolveCache {
  std::unique_ptr<FactoredSystem> lu;
  std::vector<int> layout;
  int factorizations = 0;
};

FluidSolution solve_step_system(const StepSystem& system, SolveCache* cache = nullptr);

// |LHS - RHS| of the BDF1 energy identity relative to its largest term.
// Returns NaN for BDF2 or Nitsche systems.
double energy_identity_residual(const StepSystem& system, const SchemeConfig& config, const VectorCoefficients& u,
                                const VectorCoefficients& lambda, const Vec2& xi, const Vec2& xi_prev);

class Stepper {
public:
  Stepper(const BackgroundMesh& mesh, SchemeConfig config);

  const SchemeConfig& config() const { return config_; }
  const BackgroundMesh& mesh() const { return mesh_; }

  // Rest state at t = 0; u = 0 on the whole background mesh.
  StepRecord initial_record() const;
  // Advances by one step. `prev2` is null for the first step; BDF2 then takes
  // one BDF1 step.
  StepRecord step(const StepRecord& prev, const StepRecord* prev2) const;
  // Runs to t_end; the callback sees every accepted record.
  Trajectory run(const std::function<void(const StepRecord&)>& on_step = {}) const;

private:
  const BackgroundMesh& mesh_;
  SchemeConfig config_;
};

}  // namespace movcut
