#include "movcut/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace movcut {

std::string to_string(TimeScheme s) { return s == TimeScheme::kBDF2 ? "bdf2" : "bdf1"; }
std::string to_string(BoundaryMethod b) { return b == BoundaryMethod::kNitsche ? "nitsche" : "lagrange"; }

TimeScheme parse_time_scheme(const std::string& s) {
  if (s == "bdf1") return TimeScheme::kBDF1;
  if (s == "bdf2") return TimeScheme::kBDF2;
  throw Error("unknown time scheme '" + s + "' (expected bdf1 or bdf2)");
}

BoundaryMethod parse_boundary_method(const std::string& s) {
  if (s == "lagrange") return BoundaryMethod::kLagrange;
  if (s == "nitsche") return BoundaryMethod::kNitsche;
  throw Error("unknown boundary method '" + s + "' (expected lagrange or nitsche)");
}

void SchemeConfig::validate() const {
  if (k < 2 || k > 6) throw Error("SchemeConfig: k must be in [2, 6]");
  if (!(dt > 0.0)) throw Error("SchemeConfig: dt must be positive");
  if (!(t_end > 0.0)) throw Error("SchemeConfig: t_end must be positive");
  if (!(c_delta_h > 1.0)) throw Error("SchemeConfig: c_delta_h must exceed 1");
  if (!(gamma_s > 0.0) || !(gamma_lambda > 0.0) || !(nitsche_penalty_coefficient > 0.0))
    throw Error("SchemeConfig: stabilisation parameters must be positive");
  if (!(aitken_tol > 0.0) || aitken_max_iters < 1) throw Error("SchemeConfig: bad coupling tolerance");
  num_steps();
}

int SchemeConfig::num_steps() const {
  const double n = t_end / dt;
  const double r = std::round(n);
  if (std::abs(n - r) > 1e-9 * std::max(1.0, n) || r < 1)
    throw Error("SchemeConfig: t_end is not a multiple of dt");
  return static_cast<int>(r);
}

TrajectoryRow StepRecord::row() const {
  TrajectoryRow r;
  r.step = step;
  r.t = t;
  r.center = state.center;
  r.xi = state.xi;
  r.force = force;
  r.iterations = iterations;
  r.energy_residual = energy_residual;
  r.n_active = n_active;
  r.K = K;
  return r;
}

double strip_width(const SchemeConfig& config, const Vec2& xi) {
  const double speed = xi.norm();
  if (speed == 0.0) return 0.0;
  return std::max(config.c_delta_h * speed * config.dt, 1e-12);
}

double gamma_gp(const SchemeConfig& config, int K) {
  if (K < 1) throw Error("gamma_gp: K must be >= 1");
  return config.gamma_s * K;
}

double aitken_update(const Vec2& r_prev, const Vec2& r_curr, double omega_prev) {
  const Vec2 d = r_curr - r_prev;
  const double dd = d.squaredNorm();
  if (std::sqrt(dd) < 1e-30) return omega_prev;
  const double omega = -omega_prev * r_prev.dot(d) / dd;
  return std::clamp(omega, 0.05, 2.0);
}

RigidState advance_geometry(const SchemeConfig& config, TimeScheme scheme, const RigidState& prev,
                            const RigidState* prev2, const Vec2& xi_new) {
  RigidState s = prev;
  s.xi = xi_new;
  if (scheme == TimeScheme::kBDF2) {
    if (!prev2) throw Error("advance_geometry: BDF2 needs two previous states");
    s.center = (4.0 * prev.center - prev2->center + 2.0 * config.dt * xi_new) / 3.0;
  } else {
    s.center = prev.center + config.dt * xi_new;
  }
  const double clearance = std::min({s.center.x() - s.radius, 1.0 - s.center.x() - s.radius,
                                     s.center.y() - s.radius, 1.0 - s.center.y() - s.radius});
  if (!(clearance > 0.0))
    throw Error("disk left the domain: centre (" + std::to_string(s.center.x()) + ", " +
                std::to_string(s.center.y()) + ")");
  return s;
}

Vec2 ode_update(const SchemeConfig& config, TimeScheme scheme, const Vec2& force, const Vec2& xi_prev,
                const Vec2& xi_prev2) {
  if (scheme == TimeScheme::kBDF2)
    return (4.0 * xi_prev - xi_prev2 + 2.0 * config.dt * (config.gravity + force)) / 3.0;
  return xi_prev + config.dt * (config.gravity + force);
}

Vec2 compute_force(const TriangleMesh& mesh, const FEFunction& lambda, const ActiveDecomposition& decomp,
                   const CutRuleSet& rules) {
  const Eigen::VectorXd m = interface_moments(mesh, *lambda.map, decomp, rules);
  return Vec2(m.dot(lambda.coeffs.col(0)), m.dot(lambda.coeffs.col(1)));
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_block(Triplets& trip, const SparseMatrix& a, int row0, int col0, double scale,
               const std::vector<char>& fixed_row, const std::vector<char>& fixed_col) {
  for (int j = 0; j < a.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
      const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      if ((!fixed_row.empty() && fixed_row[r]) || (!fixed_col.empty() && fixed_col[c])) continue;
      trip.emplace_back(row0 + r, col0 + c, scale * it.value());
    }
}

}  // namespace

StepSystem assemble_step_system(const BackgroundMesh& mesh, const SchemeConfig& config, TimeScheme scheme,
                                const StepRecord& prev, const StepRecord* prev2, const Vec2& xi_guess) {
  if (scheme == TimeScheme::kBDF2 && !prev2) throw Error("assemble_step_system: BDF2 needs two previous steps");
  StepSystem sys;
  sys.scheme = scheme;
  sys.dt = config.dt;
  sys.time_coefficient = scheme == TimeScheme::kBDF2 ? 1.5 / config.dt : 1.0 / config.dt;

  const RigidState state =
      advance_geometry(config, scheme, prev.state, prev2 ? &prev2->state : nullptr, xi_guess);
  sys.decomp = classify(mesh, state, strip_width(config, prev.state.xi));
  sys.K = strip_crossing_bound(sys.decomp, mesh);
  sys.gamma_gp = gamma_gp(config, sys.K);
  sys.gamma_lambda = config.gamma_lambda;
  sys.rules = CutRuleSet(mesh, sys.decomp, 2 * config.k);

  sys.velocity = build_velocity_space(mesh, sys.decomp, config.k);
  const DofMap& v = *sys.velocity;
  const int nv = v.size();
  sys.u_prev = transfer(prev.u, v, mesh, sys.decomp);
  if (scheme == TimeScheme::kBDF2) sys.u_prev2 = transfer(prev2->u, v, mesh, sys.decomp);

  sys.mass = assemble_mass(mesh, v, sys.decomp, sys.rules);
  sys.stiffness = assemble_stiffness(mesh, v, sys.decomp, sys.rules);
  sys.ghost = assemble_ghost_penalty(mesh, v, sys.decomp);

  std::vector<char> fixed(nv);
  for (int a = 0; a < nv; ++a) fixed[a] = v.is_dirichlet(a);

  SparseMatrix s = sys.time_coefficient * sys.mass + sys.stiffness + sys.gamma_gp * sys.ghost;
  int n = nv;
  if (config.bc == BoundaryMethod::kLagrange) {
    sys.multiplier = build_multiplier_space(mesh, sys.decomp, config.k - 1);
    sys.coupling = assemble_coupling_b(mesh, v, *sys.multiplier, sys.decomp, sys.rules);
    sys.mult_stab = assemble_multiplier_stab(mesh, *sys.multiplier, sys.decomp);
    sys.multiplier_moments = interface_moments(mesh, *sys.multiplier, sys.decomp, sys.rules);
    n += sys.multiplier->size();
  } else {
    StabilizationParams params;
    params.nitsche_penalty_coefficient = config.nitsche_penalty_coefficient;
    sys.nitsche = assemble_nitsche(mesh, v, sys.decomp, sys.rules, params);
    sys.flux = interface_flux_functional(mesh, v, sys.decomp, sys.rules);
    sys.velocity_moments = interface_moments(mesh, v, sys.decomp, sys.rules);
    for (int t : sys.decomp.interface_elements) sys.interface_length += sys.rules.rule(t).interface_measure();
    s += sys.nitsche.matrix;
  }

  Triplets trip;
  trip.reserve(s.nonZeros() + 2 * sys.coupling.nonZeros() + sys.mult_stab.nonZeros() + nv);
  add_block(trip, s, 0, 0, 1.0, fixed, fixed);
  for (int a = 0; a < nv; ++a)
    if (fixed[a]) trip.emplace_back(a, a, 1.0);
  if (sys.lagrange()) {
    const SparseMatrix bt = sys.coupling.transpose();
    add_block(trip, bt, 0, nv, 1.0, fixed, {});
    add_block(trip, sys.coupling, nv, 0, 1.0, {}, fixed);
    add_block(trip, sys.mult_stab, nv, nv, -sys.gamma_lambda, {}, {});
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.matrix.makeCompressed();

  // Time-derivative history terms.
  VectorCoefficients hist;
  if (scheme == TimeScheme::kBDF2)
    hist = (4.0 * sys.u_prev - sys.u_prev2) / (2.0 * config.dt);
  else
    hist = sys.u_prev / config.dt;
  sys.rhs_history = Eigen::MatrixXd::Zero(n, 2);
  for (int c = 0; c < 2; ++c) sys.rhs_history.col(c).head(nv) = sys.mass * Eigen::VectorXd(hist.col(c));
  sys.rhs_unit = Eigen::VectorXd::Zero(n);
  if (sys.lagrange())
    sys.rhs_unit.tail(n - nv) = sys.multiplier_moments;
  else
    sys.rhs_unit.head(nv) = sys.nitsche.unit_rhs;
  for (int a = 0; a < nv; ++a)
    if (fixed[a]) {
      sys.rhs_history.row(a).setZero();
      sys.rhs_unit[a] = 0.0;
    }
  return sys;
}

VectorCoefficients FluidSolution::u(const Vec2& xi) const {
  VectorCoefficients out = u0;
  out.col(0) += xi.x() * u1;
  out.col(1) += xi.y() * u1;
  return out;
}

VectorCoefficients FluidSolution::lambda(const Vec2& xi) const {
  VectorCoefficients out = lambda0;
  if (out.rows() == 0) return out;
  out.col(0) += xi.x() * lambda1;
  out.col(1) += xi.y() * lambda1;
  return out;
}

namespace {

std::vector<int> dof_layout(const StepSystem& sys) {
  std::vector<int> layout;
  layout.reserve(sys.size() + 1);
  for (int a = 0; a < sys.velocity->size(); ++a) layout.push_back(sys.velocity->background_of_active(a));
  layout.push_back(-1);
  if (sys.multiplier)
    for (int a = 0; a < sys.multiplier->size(); ++a) layout.push_back(sys.multiplier->background_of_active(a));
  return layout;
}

// x = A^{-1} b with factors of a nearby matrix; false if not converged.
bool refine_solve(const FactoredSystem& lu, const SparseMatrix& a, const Eigen::VectorXd& b, Eigen::VectorXd& x) {
  const double bn = b.norm();
  x = lu.solve(b);
  if (bn == 0.0) return true;
  for (int it = 0; it < 8; ++it) {
    const Eigen::VectorXd r = b - a * x;
    if (r.norm() <= 1e-12 * bn) return true;
    x += lu.solve(r);
  }
  return (b - a * x).norm() <= 1e-12 * bn;
}

}  // namespace

FluidSolution solve_step_system(const StepSystem& sys, SolveCache* cache) {
  const int n = sys.size();
  const int nv = sys.num_velocity();
  Eigen::MatrixXd rhs(n, 3);
  rhs.leftCols(2) = sys.rhs_history;
  rhs.col(2) = sys.rhs_unit;
  Eigen::MatrixXd x(n, 3);

  bool done = false;
  std::vector<int> layout;
  if (cache) {
    layout = dof_layout(sys);
    if (cache->lu && cache->layout == layout) {
      done = true;
      for (int c = 0; c < 3 && done; ++c) {
        Eigen::VectorXd xc;
        done = refine_solve(*cache->lu, sys.matrix, rhs.col(c), xc);
        x.col(c) = xc;
      }
    }
  }
  if (!done) {
    auto lu = std::make_unique<FactoredSystem>(sys.matrix);
    x = lu->solve(rhs);
    if (cache) {
      cache->lu = std::move(lu);
      cache->layout = std::move(layout);
      ++cache->factorizations;
    }
  }

  FluidSolution sol;
  for (int c = 0; c < 3; ++c) {
    const double bn = rhs.col(c).norm();
    if (bn > 0.0) sol.residual = std::max(sol.residual, (sys.matrix * x.col(c) - rhs.col(c)).norm() / bn);
  }
  sol.u0 = x.topLeftCorner(nv, 2);
  sol.u1 = x.col(2).head(nv);
  if (sys.lagrange()) {
    const int nq = n - nv;
    sol.lambda0 = x.bottomLeftCorner(nq, 2);
    sol.lambda1 = x.col(2).tail(nq);
    sol.force0 = Vec2(sys.multiplier_moments.dot(sol.lambda0.col(0)), sys.multiplier_moments.dot(sol.lambda0.col(1)));
    sol.force_gain = sys.multiplier_moments.dot(sol.lambda1);
  } else {
    // F = int_Gamma -dn u + sigma/h (u - xi)
    const double p = sys.nitsche.penalty;
    for (int c = 0; c < 2; ++c) {
      const Eigen::VectorXd uc = sol.u0.col(c);
      sol.force0[c] = sys.flux.dot(uc) + p * sys.velocity_moments.dot(uc);
    }
    sol.force_gain = sys.flux.dot(sol.u1) + p * (sys.velocity_moments.dot(sol.u1) - sys.interface_length);
  }
  return sol;
}

double energy_identity_residual(const StepSystem& sys, const SchemeConfig& config, const VectorCoefficients& u,
                                const VectorCoefficients& lambda, const Vec2& xi, const Vec2& xi_prev) {
  if (sys.scheme != TimeScheme::kBDF1 || !sys.lagrange()) return std::numeric_limits<double>::quiet_NaN();
  const double dt = config.dt;
  const VectorCoefficients du = u - sys.u_prev;
  const double terms[] = {
      quadratic_form(sys.mass, u),
      quadratic_form(sys.mass, du),
      -quadratic_form(sys.mass, sys.u_prev),
      xi.squaredNorm(),
      (xi - xi_prev).squaredNorm(),
      -xi_prev.squaredNorm(),
      2.0 * dt * quadratic_form(sys.stiffness, u),
      2.0 * dt * sys.gamma_gp * quadratic_form(sys.ghost, u),
      2.0 * dt * sys.gamma_lambda * quadratic_form(sys.mult_stab, lambda),
      -2.0 * dt * config.gravity.dot(xi),
  };
  double sum = 0.0, scale = 0.0;
  for (double t : terms) {
    sum += t;
    scale = std::max(scale, std::abs(t));
  }
  return scale > 0.0 ? std::abs(sum) / scale : 0.0;
}

Stepper::Stepper(const BackgroundMesh& mesh, SchemeConfig config) : mesh_(mesh), config_(std::move(config)) {
  config_.validate();
}

StepRecord Stepper::initial_record() const {
  std::vector<int> all(mesh_.num_triangles());
  for (int t = 0; t < mesh_.num_triangles(); ++t) all[t] = t;
  StepRecord r;
  r.state = config_.initial;
  r.u = FEFunction(std::make_shared<DofMap>(mesh_, std::move(all), config_.k, true));
  r.energy_residual = 0.0;
  return r;
}

StepRecord Stepper::step(const StepRecord& prev, const StepRecord* prev2) const {
  const TimeScheme scheme = config_.scheme == TimeScheme::kBDF2 && prev2 ? TimeScheme::kBDF2 : TimeScheme::kBDF1;
  const Vec2 xi1 = prev.state.xi;
  const Vec2 xi2 = prev2 ? prev2->state.xi : Vec2::Zero();

  Vec2 guess = xi1;
  Vec2 r_prev = Vec2::Zero();
  double omega = 1.0;
  int iterations = 0;
  bool converged = false;
  StepSystem sys;
  FluidSolution sol;
  SolveCache cache;
  while (iterations < config_.aitken_max_iters) {
    ++iterations;
    sys = assemble_step_system(mesh_, config_, scheme, prev, prev2, guess);
    sol = solve_step_system(sys, &cache);
    const Vec2 r = ode_update(config_, scheme, sol.force(guess), xi1, xi2) - guess;
    if (iterations > 1) omega = aitken_update(r_prev, r, omega);
    const Vec2 relaxed = guess + omega * r;
    if ((omega * r).norm() <= config_.aitken_tol * std::max(relaxed.norm(), 1e-12)) {
      converged = true;
      break;
    }
    r_prev = r;
    guess = relaxed;
  }
  if (!converged)
    throw Error("coupling diverged: no convergence in " + std::to_string(config_.aitken_max_iters) +
                " iterations at step " + std::to_string(prev.step + 1));

  // For the geometry of the last iterate the fluid response is affine in xi,
  // so the coupled equations can be closed exactly.
  const double dt = config_.dt;
  Vec2 xi;
  if (scheme == TimeScheme::kBDF2)
    xi = (4.0 * xi1 - xi2 + 2.0 * dt * (config_.gravity + sol.force0)) / (3.0 * (1.0 - 2.0 / 3.0 * dt * sol.force_gain));
  else
    xi = (xi1 + dt * (config_.gravity + sol.force0)) / (1.0 - dt * sol.force_gain);

  StepRecord rec;
  rec.step = prev.step + 1;
  rec.t = rec.step * dt;
  rec.state = advance_geometry(config_, scheme, prev.state, prev2 ? &prev2->state : nullptr, xi);
  rec.u = FEFunction(sys.velocity);
  rec.u.coeffs = sol.u(xi);
  if (sys.lagrange()) {
    rec.lambda = FEFunction(sys.multiplier);
    rec.lambda.coeffs = sol.lambda(xi);
  }
  rec.force = sol.force(xi);
  rec.iterations = iterations;
  rec.energy_residual = energy_identity_residual(sys, config_, rec.u.coeffs, rec.lambda.coeffs, xi, xi1);
  rec.solve_residual = sol.residual;
  rec.delta_h = sys.decomp.delta_h;
  rec.n_active = static_cast<int>(sys.decomp.active_elements.size());
  rec.K = sys.K;
  return rec;
}

Trajectory Stepper::run(const std::function<void(const StepRecord&)>& on_step) const {
  Trajectory traj;
  StepRecord prev2;
  StepRecord prev = initial_record();
  bool have_prev2 = false;
  traj.rows.push_back(prev.row());
  if (on_step) on_step(prev);
  const int n = config_.num_steps();
  for (int i = 0; i < n; ++i) {
    StepRecord next = step(prev, have_prev2 ? &prev2 : nullptr);
    traj.rows.push_back(next.row());
    if (on_step) on_step(next);
    prev2 = std::move(prev);
    prev = std::move(next);
    have_prev2 = true;
  }
  return traj;
}

}  // namespace movcut
