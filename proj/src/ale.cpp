#include "movcut/ale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace movcut {

namespace {

constexpr double kHalfBlock = 0.2;

// Quintic smoothstep on [0, 1] and its derivative.
double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}
double smoothstep_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double s = t * (1.0 - t);
  return 30.0 * s * s;
}

// 1 on [c - r, c + r], 0 at 0 and 1.
double cutoff(double x, double c, double r) {
  if (x < c - r) return smoothstep(x / (c - r));
  if (x > c + r) return smoothstep((1.0 - x) / (1.0 - c - r));
  return 1.0;
}
double cutoff_derivative(double x, double c, double r) {
  if (x < c - r) return smoothstep_derivative(x / (c - r)) / (c - r);
  if (x > c + r) return -smoothstep_derivative((1.0 - x) / (1.0 - c - r)) / (1.0 - c - r);
  return 0.0;
}

bool near(double a, double b) { return std::abs(a - b) < 1e-12; }

}  // namespace

FittedMesh build_fitted_mesh(int n_circle, const RigidState& initial) {
  if (n_circle < 16 || n_circle % 16 != 0) throw Error("build_fitted_mesh: n_circle must be a positive multiple of 16");
  if (!near(initial.center.x(), 0.5) || !near(initial.center.y(), 0.8) || !near(initial.radius, 0.1))
    throw Error("build_fitted_mesh: only the default initial disk is supported");
  const Vec2 c = initial.center;
  const double r = initial.radius;
  const int m = n_circle / 4;
  const double s = 2.0 * kHalfBlock / m;
  const int n = static_cast<int>(std::lround(1.0 / s));
  const int i0 = static_cast<int>(std::lround((c.x() - kHalfBlock) / s));
  const int i1 = i0 + m;
  const int j0 = static_cast<int>(std::lround((c.y() - kHalfBlock) / s));
  const int j1 = j0 + m;

  std::vector<Vec2> verts;
  std::vector<std::array<int, 3>> tris;
  auto strictly_inside_block = [&](int i, int j) { return i > i0 && i < i1 && j > j0 && j < j1; };

  std::vector<int> grid(static_cast<std::size_t>(n + 1) * (n + 1), -1);
  auto gid = [&](int i, int j) -> int& { return grid[static_cast<std::size_t>(j) * (n + 1) + i]; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      if (!strictly_inside_block(i, j)) {
        gid(i, j) = static_cast<int>(verts.size());
        verts.emplace_back(i * s, j * s);
      }

  auto add_quad = [&](int a, int b, int cc, int d, bool flip) {
    // a b cc d counter-clockwise
    if (flip) {
      tris.push_back({a, b, d});
      tris.push_back({b, cc, d});
    } else {
      tris.push_back({a, b, cc});
      tris.push_back({a, cc, d});
    }
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (i >= i0 && i < i1 && j >= j0 && j < j1) continue;
      add_quad(gid(i, j), gid(i + 1, j), gid(i + 1, j + 1), gid(i, j + 1), (i + j) % 2 == 1);
    }

  // Block boundary walked counter-clockwise from the lower-right corner, so
  // that point p sits at the same angle index as circle point p.
  const int np = 4 * m;
  std::vector<int> outer(np);
  for (int p = 0; p < np; ++p) {
    const int side = p / m, q = p % m;
    int i = 0, j = 0;
    switch (side) {
      case 0: i = i1; j = j0 + q; break;
      case 1: i = i1 - q; j = j1; break;
      case 2: i = i0; j = j1 - q; break;
      default: i = i0 + q; j = j0; break;
    }
    outer[p] = gid(i, j);
  }

  const double mean_spacing = 0.5 * (s + 2.0 * M_PI * r / np);
  const int layers = std::max(2, static_cast<int>(std::ceil(kHalfBlock * 0.5 / mean_spacing)));
  std::vector<std::vector<int>> ring(layers + 1, std::vector<int>(np));
  const int first_circle = static_cast<int>(verts.size());
  for (int l = 0; l < layers; ++l)
    for (int p = 0; p < np; ++p) {
      const double theta = -0.25 * M_PI + 2.0 * M_PI * p / np;
      const Vec2 on_circle = c + r * Vec2(std::cos(theta), std::sin(theta));
      const double w = static_cast<double>(l) / layers;
      ring[l][p] = static_cast<int>(verts.size());
      verts.push_back((1.0 - w) * on_circle + w * verts[outer[p]]);
    }
  ring[layers] = outer;
  for (int l = 0; l < layers; ++l)
    for (int p = 0; p < np; ++p) {
      const int q = (p + 1) % np;
      // Inner edge runs counter-clockwise about the disk, so the quad
      // (inner p, outer p, outer q, inner q) is counter-clockwise.
      add_quad(ring[l][p], ring[l + 1][p], ring[l + 1][q], ring[l][q], (p + l) % 2 == 1);
    }

  FittedMesh out;
  out.n_circle = n_circle;
  out.spacing = s;
  out.on_circle.assign(verts.size(), 0);
  for (int p = 0; p < np; ++p) out.on_circle[first_circle + p] = 1;
  out.on_box.assign(verts.size(), 0);
  for (std::size_t v = 0; v < verts.size(); ++v) {
    const Vec2& x = verts[v];
    out.on_box[v] = x.x() < 1e-12 || x.x() > 1.0 - 1e-12 || x.y() < 1e-12 || x.y() > 1.0 - 1e-12;
  }
  for (const auto& t : tris)
    if (signed_area(verts[t[0]], verts[t[1]], verts[t[2]]) <= 0.0) throw Error("build_fitted_mesh: inverted element");
  out.mesh = TriangleMesh(std::move(verts), std::move(tris));
  return out;
}

double AleBlending::value(const Vec2& x) const {
  return cutoff(x.x(), center.x(), radius) * cutoff(x.y(), center.y(), radius);
}

Vec2 AleBlending::gradient(const Vec2& x) const {
  const double fx = cutoff(x.x(), center.x(), radius), fy = cutoff(x.y(), center.y(), radius);
  return {cutoff_derivative(x.x(), center.x(), radius) * fy, fx * cutoff_derivative(x.y(), center.y(), radius)};
}

AleDiscretization::AleDiscretization(const TriangleMesh& mesh, int degree, AleBlending blending)
    : mesh_(mesh), degree_(degree), blending_(blending) {
  if (degree < 1 || degree > 6) throw Error("AleDiscretization: degree must be in [1, 6]");
  std::vector<int> all(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) all[t] = t;
  space_ = std::make_shared<DofMap>(mesh, std::move(all), degree, true);
  ref_rule_ = reference_triangle_rule(2 * degree + 4);
  const auto& basis = LagrangeBasis::get(degree);
  ref_values_.resize(static_cast<Eigen::Index>(ref_rule_.size()), basis.size());
  for (std::size_t q = 0; q < ref_rule_.size(); ++q) {
    ref_values_.row(static_cast<Eigen::Index>(q)) = basis.values(ref_rule_.points[q]).transpose();
    ref_grads_.push_back(basis.gradients(ref_rule_.points[q]));
  }
}

AleMatrices AleDiscretization::assemble(const Vec2& d, const Vec2& w) const {
  using Triplet = Eigen::Triplet<double>;
  const int nb = space_->dofs_per_element();
  const int n = space_->size();
  std::vector<Triplet> tm, tk, tc;
  const std::size_t reserve = static_cast<std::size_t>(mesh_.num_triangles()) * nb * nb;
  tm.reserve(reserve);
  tk.reserve(reserve);
  tc.reserve(reserve);
  AleMatrices out;
  double min_j = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd me(nb, nb), ke(nb, nb), ce(nb, nb);
  for (int t = 0; t < mesh_.num_triangles(); ++t) {
    const AffineMap map(mesh_.corners(t));
    me.setZero();
    ke.setZero();
    ce.setZero();
    for (std::size_t q = 0; q < ref_rule_.size(); ++q) {
      const Vec2 x = map.to_physical(ref_rule_.points[q]);
      const double chi = blending_.value(x);
      const Vec2 gchi = blending_.gradient(x);
      const double jac = 1.0 + d.dot(gchi);
      min_j = std::min(min_j, jac);
      if (jac < 0.1) {
        throw Error("mesh tangling: min Jacobian " + std::to_string(jac) + " at |d| = " + std::to_string(d.norm()));
      }
      const double wq = ref_rule_.weights[q] * std::abs(map.det) * jac;
      const auto phi = ref_values_.row(static_cast<Eigen::Index>(q)).transpose();
      const Eigen::Matrix<double, Eigen::Dynamic, 2> gref = map.physical_gradients(ref_grads_[q]);
      // F^{-T} g = g - grad(chi) (d . g) / J
      const Eigen::VectorXd dg = gref * d;
      Eigen::Matrix<double, Eigen::Dynamic, 2> g = gref;
      g.col(0) -= dg * (gchi.x() / jac);
      g.col(1) -= dg * (gchi.y() / jac);
      const Eigen::VectorXd adv = g * (chi * w);
      me.noalias() += wq * phi * phi.transpose();
      ke.noalias() += wq * g * g.transpose();
      ce.noalias() += wq * phi * adv.transpose();
    }
    const int* dofs = space_->element_dofs(t);
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j) {
        tm.emplace_back(dofs[i], dofs[j], me(i, j));
        tk.emplace_back(dofs[i], dofs[j], ke(i, j));
        tc.emplace_back(dofs[i], dofs[j], ce(i, j));
      }
  }
  out.mass.resize(n, n);
  out.mass.setFromTriplets(tm.begin(), tm.end());
  out.stiffness.resize(n, n);
  out.stiffness.setFromTriplets(tk.begin(), tk.end());
  out.convection.resize(n, n);
  out.convection.setFromTriplets(tc.begin(), tc.end());
  out.min_jacobian = min_j;
  return out;
}

void AleConfig::validate() const {
  if (degree < 1 || degree > 6) throw Error("AleConfig: degree must be in [1, 6]");
  if (!(dt > 0.0) || !(t_end > 0.0)) throw Error("AleConfig: dt and t_end must be positive");
  if (!(aitken_tol > 0.0) || aitken_max_iters < 1) throw Error("AleConfig: bad coupling tolerance");
  num_steps();
}

int AleConfig::num_steps() const {
  const double n = t_end / dt;
  const double r = std::round(n);
  if (std::abs(n - r) > 1e-9 * std::max(1.0, n) || r < 1) throw Error("AleConfig: t_end is not a multiple of dt");
  return static_cast<int>(r);
}

TrajectoryRow AleRecord::row() const {
  TrajectoryRow r;
  r.step = step;
  r.t = t;
  r.center = state.center;
  r.xi = state.xi;
  r.force = force;
  r.iterations = iterations;
  r.energy_residual = energy_residual;
  r.n_active = static_cast<int>(u.rows());
  r.K = 0;
  return r;
}

AleSolver::AleSolver(AleConfig config) : config_(std::move(config)) {
  config_.validate();
  fitted_ = build_fitted_mesh(config_.n_circle, config_.initial);
  AleBlending blending;
  blending.center = config_.initial.center;
  blending.radius = config_.initial.radius;
  disc_ = std::make_unique<AleDiscretization>(fitted_.mesh, config_.degree, blending);

  const DofMap& space = *disc_->space();
  const TriangleMesh& mesh = fitted_.mesh;
  const int k = config_.degree;
  circle_dof_.assign(space.size(), 0);
  box_dof_.assign(space.size(), 0);
  for (int a = 0; a < space.size(); ++a) box_dof_[a] = space.is_dirichlet(a);
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (fitted_.on_circle[v]) circle_dof_[space.active_of_background(v)] = 1;
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const auto& fv = mesh.facet(f).vertices;
    if (!fitted_.on_circle[fv[0]] || !fitted_.on_circle[fv[1]]) continue;
    for (int i = 0; i < k - 1; ++i) circle_dof_[space.active_of_background(mesh.num_vertices() + f * (k - 1) + i)] = 1;
  }
}

AleRecord AleSolver::initial_record() const {
  AleRecord rec;
  rec.state = config_.initial;
  rec.u = VectorCoefficients::Zero(disc_->space()->size(), 2);
  return rec;
}

namespace {

RigidState ale_advance(TimeScheme scheme, double dt, const RigidState& prev, const RigidState* prev2, const Vec2& xi) {
  RigidState next = prev;
  next.xi = xi;
  if (scheme == TimeScheme::kBDF2)
    next.center = (4.0 * prev.center - prev2->center + 2.0 * dt * xi) / 3.0;
  else
    next.center = prev.center + dt * xi;
  return next;
}

struct AleFluid {
  SparseMatrix full;
  Eigen::MatrixXd history;  // n x 2
  VectorCoefficients u0;
  Eigen::VectorXd u1;
  Vec2 force0{0.0, 0.0};
  double force_gain = 0.0;
  AleMatrices mats;
};

}  // namespace

AleRecord AleSolver::step(const AleRecord& prev, const AleRecord* prev2) const {
  const TimeScheme scheme = config_.scheme == TimeScheme::kBDF2 && prev2 ? TimeScheme::kBDF2 : TimeScheme::kBDF1;
  const double dt = config_.dt;
  const Vec2 xi1 = prev.state.xi;
  const Vec2 xi2 = prev2 ? prev2->state.xi : Vec2::Zero();
  const double ct = scheme == TimeScheme::kBDF2 ? 1.5 / dt : 1.0 / dt;
  const int n = disc_->space()->size();
  std::vector<char> fixed(n);
  Eigen::VectorXd circle = Eigen::VectorXd::Zero(n);
  for (int a = 0; a < n; ++a) {
    fixed[a] = circle_dof_[a] || box_dof_[a];
    if (circle_dof_[a]) circle[a] = 1.0;
  }

  auto solve_fluid = [&](const Vec2& guess) {
    AleFluid f;
    const RigidState st = ale_advance(scheme, dt, prev.state, prev2 ? &prev2->state : nullptr, guess);
    f.mats = disc_->assemble(st.center - config_.initial.center, guess);
    f.full = ct * f.mats.mass - f.mats.convection + f.mats.stiffness;
    if (scheme == TimeScheme::kBDF2)
      f.history = f.mats.mass * (4.0 * prev.u - prev2->u) / (2.0 * dt);
    else
      f.history = f.mats.mass * prev.u / dt;

    SparseMatrix a = f.full;
    apply_dirichlet(a, fixed);
    Eigen::MatrixXd rhs(n, 3);
    rhs.leftCols(2) = f.history;
    rhs.col(2) = -(f.full * circle);
    for (int i = 0; i < n; ++i)
      if (fixed[i]) rhs.row(i) << 0.0, 0.0, circle[i];
    const FactoredSystem lu(a);
    const Eigen::MatrixXd x = lu.solve(rhs);
    f.u0 = x.leftCols(2);
    f.u1 = x.col(2);
    // F_c = -R(u_c)[v_Gamma], v_Gamma the discrete lift of 1 on the circle.
    for (int c = 0; c < 2; ++c) f.force0[c] = -circle.dot(f.full * x.col(c) - f.history.col(c));
    f.force_gain = -circle.dot(f.full * f.u1);
    return f;
  };

  Vec2 guess = xi1;
  Vec2 r_prev = Vec2::Zero();
  double omega = 1.0;
  int iterations = 0;
  bool converged = false;
  AleFluid fluid;
  while (iterations < config_.aitken_max_iters) {
    ++iterations;
    fluid = solve_fluid(guess);
    const Vec2 force = fluid.force0 + fluid.force_gain * guess;
    const Vec2 ode = scheme == TimeScheme::kBDF2 ? Vec2((4.0 * xi1 - xi2 + 2.0 * dt * (config_.gravity + force)) / 3.0)
                                                 : Vec2(xi1 + dt * (config_.gravity + force));
    const Vec2 r = ode - guess;
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

  Vec2 xi;
  if (scheme == TimeScheme::kBDF2)
    xi = (4.0 * xi1 - xi2 + 2.0 * dt * (config_.gravity + fluid.force0)) / (3.0 * (1.0 - 2.0 / 3.0 * dt * fluid.force_gain));
  else
    xi = (xi1 + dt * (config_.gravity + fluid.force0)) / (1.0 - dt * fluid.force_gain);

  AleRecord rec;
  rec.step = prev.step + 1;
  rec.t = rec.step * dt;
  rec.state = ale_advance(scheme, dt, prev.state, prev2 ? &prev2->state : nullptr, xi);
  rec.u = fluid.u0;
  rec.u.col(0) += xi.x() * fluid.u1;
  rec.u.col(1) += xi.y() * fluid.u1;
  rec.force = fluid.force0 + fluid.force_gain * xi;
  rec.iterations = iterations;
  rec.min_jacobian = fluid.mats.min_jacobian;

  rec.energy_residual = std::numeric_limits<double>::quiet_NaN();
  if (scheme == TimeScheme::kBDF1) {
    // |u|^2 + |u - u_old|^2 - |u_old|^2 + 2 dt (a(u,u) - c(u,u))
    //   + |xi|^2 + |xi - xi_old|^2 - |xi_old|^2 - 2 dt g.xi = 0, with J-weighted norms.
    double lhs = 0.0, scale = 0.0;
    auto add = [&](double v) {
      lhs += v;
      scale = std::max(scale, std::abs(v));
    };
    const SparseMatrix& m = fluid.mats.mass;
    for (int c = 0; c < 2; ++c) {
      const Eigen::VectorXd u = rec.u.col(c), uo = prev.u.col(c), du = u - uo;
      add(u.dot(m * u));
      add(du.dot(m * du));
      add(-uo.dot(m * uo));
      add(2.0 * dt * u.dot(fluid.mats.stiffness * u));
      add(-2.0 * dt * u.dot(fluid.mats.convection * u));
    }
    add(xi.squaredNorm());
    add((xi - xi1).squaredNorm());
    add(-xi1.squaredNorm());
    add(-2.0 * dt * config_.gravity.dot(xi));
    rec.energy_residual = scale > 0.0 ? std::abs(lhs) / scale : 0.0;
  }
  return rec;
}

Trajectory AleSolver::run(const std::function<void(const AleRecord&)>& on_step) const {
  Trajectory traj;
  AleRecord prev2;
  AleRecord prev = initial_record();
  bool have_prev2 = false;
  traj.rows.push_back(prev.row());
  if (on_step) on_step(prev);
  const int steps = config_.num_steps();
  for (int i = 0; i < steps; ++i) {
    AleRecord next = step(prev, have_prev2 ? &prev2 : nullptr);
    traj.rows.push_back(next.row());
    if (on_step) on_step(next);
    prev2 = std::move(prev);
    prev = std::move(next);
    have_prev2 = true;
  }
  return traj;
}

}  // namespace movcut
