#include "movcut/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace movcut {

namespace {

constexpr const char* kHeader = "step,t,Cx,Cy,xix,xiy,Fx,Fy,iters,energy_residual,n_active,K";

template <class Get>
Vec2 interpolate_rows(const std::vector<TrajectoryRow>& rows, double t, Get get) {
  if (rows.empty()) throw Error("trajectory is empty");
  const double tol = 1e-12 * std::max(1.0, std::abs(rows.back().t));
  if (t < rows.front().t - tol || t > rows.back().t + tol)
    throw Error("time " + std::to_string(t) + " outside the trajectory horizon [" + std::to_string(rows.front().t) +
                ", " + std::to_string(rows.back().t) + "]");
  auto it = std::lower_bound(rows.begin(), rows.end(), t, [](const TrajectoryRow& r, double s) { return r.t < s; });
  if (it == rows.begin()) return get(*it);
  if (it == rows.end()) return get(rows.back());
  const TrajectoryRow& b = *it;
  const TrajectoryRow& a = *(it - 1);
  const double s = (t - a.t) / (b.t - a.t);
  return (1.0 - s) * get(a) + s * get(b);
}

double parse_double(const std::string& field) {
  if (field == "nan" || field == "-nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(field, &used);
  if (used != field.size()) throw Error("trajectory CSV: bad number '" + field + "'");
  return v;
}

}  // namespace

Vec2 Trajectory::xi_at(double t) const {
  return interpolate_rows(rows, t, [](const TrajectoryRow& r) { return r.xi; });
}

Vec2 Trajectory::center_at(double t) const {
  return interpolate_rows(rows, t, [](const TrajectoryRow& r) { return r.center; });
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << kHeader << '\n' << std::setprecision(17);
  for (const auto& r : traj.rows) {
    os << r.step << ',' << r.t << ',' << r.center.x() << ',' << r.center.y() << ',' << r.xi.x() << ',' << r.xi.y()
       << ',' << r.force.x() << ',' << r.force.y() << ',' << r.iterations << ',';
    if (std::isnan(r.energy_residual))
      os << "nan";
    else
      os << r.energy_residual;
    os << ',' << r.n_active << ',' << r.K << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  write_trajectory_csv(os, traj);
}

Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kHeader) throw Error("trajectory CSV: unexpected header '" + line + "'");
  Trajectory traj;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 12) throw Error("trajectory CSV: expected 12 fields, got " + std::to_string(f.size()));
    TrajectoryRow r;
    r.step = std::stoi(f[0]);
    r.t = parse_double(f[1]);
    r.center = Vec2(parse_double(f[2]), parse_double(f[3]));
    r.xi = Vec2(parse_double(f[4]), parse_double(f[5]));
    r.force = Vec2(parse_double(f[6]), parse_double(f[7]));
    r.iterations = std::stoi(f[8]);
    r.energy_residual = parse_double(f[9]);
    r.n_active = std::stoi(f[10]);
    r.K = std::stoi(f[11]);
    traj.rows.push_back(r);
  }
  return traj;
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path);
  return read_trajectory_csv(is);
}

}  // namespace movcut
