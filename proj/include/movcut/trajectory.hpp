#pragma once

#include "movcut/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace movcut {

struct TrajectoryRow {
  int step = 0;
  double t = 0.0;
  Vec2 center{0.0, 0.0};
  Vec2 xi{0.0, 0.0};
  Vec2 force{0.0, 0.0};
  int iterations = 0;
  double energy_residual = 0.0;  // NaN where the identity does not apply
  int n_active = 0;
  int K = 0;
};

// Time history of the rigid body. Rows are ordered by time, row 0 is t = 0.
struct Trajectory {
  std::vector<TrajectoryRow> rows;

  double t_end() const { return rows.empty() ? 0.0 : rows.back().t; }
  // Piecewise linear interpolation in time; throws outside [0, t_end].
  Vec2 xi_at(double t) const;
  Vec2 center_at(double t) const;
};

// CSV with header step,t,Cx,Cy,xix,xiy,Fx,Fy,iters,energy_residual,n_active,K
// and 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& is);
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace movcut
