#pragma once

#include "movcut/ale.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace movcut {

enum class ReferenceMode { kSelf, kAle };

std::string to_string(ReferenceMode m);
ReferenceMode parse_reference_mode(const std::string& s);

struct StudyConfig {
  double h0 = 0.1;
  std::vector<int> lx{0, 1, 2, 3};
  double dt0 = 1.0 / 50.0;
  std::vector<int> lt{0, 1, 2, 3, 4};
  SchemeConfig scheme;  // dt is overwritten per cell
  std::string out_dir;  // empty: nothing written
  std::string cache_dir;  // empty: no trajectory cache

  ReferenceMode reference = ReferenceMode::kSelf;
  // Self reference: Eulerian BDF2 (Lagrange, c_delta_h = 4) on level
  // reference_lx (default: finest Lx) with dt = dt_min / reference_dt_divisor.
  int reference_lx = -1;
  int reference_dt_divisor = 4;
  int ale_degree = 4;
  int ale_n_circle = 128;

  bool full_grid_rates = false;

  double h(int level) const;
  double dt(int level) const;
  double reference_dt() const;
  int resolved_reference_lx() const;
  void validate() const;
};

struct ErrorRow {
  int Lx = 0;
  int Lt = 0;
  double h = 0.0;
  double dt = 0.0;
  double err_velocity = 0.0;
  double err_position = 0.0;
  std::optional<double> observed_rate_t;
  std::optional<double> observed_rate_x;
  bool failed = false;
  std::string message;  // failure reason
};

// sqrt(sum_n dt_n |ref(t_n) - traj_n|^2) over the steps n >= 1, for xi and C.
// Throws when the horizons differ.
std::pair<double, double> spacetime_error(const Trajectory& traj, const Trajectory& ref);

// Fills the rates log2(e_coarse / e_fine), stored on the finer row. Temporal
// rates on the finest Lx only and spatial rates on the finest Lt only unless
// full_grid is set; failed rows take no part.
void compute_rates(std::vector<ErrorRow>& rows, bool full_grid);

// Header Lx,Lt,h,dt,err_velocity,err_position,observed_rate_t,observed_rate_x,failed
// with empty fields for undefined rates.
void write_errors_csv(std::ostream& os, const std::vector<ErrorRow>& rows);
std::vector<ErrorRow> read_errors_csv(std::istream& is);

// Canonical JSON of the configuration (used for run.json and cache keys).
std::string study_config_json(const StudyConfig& config);
// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

// Runs (or loads from cache_dir) a single Eulerian cell.
Trajectory run_cell(const StudyConfig& config, int lx, int lt);
// Runs (or loads from cache_dir) the reference trajectory with time step dt.
Trajectory run_reference(const StudyConfig& config, double dt);

struct StudyResult {
  Trajectory reference;
  std::vector<ErrorRow> rows;  // sorted by (Lx, Lt)
  std::vector<Trajectory> trajectories;  // parallel to rows, empty when failed
};

// Runs every (Lx, Lt) cell against the reference. With out_dir set, writes
// trajectory_Lx{i}_Lt{j}.csv, errors.csv, reference.csv and run.json. `log`
// receives one progress line per cell.
StudyResult run_study(const StudyConfig& config, std::ostream* log = nullptr);

}  // namespace movcut
