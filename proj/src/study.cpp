#include "movcut/study.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace movcut {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(ReferenceMode m) { return m == ReferenceMode::kAle ? "ale" : "self"; }

ReferenceMode parse_reference_mode(const std::string& s) {
  if (s == "self") return ReferenceMode::kSelf;
  if (s == "ale") return ReferenceMode::kAle;
  throw Error("unknown reference mode '" + s + "' (expected ale or self)");
}

double StudyConfig::h(int level) const { return std::ldexp(h0, -level); }
double StudyConfig::dt(int level) const { return std::ldexp(dt0, -level); }

int StudyConfig::resolved_reference_lx() const {
  if (reference_lx >= 0) return reference_lx;
  return lx.empty() ? 0 : *std::max_element(lx.begin(), lx.end());
}

double StudyConfig::reference_dt() const {
  const int lt_max = lt.empty() ? 0 : *std::max_element(lt.begin(), lt.end());
  return dt(lt_max) / reference_dt_divisor;
}

void StudyConfig::validate() const {
  if (lx.empty() || lt.empty()) throw Error("StudyConfig: empty Lx or Lt list");
  for (int l : lx)
    if (l < 0 || l > 8) throw Error("StudyConfig: Lx out of range");
  for (int l : lt)
    if (l < 0 || l > 16) throw Error("StudyConfig: Lt out of range");
  if (!(h0 > 0.0) || !(dt0 > 0.0)) throw Error("StudyConfig: h0 and dt0 must be positive");
  if (reference_dt_divisor < 4) throw Error("StudyConfig: reference must be at least 4x finer in time");
  SchemeConfig probe = scheme;
  for (int l : lt) {
    probe.dt = dt(l);
    probe.validate();
  }
}

std::pair<double, double> spacetime_error(const Trajectory& traj, const Trajectory& ref) {
  if (traj.rows.empty() || ref.rows.empty()) throw Error("spacetime_error: empty trajectory");
  if (std::abs(traj.t_end() - ref.t_end()) > 1e-9 * std::max(1.0, ref.t_end()))
    throw Error("spacetime_error: mismatched horizons");
  double ev = 0.0, ep = 0.0;
  for (std::size_t n = 1; n < traj.rows.size(); ++n) {
    const TrajectoryRow& r = traj.rows[n];
    const double dt = r.t - traj.rows[n - 1].t;
    ev += dt * (ref.xi_at(r.t) - r.xi).squaredNorm();
    ep += dt * (ref.center_at(r.t) - r.center).squaredNorm();
  }
  return {std::sqrt(ev), std::sqrt(ep)};
}

void compute_rates(std::vector<ErrorRow>& rows, bool full_grid) {
  std::map<std::pair<int, int>, ErrorRow*> cell;
  int lx_max = 0, lt_max = 0;
  for (ErrorRow& r : rows) {
    r.observed_rate_t.reset();
    r.observed_rate_x.reset();
    cell[{r.Lx, r.Lt}] = &r;
    lx_max = std::max(lx_max, r.Lx);
    lt_max = std::max(lt_max, r.Lt);
  }
  auto rate = [](const ErrorRow* coarse, const ErrorRow* fine) -> std::optional<double> {
    if (!coarse || !fine || coarse->failed || fine->failed) return std::nullopt;
    if (!(coarse->err_velocity > 0.0) || !(fine->err_velocity > 0.0)) return std::nullopt;
    return std::log2(coarse->err_velocity / fine->err_velocity);
  };
  // Previous level present in the map along one direction.
  for (auto& [key, fine] : cell) {
    const auto [lx, lt] = key;
    if (full_grid || lx == lx_max) {
      const ErrorRow* coarse = nullptr;
      for (auto& [k2, r2] : cell)
        if (k2.first == lx && k2.second < lt) coarse = r2;
      fine->observed_rate_t = rate(coarse, fine);
    }
    if (full_grid || lt == lt_max) {
      const ErrorRow* coarse = nullptr;
      for (auto& [k2, r2] : cell)
        if (k2.second == lt && k2.first < lx) coarse = r2;
      fine->observed_rate_x = rate(coarse, fine);
    }
  }
}

void write_errors_csv(std::ostream& os, const std::vector<ErrorRow>& rows) {
  os << "Lx,Lt,h,dt,err_velocity,err_position,observed_rate_t,observed_rate_x,failed\n";
  os << std::setprecision(17);
  auto opt = [&](const std::optional<double>& v) {
    if (v) os << *v;
  };
  for (const ErrorRow& r : rows) {
    os << r.Lx << ',' << r.Lt << ',' << r.h << ',' << r.dt << ',';
    if (r.failed)
      os << "nan,nan,";
    else
      os << r.err_velocity << ',' << r.err_position << ',';
    opt(r.observed_rate_t);
    os << ',';
    opt(r.observed_rate_x);
    os << ',' << (r.failed ? 1 : 0) << '\n';
  }
}

std::vector<ErrorRow> read_errors_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("Lx,Lt,h,dt,err_velocity,err_position", 0) != 0)
    throw Error("read_errors_csv: bad header");
  std::vector<ErrorRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 9) throw Error("read_errors_csv: expected 9 fields in '" + line + "'");
    ErrorRow r;
    r.Lx = std::stoi(f[0]);
    r.Lt = std::stoi(f[1]);
    r.h = std::stod(f[2]);
    r.dt = std::stod(f[3]);
    r.err_velocity = std::stod(f[4]);
    r.err_position = std::stod(f[5]);
    if (!f[6].empty()) r.observed_rate_t = std::stod(f[6]);
    if (!f[7].empty()) r.observed_rate_x = std::stod(f[7]);
    r.failed = f[8] == "1";
    rows.push_back(r);
  }
  return rows;
}

namespace {

json scheme_json(const SchemeConfig& s) {
  return json{{"k", s.k},
              {"dt", s.dt},
              {"t_end", s.t_end},
              {"scheme", to_string(s.scheme)},
              {"bc", to_string(s.bc)},
              {"gravity", {s.gravity.x(), s.gravity.y()}},
              {"c_delta_h", s.c_delta_h},
              {"gamma_s", s.gamma_s},
              {"gamma_lambda", s.gamma_lambda},
              {"nitsche_penalty_coefficient", s.nitsche_penalty_coefficient},
              {"aitken_tol", s.aitken_tol},
              {"aitken_max_iters", s.aitken_max_iters},
              {"initial",
               {{"center", {s.initial.center.x(), s.initial.center.y()}},
                {"radius", s.initial.radius},
                {"xi", {s.initial.xi.x(), s.initial.xi.y()}}}}};
}

SchemeConfig cell_scheme(const StudyConfig& config, int lt) {
  SchemeConfig s = config.scheme;
  s.dt = config.dt(lt);
  return s;
}

SchemeConfig self_reference_scheme(const StudyConfig& config, double dt) {
  SchemeConfig s = config.scheme;
  s.dt = dt;
  s.scheme = TimeScheme::kBDF2;
  s.bc = BoundaryMethod::kLagrange;
  s.c_delta_h = SchemeConfig::default_c_delta(TimeScheme::kBDF2);
  return s;
}

AleConfig ale_reference_config(const StudyConfig& config, double dt) {
  AleConfig a;
  a.degree = config.ale_degree;
  a.n_circle = config.ale_n_circle;
  a.dt = dt;
  a.t_end = config.scheme.t_end;
  a.scheme = TimeScheme::kBDF2;
  a.gravity = config.scheme.gravity;
  a.aitken_tol = config.scheme.aitken_tol;
  a.aitken_max_iters = config.scheme.aitken_max_iters;
  a.initial = config.scheme.initial;
  return a;
}

json reference_json(const StudyConfig& config, double dt) {
  if (config.reference == ReferenceMode::kAle) {
    const AleConfig a = ale_reference_config(config, dt);
    return json{{"mode", "ale"},
                {"degree", a.degree},
                {"n_circle", a.n_circle},
                {"dt", a.dt},
                {"t_end", a.t_end},
                {"scheme", to_string(a.scheme)},
                {"gravity", {a.gravity.x(), a.gravity.y()}},
                {"aitken_tol", a.aitken_tol},
                {"aitken_max_iters", a.aitken_max_iters}};
  }
  const int lx = config.resolved_reference_lx();
  return json{{"mode", "self"}, {"h", config.h(lx)}, {"scheme_config", scheme_json(self_reference_scheme(config, dt))}};
}

// Loads `name` from the cache or computes and stores it.
template <class F>
Trajectory cached(const std::string& cache_dir, const std::string& kind, const json& key, F&& compute) {
  if (cache_dir.empty()) return compute();
  const fs::path path = fs::path(cache_dir) / (kind + "_" + fnv1a_hex(key.dump()) + ".csv");
  if (fs::exists(path)) return read_trajectory_csv(path.string());
  Trajectory traj = compute();
  fs::create_directories(cache_dir);
  const fs::path tmp = path.string() + ".tmp";
  write_trajectory_csv(tmp.string(), traj);
  fs::rename(tmp, path);
  std::ofstream(path.string() + ".json") << key.dump(2) << '\n';
  return traj;
}

}  // namespace

std::string study_config_json(const StudyConfig& config) {
  json j{{"h0", config.h0},
         {"lx", config.lx},
         {"dt0", config.dt0},
         {"lt", config.lt},
         {"scheme_config", scheme_json(config.scheme)},
         {"reference", to_string(config.reference)},
         {"reference_lx", config.resolved_reference_lx()},
         {"reference_dt_divisor", config.reference_dt_divisor},
         {"reference_dt", config.reference_dt()},
         {"ale_degree", config.ale_degree},
         {"ale_n_circle", config.ale_n_circle},
         {"full_grid_rates", config.full_grid_rates},
         {"out_dir", config.out_dir}};
  return j.dump(2);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Trajectory run_cell(const StudyConfig& config, int lx, int lt) {
  const SchemeConfig s = cell_scheme(config, lt);
  const json key{{"h", config.h(lx)}, {"scheme_config", scheme_json(s)}};
  return cached(config.cache_dir, "cell", key, [&] {
    const BackgroundMesh mesh = build_structured_mesh(config.h(lx));
    return Stepper(mesh, s).run();
  });
}

Trajectory run_reference(const StudyConfig& config, double dt) {
  return cached(config.cache_dir, "reference", reference_json(config, dt), [&] {
    if (config.reference == ReferenceMode::kAle) return AleSolver(ale_reference_config(config, dt)).run();
    const BackgroundMesh mesh = build_structured_mesh(config.h(config.resolved_reference_lx()));
    return Stepper(mesh, self_reference_scheme(config, dt)).run();
  });
}

StudyResult run_study(const StudyConfig& config, std::ostream* log) {
  config.validate();
  StudyResult result;
  if (log) *log << "reference (" << to_string(config.reference) << ", dt = " << config.reference_dt() << ")\n";
  result.reference = run_reference(config, config.reference_dt());

  std::vector<int> lxs = config.lx, lts = config.lt;
  std::sort(lxs.begin(), lxs.end());
  lxs.erase(std::unique(lxs.begin(), lxs.end()), lxs.end());
  std::sort(lts.begin(), lts.end());
  lts.erase(std::unique(lts.begin(), lts.end()), lts.end());
  for (int lx : lxs)
    for (int lt : lts) {
      ErrorRow row;
      row.Lx = lx;
      row.Lt = lt;
      row.h = config.h(lx);
      row.dt = config.dt(lt);
      Trajectory traj;
      try {
        traj = run_cell(config, lx, lt);
        std::tie(row.err_velocity, row.err_position) = spacetime_error(traj, result.reference);
      } catch (const Error& e) {
        row.failed = true;
        row.message = e.what();
        traj = Trajectory{};
      }
      if (log) {
        *log << "Lx=" << lx << " Lt=" << lt << ": ";
        if (row.failed)
          *log << "FAILED (" << row.message << ")\n";
        else
          *log << "err_velocity=" << row.err_velocity << " err_position=" << row.err_position << '\n';
      }
      result.rows.push_back(row);
      result.trajectories.push_back(std::move(traj));
    }
  compute_rates(result.rows, config.full_grid_rates);

  if (!config.out_dir.empty()) {
    const fs::path out(config.out_dir);
    fs::create_directories(out);
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
      if (result.rows[i].failed) continue;
      const std::string name =
          "trajectory_Lx" + std::to_string(result.rows[i].Lx) + "_Lt" + std::to_string(result.rows[i].Lt) + ".csv";
      write_trajectory_csv((out / name).string(), result.trajectories[i]);
    }
    std::ofstream errors(out / "errors.csv");
    write_errors_csv(errors, result.rows);
    write_trajectory_csv((out / "reference.csv").string(), result.reference);
    json run = json::parse(study_config_json(config));
    run["reference_config"] = reference_json(config, config.reference_dt());
    json failures = json::array();
    for (const ErrorRow& r : result.rows)
      if (r.failed) failures.push_back({{"Lx", r.Lx}, {"Lt", r.Lt}, {"message", r.message}});
    run["failures"] = failures;
    std::ofstream(out / "run.json") << run.dump(2) << '\n';
  }
  return result;
}

}  // namespace movcut
