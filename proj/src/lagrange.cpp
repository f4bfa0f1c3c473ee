#include "movcut/lagrange.hpp"

#include <cmath>
#include <memory>
#include <mutex>

namespace movcut {

LagrangeBasis::LagrangeBasis(int degree) : degree_(degree) {
  if (degree < 0 || degree > 6) throw Error("LagrangeBasis: unsupported degree " + std::to_string(degree));
  const int k = degree;
  if (k == 0) {
    nodes_.emplace_back(1.0 / 3.0, 1.0 / 3.0);
  } else {
    const std::array<Vec2, 3> v = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    for (const auto& p : v) nodes_.push_back(p);
    for (int e = 0; e < 3; ++e) {
      const Vec2& a = v[e];
      const Vec2& b = v[(e + 1) % 3];
      for (int i = 1; i < k; ++i) nodes_.push_back(a + (b - a) * (static_cast<double>(i) / k));
    }
    for (int j = 1; j < k; ++j)
      for (int i = 1; i + j < k; ++i) nodes_.emplace_back(static_cast<double>(i) / k, static_cast<double>(j) / k);
  }

  for (int total = 0; total <= k; ++total)
    for (int b = 0; b <= total; ++b) exponents_.push_back({total - b, b});

  const int n = size();
  Eigen::MatrixXd vander(n, n);
  for (int i = 0; i < n; ++i)
    for (int m = 0; m < n; ++m)
      vander(i, m) = std::pow(nodes_[i].x(), exponents_[m][0]) * std::pow(nodes_[i].y(), exponents_[m][1]);
  // vander * coeffs = I  =>  phi_i(node_j) = delta_ij
  coeffs_ = vander.fullPivLu().solve(Eigen::MatrixXd::Identity(n, n));
}

Eigen::VectorXd LagrangeBasis::values(const Vec2& ref) const {
  const int n = size();
  Eigen::VectorXd mono(n);
  for (int m = 0; m < n; ++m) {
    double val = 1.0;
    for (int p = 0; p < exponents_[m][0]; ++p) val *= ref.x();
    for (int p = 0; p < exponents_[m][1]; ++p) val *= ref.y();
    mono[m] = val;
  }
  return coeffs_.transpose() * mono;
}

Eigen::Matrix<double, Eigen::Dynamic, 2> LagrangeBasis::gradients(const Vec2& ref) const {
  const int n = size();
  Eigen::Matrix<double, Eigen::Dynamic, 2> dmono(n, 2);
  auto ipow = [](double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
  };
  for (int m = 0; m < n; ++m) {
    const int a = exponents_[m][0], b = exponents_[m][1];
    dmono(m, 0) = a > 0 ? a * ipow(ref.x(), a - 1) * ipow(ref.y(), b) : 0.0;
    dmono(m, 1) = b > 0 ? b * ipow(ref.x(), a) * ipow(ref.y(), b - 1) : 0.0;
  }
  return coeffs_.transpose() * dmono;
}

const LagrangeBasis& LagrangeBasis::get(int degree) {
  static std::mutex mutex;
  static std::array<std::unique_ptr<LagrangeBasis>, 7> cache;
  if (degree < 0 || degree > 6) throw Error("LagrangeBasis: unsupported degree " + std::to_string(degree));
  std::lock_guard lock(mutex);
  if (!cache[degree]) cache[degree] = std::make_unique<LagrangeBasis>(degree);
  return *cache[degree];
}

AffineMap::AffineMap(const std::array<Vec2, 3>& c) : origin(c[0]) {
  jacobian.col(0) = c[1] - c[0];
  jacobian.col(1) = c[2] - c[0];
  det = jacobian.determinant();
  if (std::abs(det) < 1e-300) throw Error("degenerate triangle (zero area)");
  inverse = jacobian.inverse();
}

}  // namespace movcut
