#include "movcut/quadrature.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <map>
#include <mutex>

namespace movcut {

namespace {

// n-point Gauss-Legendre rule mapped to [0,1].
LineRule gauss_legendre(int n) {
  const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(n);
  std::vector<std::pair<double, double>> nodes;
  for (double x : zeros) {
    const double dp = boost::math::legendre_p_prime(n, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes.emplace_back(x, w);
    if (x != 0.0) nodes.emplace_back(-x, w);
  }
  std::sort(nodes.begin(), nodes.end());
  LineRule rule;
  for (const auto& [x, w] : nodes) {
    rule.points.push_back(0.5 * (x + 1.0));
    rule.weights.push_back(0.5 * w);
  }
  return rule;
}

std::mutex cache_mutex;

}  // namespace

const LineRule& line_rule(int order) {
  static std::map<int, LineRule> cache;
  const int n = std::max(1, (order + 2) / 2);
  std::lock_guard lock(cache_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
  return it->second;
}

const QuadratureRule& reference_triangle_rule(int order) {
  static std::map<int, QuadratureRule> cache;
  // The Duffy Jacobian (1-s) raises the degree in s by one.
  const int n = std::max(1, (order + 3) / 2);
  std::lock_guard lock(cache_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  const LineRule g = gauss_legendre(n);
  QuadratureRule rule;
  for (int i = 0; i < n; ++i) {
    const double s = g.points[i];
    for (int j = 0; j < n; ++j) {
      const double t = g.points[j];
      rule.points.emplace_back(s, t * (1.0 - s));
      rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - s));
    }
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

QuadratureRule map_triangle_rule(const QuadratureRule& ref, const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 e1 = b - a, e2 = c - a;
  const double jac = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
  QuadratureRule out;
  out.points.reserve(ref.size());
  out.weights.reserve(ref.size());
  for (std::size_t q = 0; q < ref.size(); ++q) {
    out.points.push_back(a + ref.points[q].x() * e1 + ref.points[q].y() * e2);
    out.weights.push_back(ref.weights[q] * jac);
  }
  return out;
}

}  // namespace movcut
