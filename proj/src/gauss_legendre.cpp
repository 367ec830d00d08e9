#include "ntsopt/gauss_legendre.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace ntsopt {

namespace {

// Legendre P_n and P_n' at x via the three-term recurrence.
std::pair<double, double> legendre_with_deriv(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  double deriv = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, deriv};
}

GaussLegendreRule compute_rule(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi-style initial guess for the i-th root (descending order).
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p, dp;
    for (int iter = 0; iter < 100; ++iter) {
      std::tie(p, dp) = legendre_with_deriv(n, x);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    std::tie(p, dp) = legendre_with_deriv(n, x);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[n - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) {
    rule.nodes[n / 2] = 0.0;
    auto [p, dp] = legendre_with_deriv(n, 0.0);
    rule.weights[n / 2] = 2.0 / (dp * dp);
  }
  return rule;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  static std::mutex mutex;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

}  // namespace ntsopt
