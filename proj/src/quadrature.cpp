#include "lqwidth/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lqwidth {

namespace {

// P_n(x) and P_n'(x) on [-1,1] by the three-term recurrence.
void legendre_with_derivative(std::size_t n, double x, double& p, double& dp) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (std::size_t k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

QuadratureRule gauss_legendre(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double p = 0.0;
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      legendre_with_derivative(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre_with_derivative(n, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1,1] -> [0,1]; weights halve so they sum to 1.
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

double legendre_orthonormal(unsigned k, double y) {
  const double x = 2.0 * y - 1.0;
  double p0 = 1.0;
  double p1 = x;
  double pk = k == 0 ? 1.0 : x;
  for (unsigned j = 2; j <= k; ++j) {
    pk = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / static_cast<double>(j);
    p0 = p1;
    p1 = pk;
  }
  return std::sqrt(2.0 * k + 1.0) * pk;
}

}  // namespace lqwidth
