#pragma once

#include <cstddef>
#include <vector>

namespace lqwidth {

/// Gauss-Legendre rule mapped to [0,1]; weights sum to 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

QuadratureRule gauss_legendre(std::size_t n);

/// Shifted Legendre polynomial of degree k, orthonormal on [0,1].
double legendre_orthonormal(unsigned k, double y);

}  // namespace lqwidth
